//! Random forest: bagged CART trees split on Gini impurity.
//!
//! Each tree bootstraps the training rows, samples `mtry` candidate features
//! per node, and grows until leaves are pure or unsplittable. A tree votes
//! the majority class of its leaf; the model score is the fraction of trees
//! voting class 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::LabeledDataset;
use crate::float::{cast, Float};
use crate::learners::tree::{eval_tree, midpoint, ColumnSet, Node, SortedColumns};
use crate::learners::{ForestParams, LearnerError};
use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub struct ForestModel<F> {
    trees: Vec<Vec<Node<F>>>,
    dim: usize,
}

impl<F: Float> ForestModel<F> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub(crate) fn score_row(&self, x: &[F]) -> F {
        let votes: F = self.trees.iter().map(|t| eval_tree(t, x)).sum();
        votes / cast::<F>(self.trees.len() as f64)
    }

    /// Batch scoring, tree-major so each tree stays cache-resident while the
    /// rows stream through it. Accumulation order per row matches
    /// `score_row`.
    pub(crate) fn score_into(&self, features: &Matrix<F>, out: &mut [F]) {
        out.fill(F::zero());
        for tree in &self.trees {
            for (o, row) in out.iter_mut().zip(features.iter_rows()) {
                *o = *o + eval_tree(tree, row);
            }
        }
        let k = cast::<F>(self.trees.len() as f64);
        for o in out {
            *o = *o / k;
        }
    }
}

struct Task {
    node: usize,
    lo: usize,
    hi: usize,
    w0: u64,
    w1: u64,
}

struct SplitChoice<F> {
    feature: usize,
    threshold: F,
    /// Sorted rank of the boundary within the feature's segment; rows below
    /// it go left.
    left_len: usize,
    left: (u64, u64),
}

/// Per-fit scratch shared by all trees: packed label-and-weight words and
/// the feature sampling buffers.
struct Scratch {
    /// `(bootstrap_weight << 1) | label` per row, rebuilt per tree.
    lw: Vec<u32>,
    picks: Vec<usize>,
    pool: Vec<usize>,
    rest: Vec<usize>,
}

pub(crate) fn fit<F: Float>(
    train: &LabeledDataset<F>,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel<F>, LearnerError> {
    let n = train.n();
    let d = train.dim();
    let mtry = params.mtry.unwrap_or((d as f64).sqrt().floor() as usize).clamp(1, d);
    let sorted = SortedColumns::build(train.features());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = vec![0u32; n];
    let mut cols = ColumnSet::filtered(&sorted, n, |_| false);
    let mut scratch = Scratch {
        lw: vec![0; n],
        picks: Vec::with_capacity(d),
        pool: (0..d).collect(),
        rest: Vec::with_capacity(d),
    };
    let mut trees = Vec::with_capacity(params.trees);
    for _ in 0..params.trees {
        if params.bootstrap {
            weights.iter_mut().for_each(|w| *w = 0);
            for _ in 0..n {
                weights[rng.random_range(0..n)] += 1;
            }
        } else {
            weights.iter_mut().for_each(|w| *w = 1);
        }
        for (i, (&w, &label)) in weights.iter().zip(train.labels()).enumerate() {
            scratch.lw[i] = (w << 1) | u32::from(label);
        }
        cols.refill(&sorted, |r| weights[r as usize] > 0);
        trees.push(grow_tree(&sorted, &mut cols, &mut scratch, d, mtry, &mut rng));
    }
    Ok(ForestModel { trees, dim: d })
}

fn grow_tree<F: Float>(
    sorted: &SortedColumns<F>,
    cols: &mut ColumnSet,
    scratch: &mut Scratch,
    d: usize,
    mtry: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Node<F>> {
    let lw = &scratch.lw;
    let (mut w0, mut w1) = (0u64, 0u64);
    for &r in cols.segment(0, 0, cols.len()) {
        let e = lw[r as usize];
        let w = u64::from(e >> 1);
        let lab = u64::from(e & 1);
        w1 += w * lab;
        w0 += w * (1 - lab);
    }
    let mut nodes = vec![Node::Leaf { value: F::zero() }];
    let mut stack = vec![Task { node: 0, lo: 0, hi: cols.len(), w0, w1 }];
    while let Some(t) = stack.pop() {
        let choice = if t.w0 == 0 || t.w1 == 0 || t.hi - t.lo < 2 {
            None
        } else {
            sample_features(rng, d, mtry, &mut scratch.pool, &mut scratch.picks);
            best_split(sorted, lw, cols, t.lo, t.hi, t.w0, t.w1, &scratch.picks).or_else(|| {
                // sampled features were constant here; fall back to the
                // rest so impure nodes still split whenever possible
                scratch.rest.clear();
                scratch.rest.extend((0..d).filter(|f| !scratch.picks.contains(f)));
                best_split(sorted, lw, cols, t.lo, t.hi, t.w0, t.w1, &scratch.rest)
            })
        };
        match choice {
            None => {
                nodes[t.node] = Node::Leaf { value: leaf_vote(t.w0, t.w1) };
            }
            Some(c) => {
                let mid = cols.split_ranked(c.feature, t.lo, t.hi, c.left_len);
                let li = nodes.len();
                nodes.push(Node::Leaf { value: F::zero() });
                let ri = nodes.len();
                nodes.push(Node::Leaf { value: F::zero() });
                nodes[t.node] = Node::Split {
                    feature: c.feature as u32,
                    threshold: c.threshold,
                    left: li as u32,
                    right: ri as u32,
                };
                let (l0, l1) = c.left;
                stack.push(Task { node: ri, lo: mid, hi: t.hi, w0: t.w0 - l0, w1: t.w1 - l1 });
                stack.push(Task { node: li, lo: t.lo, hi: mid, w0: l0, w1: l1 });
            }
        }
    }
    nodes
}

fn leaf_vote<F: Float>(w0: u64, w1: u64) -> F {
    if w1 > w0 {
        F::one()
    } else {
        F::zero()
    }
}

/// Distinct feature indices in ascending order, via partial Fisher-Yates.
fn sample_features(
    rng: &mut ChaCha8Rng,
    d: usize,
    mtry: usize,
    pool: &mut [usize],
    out: &mut Vec<usize>,
) {
    out.clear();
    if mtry >= d {
        out.extend(0..d);
        return;
    }
    for (i, f) in pool.iter_mut().enumerate() {
        *f = i;
    }
    for i in 0..mtry {
        let j = rng.random_range(i..d);
        pool.swap(i, j);
        out.push(pool[i]);
    }
    out.sort_unstable();
}

/// Best weighted-Gini split over `candidates`, scanning each column segment
/// in sorted order. Ties keep the first candidate found (lowest feature
/// index, then leftmost boundary), which pins tree shape for a given seed.
fn best_split<F: Float>(
    sorted: &SortedColumns<F>,
    lw: &[u32],
    cols: &ColumnSet,
    lo: usize,
    hi: usize,
    w0: u64,
    w1: u64,
    candidates: &[usize],
) -> Option<SplitChoice<F>> {
    let total = w0 + w1;
    let mut best_crit = f64::NEG_INFINITY;
    let mut best: Option<SplitChoice<F>> = None;
    for &f in candidates {
        let seg = cols.segment(f, lo, hi);
        let (mut w0l, mut w1l) = (0u64, 0u64);
        let mut prev = sorted.value(f, seg[0]);
        for (i, &r) in seg.iter().enumerate() {
            let row = r as usize;
            let v = sorted.value(f, r);
            if v > prev {
                let wl = w0l + w1l;
                let wr = total - wl;
                // minimizing weighted child Gini is maximizing
                // sum of squared class weights over child weight
                let sl = (w0l * w0l + w1l * w1l) as f64 / wl as f64;
                let (r0, r1) = (w0 - w0l, w1 - w1l);
                let sr = (r0 * r0 + r1 * r1) as f64 / wr as f64;
                let crit = sl + sr;
                if crit > best_crit {
                    best_crit = crit;
                    best = Some(SplitChoice {
                        feature: f,
                        threshold: midpoint(prev, v),
                        left_len: i,
                        left: (w0l, w1l),
                    });
                }
            }
            let e = lw[row];
            let w = u64::from(e >> 1);
            let lab = u64::from(e & 1);
            w1l += w * lab;
            w0l += w * (1 - lab);
            prev = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn blob_dataset(n_per: usize, seed: u64) -> LabeledDataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::new(2);
        let mut labels = Vec::new();
        for (cx, label) in [(-2.0, 0u8), (2.0, 1)] {
            for _ in 0..n_per {
                m.push_row(&[cx + rng.random::<f64>(), rng.random::<f64>()]);
                labels.push(label);
            }
        }
        LabeledDataset::new(m, labels).unwrap()
    }

    fn params(trees: usize, bootstrap: bool) -> ForestParams {
        ForestParams { trees, mtry: None, bootstrap }
    }

    #[test]
    fn separable_blobs_score_cleanly() {
        let ds = blob_dataset(40, 11);
        let model = fit(&ds, &params(50, true), 3).unwrap();
        let mut correct = 0;
        for i in 0..ds.n() {
            let pred = u8::from(model.score_row(ds.row(i)) > 0.5);
            correct += usize::from(pred == ds.labels()[i]);
        }
        assert!(correct as f64 / ds.n() as f64 >= 0.95);
    }

    #[test]
    fn without_bootstrap_trees_interpolate_training_data() {
        let ds = blob_dataset(30, 19);
        let model = fit(&ds, &params(20, false), 3).unwrap();
        for i in 0..ds.n() {
            let s = model.score_row(ds.row(i));
            assert_eq!(s, f64::from(ds.labels()[i]), "row {i}");
        }
    }

    #[test]
    fn single_class_data_gives_constant_score() {
        let mut m = Matrix::new(1);
        for v in [1.0, 2.0, 3.0, 4.0] {
            m.push_row(&[v]);
        }
        let ds = LabeledDataset::new(m, vec![1, 1, 1, 1]).unwrap();
        let model = fit(&ds, &params(10, true), 7).unwrap();
        assert_eq!(model.score_row(&[2.5]), 1.0);
    }

    #[test]
    fn same_seed_reproduces_scores_exactly() {
        let ds = blob_dataset(25, 23);
        let a = fit(&ds, &params(15, true), 42).unwrap();
        let b = fit(&ds, &params(15, true), 42).unwrap();
        let c = fit(&ds, &params(15, true), 43).unwrap();
        let probe = [0.3, 0.4];
        assert_eq!(a.score_row(&probe), b.score_row(&probe));
        let mut any_diff = false;
        for i in 0..ds.n() {
            any_diff |= a.score_row(ds.row(i)) != c.score_row(ds.row(i));
        }
        assert!(any_diff, "different seeds should bootstrap differently");
    }

    #[test]
    fn training_scores_survive_monotone_feature_transforms() {
        let ds = blob_dataset(20, 31);
        let mut warped = Matrix::new(2);
        for i in 0..ds.n() {
            let r = ds.row(i);
            warped.push_row(&[r[0] * r[0] * r[0], r[1].exp()]);
        }
        let warped_ds = LabeledDataset::new(warped, ds.labels().to_vec()).unwrap();
        let a = fit(&ds, &params(12, true), 5).unwrap();
        let b = fit(&warped_ds, &params(12, true), 5).unwrap();
        for i in 0..ds.n() {
            assert_eq!(a.score_row(ds.row(i)), b.score_row(warped_ds.row(i)), "row {i}");
        }
    }
}

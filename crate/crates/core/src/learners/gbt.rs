//! Gradient-boosted trees with second-order logistic loss.
//!
//! Each round fits a depth-capped regression tree to the gradient/hessian
//! pairs of the current margin, with leaf weight -G/(H+lambda) and split
//! gain 0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)); only strictly
//! positive gains split. The score is the sigmoid of the shrunken sum of
//! leaf values. Training is deterministic: no row or column subsampling.

use crate::dataset::LabeledDataset;
use crate::float::{cast, Float};
use crate::learners::tree::{eval_tree, midpoint, ColumnSet, Node, SortedColumns};
use crate::learners::{sigmoid, GbtParams, LearnerError};
use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub struct GbtModel<F> {
    trees: Vec<Vec<Node<F>>>,
    learning_rate: F,
    dim: usize,
}

impl<F: Float> GbtModel<F> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rounds(&self) -> usize {
        self.trees.len()
    }

    pub(crate) fn score_row(&self, x: &[F]) -> F {
        let margin: F = self.trees.iter().map(|t| eval_tree(t, x)).sum();
        sigmoid(self.learning_rate * margin)
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
        for o in out {
            *o = sigmoid(self.learning_rate * *o);
        }
    }
}

struct Task<F> {
    node: usize,
    lo: usize,
    hi: usize,
    grad: F,
    hess: F,
    depth: usize,
}

struct SplitChoice<F> {
    feature: usize,
    threshold: F,
    /// Sorted rank of the boundary within the feature's segment; rows below
    /// it go left.
    left_len: usize,
    left: (F, F),
}

pub(crate) fn fit<F: Float>(
    train: &LabeledDataset<F>,
    params: &GbtParams,
    _seed: u64,
) -> Result<GbtModel<F>, LearnerError> {
    let n = train.n();
    let labels = train.labels();
    let sorted = SortedColumns::build(train.features());
    let lr = cast::<F>(params.learning_rate);
    let mut margin = vec![F::zero(); n];
    let mut gh = vec![[F::zero(); 2]; n];
    let mut cols = ColumnSet::filtered(&sorted, n, |_| false);
    let mut trees = Vec::with_capacity(params.rounds);
    for round in 1..=params.rounds {
        let mut loss = F::zero();
        for i in 0..n {
            let z = margin[i];
            let p = sigmoid(z);
            let y = cast::<F>(f64::from(labels[i]));
            gh[i] = [p - y, p * (F::one() - p)];
            loss = loss + z.max(F::zero()) + (-z.abs()).exp().ln_1p() - y * z;
        }
        if !loss.is_finite() {
            return Err(LearnerError::NonFiniteLoss { at: round });
        }
        cols.refill(&sorted, |_| true);
        let tree = grow_tree(&sorted, &mut cols, &gh, params, lr, &mut margin);
        trees.push(tree);
    }
    Ok(GbtModel { trees, learning_rate: lr, dim: train.dim() })
}

fn grow_tree<F: Float>(
    sorted: &SortedColumns<F>,
    cols: &mut ColumnSet,
    gh: &[[F; 2]],
    params: &GbtParams,
    lr: F,
    margin: &mut [F],
) -> Vec<Node<F>> {
    let n = cols.len();
    let lambda = cast::<F>(params.lambda);
    let mcw = cast::<F>(params.min_child_weight);
    let (mut g, mut h) = (F::zero(), F::zero());
    for pair in gh {
        g = g + pair[0];
        h = h + pair[1];
    }
    let mut nodes = vec![Node::Leaf { value: F::zero() }];
    let mut stack = vec![Task { node: 0, lo: 0, hi: n, grad: g, hess: h, depth: 0 }];
    while let Some(t) = stack.pop() {
        let choice = if t.depth < params.max_depth && t.hi - t.lo >= 2 {
            best_split(sorted, gh, cols, &t, lambda, mcw)
        } else {
            None
        };
        match choice {
            None => {
                let value = -t.grad / (t.hess + lambda);
                nodes[t.node] = Node::Leaf { value };
                for &r in cols.segment(0, t.lo, t.hi) {
                    margin[r as usize] = margin[r as usize] + lr * value;
                }
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
                let (gl, hl) = c.left;
                stack.push(Task {
                    node: ri,
                    lo: mid,
                    hi: t.hi,
                    grad: t.grad - gl,
                    hess: t.hess - hl,
                    depth: t.depth + 1,
                });
                stack.push(Task {
                    node: li,
                    lo: t.lo,
                    hi: mid,
                    grad: gl,
                    hess: hl,
                    depth: t.depth + 1,
                });
            }
        }
    }
    nodes
}

fn best_split<F: Float>(
    sorted: &SortedColumns<F>,
    gh: &[[F; 2]],
    cols: &ColumnSet,
    t: &Task<F>,
    lambda: F,
    mcw: F,
) -> Option<SplitChoice<F>> {
    let half = cast::<F>(0.5);
    let parent = t.grad * t.grad / (t.hess + lambda);
    let mut best_gain = F::zero();
    let mut best: Option<SplitChoice<F>> = None;
    for f in 0..cols.n_features() {
        let seg = cols.segment(f, t.lo, t.hi);
        let (mut gl, mut hl) = (F::zero(), F::zero());
        let mut prev = sorted.value(f, seg[0]);
        for (i, &r) in seg.iter().enumerate() {
            let row = r as usize;
            let v = sorted.value(f, r);
            if v > prev {
                let (gr, hr) = (t.grad - gl, t.hess - hl);
                if hl >= mcw && hr >= mcw {
                    let gain =
                        half * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
                    if gain > best_gain {
                        best_gain = gain;
                        best = Some(SplitChoice {
                            feature: f,
                            threshold: midpoint(prev, v),
                            left_len: i,
                            left: (gl, hl),
                        });
                    }
                }
            }
            let pair = gh[row];
            gl = gl + pair[0];
            hl = hl + pair[1];
            prev = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn step_dataset() -> LabeledDataset<f64> {
        let mut m = Matrix::new(1);
        for v in [0.0, 1.0, 2.0, 3.0] {
            m.push_row(&[v]);
        }
        LabeledDataset::new(m, vec![0, 0, 1, 1]).unwrap()
    }

    #[test]
    fn single_round_matches_hand_computation() {
        // At margin 0: g = +-0.5, h = 0.25 per point. The only positive-gain
        // split is between x=1 and x=2, with leaf weights -+(1.0/1.5).
        let params = GbtParams { rounds: 1, min_child_weight: 0.25, ..GbtParams::default() };
        let model = fit(&step_dataset(), &params, 0).unwrap();
        let expect_low = sigmoid(0.3 * (-2.0 / 3.0));
        let expect_high = sigmoid(0.3 * (2.0 / 3.0));
        assert!((model.score_row(&[0.5]) - expect_low).abs() <= 1e-12);
        assert!((model.score_row(&[2.5]) - expect_high).abs() <= 1e-12);
    }

    #[test]
    fn min_child_weight_can_block_all_splits() {
        // Total hessian is 1.0, so children of any split fall below the
        // default min_child_weight of 1 and the tree stays a single leaf
        // whose weight is zero on balanced labels.
        let model = fit(&step_dataset(), &GbtParams::default(), 0).unwrap();
        assert_eq!(model.score_row(&[0.5]), 0.5);
        assert_eq!(model.score_row(&[2.5]), 0.5);
    }

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

    #[test]
    fn separable_blobs_reach_full_training_accuracy() {
        let ds = blob_dataset(40, 3);
        let model = fit(&ds, &GbtParams::default(), 0).unwrap();
        for i in 0..ds.n() {
            let pred = u8::from(model.score_row(ds.row(i)) > 0.5);
            assert_eq!(pred, ds.labels()[i], "row {i}");
        }
    }

    #[test]
    fn learns_xor_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut m = Matrix::new(2);
        let mut labels = Vec::new();
        for (cx, cy, label) in
            [(1.0, 1.0, 0u8), (-1.0, -1.0, 0), (1.0, -1.0, 1), (-1.0, 1.0, 1)]
        {
            for _ in 0..50 {
                m.push_row(&[cx + 0.2 * rng.random::<f64>(), cy + 0.2 * rng.random::<f64>()]);
                labels.push(label);
            }
        }
        let ds = LabeledDataset::new(m, labels).unwrap();
        let model = fit(&ds, &GbtParams::default(), 0).unwrap();
        let mut correct = 0;
        for i in 0..ds.n() {
            correct += usize::from(
                u8::from(model.score_row(ds.row(i)) > 0.5) == ds.labels()[i],
            );
        }
        assert!(correct as f64 / ds.n() as f64 >= 0.95);
    }

    #[test]
    fn training_scores_survive_monotone_feature_transforms() {
        let ds = blob_dataset(25, 17);
        let mut warped = Matrix::new(2);
        for i in 0..ds.n() {
            let r = ds.row(i);
            warped.push_row(&[r[0] * r[0] * r[0], r[1].exp()]);
        }
        let warped_ds = LabeledDataset::new(warped, ds.labels().to_vec()).unwrap();
        let a = fit(&ds, &GbtParams::default(), 0).unwrap();
        let b = fit(&warped_ds, &GbtParams::default(), 0).unwrap();
        for i in 0..ds.n() {
            assert_eq!(a.score_row(ds.row(i)), b.score_row(warped_ds.row(i)), "row {i}");
        }
    }
}

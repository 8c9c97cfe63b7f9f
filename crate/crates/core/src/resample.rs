//! Training-set rebalancing: random undersampling, random oversampling,
//! synthetic minority interpolation, and the hybrid of the two.
//!
//! Class 0 is the minority and class 1 the majority throughout (the
//! generators emit n1 >= n0). Row order is stable: surviving input rows keep
//! their relative order and synthetic or duplicated rows append at the end,
//! so a seed pins the output row for row.

use rand::Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::dataset::LabeledDataset;
use crate::float::{cast, Float};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleKind {
    Original,
    Under,
    Smote,
    Hybrid,
}

impl ResampleKind {
    pub const ALL: [ResampleKind; 4] =
        [ResampleKind::Original, ResampleKind::Under, ResampleKind::Smote, ResampleKind::Hybrid];

    pub fn tag(&self) -> &'static str {
        match self {
            ResampleKind::Original => "original",
            ResampleKind::Under => "under",
            ResampleKind::Smote => "smote",
            ResampleKind::Hybrid => "hybrid",
        }
    }
}

/// How the interpolation coefficient is drawn for each synthetic point:
/// one scalar per point keeps the point on the segment to its neighbor,
/// one draw per coordinate samples the axis-aligned rectangle instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    ScalarPerPoint,
    PerCoordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteParams {
    pub k_neighbors: usize,
    pub gap_mode: GapMode,
}

impl Default for SmoteParams {
    fn default() -> Self {
        SmoteParams { k_neighbors: 5, gap_mode: GapMode::ScalarPerPoint }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ResampleError {
    #[error("class {label} is empty")]
    EmptyClass { label: u8 },
    #[error("minority class has {count} point(s); at least 2 are needed to interpolate")]
    DegenerateMinority { count: usize },
    #[error("target {target} is below the minority count {minority}")]
    TargetTooSmall { target: usize, minority: usize },
    #[error("majority class ({n1}) is smaller than minority class ({n0})")]
    ImbalanceInverted { n0: usize, n1: usize },
}

/// Neighbor count actually used: requested K, clamped to the largest
/// feasible value when the minority class is too small. The harness compares
/// this against the request to surface a clamp warning.
pub fn effective_k(k_neighbors: usize, minority_count: usize) -> usize {
    k_neighbors.min(minority_count.saturating_sub(1)).max(1)
}

fn class_sizes(ds: &LabeledDataset<impl Float>) -> Result<(usize, usize), ResampleError> {
    let (n0, n1) = (ds.class_count(0), ds.class_count(1));
    if n0 == 0 {
        return Err(ResampleError::EmptyClass { label: 0 });
    }
    if n1 == 0 {
        return Err(ResampleError::EmptyClass { label: 1 });
    }
    if n1 < n0 {
        return Err(ResampleError::ImbalanceInverted { n0, n1 });
    }
    Ok((n0, n1))
}

/// `k` distinct picks from `pool`, by partial Fisher-Yates; ascending.
fn choose_without_replacement<R: Rng + ?Sized>(
    pool: &mut Vec<usize>,
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    for t in 0..k {
        let j = rng.random_range(t..pool.len());
        pool.swap(t, j);
    }
    let mut picked = pool[..k].to_vec();
    picked.sort_unstable();
    picked
}

fn keep_rows<F: Float>(ds: &LabeledDataset<F>, keep: impl Fn(usize) -> bool) -> LabeledDataset<F> {
    let mut out = LabeledDataset::with_dim(ds.dim());
    for i in 0..ds.n() {
        if keep(i) {
            out.push(ds.row(i), ds.labels()[i]);
        }
    }
    out
}

/// Removes majority rows uniformly without replacement until the classes
/// balance at the minority count.
pub fn undersample<F: Float, R: Rng + ?Sized>(
    ds: &LabeledDataset<F>,
    rng: &mut R,
) -> Result<LabeledDataset<F>, ResampleError> {
    let (n0, _) = class_sizes(ds)?;
    Ok(undersample_to(ds, n0, rng))
}

fn undersample_to<F: Float, R: Rng + ?Sized>(
    ds: &LabeledDataset<F>,
    target_majority: usize,
    rng: &mut R,
) -> LabeledDataset<F> {
    let mut majority = ds.class_indices(1);
    let picked = choose_without_replacement(&mut majority, target_majority, rng);
    let mut kept = vec![false; ds.n()];
    for i in ds.class_indices(0) {
        kept[i] = true;
    }
    for i in picked {
        kept[i] = true;
    }
    keep_rows(ds, |i| kept[i])
}

/// Duplicates uniformly drawn minority rows (with replacement) until the
/// classes balance at the majority count; copies append after the input
/// rows.
pub fn oversample_random<F: Float, R: Rng + ?Sized>(
    ds: &LabeledDataset<F>,
    rng: &mut R,
) -> Result<LabeledDataset<F>, ResampleError> {
    let (n0, n1) = class_sizes(ds)?;
    let minority = ds.class_indices(0);
    let mut out = ds.clone();
    for _ in 0..n1 - n0 {
        let pick = minority[rng.random_range(0..n0)];
        out.push(ds.row(pick), 0);
    }
    Ok(out)
}

/// Grows the minority class to `target_minority` points by interpolating
/// each visited minority point toward one of its K nearest minority
/// neighbors (Euclidean distance, ties to the lowest row index). Visits
/// cycle through the minority in a once-shuffled order; synthetic rows
/// append after the input rows.
pub fn smote<F: Float, R: Rng + ?Sized>(
    ds: &LabeledDataset<F>,
    params: &SmoteParams,
    target_minority: usize,
    rng: &mut R,
) -> Result<LabeledDataset<F>, ResampleError> {
    let (n0, _) = class_sizes(ds)?;
    if target_minority < n0 {
        return Err(ResampleError::TargetTooSmall { target: target_minority, minority: n0 });
    }
    if target_minority == n0 {
        return Ok(ds.clone());
    }
    if n0 < 2 {
        return Err(ResampleError::DegenerateMinority { count: n0 });
    }
    let minority = ds.class_indices(0);
    let k = effective_k(params.k_neighbors, n0);
    let neighbors = knn_among(ds, &minority, k);

    let mut visit_order: Vec<usize> = (0..n0).collect();
    for t in (1..n0).rev() {
        let j = rng.random_range(0..=t);
        visit_order.swap(t, j);
    }

    let mut out = ds.clone();
    let d = ds.dim();
    let mut synth = vec![F::zero(); d];
    for v in 0..target_minority - n0 {
        let at = visit_order[v % n0];
        let base = ds.row(minority[at]);
        let pick = neighbors[at][rng.random_range(0..k)];
        let other = ds.row(pick);
        match params.gap_mode {
            GapMode::ScalarPerPoint => {
                let r = cast::<F>(rng.random::<f64>());
                for c in 0..d {
                    synth[c] = base[c] + r * (other[c] - base[c]);
                }
            }
            GapMode::PerCoordinate => {
                for c in 0..d {
                    let r = cast::<F>(rng.random::<f64>());
                    synth[c] = base[c] + r * (other[c] - base[c]);
                }
            }
        }
        out.push(&synth, 0);
    }
    Ok(out)
}

/// For each minority row, the `k` nearest other minority rows by squared
/// Euclidean distance, distance ties broken by lower row index.
fn knn_among<F: Float>(
    ds: &LabeledDataset<F>,
    minority: &[usize],
    k: usize,
) -> Vec<Vec<usize>> {
    let n = minority.len();
    let mut result = Vec::with_capacity(n);
    let mut dists: Vec<(F, usize)> = Vec::with_capacity(n - 1);
    for &i in minority {
        dists.clear();
        let xi = ds.row(i);
        for &j in minority {
            if j == i {
                continue;
            }
            let xj = ds.row(j);
            let mut sq = F::zero();
            for c in 0..ds.dim() {
                let diff = xi[c] - xj[c];
                sq = sq + diff * diff;
            }
            dists.push((sq, j));
        }
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        result.push(dists[..k].iter().map(|&(_, j)| j).collect());
    }
    result
}

/// Geometric-mean balance point n_h = floor(sqrt(n0*n1)/n0)*n0.
pub fn hybrid_target(n0: usize, n1: usize) -> usize {
    let root = ((n0 as f64) * (n1 as f64)).sqrt();
    (root / n0 as f64).floor() as usize * n0
}

/// Meets in the middle: majority undersampled down to n_h, minority grown
/// by synthetic interpolation up to n_h.
pub fn hybrid<F: Float, R: Rng + ?Sized>(
    ds: &LabeledDataset<F>,
    params: &SmoteParams,
    rng: &mut R,
) -> Result<LabeledDataset<F>, ResampleError> {
    let (n0, n1) = class_sizes(ds)?;
    let n_h = hybrid_target(n0, n1);
    let trimmed = undersample_to(ds, n_h, rng);
    if n_h == n0 {
        return Ok(trimmed);
    }
    smote(&trimmed, params, n_h, rng)
}

pub fn apply<F: Float, R: Rng + ?Sized>(
    kind: ResampleKind,
    ds: &LabeledDataset<F>,
    params: &SmoteParams,
    rng: &mut R,
) -> Result<LabeledDataset<F>, ResampleError> {
    match kind {
        ResampleKind::Original => Ok(ds.clone()),
        ResampleKind::Under => undersample(ds, rng),
        ResampleKind::Smote => {
            let (_, n1) = class_sizes(ds)?;
            smote(ds, params, n1, rng)
        }
        ResampleKind::Hybrid => hybrid(ds, params, rng),
    }
}

//! Sorted-column machinery shared by the tree ensembles.
//!
//! Columns are argsorted once per fit. Each tree then works on a set of
//! per-feature index arrays that share segment boundaries: a node is a range
//! `[lo, hi)` valid in every column, and splitting a node stably partitions
//! that range in every column, so sorted order never has to be recomputed.

use crate::float::Float;
use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub(crate) enum Node<F> {
    Split { feature: u32, threshold: F, left: u32, right: u32 },
    Leaf { value: F },
}

pub(crate) fn eval_tree<F: Float>(nodes: &[Node<F>], x: &[F]) -> F {
    let mut at = 0usize;
    loop {
        match nodes[at] {
            Node::Leaf { value } => return value,
            Node::Split { feature, threshold, left, right } => {
                at = if x[feature as usize] <= threshold {
                    left as usize
                } else {
                    right as usize
                };
            }
        }
    }
}

/// Split threshold between two adjacent sorted values. Falls back to the
/// lower value when the midpoint rounds onto `v_hi`, so both children stay
/// non-empty under the `x <= threshold` routing rule.
pub(crate) fn midpoint<F: Float>(v_lo: F, v_hi: F) -> F {
    let two = F::one() + F::one();
    let mid = (v_lo + v_hi) / two;
    if mid >= v_lo && mid < v_hi {
        mid
    } else {
        v_lo
    }
}

/// Row indices argsorted by each feature column, plus a column-major copy of
/// the feature matrix so split scans can look values up by row id without
/// touching the (cache-hostile) row-major layout. Computed once per fit.
pub(crate) struct SortedColumns<F> {
    order: Vec<Vec<u32>>,
    by_row: Vec<Vec<F>>,
}

impl<F: Float> SortedColumns<F> {
    pub fn build(features: &Matrix<F>) -> Self {
        let n = features.rows();
        let mut order = Vec::with_capacity(features.cols());
        let mut by_row = Vec::with_capacity(features.cols());
        for c in 0..features.cols() {
            let col: Vec<F> = (0..n).map(|r| features.get(r, c)).collect();
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                col[a as usize].partial_cmp(&col[b as usize]).unwrap().then(a.cmp(&b))
            });
            order.push(idx);
            by_row.push(col);
        }
        SortedColumns { order, by_row }
    }

    /// Value of feature `f` for row `r`.
    pub fn value(&self, f: usize, r: u32) -> F {
        self.by_row[f][r as usize]
    }
}

/// Per-tree working set: one index array per feature, plus scratch for
/// stable partitioning and a per-row side mark.
pub(crate) struct ColumnSet {
    ids: Vec<Vec<u32>>,
    scratch_l: Vec<u32>,
    scratch_r: Vec<u32>,
    goes_left: Vec<u8>,
}

impl ColumnSet {
    /// Copies the presorted columns, keeping only rows where `keep` holds.
    pub fn filtered<F: Float>(
        sorted: &SortedColumns<F>,
        n_rows: usize,
        keep: impl Fn(u32) -> bool,
    ) -> Self {
        let mut set = ColumnSet {
            ids: vec![Vec::new(); sorted.order.len()],
            scratch_l: Vec::new(),
            scratch_r: Vec::new(),
            goes_left: vec![0; n_rows],
        };
        set.refill(sorted, keep);
        set
    }

    /// Re-fills from the presorted columns without reallocating, so one set
    /// can serve every tree of an ensemble.
    pub fn refill<F: Float>(&mut self, sorted: &SortedColumns<F>, keep: impl Fn(u32) -> bool) {
        for (dst, src) in self.ids.iter_mut().zip(&sorted.order) {
            dst.clear();
            dst.extend(src.iter().copied().filter(|&r| keep(r)));
        }
        self.scratch_l.resize(self.len(), 0);
        self.scratch_r.resize(self.len(), 0);
    }

    pub fn len(&self) -> usize {
        self.ids.first().map_or(0, Vec::len)
    }

    pub fn n_features(&self) -> usize {
        self.ids.len()
    }

    /// Rows of segment `[lo, hi)` in ascending order of feature `f`.
    pub fn segment(&self, f: usize, lo: usize, hi: usize) -> &[u32] {
        &self.ids[f][lo..hi]
    }

    /// Partitions the node `[lo, hi)` after a split was found at sorted rank
    /// `left_len` of `feature`'s segment: that segment is already
    /// partitioned, so it only marks sides there and stably reorders the
    /// remaining columns. Returns the boundary `mid` so that `[lo, mid)` is
    /// the left child and `[mid, hi)` the right.
    pub fn split_ranked(&mut self, feature: usize, lo: usize, hi: usize, left_len: usize) -> usize {
        for (i, &r) in self.ids[feature][lo..hi].iter().enumerate() {
            self.goes_left[r as usize] = u8::from(i < left_len);
        }
        let mid = lo + left_len;
        for (f, col) in self.ids.iter_mut().enumerate() {
            if f == feature {
                continue;
            }
            let seg = &mut col[lo..hi];
            // branchless stable partition: tentatively write each id to both
            // sides, advance only the side it belongs to
            let mut w_left = 0usize;
            let mut w_right = 0usize;
            for &r in seg.iter() {
                let b = usize::from(self.goes_left[r as usize]);
                self.scratch_l[w_left] = r;
                self.scratch_r[w_right] = r;
                w_left += b;
                w_right += 1 - b;
            }
            seg[..left_len].copy_from_slice(&self.scratch_l[..w_left]);
            seg[left_len..].copy_from_slice(&self.scratch_r[..w_right]);
        }
        mid
    }
}

//! Minimal row-major matrix used for feature blocks and small factors.

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    data: Vec<F>,
    cols: usize,
}

impl<F: Copy> Matrix<F> {
    /// Empty matrix with a fixed column count.
    pub fn new(cols: usize) -> Self {
        assert!(cols > 0, "matrix needs at least one column");
        Self { data: Vec::new(), cols }
    }

    pub fn with_capacity(rows: usize, cols: usize) -> Self {
        assert!(cols > 0, "matrix needs at least one column");
        Self { data: Vec::with_capacity(rows * cols), cols }
    }

    pub fn from_flat(data: Vec<F>, cols: usize) -> Self {
        assert!(cols > 0, "matrix needs at least one column");
        assert!(data.len() % cols == 0, "flat data must fill whole rows");
        Self { data, cols }
    }

    pub fn push_row(&mut self, row: &[F]) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.data.extend_from_slice(row);
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[F]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    /// Copies out the rows at `indices`, in order.
    pub fn take_rows(&self, indices: &[usize]) -> Self {
        let mut out = Self::with_capacity(indices.len(), self.cols);
        for &i in indices {
            out.push_row(self.row(i));
        }
        out
    }
}

impl<F: Copy + Default> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(cols > 0, "matrix needs at least one column");
        Self { data: vec![F::default(); rows * cols], cols }
    }
}

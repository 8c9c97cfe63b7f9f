//! Labeled feature blocks and their CSV form.
//!
//! Class 0 is the minority / negative class throughout; class 1 is the
//! majority / positive class. Files carry a `x1,...,xd,y` header with one
//! observation per row and `y` in `{0,1}`.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::float::Float;
use crate::matrix::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("features have {rows} rows but labels have {labels}")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("labels must be 0 or 1, found {found} at row {row}")]
    BadLabel { row: usize, found: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Feature matrix plus binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<F> {
    features: Matrix<F>,
    labels: Vec<u8>,
}

impl<F: Float> LabeledDataset<F> {
    pub fn new(features: Matrix<F>, labels: Vec<u8>) -> Result<Self, DatasetError> {
        if features.rows() != labels.len() {
            return Err(DatasetError::LengthMismatch {
                rows: features.rows(),
                labels: labels.len(),
            });
        }
        if let Some(row) = labels.iter().position(|l| *l > 1) {
            return Err(DatasetError::BadLabel { row, found: labels[row].to_string() });
        }
        Ok(Self { features, labels })
    }

    /// Empty dataset with a fixed feature dimension, to be filled by `push`.
    pub fn with_dim(dim: usize) -> Self {
        Self { features: Matrix::new(dim), labels: Vec::new() }
    }

    pub fn features(&self) -> &Matrix<F> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn row(&self, i: usize) -> &[F] {
        self.features.row(i)
    }

    /// Count of observations carrying `label`.
    pub fn class_count(&self, label: u8) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }

    pub fn class_indices(&self, label: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Copies out the observations at `indices`, in order.
    pub fn take(&self, indices: &[usize]) -> Self {
        let features = self.features.take_rows(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self { features, labels }
    }

    pub fn push(&mut self, row: &[F], label: u8) {
        debug_assert!(label <= 1);
        self.features.push_row(row);
        self.labels.push(label);
    }

    /// Writes `x1,...,xd,y` rows to `path`.
    pub fn write_csv(&self, path: &Path) -> Result<(), DatasetError> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        let mut header = String::new();
        for j in 0..self.dim() {
            header.push_str(&format!("x{},", j + 1));
        }
        header.push('y');
        writeln!(w, "{header}")?;
        for (row, label) in self.features.iter_rows().zip(&self.labels) {
            let mut line = String::new();
            for v in row {
                line.push_str(&format!("{v},"));
            }
            line.push_str(&label.to_string());
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }
}

impl LabeledDataset<f64> {
    /// Reads a dataset written by [`LabeledDataset::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self, DatasetError> {
        let file = std::fs::File::open(path)?;
        Self::read_csv_from(file)
    }

    pub fn read_csv_from<R: Read>(reader: R) -> Result<Self, DatasetError> {
        let mut lines = BufReader::new(reader).lines().enumerate();
        let (_, header) = lines.next().ok_or(DatasetError::Malformed {
            line: 1,
            reason: "missing header".into(),
        })?;
        let header = header?;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() < 2 || fields[fields.len() - 1] != "y" {
            return Err(DatasetError::Malformed {
                line: 1,
                reason: format!("expected header x1,...,xd,y, got {header:?}"),
            });
        }
        let dim = fields.len() - 1;
        for (j, f) in fields[..dim].iter().enumerate() {
            if *f != format!("x{}", j + 1) {
                return Err(DatasetError::Malformed {
                    line: 1,
                    reason: format!("expected column x{}, got {f:?}", j + 1),
                });
            }
        }
        let mut features = Matrix::new(dim);
        let mut labels = Vec::new();
        let mut row = vec![0.0f64; dim];
        for (idx, line) in lines {
            let line = line?;
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.trim().split(',');
            for (j, slot) in row.iter_mut().enumerate() {
                let tok = parts.next().ok_or_else(|| DatasetError::Malformed {
                    line: line_no,
                    reason: format!("expected {} fields", dim + 1),
                })?;
                *slot = tok.parse().map_err(|_| DatasetError::Malformed {
                    line: line_no,
                    reason: format!("bad number in column x{}: {tok:?}", j + 1),
                })?;
            }
            let label_tok = parts.next().ok_or_else(|| DatasetError::Malformed {
                line: line_no,
                reason: format!("expected {} fields", dim + 1),
            })?;
            if parts.next().is_some() {
                return Err(DatasetError::Malformed {
                    line: line_no,
                    reason: format!("expected {} fields", dim + 1),
                });
            }
            let label: u8 = match label_tok {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(DatasetError::BadLabel {
                        row: labels.len(),
                        found: other.to_string(),
                    })
                }
            };
            features.push_row(&row);
            labels.push(label);
        }
        LabeledDataset::new(features, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> LabeledDataset<f64> {
        let mut m = Matrix::new(2);
        m.push_row(&[0.25, -1.5]);
        m.push_row(&[3.0, 0.0625]);
        m.push_row(&[1e-3, 2.0]);
        LabeledDataset::new(m, vec![0, 1, 1]).unwrap()
    }

    #[test]
    fn rejects_length_mismatch() {
        let m = Matrix::from_flat(vec![1.0, 2.0], 2);
        let err = LabeledDataset::new(m, vec![0, 1]).unwrap_err();
        assert!(matches!(err, DatasetError::LengthMismatch { rows: 1, labels: 2 }));
    }

    #[test]
    fn rejects_bad_label() {
        let m = Matrix::from_flat(vec![1.0, 2.0], 2);
        let err = LabeledDataset::new(m, vec![3]).unwrap_err();
        assert!(matches!(err, DatasetError::BadLabel { row: 0, .. }));
    }

    #[test]
    fn counts_and_selection() {
        let ds = toy();
        assert_eq!(ds.class_count(0), 1);
        assert_eq!(ds.class_count(1), 2);
        assert_eq!(ds.class_indices(1), vec![1, 2]);
        let sub = ds.take(&[2, 0]);
        assert_eq!(sub.labels(), &[1, 0]);
        assert_eq!(sub.row(0), &[1e-3, 2.0]);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = toy();
        let dir = std::env::temp_dir().join(format!("imblab-ds-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("toy.csv");
        ds.write_csv(&path).unwrap();
        let back = LabeledDataset::read_csv(&path).unwrap();
        assert_eq!(ds, back);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x1,x2,y\n"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_read_reports_line_numbers() {
        let bad = "x1,x2,y\n1.0,2.0,1\n1.0,oops,0\n";
        let err = LabeledDataset::read_csv_from(bad.as_bytes()).unwrap_err();
        match err {
            DatasetError::Malformed { line, reason } => {
                assert_eq!(line, 3);
                assert!(reason.contains("x2"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_read_rejects_wrong_header() {
        let bad = "a,b,y\n1.0,2.0,1\n";
        assert!(matches!(
            LabeledDataset::<f64>::read_csv_from(bad.as_bytes()),
            Err(DatasetError::Malformed { line: 1, .. })
        ));
    }
}

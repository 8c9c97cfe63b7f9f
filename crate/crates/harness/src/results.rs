//! Results CSV: deterministic row order, lossless round trip.

use std::cmp::Ordering;
use std::path::Path;

use crate::runner::ResultRecord;

pub const RESULTS_HEADER: &str = "example,paradigm,resampler,learner,ir,metric,mean,stderr,rep_count";

#[derive(Debug, thiserror::Error)]
pub enum ResultsError {
    #[error("no records to write")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

fn key_order(a: &ResultRecord, b: &ResultRecord) -> Ordering {
    (a.example, &a.paradigm, &a.resampler, &a.learner)
        .cmp(&(b.example, &b.paradigm, &b.resampler, &b.learner))
        .then(a.ir.total_cmp(&b.ir))
        .then(a.metric.cmp(&b.metric))
}

/// Writes the records sorted by their key columns. Refuses to create a file
/// for an empty record set.
pub fn write_results(records: &[ResultRecord], path: &Path) -> Result<(), ResultsError> {
    if records.is_empty() {
        return Err(ResultsError::Empty);
    }
    let mut sorted: Vec<&ResultRecord> = records.iter().collect();
    sorted.sort_by(|a, b| key_order(a, b));
    let mut writer = csv::Writer::from_path(path)
        .map_err(|source| ResultsError::Csv { path: path.display().to_string(), source })?;
    for record in sorted {
        writer
            .serialize(record)
            .map_err(|source| ResultsError::Csv { path: path.display().to_string(), source })?;
    }
    writer.flush().map_err(|source| ResultsError::Io { path: path.display().to_string(), source })
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>, ResultsError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|source| ResultsError::Csv { path: path.display().to_string(), source })?;
    let mut records = Vec::new();
    for row in reader.deserialize() {
        let record: ResultRecord =
            row.map_err(|source| ResultsError::Csv { path: path.display().to_string(), source })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(paradigm: &str, learner: &str, ir: f64, metric: &str, mean: f64) -> ResultRecord {
        ResultRecord {
            example: 1,
            paradigm: paradigm.into(),
            resampler: "original".into(),
            learner: learner.into(),
            ir,
            metric: metric.into(),
            mean,
            stderr: mean / 10.0,
            rep_count: 30,
        }
    }

    #[test]
    fn round_trip_is_lossless_and_sorted() {
        let records = vec![
            record("np", "svm", 128.0, "type2", 0.30000000000000004),
            record("cc", "lr", 16.0, "risk", 0.12345678901234567),
            record("cc", "lr", 2.0, "risk", 1.0 / 3.0),
            record("cc", "lr", 2.0, "f1", 0.9),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_results(&records, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(RESULTS_HEADER));
        assert_eq!(lines.clone().count(), records.len());

        let back = read_results(&path).unwrap();
        let mut expected = records.clone();
        expected.sort_by(|a, b| key_order(a, b));
        assert_eq!(back, expected);
        assert_eq!(back[0].metric, "f1");
        assert_eq!(back.last().unwrap().paradigm, "np");
        assert_eq!(back[2].mean, 0.12345678901234567);
    }

    #[test]
    fn sort_treats_ir_numerically() {
        let records = vec![
            record("cc", "lr", 128.0, "risk", 0.1),
            record("cc", "lr", 16.0, "risk", 0.2),
            record("cc", "lr", 2.0, "risk", 0.3),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_results(&records, &path).unwrap();
        let back = read_results(&path).unwrap();
        let irs: Vec<f64> = back.iter().map(|r| r.ir).collect();
        assert_eq!(irs, vec![2.0, 16.0, 128.0]);
    }

    #[test]
    fn empty_records_error_without_creating_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        let err = write_results(&[], &path).unwrap_err();
        assert!(matches!(err, ResultsError::Empty));
        assert!(!path.exists());
    }

    #[test]
    fn missing_file_reports_the_path() {
        let err = read_results(Path::new("/nonexistent/results.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/results.csv"));
    }
}

//! Desk-scale study kit for imbalanced binary classification.
//!
//! The crate bundles synthetic Gaussian benchmarks, resampling schemes,
//! five from-scratch scoring learners, three thresholding paradigms
//! (accuracy-, cost-, and type-I-constrained), and the evaluation metrics
//! used to compare them. Everything is generic over the scalar type via
//! [`Float`]; the `*64` aliases below fix `f64`, which is what the harness
//! and CLI use.

pub mod datagen;
pub mod dataset;
mod float;
pub mod learners;
pub mod matrix;
pub mod metrics;
pub mod paradigms;
pub mod resample;

pub use dataset::{DatasetError, LabeledDataset};
pub use float::{cast, Float};
pub use learners::{fit, Hyperparams, LearnerError, LearnerKind, ScoringModel};
pub use matrix::Matrix;
pub use metrics::{ConfusionMatrix, MetricsError, MetricsReport};
pub use paradigms::{Paradigm, ParadigmError, ThresholdRule};
pub use resample::{ResampleError, ResampleKind, SmoteParams};

pub type Matrix64 = Matrix<f64>;
pub type Dataset64 = LabeledDataset<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Dataset32 = LabeledDataset<f32>;
pub type ScoringModel64 = ScoringModel<f64>;
pub type ThresholdRule64 = ThresholdRule<f64>;

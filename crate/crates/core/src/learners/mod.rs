//! Five from-scratch learners behind one contract: fit on a labeled dataset,
//! then score feature rows with estimates of `P(Y = 1 | x)` in [0,1].
//!
//! Scores order candidates; the paradigms module turns them into labels.
//! Fitting is deterministic: the same kind, data, and hyperparameters (seed
//! included) reproduce the same model bit for bit on a given platform. No
//! learner standardizes or otherwise preprocesses features.

pub mod forest;
pub mod gbt;
pub mod logistic;
pub mod neural;
pub mod svm;
mod tree;

use serde::Deserialize;

use crate::dataset::LabeledDataset;
use crate::float::Float;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    LogisticRegression,
    NeuralNet,
    RandomForest,
    Svm,
    GradientBoostedTrees,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 5] = [
        LearnerKind::LogisticRegression,
        LearnerKind::NeuralNet,
        LearnerKind::RandomForest,
        LearnerKind::Svm,
        LearnerKind::GradientBoostedTrees,
    ];

    /// Short token used in result files.
    pub fn tag(self) -> &'static str {
        match self {
            LearnerKind::LogisticRegression => "lr",
            LearnerKind::NeuralNet => "nn",
            LearnerKind::RandomForest => "rf",
            LearnerKind::Svm => "svm",
            LearnerKind::GradientBoostedTrees => "gbt",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LearnerError {
    #[error("class {label} has no training rows")]
    EmptyClass { label: u8 },
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training loss became non-finite at step {at}")]
    NonFiniteLoss { at: usize },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    pub max_iter: usize,
    pub tol: f64,
    pub ridge: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self { max_iter: 50, tol: 1e-8, ridge: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuralParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for NeuralParams {
    fn default() -> Self {
        Self { hidden: 5, learning_rate: 0.01, epochs: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per split; `None` means `floor(sqrt(d))`.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { trees: 200, mtry: None, bootstrap: true }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub cost: f64,
    /// Kernel width; `None` means `1/d`.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_passes: usize,
    /// Optimization cap: larger training sets are stratified-subsampled to
    /// this size before the quadratic solver runs.
    pub max_train_points: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { cost: 1.0, gamma: None, tol: 1e-3, max_passes: 10_000, max_train_points: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    pub min_child_weight: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self { rounds: 50, learning_rate: 0.3, max_depth: 6, lambda: 1.0, min_child_weight: 1.0 }
    }
}

/// Per-kind settings plus the seed driving the stochastic learners.
///
/// The seed is deliberately not part of the config-file surface; runs derive
/// it per repetition.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    #[serde(skip)]
    pub seed: u64,
    pub logistic: LogisticParams,
    pub neural: NeuralParams,
    pub forest: ForestParams,
    pub svm: SvmParams,
    pub gbt: GbtParams,
}

/// A fitted learner of any kind.
#[derive(Debug, Clone)]
pub enum ScoringModel<F> {
    Logistic(logistic::LogisticModel<F>),
    Neural(neural::NeuralModel<F>),
    Forest(forest::ForestModel<F>),
    Svm(svm::SvmModel<F>),
    Gbt(gbt::GbtModel<F>),
}

impl<F: Float> ScoringModel<F> {
    pub fn kind(&self) -> LearnerKind {
        match self {
            ScoringModel::Logistic(_) => LearnerKind::LogisticRegression,
            ScoringModel::Neural(_) => LearnerKind::NeuralNet,
            ScoringModel::Forest(_) => LearnerKind::RandomForest,
            ScoringModel::Svm(_) => LearnerKind::Svm,
            ScoringModel::Gbt(_) => LearnerKind::GradientBoostedTrees,
        }
    }

    /// Feature dimension the model was fitted on.
    pub fn dim(&self) -> usize {
        match self {
            ScoringModel::Logistic(m) => m.dim(),
            ScoringModel::Neural(m) => m.dim(),
            ScoringModel::Forest(m) => m.dim(),
            ScoringModel::Svm(m) => m.dim(),
            ScoringModel::Gbt(m) => m.dim(),
        }
    }

    pub(crate) fn score_row_raw(&self, x: &[F]) -> F {
        match self {
            ScoringModel::Logistic(m) => m.score_row(x),
            ScoringModel::Neural(m) => m.score_row(x),
            ScoringModel::Forest(m) => m.score_row(x),
            ScoringModel::Svm(m) => m.score_row(x),
            ScoringModel::Gbt(m) => m.score_row(x),
        }
    }

    /// Scores one row, clamped to [0,1].
    pub fn score_row(&self, x: &[F]) -> Result<F, LearnerError> {
        if x.len() != self.dim() {
            return Err(LearnerError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.score_row_raw(x).max(F::zero()).min(F::one()))
    }

    fn score_batch_raw(&self, features: &Matrix<F>) -> Vec<F> {
        match self {
            ScoringModel::Forest(m) => {
                let mut out = vec![F::zero(); features.rows()];
                m.score_into(features, &mut out);
                out
            }
            ScoringModel::Gbt(m) => {
                let mut out = vec![F::zero(); features.rows()];
                m.score_into(features, &mut out);
                out
            }
            _ => features.iter_rows().map(|row| self.score_row_raw(row)).collect(),
        }
    }

    /// Scores every row of `features`, clamped to [0,1].
    pub fn score(&self, features: &Matrix<F>) -> Result<Vec<F>, LearnerError> {
        if features.cols() != self.dim() {
            return Err(LearnerError::DimensionMismatch {
                expected: self.dim(),
                got: features.cols(),
            });
        }
        let mut scores = self.score_batch_raw(features);
        for s in &mut scores {
            *s = s.max(F::zero()).min(F::one());
        }
        Ok(scores)
    }

    /// Unclamped scores, for tests of the clamping safety net.
    #[doc(hidden)]
    pub fn score_raw(&self, features: &Matrix<F>) -> Result<Vec<F>, LearnerError> {
        if features.cols() != self.dim() {
            return Err(LearnerError::DimensionMismatch {
                expected: self.dim(),
                got: features.cols(),
            });
        }
        Ok(self.score_batch_raw(features))
    }
}

pub(crate) fn validate_train<F: Float>(train: &LabeledDataset<F>) -> Result<(), LearnerError> {
    for label in [0u8, 1u8] {
        if train.class_count(label) == 0 {
            return Err(LearnerError::EmptyClass { label });
        }
    }
    let d = train.dim();
    for (i, v) in train.features().as_slice().iter().enumerate() {
        if !v.is_finite() {
            return Err(LearnerError::NonFiniteFeature { row: i / d, col: i % d });
        }
    }
    Ok(())
}

/// Fits a learner of the given kind.
pub fn fit<F: Float>(
    kind: LearnerKind,
    train: &LabeledDataset<F>,
    hp: &Hyperparams,
) -> Result<ScoringModel<F>, LearnerError> {
    validate_train(train)?;
    match kind {
        LearnerKind::LogisticRegression => {
            Ok(ScoringModel::Logistic(logistic::fit(train, &hp.logistic)?))
        }
        LearnerKind::NeuralNet => Ok(ScoringModel::Neural(neural::fit(train, &hp.neural, hp.seed)?)),
        LearnerKind::RandomForest => {
            Ok(ScoringModel::Forest(forest::fit(train, &hp.forest, hp.seed)?))
        }
        LearnerKind::Svm => Ok(ScoringModel::Svm(svm::fit(train, &hp.svm, hp.seed)?)),
        LearnerKind::GradientBoostedTrees => {
            Ok(ScoringModel::Gbt(gbt::fit(train, &hp.gbt, hp.seed)?))
        }
    }
}

/// Numerically stable logistic function.
pub(crate) fn sigmoid<F: Float>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

//! Experiment configuration: JSON in, validated [`ExperimentConfig`] out.

use std::fmt;
use std::path::Path;

use imblab_core::datagen::ExampleId;
use imblab_core::paradigms::Paradigm;
use imblab_core::{Hyperparams, LearnerKind, ResampleKind, SmoteParams};
use serde::Deserialize;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_DELTA: f64 = 0.5;
pub const DEFAULT_MASTER_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Who pays how much for which mistake when thresholding and scoring costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostRule {
    /// Cost weights follow the imbalance: c0 = ir, c1 = 1.
    AutoIr,
    /// Cost weights come from the cs paradigm entry.
    Explicit,
}

/// One thresholding objective to sweep. The cs costs stay optional here
/// because under [`CostRule::AutoIr`] they are derived per IR.
#[derive(Debug, Clone, PartialEq)]
pub enum ParadigmSpec {
    Cc,
    Cs { cost0: Option<f64>, cost1: Option<f64> },
    Np { alpha: f64, delta: f64 },
}

impl ParadigmSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            ParadigmSpec::Cc => "cc",
            ParadigmSpec::Cs { .. } => "cs",
            ParadigmSpec::Np { .. } => "np",
        }
    }

    /// Concrete paradigm for one cell of the sweep.
    pub fn resolve(&self, rule: CostRule, ir: f64) -> Paradigm {
        match self {
            ParadigmSpec::Cc => Paradigm::Cc,
            ParadigmSpec::Cs { cost0, cost1 } => match rule {
                CostRule::AutoIr => Paradigm::Cs { cost0: ir, cost1: 1.0 },
                CostRule::Explicit => Paradigm::Cs {
                    cost0: cost0.expect("validated explicit cost0"),
                    cost1: cost1.expect("validated explicit cost1"),
                },
            },
            ParadigmSpec::Np { alpha, delta } => Paradigm::Np { alpha: *alpha, delta: *delta },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParadigmDoc {
    kind: String,
    cost0: Option<f64>,
    cost1: Option<f64>,
    alpha: Option<f64>,
    delta: Option<f64>,
}

impl<'de> Deserialize<'de> for ParadigmSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = ParadigmDoc::deserialize(deserializer)?;
        let reject = |field: &str, present: bool| -> Result<(), D::Error> {
            if present {
                Err(D::Error::custom(format!("field `{field}` does not apply to kind `{}`", doc.kind)))
            } else {
                Ok(())
            }
        };
        match doc.kind.as_str() {
            "cc" => {
                reject("cost0", doc.cost0.is_some())?;
                reject("cost1", doc.cost1.is_some())?;
                reject("alpha", doc.alpha.is_some())?;
                reject("delta", doc.delta.is_some())?;
                Ok(ParadigmSpec::Cc)
            }
            "cs" => {
                reject("alpha", doc.alpha.is_some())?;
                reject("delta", doc.delta.is_some())?;
                Ok(ParadigmSpec::Cs { cost0: doc.cost0, cost1: doc.cost1 })
            }
            "np" => {
                reject("cost0", doc.cost0.is_some())?;
                reject("cost1", doc.cost1.is_some())?;
                Ok(ParadigmSpec::Np {
                    alpha: doc.alpha.unwrap_or(DEFAULT_ALPHA),
                    delta: doc.delta.unwrap_or(DEFAULT_DELTA),
                })
            }
            other => Err(D::Error::custom(format!("unknown paradigm kind `{other}`, expected cc, cs or np"))),
        }
    }
}

impl fmt::Display for ParadigmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// The full sweep definition. Every field has a default, so an empty
/// document runs the standard benchmark.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: ExampleId,
    pub paradigms: Vec<ParadigmSpec>,
    pub resamplers: Vec<ResampleKind>,
    pub learners: Vec<LearnerKind>,
    pub ir_list: Vec<f64>,
    pub n0_train: usize,
    pub m0_test: usize,
    pub repetitions: usize,
    pub smote: SmoteParams,
    pub hyperparams: Hyperparams,
    pub master_seed: u64,
    pub cost_rule: CostRule,
    /// Share of training class-0 rows that np keeps for fitting; the rest
    /// calibrate the cutoff.
    pub np_split_ratio: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            example: ExampleId::Example1,
            paradigms: vec![
                ParadigmSpec::Cc,
                ParadigmSpec::Cs { cost0: None, cost1: None },
                ParadigmSpec::Np { alpha: DEFAULT_ALPHA, delta: DEFAULT_DELTA },
            ],
            resamplers: ResampleKind::ALL.to_vec(),
            learners: LearnerKind::ALL.to_vec(),
            ir_list: (0..8).map(|i| f64::from(1u32 << i)).collect(),
            n0_train: 300,
            m0_test: 2000,
            repetitions: 100,
            smote: SmoteParams::default(),
            hyperparams: Hyperparams::default(),
            master_seed: DEFAULT_MASTER_SEED,
            cost_rule: CostRule::AutoIr,
            np_split_ratio: 0.5,
        }
    }
}

impl ExperimentConfig {
    /// Shrinks the sweep to the documented quick profile: 30 repetitions,
    /// 500 test rows per class-0 unit, IRs {1, 8, 128}.
    pub fn apply_fast_profile(&mut self) {
        self.repetitions = 30;
        self.m0_test = 500;
        self.ir_list = vec![1.0, 8.0, 128.0];
    }

    /// Cost weights used for the cost metric of every cell at this IR.
    pub fn metric_costs(&self, ir: f64) -> (f64, f64) {
        match self.cost_rule {
            CostRule::AutoIr => (ir, 1.0),
            CostRule::Explicit => self
                .paradigms
                .iter()
                .find_map(|p| match p {
                    ParadigmSpec::Cs { cost0: Some(c0), cost1: Some(c1) } => Some((*c0, *c1)),
                    _ => None,
                })
                .expect("validated explicit costs"),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.paradigms.len() * self.resamplers.len() * self.learners.len() * self.ir_list.len()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn bad(msg: String) -> Result<(), ConfigError> {
            Err(ConfigError::Validation(msg))
        }
        if self.paradigms.is_empty() {
            return bad("paradigms must not be empty".into());
        }
        if self.resamplers.is_empty() {
            return bad("resamplers must not be empty".into());
        }
        if self.learners.is_empty() {
            return bad("learners must not be empty".into());
        }
        if self.ir_list.is_empty() {
            return bad("ir_list must not be empty".into());
        }
        for (i, p) in self.paradigms.iter().enumerate() {
            if self.paradigms[..i].iter().any(|q| q.tag() == p.tag()) {
                return bad(format!("paradigms repeats kind `{}`", p.tag()));
            }
        }
        for (i, r) in self.resamplers.iter().enumerate() {
            if self.resamplers[..i].contains(r) {
                return bad(format!("resamplers repeats `{}`", r.tag()));
            }
        }
        for (i, l) in self.learners.iter().enumerate() {
            if self.learners[..i].contains(l) {
                return bad(format!("learners repeats `{}`", l.tag()));
            }
        }
        for &ir in &self.ir_list {
            if !ir.is_finite() || ir < 1.0 {
                return bad(format!("ir_list values must be finite and >= 1, got {ir}"));
            }
        }
        for (i, &ir) in self.ir_list.iter().enumerate() {
            if self.ir_list[..i].contains(&ir) {
                return bad(format!("ir_list repeats {ir}"));
            }
        }
        if self.n0_train == 0 {
            return bad("n0_train must be >= 1".into());
        }
        if self.m0_test == 0 {
            return bad("m0_test must be >= 1".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        if self.smote.k_neighbors == 0 {
            return bad("smote.k_neighbors must be >= 1".into());
        }
        if !(self.np_split_ratio.is_finite() && self.np_split_ratio > 0.0 && self.np_split_ratio < 1.0) {
            return bad(format!("np_split_ratio must lie in (0,1), got {}", self.np_split_ratio));
        }
        for p in &self.paradigms {
            match p {
                ParadigmSpec::Cs { cost0, cost1 } => match self.cost_rule {
                    CostRule::Explicit => {
                        let (Some(c0), Some(c1)) = (cost0, cost1) else {
                            return bad("cost_rule explicit requires cost0 and cost1 on the cs paradigm".into());
                        };
                        if !(c0.is_finite() && c1.is_finite() && *c0 > 0.0 && *c1 > 0.0) {
                            return bad(format!("cs costs must be finite and positive, got ({c0}, {c1})"));
                        }
                    }
                    CostRule::AutoIr => {
                        if cost0.is_some() || cost1.is_some() {
                            return bad(
                                "cs costs are derived per IR under cost_rule auto_ir; drop them or switch to explicit"
                                    .into(),
                            );
                        }
                    }
                },
                ParadigmSpec::Np { alpha, delta } => {
                    for (name, v) in [("alpha", *alpha), ("delta", *delta)] {
                        if !(v.is_finite() && v > 0.0 && v < 1.0) {
                            return bad(format!("np {name} must lie in (0,1), got {v}"));
                        }
                    }
                }
                ParadigmSpec::Cc => {}
            }
        }
        if self.cost_rule == CostRule::Explicit
            && !self.paradigms.iter().any(|p| matches!(p, ParadigmSpec::Cs { .. }))
        {
            return bad("cost_rule explicit requires a cs paradigm entry to take the costs from".into());
        }
        Ok(())
    }
}

/// Parses a JSON experiment definition. An empty (or all-whitespace)
/// document yields the defaults.
pub fn load_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = if text.trim().is_empty() {
        ExperimentConfig::default()
    } else {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config_file(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    load_config(&text)
}

//! Experiment driver for the imbalanced-classification benchmark: sweeps the
//! paradigm x resampler x learner x imbalance-ratio matrix with per-cell RNG
//! streams, aggregates repetitions, persists results and renders figures.

pub mod config;
pub mod report;
pub mod results;
pub mod runner;
pub mod seed;

pub use config::{load_config, load_config_file, ConfigError, CostRule, ExperimentConfig, ParadigmSpec};
pub use report::{higher_is_better, render_report, ReportError};
pub use results::{read_results, write_results, ResultsError, RESULTS_HEADER};
pub use runner::{
    mean_stderr, run_cell, run_experiment, CellError, CellIndex, RepFailure, ResultRecord,
    RunOutcome, METRIC_NAMES,
};
pub use seed::{stream_rng, stream_seed, CellCoords, StreamRole};

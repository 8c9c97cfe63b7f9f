//! Executes the experiment matrix cell by cell and aggregates repetitions.

use imblab_core::datagen::{make_dataset, DatagenError};
use imblab_core::metrics::{full_report, MetricsReport};
use imblab_core::paradigms::{fixed_threshold, np_calibrate, np_split, Paradigm, ParadigmError};
use imblab_core::resample;
use imblab_core::{LearnerError, MetricsError, ResampleError};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::seed::{stream_rng, CellCoords, StreamRole};

pub const METRIC_NAMES: [&str; 9] =
    ["risk", "type1", "type2", "cost", "f0", "f1", "roc_auc", "pr_auc0", "pr_auc1"];

fn metric_values(r: &MetricsReport) -> [f64; 9] {
    [r.risk, r.type1, r.type2, r.cost, r.f0, r.f1, r.roc_auc, r.pr_auc0, r.pr_auc1]
}

#[derive(Debug, thiserror::Error)]
pub enum CellError {
    #[error("cell index out of range: {0}")]
    BadIndex(String),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Resample(#[from] ResampleError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Paradigm(#[from] ParadigmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Indices into the config lists identifying one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellIndex {
    pub paradigm: usize,
    pub resampler: usize,
    pub learner: usize,
    pub ir: usize,
}

/// One aggregated metric of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub example: u8,
    pub paradigm: String,
    pub resampler: String,
    pub learner: String,
    pub ir: f64,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub rep_count: u32,
}

/// A repetition that errored; kept alongside the records, never dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct RepFailure {
    pub paradigm: String,
    pub resampler: String,
    pub learner: String,
    pub ir: f64,
    pub rep: u32,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutcome {
    pub records: Vec<ResultRecord>,
    pub failures: Vec<RepFailure>,
}

/// Mean and standard error (sample sd over the square root of the count).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn coords_of(config: &ExperimentConfig, cell: CellIndex) -> Result<CellCoords, CellError> {
    let check = |what: &str, idx: usize, len: usize| -> Result<u16, CellError> {
        if idx >= len {
            return Err(CellError::BadIndex(format!("{what} {idx} of {len}")));
        }
        Ok(idx as u16)
    };
    Ok(CellCoords {
        example: config.example.as_u8(),
        paradigm: check("paradigm", cell.paradigm, config.paradigms.len())?,
        resampler: check("resampler", cell.resampler, config.resamplers.len())?,
        learner: check("learner", cell.learner, config.learners.len())?,
        ir: check("ir", cell.ir, config.ir_list.len())?,
    })
}

/// Runs one repetition of one cell: draw train and test sets, resample, fit,
/// threshold per paradigm, evaluate. The np paradigm holds out half of the
/// class-0 rows before any resampling and calibrates its cutoff on them.
pub fn run_cell(
    config: &ExperimentConfig,
    cell: CellIndex,
    rep: u32,
) -> Result<MetricsReport, CellError> {
    let coords = coords_of(config, cell)?;
    let ir = config.ir_list[cell.ir];
    let rng = |role| stream_rng(config.master_seed, coords, rep, role);

    let train = make_dataset::<f64, _>(config.example, ir, config.n0_train, &mut rng(StreamRole::TrainGen))?;
    let test = make_dataset::<f64, _>(config.example, ir, config.m0_test, &mut rng(StreamRole::TestGen))?;

    let mut hp = config.hyperparams.clone();
    hp.seed = rng(StreamRole::Fit).random();
    let learner = config.learners[cell.learner];
    let resampler = config.resamplers[cell.resampler];
    let paradigm = config.paradigms[cell.paradigm].resolve(config.cost_rule, ir);

    let (model, rule) = match paradigm {
        Paradigm::Np { alpha, delta } => {
            let (fit_part, heldout) =
                np_split(&train, config.np_split_ratio, &mut rng(StreamRole::NpSplit))?;
            let fit_data =
                resample::apply(resampler, &fit_part, &config.smote, &mut rng(StreamRole::Resample))?;
            let model = imblab_core::fit(learner, &fit_data, &hp)?;
            let rule = np_calibrate(&model, &heldout, alpha, delta)?;
            (model, rule)
        }
        _ => {
            let fit_data =
                resample::apply(resampler, &train, &config.smote, &mut rng(StreamRole::Resample))?;
            let model = imblab_core::fit(learner, &fit_data, &hp)?;
            (model, fixed_threshold(&paradigm)?)
        }
    };

    let scores = model.score(test.features())?;
    let (c0, c1) = config.metric_costs(ir);
    Ok(full_report(&scores, &rule, test.labels(), c0, c1)?)
}

struct CellOutcome {
    reports: Vec<MetricsReport>,
    failures: Vec<(u32, String)>,
}

fn run_cell_reps(config: &ExperimentConfig, cell: CellIndex) -> CellOutcome {
    let mut reports = Vec::with_capacity(config.repetitions);
    let mut failures = Vec::new();
    for rep in 0..config.repetitions as u32 {
        match run_cell(config, cell, rep) {
            Ok(report) => reports.push(report),
            Err(err) => failures.push((rep, err.to_string())),
        }
    }
    CellOutcome { reports, failures }
}

fn cell_list(config: &ExperimentConfig) -> Vec<CellIndex> {
    let mut cells = Vec::with_capacity(config.cell_count());
    for paradigm in 0..config.paradigms.len() {
        for resampler in 0..config.resamplers.len() {
            for learner in 0..config.learners.len() {
                for ir in 0..config.ir_list.len() {
                    cells.push(CellIndex { paradigm, resampler, learner, ir });
                }
            }
        }
    }
    cells
}

/// Runs every cell for every repetition on `threads` worker threads and
/// aggregates per-metric means and standard errors. Cells own disjoint RNG
/// streams and results are reassembled in cell order, so the outcome does
/// not depend on the schedule.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> RunOutcome {
    let cells = cell_list(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("experiment thread pool");
    let outcomes: Vec<CellOutcome> =
        pool.install(|| cells.par_iter().map(|&cell| run_cell_reps(config, cell)).collect());

    let mut run = RunOutcome::default();
    for (cell, outcome) in cells.iter().zip(outcomes) {
        let paradigm = config.paradigms[cell.paradigm].tag();
        let resampler = config.resamplers[cell.resampler].tag();
        let learner = config.learners[cell.learner].tag();
        let ir = config.ir_list[cell.ir];
        for (rep, message) in outcome.failures {
            run.failures.push(RepFailure {
                paradigm: paradigm.into(),
                resampler: resampler.into(),
                learner: learner.into(),
                ir,
                rep,
                message,
            });
        }
        if outcome.reports.is_empty() {
            continue;
        }
        let rep_count = outcome.reports.len() as u32;
        let per_metric: Vec<[f64; 9]> = outcome.reports.iter().map(metric_values).collect();
        for (m, name) in METRIC_NAMES.iter().enumerate() {
            let column: Vec<f64> = per_metric.iter().map(|row| row[m]).collect();
            let (mean, stderr) = mean_stderr(&column);
            run.records.push(ResultRecord {
                example: config.example.as_u8(),
                paradigm: paradigm.into(),
                resampler: resampler.into(),
                learner: learner.into(),
                ir,
                metric: (*name).into(),
                mean,
                stderr,
                rep_count,
            });
        }
    }
    run
}

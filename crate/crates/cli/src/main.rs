//! `imblab`: generate benchmark datasets, run experiment sweeps, render
//! reports. Exit codes: 0 success, 1 bad input, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use imblab_core::datagen::{make_dataset, ExampleId};
use imblab_harness::{
    load_config_file, read_results, render_report, run_experiment, write_results, ConfigError,
    ExperimentConfig, ReportError,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "imblab", version, about = "Imbalanced binary classification benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one synthetic dataset and write it as CSV.
    Generate {
        /// Benchmark example, 1 or 2.
        #[arg(long, default_value_t = 1)]
        example: u8,
        /// Imbalance ratio n1/n0, at least 1.
        #[arg(long, default_value_t = 1.0)]
        ir: f64,
        /// Number of class-0 rows.
        #[arg(long, default_value_t = 300)]
        n0: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the experiment sweep defined by a JSON config.
    Run {
        /// Config file; omit to run the built-in default sweep.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        /// Shrink to 30 repetitions, 500 test rows per class-0 unit, IRs {1, 8, 128}.
        #[arg(long)]
        fast: bool,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Render figures and best-combination tables from a results CSV.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

enum AppError {
    /// Bad user input: flags, config contents, malformed input files.
    Input(String),
    /// Failures past validation: I/O, full-sweep breakdowns.
    Runtime(String),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => AppError::Runtime(e.to_string()),
            _ => AppError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Generate { example, ir, n0, seed, out } => generate(example, ir, n0, seed, &out),
        Command::Run { config, out, fast, threads } => run(config.as_deref(), &out, fast, threads),
        Command::Report { results, out_dir } => report(&results, &out_dir),
    }
}

fn generate(example: u8, ir: f64, n0: usize, seed: u64, out: &std::path::Path) -> Result<(), AppError> {
    let example = ExampleId::try_from(example).map_err(|e| AppError::Input(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ds = make_dataset::<f64, _>(example, ir, n0, &mut rng)
        .map_err(|e| AppError::Input(e.to_string()))?;
    ds.write_csv(out).map_err(|e| AppError::Runtime(e.to_string()))?;
    println!(
        "wrote {}: {} rows ({} class 0, {} class 1)",
        out.display(),
        ds.n(),
        ds.class_count(0),
        ds.class_count(1)
    );
    Ok(())
}

fn run(
    config: Option<&std::path::Path>,
    out: &std::path::Path,
    fast: bool,
    threads: usize,
) -> Result<(), AppError> {
    if threads == 0 {
        return Err(AppError::Input("threads must be at least 1".into()));
    }
    let mut cfg = match config {
        Some(path) => load_config_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Ok(value) = std::env::var("IMBLAB_SEED") {
        cfg.master_seed = value
            .trim()
            .parse()
            .map_err(|_| AppError::Input(format!("IMBLAB_SEED must be an unsigned integer, got {value:?}")))?;
    }
    if fast {
        cfg.apply_fast_profile();
    }
    cfg.validate()?;
    println!(
        "running {} cells x {} repetitions on {} thread(s), master seed {}",
        cfg.cell_count(),
        cfg.repetitions,
        threads,
        cfg.master_seed
    );
    let outcome = run_experiment(&cfg, threads);
    if !outcome.failures.is_empty() {
        eprintln!("{} repetition(s) failed:", outcome.failures.len());
        for failure in outcome.failures.iter().take(5) {
            eprintln!(
                "  {}/{}/{} ir={} rep {}: {}",
                failure.paradigm, failure.resampler, failure.learner, failure.ir, failure.rep,
                failure.message
            );
        }
        if outcome.failures.len() > 5 {
            eprintln!("  ... and {} more", outcome.failures.len() - 5);
        }
    }
    write_results(&outcome.records, out).map_err(|e| AppError::Runtime(e.to_string()))?;
    println!("wrote {} records to {}", outcome.records.len(), out.display());
    Ok(())
}

fn report(results: &std::path::Path, out_dir: &std::path::Path) -> Result<(), AppError> {
    let records = read_results(results).map_err(|e| match &e {
        imblab_harness::ResultsError::Csv { source, .. }
            if matches!(source.kind(), csv::ErrorKind::Io(_)) =>
        {
            AppError::Runtime(e.to_string())
        }
        imblab_harness::ResultsError::Io { .. } => AppError::Runtime(e.to_string()),
        _ => AppError::Input(e.to_string()),
    })?;
    let written = render_report(&records, out_dir).map_err(|e| match e {
        ReportError::NoData => AppError::Input(e.to_string()),
        _ => AppError::Runtime(e.to_string()),
    })?;
    println!("wrote {} files to {}", written.len(), out_dir.display());
    Ok(())
}

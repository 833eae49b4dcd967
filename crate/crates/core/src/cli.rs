//! Command-line front end: synthetic data generation, single classifications
//! and full experiment sweeps.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::classifier::{self, LabelWiring, Mode};
use crate::experiments::{
    self, subset_selection, Backend, Dataset, ExperimentConfig, ExperimentError, ExperimentReport, FaceGraph,
    Prediction, TrainingPair, DEFAULT_SUBSETS, DEFAULT_TEST_FACES, DEFAULT_TRAINING_PAIRS,
};
use crate::graphs::Strategy;
use crate::landmarks::{self, synthesize_face, Expression, LandmarkError, MOUTH_POINTS, MOUTH_WIDTH};
use crate::rng::{self, DEFAULT_SEED};

/// Exit code for bad flags or flag values.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for failures while running.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Landmark(#[from] LandmarkError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Experiment(ExperimentError::Config(_)) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "graphiq", version, about = "Classify facial expressions from landmark graphs by quantum interference")]
pub struct Cli {
    /// More log output; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic happy and sad faces in the landmark CSV format.
    Generate(GenerateArgs),
    /// Classify one test face against one (sad, happy) pair.
    Classify(ClassifyArgs),
    /// Run the accuracy sweep and write JSON and CSV reports.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Faces per class.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Landmark jitter as a fraction of the mouth width.
    #[arg(long, default_value_t = 0.03)]
    pub noise: f64,
    #[arg(long, env = "GRAPHIQ_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Landmark CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Row of the test face (0-based).
    #[arg(long)]
    pub test: usize,
    /// Row of the sad training face.
    #[arg(long)]
    pub sad: usize,
    /// Row of the happy training face.
    #[arg(long)]
    pub happy: usize,
    /// Mouth vertices to keep.
    #[arg(short, long, default_value_t = MOUTH_POINTS)]
    pub n: usize,
    #[arg(long, default_value = "complete")]
    pub strategy: Strategy,
    #[arg(long, default_value = "classical")]
    pub backend: Backend,
    #[arg(long, default_value_t = classifier::DEFAULT_SHOTS)]
    pub shots: usize,
    #[arg(long, env = "GRAPHIQ_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Landmark CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Directory for `report.json` and `report.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = experiments::DEFAULT_N_VALUES)]
    pub n_values: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_SUBSETS)]
    pub subsets: usize,
    #[arg(long, default_value_t = DEFAULT_TEST_FACES)]
    pub test_faces: usize,
    #[arg(long, default_value_t = DEFAULT_TRAINING_PAIRS)]
    pub pairs: usize,
    #[arg(long, default_value_t = classifier::DEFAULT_SHOTS)]
    pub shots: usize,
    #[arg(long, alias = "backends", value_delimiter = ',', default_value = "classical")]
    pub backend: Vec<Backend>,
    #[arg(long, alias = "strategies", value_delimiter = ',', default_value = "complete")]
    pub strategy: Vec<Strategy>,
    #[arg(long, env = "GRAPHIQ_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl ExperimentArgs {
    pub fn config(&self) -> ExperimentConfig {
        let mut backends = self.backend.clone();
        backends.dedup();
        let mut strategies = self.strategy.clone();
        strategies.dedup();
        ExperimentConfig {
            n_values: self.n_values.clone(),
            subsets_per_n: self.subsets,
            test_faces: self.test_faces,
            training_pairs: self.pairs,
            shots: self.shots,
            backends,
            strategies,
            seed: self.seed,
        }
    }
}

/// Synthetic faces for `generate`: `count` happy faces, then `count` sad.
pub fn synthetic_faces(count: usize, noise: f64, seed: u64) -> Result<Vec<landmarks::PointCloud>, LandmarkError> {
    let mut rng = rng::stream(&[seed]);
    let mut faces = Vec::with_capacity(2 * count);
    for kind in [Expression::Happy, Expression::Sad] {
        for _ in 0..count {
            faces.push(synthesize_face(kind, noise * MOUTH_WIDTH, &mut rng)?);
        }
    }
    Ok(faces)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    if !(args.noise.is_finite() && args.noise >= 0.0) {
        return Err(CliError::Usage(format!("--noise must be a non-negative number, got {}", args.noise)));
    }
    let faces = synthetic_faces(args.count, args.noise, args.seed)?;
    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(io_error(path))?;
            landmarks::write_landmarks(BufWriter::new(file), &faces)?;
        }
        None => landmarks::write_landmarks(io::stdout().lock(), &faces)?,
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distances {
    pub happy: f64,
    pub sad: f64,
}

/// What `classify` prints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyOutput {
    pub decision: Prediction,
    pub strategy: Strategy,
    pub backend: Backend,
    pub n: usize,
    pub vertices: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<Distances>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots_kept: Option<usize>,
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<ClassifyOutput, CliError> {
    if !(3..=MOUTH_POINTS).contains(&args.n) {
        return Err(CliError::Usage(format!("--n must lie in [3, {MOUTH_POINTS}], got {}", args.n)));
    }
    if args.shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    let faces = landmarks::load_landmarks(&args.data, None)?;
    let row = |r: usize| {
        faces.get(r).ok_or_else(|| {
            CliError::Experiment(ExperimentError::Dataset(format!(
                "row {r} out of range for {} faces",
                faces.len()
            )))
        })
    };
    let picked = [row(args.test)?.clone(), row(args.sad)?.clone(), row(args.happy)?.clone()];
    let data = Dataset::from_faces(&picked)?;
    let selection = subset_selection(args.seed, args.n, 0)?;
    let quantum = args.backend.is_quantum();
    let graph = |i: usize| FaceGraph::build(&data.mouths()[i], &selection, args.strategy, quantum);
    let (test, sad, happy) = (graph(0)?, graph(1)?, graph(2)?);
    let pair = TrainingPair::new(&sad, &happy, quantum)?;
    let mut rng = rng::stream(&[args.seed, 0]);

    let mut out = ClassifyOutput {
        decision: Prediction::Unknown,
        strategy: args.strategy,
        backend: args.backend,
        n: args.n,
        vertices: selection.positions().to_vec(),
        p: None,
        distances: None,
        shots_kept: None,
    };
    let dist = |a: &[f64], b: &[f64]| classifier::frobenius_distance(a, b).map_err(ExperimentError::from);
    match args.backend {
        Backend::Classical | Backend::ClassicalNormalized => {
            let pick = |g: &FaceGraph| -> Vec<f64> {
                if args.backend == Backend::Classical {
                    g.vector.entries().to_vec()
                } else {
                    g.normalized.clone()
                }
            };
            out.decision = pair.classify(&test, args.backend, args.shots, &mut rng)?;
            out.distances = Some(Distances {
                happy: dist(&pick(&test), &pick(&happy))?,
                sad: dist(&pick(&test), &pick(&sad))?,
            });
        }
        Backend::QuantumExact | Backend::QuantumShots => {
            let mode = if args.backend == Backend::QuantumExact { Mode::Exact } else { Mode::Shots(args.shots) };
            let outcome = pair.quantum_outcome(&test, mode, &mut rng)?;
            out.decision = Prediction::from_decision(outcome.decision, LabelWiring::default());
            out.p = Some(outcome.p_class0);
            if let Mode::Shots(_) = mode {
                out.shots_kept = Some(outcome.shots_kept);
            }
        }
    }
    Ok(out)
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<ExperimentReport, CliError> {
    let config = args.config();
    config.validate()?;
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let faces = landmarks::load_landmarks(&args.data, None)?;
    let dataset = Dataset::from_faces(&faces)?;

    let run = || experiments::run_experiment(&config, &dataset);
    let result = match args.threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build()?.install(run),
        None => run(),
    };
    let report = match result {
        Ok(r) => r,
        Err(ExperimentError::Item { item, source, partial }) => {
            write_report(&args.out, &partial)?;
            return Err(ExperimentError::Item { item, source, partial }.into());
        }
        Err(e) => return Err(e.into()),
    };
    write_report(&args.out, &report)?;
    Ok(report)
}

/// Writes `report.json` and `report.csv` into `dir`, creating it if needed.
pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let json = dir.join("report.json");
    fs::write(&json, report.to_json() + "\n").map_err(io_error(&json))?;
    let csv = dir.join("report.csv");
    let file = File::create(&csv).map_err(io_error(&csv))?;
    report.write_csv(BufWriter::new(file))?;
    Ok(())
}

/// Runs a parsed command, printing results to standard output.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let print = |text: String| -> Result<(), CliError> {
        let mut out = stdout.lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(io_error(Path::new("<stdout>")))
    };
    match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Classify(args) => {
            let out = cmd_classify(args)?;
            print(serde_json::to_string_pretty(&out).expect("output serializes") + "\n")
        }
        Command::Experiment(args) => {
            let report = cmd_experiment(args)?;
            print(report.summary_table())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_defaults_match_the_library() {
        let cli = Cli::try_parse_from(["graphiq", "experiment", "--data", "d.csv", "--out", "o"]).unwrap();
        let Command::Experiment(args) = cli.command else { panic!() };
        assert_eq!(args.config(), ExperimentConfig::default());
    }

    #[test]
    fn lists_and_aliases() {
        let cli = Cli::try_parse_from([
            "graphiq",
            "experiment",
            "--data",
            "d.csv",
            "--out",
            "o",
            "--n-values",
            "4,8",
            "--backends",
            "classical,quantum-exact",
            "--strategy",
            "meshed",
        ])
        .unwrap();
        let Command::Experiment(args) = cli.command else { panic!() };
        let c = args.config();
        assert_eq!(c.n_values, vec![4, 8]);
        assert_eq!(c.backends, vec![Backend::Classical, Backend::QuantumExact]);
        assert_eq!(c.strategies, vec![Strategy::Meshed]);
    }

    #[test]
    fn bad_strategy_is_a_usage_error() {
        let err = Cli::try_parse_from(["graphiq", "classify", "--data", "d", "--test", "0", "--sad", "1", "--happy", "2", "--strategy", "sparse"])
            .unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn out_of_range_n_is_a_usage_error() {
        let cli = Cli::try_parse_from(["graphiq", "experiment", "--data", "missing.csv", "--out", "o", "--n-values", "30"]).unwrap();
        let Command::Experiment(args) = cli.command else { panic!() };
        let err = cmd_experiment(&args).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }
}

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage or validation error,
//! 3 I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::json;

use crate::benchmark::{self, BenchmarkConfig, BenchmarkReport};
use crate::data::{load_csv_table, read_matrix, LabelColumn, SplitRule, TrainSide};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{minmax_regret, Learner};
use crate::metrics::log_loss;
use crate::ridge::fit_ridge;
use crate::synth::{self, PolynomialExperimentSpec, Scenario, SubspaceExperimentSpec};
use crate::tuning::{leave_one_out_tune, Loss, TuningGrid, TuningResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SingularMatrix(_) | Error::NumericalFailure(_) | Error::DivisionByZero(_) => EXIT_NUMERICAL,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "lpnml", version, about = "Ridge regression predictive learners")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predict test rows with fixed or tuned hyperparameters.
    Predict(PredictArgs),
    /// Leave-one-out selection of lambda and sigma2.
    Tune(TuneArgs),
    /// Synthetic experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Split, tune and evaluate learners over repeated splits.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Ridge,
    Bayes,
    Pnml,
    Lpnml,
    All,
}

impl LearnerArg {
    fn learners(self) -> Vec<Learner> {
        match self {
            LearnerArg::Ridge => vec![Learner::RidgeErm],
            LearnerArg::Bayes => vec![Learner::Bayesian],
            LearnerArg::Pnml => vec![Learner::Pnml],
            LearnerArg::Lpnml => vec![Learner::Lpnml],
            LearnerArg::All => Learner::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Squared,
    Log,
}

impl From<LossArg> for Loss {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Squared => Loss::SquaredError,
            LossArg::Log => Loss::LogLoss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitKind {
    Random,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainSideArg {
    Below,
    AboveOrEqual,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Training CSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Label column: header name, 0-based index, or "last".
    #[arg(long, default_value = "last")]
    pub label_column: String,
    /// Input CSV files have no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Prepend a constant column of ones to the features.
    #[arg(long)]
    pub add_intercept: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Comma-separated lambda grid (default: 25 log-spaced values on [1e-9, 1e3]).
    #[arg(long, value_delimiter = ',')]
    pub grid_lambdas: Option<Vec<f64>>,
    /// Comma-separated sigma2 grid (default: 11 log-spaced values on [1e-3, 1e2]).
    #[arg(long, value_delimiter = ',')]
    pub grid_sigma2s: Option<Vec<f64>>,
    /// Tuning loss (default: squared for ridge, log for the others).
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
}

impl GridArgs {
    fn grid(&self) -> Result<TuningGrid> {
        let d = TuningGrid::default();
        TuningGrid::new(
            self.grid_lambdas.clone().unwrap_or_else(|| d.lambdas().to_vec()),
            self.grid_sigma2s.clone().unwrap_or_else(|| d.noise_variances().to_vec()),
        )
    }

    fn loss_for(&self, learner: Learner) -> Loss {
        self.loss.map_or(Loss::default_for(learner), Loss::from)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Test CSV; the label column is optional.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, value_enum, default_value = "lpnml")]
    pub learner: LearnerArg,
    /// Fixed lambda (requires --sigma2); omit both to tune.
    #[arg(long, requires = "sigma2")]
    pub lambda: Option<f64>,
    #[arg(long, requires = "lambda")]
    pub sigma2: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "lpnml")]
    pub learner: LearnerArg,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Polynomial features on a handful of uniform points.
    Polynomial(PolynomialArgs),
    /// Predictions inside and orthogonal to the learnable subspace.
    Subspace(SubspaceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PolynomialArgs {
    #[arg(long, default_value_t = 6)]
    pub n_train: usize,
    #[arg(long, default_value_t = 10)]
    pub degree: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    #[arg(long, default_value_t = 201)]
    pub eval_points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SubspaceArgs {
    #[arg(long, default_value_t = 40)]
    pub n_train: usize,
    #[arg(long, default_value_t = 100)]
    pub n_features: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub lambda: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n_test: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    /// Full dataset CSV, split into train and test per repetition.
    #[arg(long = "data", alias = "train")]
    pub data: PathBuf,
    #[arg(long, default_value = "last")]
    pub label_column: String,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long)]
    pub add_intercept: bool,
    #[arg(long, value_enum, default_value = "all")]
    pub learner: LearnerArg,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "random")]
    pub split: SplitKind,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Feature for threshold splits: header name or 0-based feature index.
    #[arg(long)]
    pub split_feature: Option<String>,
    #[arg(long)]
    pub split_threshold: Option<f64>,
    /// Rows strictly below the threshold go to one side; rows equal to it
    /// always land on the at-or-above side.
    #[arg(long, value_enum, default_value = "below")]
    pub train_side: TrainSideArg,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report errors in raw label units.
    #[arg(long)]
    pub no_label_standardize: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let echoed: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, &echoed) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: &Command, args: &[String]) -> Result<()> {
    match command {
        Command::Predict(a) => cmd_predict(a, args),
        Command::Tune(a) => cmd_tune(a, args),
        Command::Experiment(ExperimentCommand::Polynomial(a)) => cmd_polynomial(a, args),
        Command::Experiment(ExperimentCommand::Subspace(a)) => cmd_subspace(a, args),
        Command::Benchmark(a) => cmd_benchmark(a, args),
    }
}

/// Provenance written at the top of every output.
#[derive(Debug, Clone, Serialize)]
struct Metadata {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    args: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_sigma2s: Option<Vec<f64>>,
}

impl Metadata {
    fn new(command: &'static str, args: &[String]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            args: args.to_vec(),
            seed: None,
            grid_lambdas: None,
            grid_sigma2s: None,
        }
    }

    fn with_grid(mut self, grid: &TuningGrid) -> Self {
        self.grid_lambdas = Some(grid.lambdas().to_vec());
        self.grid_sigma2s = Some(grid.noise_variances().to_vec());
        self
    }

    fn csv_header(&self) -> String {
        let value = serde_json::to_value(self).expect("metadata serializes");
        let mut out = String::new();
        for (k, v) in value.as_object().expect("object") {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| Error::io(p, e)),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Comma-joined record. Floats use the shortest round-trip representation.
fn record<I: IntoIterator<Item = String>>(fields: I) -> String {
    let mut s = fields.into_iter().collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn load_training(input: &InputArgs) -> Result<(Dataset, Vec<String>, String)> {
    let label: LabelColumn = input.label_column.parse()?;
    let table = load_csv_table(&input.train, &label, !input.no_header)?;
    let data = if input.add_intercept {
        table.dataset.with_intercept()
    } else {
        table.dataset
    };
    Ok((data, table.feature_names, table.label_name))
}

/// Test features and optional labels. A file one column wider than the
/// training features carries labels in the configured label column.
fn load_test(path: &Path, input: &InputArgs, n_features: usize, label_name: &str) -> Result<(DMatrix<f64>, Option<DVector<f64>>)> {
    let (names, m) = read_matrix(path, !input.no_header)?;
    let raw_features = n_features - usize::from(input.add_intercept);
    let label_idx = if m.ncols() == raw_features {
        None
    } else if m.ncols() == raw_features + 1 {
        let label: LabelColumn = input.label_column.parse()?;
        Some(match label {
            LabelColumn::Last => m.ncols() - 1,
            LabelColumn::Index(i) if i < m.ncols() => i,
            LabelColumn::Name(_) => names
                .iter()
                .position(|n| n == label_name)
                .ok_or_else(|| Error::MissingLabelColumn(label_name.to_string()))?,
            LabelColumn::Index(i) => return Err(Error::MissingLabelColumn(i.to_string())),
        })
    } else {
        return Err(Error::dims("test CSV columns", raw_features + 1, m.ncols()));
    };

    let keep: Vec<usize> = (0..m.ncols()).filter(|j| Some(*j) != label_idx).collect();
    let lead = usize::from(input.add_intercept);
    let features = DMatrix::from_fn(m.nrows(), n_features, |i, j| if j < lead { 1.0 } else { m[(i, keep[j - lead])] });
    let labels = label_idx.map(|l| m.column(l).into_owned());
    Ok((features, labels))
}

/// Fixed `(λ, σ²)` when given, leave-one-out tuned otherwise.
fn hyperparameters(
    learner: Learner,
    train: &Dataset,
    fixed: Option<(f64, f64)>,
    grid: &TuningGrid,
    loss: Loss,
) -> Result<(f64, f64, Option<TuningResult>)> {
    match fixed {
        Some((lambda, s2)) => Ok((learner.fixed_lambda().unwrap_or(lambda), s2, None)),
        None => {
            let t = leave_one_out_tune(train, grid, learner, loss)?;
            Ok((t.lambda, t.noise_variance, Some(t)))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct PredictionRow {
    row: usize,
    learner: Learner,
    lambda: f64,
    sigma2: f64,
    mean: f64,
    variance: f64,
    log_loss: Option<f64>,
    regret: Option<f64>,
}

fn cmd_predict(a: &PredictArgs, args: &[String]) -> Result<()> {
    let (train, _, label_name) = load_training(&a.input)?;
    let (test_x, test_y) = load_test(&a.test, &a.input, train.n_features(), &label_name)?;
    let grid = a.grid.grid()?;
    let fixed = a.lambda.zip(a.sigma2);
    let all = a.learner == LearnerArg::All;

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for learner in a.learner.learners() {
        let fitted = hyperparameters(learner, &train, fixed, &grid, a.grid.loss_for(learner))
            .and_then(|(lambda, s2, _)| Ok((lambda, s2, fit_ridge(&train, lambda, s2)?)));
        let (lambda, s2, model) = match fitted {
            Ok(f) => f,
            Err(Error::SingularMatrix(reason)) if all => {
                eprintln!("warning: skipping {learner}: {reason}");
                skipped.push(learner);
                continue;
            }
            Err(e) => return Err(e),
        };
        for i in 0..test_x.nrows() {
            let x = test_x.row(i).transpose();
            let dist = learner.predict(&model, &x)?;
            rows.push(PredictionRow {
                row: i,
                learner,
                lambda,
                sigma2: s2,
                mean: dist.mean,
                variance: dist.variance,
                log_loss: test_y.as_ref().map(|y| log_loss(&dist, y[i])),
                regret: (learner == Learner::Lpnml).then(|| minmax_regret(&model, &x)).transpose()?,
            });
        }
    }

    let mut meta = Metadata::new("predict", args);
    if fixed.is_none() {
        meta = meta.with_grid(&grid);
    }
    let body = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = meta.csv_header();
            s += &record(["row", "learner", "lambda", "sigma2", "mean", "variance", "log_loss", "regret"].map(String::from));
            for r in &rows {
                s += &record([
                    r.row.to_string(),
                    r.learner.to_string(),
                    num(r.lambda),
                    num(r.sigma2),
                    num(r.mean),
                    num(r.variance),
                    opt_num(r.log_loss),
                    opt_num(r.regret),
                ]);
            }
            s
        }
        Format::Json => to_json(&json!({ "metadata": meta, "skipped": skipped, "predictions": rows })),
    };
    emit(a.output.out.as_deref(), &body)
}

fn cmd_tune(a: &TuneArgs, args: &[String]) -> Result<()> {
    let (train, _, _) = load_training(&a.input)?;
    let grid = a.grid.grid()?;
    let all = a.learner == LearnerArg::All;

    let mut results = Vec::new();
    for learner in a.learner.learners() {
        let loss = a.grid.loss_for(learner);
        match leave_one_out_tune(&train, &grid, learner, loss) {
            Ok(r) => results.push((learner, loss, r)),
            Err(Error::SingularMatrix(reason)) if all => eprintln!("warning: skipping {learner}: {reason}"),
            Err(e) => return Err(e),
        }
    }

    let meta = Metadata::new("tune", args).with_grid(&grid);
    let body = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let entries: Vec<_> = results
                .iter()
                .map(|(learner, loss, r)| {
                    json!({
                        "learner": learner,
                        "loss": loss,
                        "lambda": r.lambda,
                        "noise_variance": r.noise_variance,
                        "per_fold": r.per_fold,
                    })
                })
                .collect();
            to_json(&json!({ "metadata": meta, "results": entries }))
        }
        Format::Csv => {
            let mut s = meta.csv_header();
            s += &record(["learner", "loss", "fold", "lambda", "sigma2", "validation_loss"].map(String::from));
            for (learner, loss, r) in &results {
                for c in &r.per_fold {
                    s += &record([
                        learner.to_string(),
                        loss.to_string(),
                        c.fold.to_string(),
                        num(c.lambda),
                        num(c.noise_variance),
                        num(c.validation_loss),
                    ]);
                }
                s += &record([
                    learner.to_string(),
                    loss.to_string(),
                    "mean".into(),
                    num(r.lambda),
                    num(r.noise_variance),
                    String::new(),
                ]);
            }
            s
        }
    };
    emit(a.output.out.as_deref(), &body)
}

fn write_in(dir: &Path, name: &str, body: &str) -> Result<()> {
    emit(Some(&dir.join(name)), body)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_polynomial(a: &PolynomialArgs, args: &[String]) -> Result<()> {
    let spec = PolynomialExperimentSpec {
        n_train: a.n_train,
        degree: a.degree,
        lambda: a.lambda,
        eval_points: a.eval_points,
        noise_variance: a.sigma2,
        seed: a.seed,
    };
    let exp = synth::run_polynomial_experiment(&spec)?;
    let mut meta = Metadata::new("experiment polynomial", args);
    meta.seed = Some(a.seed);

    let mut table = meta.csv_header();
    table += &record(
        [
            "t", "ridge_mean", "bayes_mean", "bayes_var", "bayes_lo", "bayes_hi", "lpnml_mean", "lpnml_var", "lpnml_lo",
            "lpnml_hi",
        ]
        .map(String::from),
    );
    for r in &exp.rows {
        let (blo, bhi) = r.bayes_band();
        let (llo, lhi) = r.lpnml_band();
        table += &record(
            [r.t, r.ridge_mean, r.bayes_mean, r.bayes_var, blo, bhi, r.lpnml_mean, r.lpnml_var, llo, lhi].map(num),
        );
    }
    let mut training = meta.csv_header();
    training += "t,y\n";
    for (t, y) in exp.train_t.iter().zip(&exp.train_y) {
        training += &record([num(*t), num(*y)]);
    }

    let deviation = exp.lpnml_bayes_deviation();
    let summary = json!({
        "metadata": meta,
        "spec": spec,
        "n_eval": exp.rows.len(),
        "ridge_equals_bayes": exp.rows.iter().all(|r| r.ridge_mean == r.bayes_mean),
        "lpnml_bayes_max_deviation_over_range": deviation,
        "lpnml_matches_bayes": deviation <= 1e-3,
        "band_std_multiplier": synth::BAND_STDS,
    });

    create_dir(&a.out)?;
    write_in(&a.out, "polynomial.csv", &table)?;
    write_in(&a.out, "polynomial_training.csv", &training)?;
    write_in(&a.out, "summary.json", &to_json(&summary))
}

fn cmd_subspace(a: &SubspaceArgs, args: &[String]) -> Result<()> {
    let spec = SubspaceExperimentSpec {
        n_train: a.n_train,
        n_features: a.n_features,
        lambda: a.lambda,
        n_test: a.n_test,
        noise_variance: a.sigma2,
        seed: a.seed,
    };
    let exp = synth::run_subspace_experiment(&spec)?;
    let mut meta = Metadata::new("experiment subspace", args);
    meta.seed = Some(a.seed);

    create_dir(&a.out)?;
    for scenario in [Scenario::Learnable, Scenario::Null] {
        let mut table = meta.csv_header();
        table += "ridge,lpnml_mean,lpnml_variance,norm_sq\n";
        for p in exp.points(scenario) {
            table += &record([p.ridge, p.lpnml_mean, p.lpnml_variance, p.norm_sq].map(num));
        }
        write_in(&a.out, &format!("subspace_{}.csv", scenario.name()), &table)?;
    }
    let summary = json!({
        "metadata": meta,
        "spec": spec,
        "n_test_per_scenario": spec.n_test,
        "summary": exp.summary(),
    });
    write_in(&a.out, "summary.json", &to_json(&summary))
}

fn split_rule(a: &BenchmarkArgs, feature_names: &[String]) -> Result<SplitRule> {
    match a.split {
        SplitKind::Random => SplitRule::random(a.test_fraction),
        SplitKind::Threshold => {
            let feature = a
                .split_feature
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("--split-feature is required for threshold splits".into()))?;
            let threshold = a
                .split_threshold
                .ok_or_else(|| Error::InvalidParameter("--split-threshold is required for threshold splits".into()))?;
            let index = match feature.parse::<usize>() {
                Ok(i) => i,
                Err(_) => feature_names
                    .iter()
                    .position(|n| n == feature)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown split feature {feature:?}")))?,
            };
            if index >= feature_names.len() {
                return Err(Error::dims("split feature index", feature_names.len(), index));
            }
            let side = match a.train_side {
                TrainSideArg::Below => TrainSide::Below,
                TrainSideArg::AboveOrEqual => TrainSide::AboveOrEqual,
            };
            SplitRule::threshold(index, threshold, side)
        }
    }
}

fn cmd_benchmark(a: &BenchmarkArgs, args: &[String]) -> Result<()> {
    let label: LabelColumn = a.label_column.parse()?;
    let table = load_csv_table(&a.data, &label, !a.no_header)?;
    let config = BenchmarkConfig {
        rule: split_rule(a, &table.feature_names)?,
        repetitions: a.reps,
        seed: a.seed,
        learners: a.learner.learners(),
        grid: a.grid.grid()?,
        loss: a.grid.loss.map(Loss::from),
        standardize_features: true,
        standardize_labels: !a.no_label_standardize,
        add_intercept: a.add_intercept,
        skip_singular: a.learner == LearnerArg::All,
    };
    let report = benchmark::run_benchmark(&table.dataset, &config)?;
    for s in &report.skipped {
        eprintln!("warning: skipped {}: {}", s.learner, s.reason);
    }

    let mut meta = Metadata::new("benchmark", args).with_grid(&config.grid);
    meta.seed = Some(a.seed);
    let body = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => benchmark_csv(&meta, &report),
        Format::Json => to_json(&json!({ "metadata": meta, "config": config, "report": report })),
    };
    emit(a.output.out.as_deref(), &body)
}

fn benchmark_csv(meta: &Metadata, report: &BenchmarkReport) -> String {
    let mut s = meta.csv_header();
    s += &record(
        [
            "learner",
            "loss",
            "mse",
            "mse_ci95",
            "rmse",
            "log_loss",
            "log_loss_ci95",
            "n_train",
            "n_test",
            "reps",
            "lambda_mean",
            "sigma2_mean",
            "mse_reduction_pct",
            "log_loss_reduction",
        ]
        .map(String::from),
    );
    for r in &report.learners {
        let k = r.repetitions.len() as f64;
        let lambda = r.repetitions.iter().map(|x| x.lambda).sum::<f64>() / k;
        let s2 = r.repetitions.iter().map(|x| x.noise_variance).sum::<f64>() / k;
        s += &record([
            r.learner.to_string(),
            r.loss.to_string(),
            num(r.report.mse),
            num(r.report.mse_ci95_halfwidth),
            num(r.report.rmse),
            num(r.report.mean_log_loss),
            num(r.report.log_loss_ci95_halfwidth),
            report.n_train.to_string(),
            r.report.n_test.to_string(),
            r.report.repetitions.to_string(),
            num(lambda),
            num(s2),
            opt_num(r.mse_reduction_percent),
            opt_num(r.log_loss_reduction),
        ]);
    }
    s
}

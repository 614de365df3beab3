//! Command-line front end. [`run`] parses arguments, executes a subcommand
//! and returns the process exit code: 0 on success, 1 on usage errors and 2
//! on data errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::data::{load_csv, load_csv_with_schema, train_test_split, AttributeSource, CsvSpec};
use crate::error::{Error, Result};
use crate::metrics::{expected_cost, group_stats, pairwise_viol, standard_viol};
use crate::model::{CostMatrix, Dataset, FairnessNotion, ThresholdModel};
use crate::pipeline::{
    constant_median_baseline, evaluate, fit_pom, frontier_csv, lambda_from_prime, mixture_eval, sweep, train_two_step, Coupling,
    PomConfig, TradeoffConfig, TwoStepConfig,
};
use crate::reduction::FairClassifierConfig;
use crate::simulate::{convergence_experiment, enumerate_fair_threshold_fractions, Population};
use crate::thresholds::{exact_dp, InitPolicy, ScoredSamples, ThresholdObjectiveConfig};

#[derive(Parser, Debug)]
#[command(name = "ordfair", version, about = "Fair ordinal regression with threshold models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Group sizes and label-order statistics of a dataset.
    Stats(StatsArgs),
    /// Train a two-step model and write it as JSON.
    Train(TrainArgs),
    /// Cost and fairness metrics of a saved model on a dataset.
    Evaluate(EvaluateArgs),
    /// Train one model per trade-off value and write the frontier as CSV.
    Sweep(SweepArgs),
    /// Proportional-odds, constant-median or randomized-mixture baselines.
    Baseline(BaselineArgs),
    /// Exactly optimal thresholds for a given scorer (small data only).
    DpExact(DpExactArgs),
    /// Scorer violation vs. fraction of fair threshold placements.
    Simulate(SimulateArgs),
    /// Convergence of the empirical violation with the sample size.
    Convergence(ConvergenceArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NotionArg {
    Dp,
    Eo,
}

impl From<NotionArg> for FairnessNotion {
    fn from(n: NotionArg) -> Self {
        match n {
            NotionArg::Dp => FairnessNotion::PairwiseDp,
            NotionArg::Eo => FairnessNotion::PairwiseEo,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CostArg {
    Absolute,
    Binary,
    Asymmetric,
}

impl CostArg {
    fn matrix(self, k: usize) -> CostMatrix {
        match self {
            CostArg::Absolute => CostMatrix::absolute(k),
            CostArg::Binary => CostMatrix::binary(k),
            CostArg::Asymmetric => CostMatrix::asymmetric(k),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CouplingArg {
    Coupled,
    ScorerOnly,
    ThresholdsOnly,
}

impl From<CouplingArg> for Coupling {
    fn from(c: CouplingArg) -> Self {
        match c {
            CouplingArg::Coupled => Coupling::Coupled,
            CouplingArg::ScorerOnly => Coupling::ScorerOnly,
            CouplingArg::ThresholdsOnly => Coupling::ThresholdsOnly,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InitArg {
    Random,
    CostOnlyDp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BaselineKind {
    Pom,
    Constant,
    Mixture,
}

/// Columns of the input CSV.
#[derive(Args, Debug, Clone)]
pub struct ColumnArgs {
    /// Column holding the ordinal label (any ordered values).
    #[arg(long)]
    pub label_col: String,
    /// Categorical column used as the protected attribute.
    #[arg(long, conflicts_with = "attr_median_split", required_unless_present = "attr_median_split")]
    pub attr_col: Option<String>,
    /// Numeric column split at its median into the protected attribute.
    #[arg(long)]
    pub attr_median_split: Option<String>,
    /// Comma-separated feature columns (default: all other columns).
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
}

impl ColumnArgs {
    fn spec(&self) -> CsvSpec {
        let attribute = match (&self.attr_col, &self.attr_median_split) {
            (Some(c), _) => AttributeSource::Column(c.clone()),
            (None, Some(c)) => AttributeSource::MedianSplit(c.clone()),
            (None, None) => unreachable!("clap requires one attribute source"),
        };
        CsvSpec {
            label_column: self.label_col.clone(),
            attribute,
            features: self.features.clone(),
        }
    }
}

/// Input data with an optional held-out part.
#[derive(Args, Debug, Clone)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Separate test file, encoded like the training file.
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    /// Seed of the random train/test split (default: --seed).
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Fraction of --data held out when no --test-data is given; 0 disables.
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[command(flatten)]
    pub columns: ColumnArgs,
}

impl SplitArgs {
    fn load(&self, seed: u64) -> Result<(Dataset, Option<Dataset>, Vec<String>)> {
        let (data, schema) = load_csv(&self.data, &self.columns.spec())?;
        let names = schema.features.clone();
        if let Some(path) = &self.test_data {
            let test = load_csv_with_schema(path, &schema)?;
            return Ok((data, Some(test), names));
        }
        if self.test_fraction == 0.0 {
            return Ok((data, None, names));
        }
        let (train, test) = train_test_split(&data, self.test_fraction, self.split_seed.unwrap_or(seed))?;
        Ok((train, Some(test), names))
    }
}

/// Settings shared by the training subcommands.
#[derive(Args, Debug, Clone)]
pub struct TrainingArgs {
    #[arg(long, value_enum, default_value = "dp")]
    pub notion: NotionArg,
    #[arg(long, value_enum, default_value = "absolute")]
    pub cost: CostArg,
    /// Local search restarts.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value = "random")]
    pub init: InitArg,
    /// Maximum number of label-distinct pairs used to train the scorer.
    #[arg(long, default_value_t = 600_000)]
    pub pair_cap: usize,
    /// Multipliers per axis of the fair-classification grid.
    #[arg(long, default_value_t = 100)]
    pub grid_size: usize,
    /// Fixed L2 strength of the scorer (cross-validated when absent).
    #[arg(long)]
    pub regularization: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TrainingArgs {
    fn config(&self, k: usize, mu_lambda: f64) -> TwoStepConfig {
        let mut c = TwoStepConfig::coupled(self.notion.into(), mu_lambda, self.cost.matrix(k));
        c.restarts = self.restarts;
        c.init = match self.init {
            InitArg::Random => InitPolicy::Random,
            InitArg::CostOnlyDp => InitPolicy::CostOnlyDp,
        };
        c.scorer = FairClassifierConfig {
            pair_cap: self.pair_cap,
            grid_size: self.grid_size,
            regularization: self.regularization,
            ..FairClassifierConfig::default()
        };
        c.seed = self.seed;
        c
    }
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub columns: ColumnArgs,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Sets both fairness weights μ and λ' (each in [0, 1)).
    #[arg(long, default_value_t = 0.5)]
    pub mu_lambda: f64,
    /// Overrides μ of the scorer stage.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Overrides λ' of the threshold stage.
    #[arg(long)]
    pub lambda_prime: Option<f64>,
    /// Model JSON output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Training report JSON output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub columns: ColumnArgs,
    #[arg(long, value_enum, default_value = "absolute")]
    pub cost: CostArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Comma-separated trade-off values (default 0, 0.1, …, 0.9).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "coupled")]
    pub coupling: CouplingArg,
    /// Insert midpoints between values whose violations differ by more than this.
    #[arg(long)]
    pub refine: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub refine_budget: usize,
    /// Frontier CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full frontier points, including models, as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, value_enum, default_value = "pom")]
    pub kind: BaselineKind,
    #[arg(long, value_enum, default_value = "dp")]
    pub notion: NotionArg,
    #[arg(long, value_enum, default_value = "absolute")]
    pub cost: CostArg,
    /// Mixture probabilities (default j/50 for j = 1..49).
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DpExactArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub columns: ColumnArgs,
    /// Scorer taken from a saved model.
    #[arg(long, conflicts_with = "score_col", required_unless_present = "score_col")]
    pub model: Option<PathBuf>,
    /// Column holding precomputed scores (excluded from features).
    #[arg(long)]
    pub score_col: Option<String>,
    #[arg(long, value_enum, default_value = "dp")]
    pub notion: NotionArg,
    #[arg(long, value_enum, default_value = "absolute")]
    pub cost: CostArg,
    /// Fairness weight λ' in [0, 1), mapped to λ = kλ'/(1-λ').
    #[arg(long, default_value_t = 0.5)]
    pub lambda_prime: f64,
    /// Overrides the size guard (40 for DP, 25 for EO).
    #[arg(long)]
    pub size_limit: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Comma-separated attribute per sample (n = its length, at most 10).
    #[arg(long, value_delimiter = ',', default_value = "0,0,0,0,1,1,1,1")]
    pub attrs: Vec<usize>,
    /// Comma-separated labels, required for EO.
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "dp")]
    pub notion: NotionArg,
    /// Scatter CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConvergenceArgs {
    /// Population as the empirical distribution of this file (needs --model
    /// and the column flags); a built-in population is used otherwise.
    #[arg(long, requires = "model")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub label_col: Option<String>,
    #[arg(long)]
    pub attr_col: Option<String>,
    #[arg(long)]
    pub attr_median_split: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "dp")]
    pub notion: NotionArg,
    #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Table CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn load_model(path: &Path) -> Result<ThresholdModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::Data(format!("cannot read model {}: {e}", path.display())))?;
    ThresholdModel::from_json(&text)
}

fn stats(args: &StatsArgs) -> Result<()> {
    let (data, _) = load_csv(&args.data, &args.columns.spec())?;
    emit(args.out.as_deref(), &to_json(&group_stats(&data))?)
}

fn train(args: &TrainArgs) -> Result<()> {
    let seed = args.training.seed;
    let (train, test, names) = args.split.load(seed)?;
    let mut config = args.training.config(train.k(), args.mu_lambda);
    config.mu = args.mu.unwrap_or(args.mu_lambda);
    config.lambda_prime = args.lambda_prime.unwrap_or(args.mu_lambda);
    let outcome = train_two_step(&train, &config)?;
    let mut point = outcome.point;
    point.model.metadata.feature_names = names;
    if let Some(t) = &test {
        point.test = Some(evaluate(&point.model, t, &config.cost, config.notion)?);
    }
    emit(args.out.as_deref(), &(point.model.to_json()? + "\n"))?;
    if let Some(path) = &args.report {
        let report = json!({
            "frontier_point": {
                "mu": point.mu,
                "lambda_prime": point.lambda_prime,
                "lambda": point.lambda,
                "train": point.train,
                "test": point.test,
                "scorer_gap": point.scorer_gap,
                "seed": point.seed,
            },
            "scorer": outcome.scorer_report,
        });
        emit(Some(path), &to_json(&report)?)?;
    }
    Ok(())
}

fn optional_metric(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedViolation { .. }) | Err(Error::Unsupported(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn evaluate_cmd(args: &EvaluateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let mut spec = args.columns.spec();
    if spec.features.is_none() && !model.metadata.feature_names.is_empty() {
        spec.features = Some(model.metadata.feature_names.clone());
    }
    let (data, _) = load_csv(&args.data, &spec)?;
    if model.k() != data.k() {
        return Err(Error::InvalidConfig(format!(
            "model predicts {} classes but the data has {}",
            model.k(),
            data.k()
        )));
    }
    let preds = model.predict_dataset(&data)?;
    let (k, g) = (data.k(), data.n_groups());
    let pairwise = |n| optional_metric(pairwise_viol(n, data.attrs(), data.labels(), &preds, k, g).map(|r| r.violation));
    let standard = |n| optional_metric(standard_viol(n, data.attrs(), data.labels(), &preds, k, g));
    let report = json!({
        "n": data.len(),
        "k": k,
        "groups": data.attribute_names(),
        "cost": expected_cost(data.labels(), &preds, &args.cost.matrix(k))?,
        "pairwise_dp": pairwise(FairnessNotion::PairwiseDp)?,
        "pairwise_eo": pairwise(FairnessNotion::PairwiseEo)?,
        "pairwise_equalized_odds": pairwise(FairnessNotion::PairwiseEqOdds)?,
        "standard_dp": standard(FairnessNotion::StandardDp)?,
        "standard_eo": standard(FairnessNotion::StandardEo)?,
        "equalized_odds": standard(FairnessNotion::EqualizedOdds)?,
    });
    emit(args.out.as_deref(), &to_json(&report)?)
}

fn sweep_cmd(args: &SweepArgs) -> Result<()> {
    let (train, test, names) = args.split.load(args.training.seed)?;
    let base = args.training.config(train.k(), 0.0);
    let mut tradeoff = TradeoffConfig {
        coupling: args.coupling.into(),
        refine_gap: args.refine,
        refine_budget: args.refine_budget,
        ..TradeoffConfig::default()
    };
    if let Some(g) = &args.grid {
        tradeoff.grid = g.clone();
    }
    let mut points = sweep(&train, test.as_ref(), &base, &tradeoff)?;
    for p in &mut points {
        p.model.metadata.feature_names = names.clone();
    }
    emit(args.out.as_deref(), &frontier_csv(&points)?)?;
    if let Some(path) = &args.json {
        emit(Some(path), &to_json(&points)?)?;
    }
    Ok(())
}

fn baseline(args: &BaselineArgs) -> Result<()> {
    let (train, test, names) = args.split.load(args.seed)?;
    let eval_set = test.as_ref().unwrap_or(&train);
    let cost = args.cost.matrix(train.k());
    let notion: FairnessNotion = args.notion.into();
    let report = match args.kind {
        BaselineKind::Constant | BaselineKind::Pom => {
            let mut model = if matches!(args.kind, BaselineKind::Constant) {
                constant_median_baseline(&train)?
            } else {
                let fit = fit_pom(&train, &PomConfig::default())?;
                if !fit.converged {
                    eprintln!("warning: proportional-odds fit stopped before convergence");
                }
                fit.model
            };
            model.metadata.feature_names = names;
            json!({
                "kind": model.metadata.kind,
                "train": evaluate(&model, &train, &cost, notion)?,
                "test": test.as_ref().map(|t| evaluate(&model, t, &cost, notion)).transpose()?,
                "model": model,
            })
        }
        BaselineKind::Mixture => {
            let base = fit_pom(&train, &PomConfig::default())?.model;
            let grid = args
                .p_grid
                .clone()
                .unwrap_or_else(|| (1..50).map(|j| j as f64 / 50.0).collect());
            let points = mixture_eval(&base, &train, eval_set, &grid, args.trials, &cost, notion, args.seed)?;
            json!({ "kind": "mixture", "trials": args.trials, "points": points })
        }
    };
    emit(args.out.as_deref(), &to_json(&report)?)
}

fn dp_exact(args: &DpExactArgs) -> Result<()> {
    let mut spec = args.columns.spec();
    let (data, scores) = match (&args.model, &args.score_col) {
        (Some(path), _) => {
            let model = load_model(path)?;
            if spec.features.is_none() && !model.metadata.feature_names.is_empty() {
                spec.features = Some(model.metadata.feature_names.clone());
            }
            let (data, _) = load_csv(&args.data, &spec)?;
            let scores = data.rows().map(|x| model.score(x)).collect::<Result<Vec<_>>>()?;
            (data, scores)
        }
        (None, Some(col)) => {
            // Load the score column as the only feature.
            spec.features = Some(vec![col.clone()]);
            let (data, _) = load_csv(&args.data, &spec)?;
            let scores = data.features().to_vec();
            (data, scores)
        }
        (None, None) => unreachable!("clap requires a scorer"),
    };
    let k = data.k();
    let mut config = ThresholdObjectiveConfig::new(lambda_from_prime(args.lambda_prime, k)?, args.cost.matrix(k), args.notion.into());
    config.exact_size_limit = args.size_limit;
    let samples = ScoredSamples::new(&scores, data.labels(), data.attrs(), data.n_groups())?;
    let sol = exact_dp(&samples, &config)?;
    let report = json!({
        "n": data.len(),
        "k": k,
        "lambda": config.lambda,
        "thresholds": sol.thresholds.values(),
        "positions": sol.positions,
        "cost": sol.value.cost,
        "violation": sol.value.violation,
        "objective": sol.value.objective,
    });
    emit(args.out.as_deref(), &to_json(&report)?)
}

fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let result = enumerate_fair_threshold_fractions(args.k, &args.attrs, args.labels.as_deref(), args.notion.into())?;
    eprintln!(
        "{} permutations, {} predictors each, Spearman correlation {}",
        result.points.len(),
        result.placements,
        result.spearman
    );
    emit(args.out.as_deref(), &result.scatter_csv()?)
}

fn convergence_cmd(args: &ConvergenceArgs) -> Result<()> {
    let population = match (&args.data, &args.model) {
        (Some(path), Some(model_path)) => {
            let label_col = args
                .label_col
                .clone()
                .ok_or_else(|| Error::InvalidConfig("--label-col is required with --data".into()))?;
            let attribute = match (&args.attr_col, &args.attr_median_split) {
                (Some(c), None) => AttributeSource::Column(c.clone()),
                (None, Some(c)) => AttributeSource::MedianSplit(c.clone()),
                _ => {
                    return Err(Error::InvalidConfig(
                        "exactly one of --attr-col and --attr-median-split is required with --data".into(),
                    ))
                }
            };
            let model = load_model(model_path)?;
            let features = args
                .features
                .clone()
                .or_else(|| (!model.metadata.feature_names.is_empty()).then(|| model.metadata.feature_names.clone()));
            let (data, _) = load_csv(
                path,
                &CsvSpec {
                    label_column: label_col,
                    attribute,
                    features,
                },
            )?;
            let preds = model.predict_dataset(&data)?;
            Population::from_samples(data.labels(), data.attrs(), &preds, data.k(), data.n_groups())?
        }
        _ => Population::demo(),
    };
    let table = convergence_experiment(&population, args.notion.into(), &args.n_grid, args.repetitions, args.delta, args.seed)?;
    eprintln!(
        "population violation {}, quantile ≈ {}/√n with R² = {}",
        table.population_violation, table.rate_constant, table.r_squared
    );
    emit(args.out.as_deref(), &table.to_csv()?)
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Stats(a) => stats(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Baseline(a) => baseline(a),
        Command::DpExact(a) => dp_exact(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Convergence(a) => convergence_cmd(a),
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) if e.is_usage() => {
            eprintln!("error: {e}");
            eprintln!("hint: run with --help to see the accepted options and limits");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["ordfair", "stats", "--nope"]), 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["ordfair", "--help"]), 0);
    }
}

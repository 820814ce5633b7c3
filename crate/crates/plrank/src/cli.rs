//! Command-line front end.
//!
//! Subcommands: `stats`, `diagnose`, `train`, `evaluate`, `crossval`, and
//! `synth`. Every command echoes its effective configuration (including
//! resolved defaults) before its results, prints text by default or a
//! single JSON document under `--json`, and is bit-reproducible: the same
//! inputs and flags give byte-identical output regardless of `--jobs`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or format
//! error, 3 numerical failure.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::anneal::{self, AnnealConfig, AnnealTermination, AnnealTrace};
use crate::cg::{self, CgConfig, CgTermination};
use crate::corpus::Corpus;
use crate::diagnostics::{self, DiagnosisKind};
use crate::error::{Error, Result};
use crate::eval::{self, EstimatorSpec};
use crate::loglinear::{self, ParameterVector};
use crate::parallel;
use crate::synth::{self, FiniteUniverse, GroundTruth};

#[derive(Parser)]
#[command(
    name = "plrank",
    version,
    about = "Discriminative reranking of candidate parses",
    disable_help_subcommand = true
)]
struct Cli {
    /// Emit one JSON document instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for cross-validation folds and training chains
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a corpus: sentence and parse counts
    Stats(StatsArgs),
    /// Flag pseudo-constant and pseudo-maximal/minimal features
    Diagnose(DiagnoseArgs),
    /// Fit parameters to a corpus
    Train(TrainArgs),
    /// Score a parameter file on a corpus
    Evaluate(EvaluateArgs),
    /// Compare estimators by k-fold cross-validation
    Crossval(CrossvalArgs),
    /// Sample a corpus from a finite universe with known parameters
    Synth(SynthArgs),
}

#[derive(Args)]
struct DropArgs {
    /// File listing feature names to remove, one per line ('#' comments)
    #[arg(long, value_name = "FILE")]
    drop_features: Option<PathBuf>,
}

#[derive(Args)]
struct PlArgs {
    /// Penalty width multiplier: sigma_j = multiplier * max_j
    #[arg(long, default_value_t = 7.0)]
    sigma_multiplier: f64,

    /// Conjugate-gradient iteration cap
    #[arg(long, default_value_t = 500)]
    max_iter: usize,

    /// Gradient-norm convergence tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

impl PlArgs {
    fn cg_config(&self) -> CgConfig {
        CgConfig {
            max_iterations: self.max_iter,
            gradient_norm_tol: self.tol,
            ..CgConfig::default()
        }
    }
}

#[derive(Args)]
struct AnnealArgs {
    /// Starting temperature of the annealing schedule
    #[arg(long, default_value_t = 1.0)]
    t0: f64,

    /// Temperature decay factor per level, in (0, 1)
    #[arg(long, default_value_t = 0.95)]
    cooling: f64,

    /// Simplex moves per temperature level [default: 100 per parameter]
    #[arg(long, value_name = "N")]
    moves: Option<usize>,

    /// Stop once the temperature falls below this
    #[arg(long, default_value_t = 1e-3)]
    tmin: f64,

    /// Half-width of the search box: weights stay in [-box, box]
    #[arg(long = "box", default_value_t = 100.0)]
    parameter_box: f64,
}

impl AnnealArgs {
    fn anneal_config(&self, seed: u64) -> AnnealConfig {
        AnnealConfig {
            initial_temperature: self.t0,
            cooling_factor: self.cooling,
            moves_per_temperature: self.moves,
            min_temperature: self.tmin,
            seed,
            parameter_box: self.parameter_box,
            ..AnnealConfig::default()
        }
    }
}

#[derive(Args)]
struct StatsArgs {
    /// Corpus file (one JSON record per line)
    corpus: PathBuf,
    #[command(flatten)]
    drop: DropArgs,
}

#[derive(Args)]
struct DiagnoseArgs {
    corpus: PathBuf,
    /// Also write the full report as JSON to this file
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(flatten)]
    drop: DropArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
enum TrainEstimator {
    /// Penalized pseudo-likelihood by conjugate gradients
    Pl,
    /// Correct-count maximization by simulated annealing
    Correct,
}

impl fmt::Display for TrainEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainEstimator::Pl => "pl",
            TrainEstimator::Correct => "correct",
        })
    }
}

#[derive(Args)]
struct TrainArgs {
    corpus: PathBuf,

    /// Fitting objective
    #[arg(long, value_enum, default_value_t = TrainEstimator::Pl)]
    estimator: TrainEstimator,

    /// Where to write the fitted parameters (JSON)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// Also write the optimizer trace as JSON to this file
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,

    /// Annealing seed (chain c runs with seed + c)
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Independent annealing restarts; the best result wins
    #[arg(long, default_value_t = 1)]
    chains: usize,

    #[command(flatten)]
    pl: PlArgs,
    #[command(flatten)]
    anneal: AnnealArgs,
    #[command(flatten)]
    drop: DropArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    corpus: PathBuf,

    /// Parameter file written by `train`
    #[arg(long, value_name = "FILE")]
    params: PathBuf,

    #[command(flatten)]
    drop: DropArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
enum CvEstimatorArg {
    /// All-zero weights
    Baseline,
    /// Penalized pseudo-likelihood
    Pl,
    /// Correct-count maximization
    Correct,
}

impl fmt::Display for CvEstimatorArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CvEstimatorArg::Baseline => "baseline",
            CvEstimatorArg::Pl => "pl",
            CvEstimatorArg::Correct => "correct",
        })
    }
}

#[derive(Args)]
struct CrossvalArgs {
    corpus: PathBuf,

    /// Number of folds
    #[arg(long, default_value_t = 10)]
    k: usize,

    /// Fold-assignment seed (also the annealing base seed)
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Estimators to compare, comma separated
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = [CvEstimatorArg::Baseline, CvEstimatorArg::Pl]
    )]
    estimators: Vec<CvEstimatorArg>,

    /// Also write the full report as JSON to this file
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,

    #[command(flatten)]
    pl: PlArgs,
    #[command(flatten)]
    anneal: AnnealArgs,
    #[command(flatten)]
    drop: DropArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Universe file (JSON)
    #[arg(long, value_name = "FILE")]
    universe: PathBuf,

    /// Ground-truth parameter file [default: all zeros]
    #[arg(long, value_name = "FILE")]
    theta: Option<PathBuf>,

    /// Number of sentences to sample
    #[arg(long)]
    n: usize,

    /// Generation seed
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Where to write the sampled corpus (one JSON record per line)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

/// Parses `args` (argv style, program name first) and runs the selected
/// command. Returns the process exit code instead of exiting, so callers
/// and tests stay in control.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; they are not failures.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if cli.jobs == 0 {
        return Err(Error::config("--jobs must be at least 1"));
    }
    let out = Output { json: cli.json };
    match cli.command {
        Command::Stats(args) => cmd_stats(args, &out),
        Command::Diagnose(args) => cmd_diagnose(args, &out),
        Command::Train(args) => cmd_train(args, &out, cli.jobs),
        Command::Evaluate(args) => cmd_evaluate(args, &out),
        Command::Crossval(args) => cmd_crossval(args, &out, cli.jobs),
        Command::Synth(args) => cmd_synth(args, &out),
    }
}

struct Output {
    json: bool,
}

impl Output {
    /// Prints the configuration echo and the payload. Text mode: `# key:
    /// value` lines followed by `text`. JSON mode: one document with
    /// "config" and `key` members.
    fn emit(
        &self,
        config: Vec<(&'static str, Value)>,
        key: &'static str,
        payload: Value,
        text: String,
    ) {
        if self.json {
            let mut cfg = Map::new();
            for (k, v) in config {
                cfg.insert(k.to_string(), v);
            }
            let mut root = Map::new();
            root.insert("config".to_string(), Value::Object(cfg));
            root.insert(key.to_string(), payload);
            println!(
                "{}",
                serde_json::to_string_pretty(&Value::Object(root)).expect("report is valid JSON")
            );
        } else {
            for (k, v) in &config {
                match v {
                    Value::String(s) => println!("# {k}: {s}"),
                    other => println!("# {k}: {other}"),
                }
            }
            print!("{text}");
        }
    }
}

fn kv(key: &'static str, value: impl Into<Value>) -> (&'static str, Value) {
    (key, value.into())
}

fn path_value(path: &Path) -> Value {
    Value::String(path.display().to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::data(format!("cannot serialize report: {e}")))
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::data(format!("cannot serialize report: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_feature_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(String::from)
        .collect())
}

fn load_corpus(path: &Path, drop: &DropArgs) -> Result<Corpus> {
    let corpus = Corpus::load(path)?;
    match &drop.drop_features {
        None => Ok(corpus),
        Some(list) => corpus.drop_features(&read_feature_list(list)?),
    }
}

fn input_config(
    command: &'static str,
    corpus: &Path,
    drop: &DropArgs,
) -> Vec<(&'static str, Value)> {
    let mut config = vec![kv("command", command), ("corpus", path_value(corpus))];
    if let Some(list) = &drop.drop_features {
        config.push(("drop_features", path_value(list)));
    }
    config
}

fn cg_termination_label(t: CgTermination) -> &'static str {
    match t {
        CgTermination::GradientConverged => "gradient converged",
        CgTermination::ObjectiveConverged => "objective converged",
        CgTermination::MaxIterations => "iteration cap reached",
        CgTermination::Stalled => "stalled",
    }
}

fn anneal_termination_label(t: AnnealTermination) -> &'static str {
    match t {
        AnnealTermination::MinTemperature => "minimum temperature reached",
        AnnealTermination::PerfectScore => "perfect score",
    }
}

const KEY: usize = 28;

fn cmd_stats(args: StatsArgs, out: &Output) -> Result<()> {
    let corpus = load_corpus(&args.corpus, &args.drop)?;
    let stats = corpus.stats();
    let config = input_config("stats", &args.corpus, &args.drop);
    let text = format!(
        "{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{}\n",
        "sentences",
        stats.n_sentences,
        "ambiguous sentences",
        stats.n_ambiguous,
        "parses of ambiguous",
        stats.n_parses_of_ambiguous,
    );
    out.emit(config, "stats", to_json(&stats)?, text);
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs, out: &Output) -> Result<()> {
    let corpus = load_corpus(&args.corpus, &args.drop)?;
    let report = diagnostics::diagnose(&corpus);
    if let Some(path) = &args.report {
        write_json_file(path, &report)?;
    }

    let mut config = input_config("diagnose", &args.corpus, &args.drop);
    if let Some(path) = &args.report {
        config.push(("report", path_value(path)));
    }

    let mut text = format!(
        "{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{}\n",
        "features",
        report.n_features,
        "pseudo-constant",
        report.n_pseudo_constant,
        "pseudo-maximal",
        report.n_pseudo_maximal,
        "pseudo-minimal",
        report.n_pseudo_minimal,
        "unremarkable",
        report.n_unremarkable,
    );
    let flagged: Vec<_> = report
        .diagnoses
        .iter()
        .filter(|d| d.kind != DiagnosisKind::Unremarkable)
        .collect();
    if !flagged.is_empty() {
        text.push('\n');
        let width = flagged.iter().map(|d| d.name.len()).max().unwrap().max(8) + 2;
        for d in &flagged {
            let witness = d
                .witness
                .as_deref()
                .map(|w| format!("  (witness: {w})"))
                .unwrap_or_default();
            text.push_str(&format!(
                "{:<width$}{}{}\n",
                d.name,
                d.kind.label(),
                witness
            ));
        }
    }
    out.emit(config, "report", to_json(&report)?, text);
    Ok(())
}

/// Warns on stderr about features whose unpenalized optimum is infinite.
fn warn_about_runaway_features(corpus: &Corpus) {
    let report = diagnostics::diagnose(corpus);
    let runaway: Vec<&str> = report
        .diagnoses
        .iter()
        .filter(|d| {
            matches!(
                d.kind,
                DiagnosisKind::PseudoMaximal | DiagnosisKind::PseudoMinimal
            )
        })
        .map(|d| d.name.as_str())
        .collect();
    if !runaway.is_empty() {
        eprintln!(
            "warning: {} feature(s) are pseudo-maximal or pseudo-minimal; without the penalty \
             their optimal weights diverge: {}",
            runaway.len(),
            runaway.join(", ")
        );
    }
}

fn cmd_train(args: TrainArgs, out: &Output, jobs: usize) -> Result<()> {
    let corpus = load_corpus(&args.corpus, &args.drop)?;
    warn_about_runaway_features(&corpus);
    match args.estimator {
        TrainEstimator::Pl => train_pl_command(&args, &corpus, out),
        TrainEstimator::Correct => train_correct_command(&args, &corpus, out, jobs),
    }
}

fn train_pl_command(args: &TrainArgs, corpus: &Corpus, out: &Output) -> Result<()> {
    let cg_config = args.pl.cg_config();
    let reg = loglinear::compute_sigmas(corpus, args.pl.sigma_multiplier)?;
    let frozen: Vec<String> = reg
        .frozen()
        .iter()
        .map(|&j| corpus.catalog().name(j).to_string())
        .collect();

    let (theta, trace) = cg::train_pl(corpus, &cg_config, args.pl.sigma_multiplier)?;
    loglinear::write_params(&args.out, corpus.catalog(), &theta, &frozen)?;
    if let Some(path) = &args.trace {
        write_json_file(path, &trace)?;
    }
    let scores = eval::evaluate(&theta, corpus)?;

    let mut config = input_config("train", &args.corpus, &args.drop);
    config.extend([
        kv("estimator", "pl"),
        kv("sigma_multiplier", args.pl.sigma_multiplier),
        kv("max_iterations", args.pl.max_iter as u64),
        kv("gradient_norm_tol", args.pl.tol),
        kv("objective_rel_tol", cg_config.objective_rel_tol),
        kv("line_search_tol", cg_config.line_search_tol),
        kv("restart_period", reg.n_active().max(1) as u64),
        kv("tie_tolerance", anneal::DEFAULT_TIE_TOLERANCE),
        ("out", path_value(&args.out)),
    ]);
    if let Some(path) = &args.trace {
        config.push(("trace", path_value(path)));
    }

    let last = trace.iterations.last().expect("trace is never empty");
    let payload = json!({
        "estimator": "pl",
        "termination": cg_termination_label(trace.termination),
        "iterations": trace.iterations.len() - 1,
        "objective": last.objective,
        "gradient_norm": last.gradient_norm,
        "frozen_features": frozen,
        "scores": to_json(&scores)?,
        "params_file": args.out.display().to_string(),
    });
    let text = format!(
        "{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{:.6}\n{:<KEY$}{:.3e}\n{:<KEY$}{}\n{:<KEY$}{:.2}\n{:<KEY$}{:.1}\n{:<KEY$}{:.4}\n{:<KEY$}{}\n",
        "estimator",
        "pseudo-likelihood",
        "termination",
        cg_termination_label(trace.termination),
        "iterations",
        trace.iterations.len() - 1,
        "objective",
        last.objective,
        "gradient norm",
        last.gradient_norm,
        "frozen features",
        frozen.len(),
        "correct parses",
        scores.correct_count,
        "correct percent",
        scores.correct_percent,
        "neg log pseudo-likelihood",
        scores.neg_log_pl,
        "params written",
        args.out.display(),
    );
    out.emit(config, "summary", payload, text);
    Ok(())
}

fn train_correct_command(
    args: &TrainArgs,
    corpus: &Corpus,
    out: &Output,
    jobs: usize,
) -> Result<()> {
    if args.chains == 0 {
        return Err(Error::config("--chains must be at least 1"));
    }
    let base = args.anneal.anneal_config(args.seed);
    let m = corpus.catalog().len();
    let start = ParameterVector::zeros(m);

    let runs: Vec<Result<(ParameterVector, AnnealTrace)>> =
        parallel::run_indexed(args.chains, jobs, |c| {
            let mut config = base.clone();
            config.seed = args.seed.wrapping_add(c as u64);
            anneal::maximize_correct(corpus, &start, &config)
        });

    // Pick the chain with the best true fitness; the strict comparison
    // keeps the lowest chain index on ties.
    let mut best: Option<(f64, usize, ParameterVector, AnnealTrace)> = None;
    for (chain, run) in runs.into_iter().enumerate() {
        let (theta, trace) = run?;
        let correct = anneal::correct_count(&theta, corpus);
        let log_pl = loglinear::log_pseudo_likelihood(&theta, corpus);
        let fitness = correct + 1e-6 * (log_pl / corpus.len() as f64).exp();
        if best.as_ref().is_none_or(|(f, ..)| fitness > *f) {
            best = Some((fitness, chain, theta, trace));
        }
    }
    let (_, winner, theta, trace) = best.expect("at least one chain ran");

    loglinear::write_params(&args.out, corpus.catalog(), &theta, &[])?;
    if let Some(path) = &args.trace {
        write_json_file(path, &trace)?;
    }
    let scores = eval::evaluate(&theta, corpus)?;

    let mut config = input_config("train", &args.corpus, &args.drop);
    config.extend([
        kv("estimator", "correct"),
        kv("initial_temperature", base.initial_temperature),
        kv("cooling_factor", base.cooling_factor),
        kv(
            "moves_per_temperature",
            base.moves_per_temperature.unwrap_or(100 * m.max(1)) as u64,
        ),
        kv("min_temperature", base.min_temperature),
        kv("simplex_scale", base.simplex_scale),
        kv("parameter_box", base.parameter_box),
        kv("tie_tolerance", anneal::DEFAULT_TIE_TOLERANCE),
        kv("seed", args.seed),
        kv("chains", args.chains as u64),
        ("out", path_value(&args.out)),
    ]);
    if let Some(path) = &args.trace {
        config.push(("trace", path_value(path)));
    }

    let payload = json!({
        "estimator": "correct",
        "termination": anneal_termination_label(trace.termination),
        "temperature_levels": trace.steps.len(),
        "final_temperature": trace.final_temperature,
        "winning_chain": winner,
        "scores": to_json(&scores)?,
        "params_file": args.out.display().to_string(),
    });
    let text = format!(
        "{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{:.6e}\n{:<KEY$}{}\n{:<KEY$}{:.2}\n{:<KEY$}{:.1}\n{:<KEY$}{:.4}\n{:<KEY$}{}\n",
        "estimator",
        "correct-parses",
        "termination",
        anneal_termination_label(trace.termination),
        "temperature levels",
        trace.steps.len(),
        "final temperature",
        trace.final_temperature,
        "winning chain",
        winner,
        "correct parses",
        scores.correct_count,
        "correct percent",
        scores.correct_percent,
        "neg log pseudo-likelihood",
        scores.neg_log_pl,
        "params written",
        args.out.display(),
    );
    out.emit(config, "summary", payload, text);
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs, out: &Output) -> Result<()> {
    let corpus = load_corpus(&args.corpus, &args.drop)?;
    let (theta, _) = loglinear::read_params(&args.params, corpus.catalog())?;
    let scores = eval::evaluate(&theta, &corpus)?;

    let mut config = input_config("evaluate", &args.corpus, &args.drop);
    config.extend([
        ("params", path_value(&args.params)),
        kv("tie_tolerance", anneal::DEFAULT_TIE_TOLERANCE),
    ]);
    let text = format!(
        "{:<KEY$}{:.2}\n{:<KEY$}{:.1}\n{:<KEY$}{:.4}\n",
        "correct parses",
        scores.correct_count,
        "correct percent",
        scores.correct_percent,
        "neg log pseudo-likelihood",
        scores.neg_log_pl,
    );
    out.emit(config, "scores", to_json(&scores)?, text);
    Ok(())
}

fn cmd_crossval(args: CrossvalArgs, out: &Output, jobs: usize) -> Result<()> {
    let corpus = load_corpus(&args.corpus, &args.drop)?;
    let cg_config = args.pl.cg_config();
    let anneal_config = args.anneal.anneal_config(args.seed);
    let estimators: Vec<EstimatorSpec> = args
        .estimators
        .iter()
        .map(|e| match e {
            CvEstimatorArg::Baseline => EstimatorSpec::Baseline,
            CvEstimatorArg::Pl => EstimatorSpec::PseudoLikelihood {
                sigma_multiplier: args.pl.sigma_multiplier,
                cg: cg_config.clone(),
            },
            CvEstimatorArg::Correct => EstimatorSpec::MaxCorrect {
                anneal: anneal_config.clone(),
            },
        })
        .collect();

    let report = eval::cross_validate_jobs(&corpus, args.k, &estimators, args.seed, jobs)?;
    if let Some(path) = &args.report {
        write_json_file(path, &report)?;
    }

    let mut config = input_config("crossval", &args.corpus, &args.drop);
    config.extend([
        kv("k", args.k as u64),
        kv("seed", args.seed),
        kv(
            "estimators",
            args.estimators
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        ),
        kv("tie_tolerance", anneal::DEFAULT_TIE_TOLERANCE),
    ]);
    if args.estimators.contains(&CvEstimatorArg::Pl) {
        config.extend([
            kv("sigma_multiplier", args.pl.sigma_multiplier),
            kv("max_iterations", args.pl.max_iter as u64),
            kv("gradient_norm_tol", args.pl.tol),
            kv("objective_rel_tol", cg_config.objective_rel_tol),
            kv("line_search_tol", cg_config.line_search_tol),
        ]);
    }
    if args.estimators.contains(&CvEstimatorArg::Correct) {
        config.extend([
            kv("initial_temperature", anneal_config.initial_temperature),
            kv("cooling_factor", anneal_config.cooling_factor),
            kv(
                "moves_per_temperature",
                anneal_config
                    .moves_per_temperature
                    .unwrap_or(100 * corpus.catalog().len().max(1)) as u64,
            ),
            kv("min_temperature", anneal_config.min_temperature),
            kv("simplex_scale", anneal_config.simplex_scale),
            kv("parameter_box", anneal_config.parameter_box),
        ]);
    }
    if let Some(path) = &args.report {
        config.push(("report", path_value(path)));
    }

    let mut text = format!(
        "{:<32}{:>9}{:>10}{:>14}\n",
        "estimator", "correct", "correct%", "neg log PL"
    );
    for row in &report.rows {
        text.push_str(&format!(
            "{:<32}{:>9.2}{:>10.1}{:>14.2}\n",
            row.estimator,
            row.overall.correct_count,
            row.overall.correct_percent,
            row.overall.neg_log_pl,
        ));
    }
    out.emit(config, "report", to_json(&report)?, text);
    Ok(())
}

fn cmd_synth(args: SynthArgs, out: &Output) -> Result<()> {
    let universe = FiniteUniverse::load(&args.universe)?;
    let theta = match &args.theta {
        Some(path) => loglinear::read_params(path, universe.catalog())?.0,
        None => ParameterVector::zeros(universe.catalog().len()),
    };
    let truth = GroundTruth::new(theta, universe)?;
    let corpus = synth::generate_corpus(&truth, args.n, args.seed)?;
    corpus.save(&args.out)?;
    let stats = corpus.stats();

    let mut config = vec![
        kv("command", "synth"),
        ("universe", path_value(&args.universe)),
        kv(
            "theta",
            match &args.theta {
                Some(path) => path.display().to_string(),
                None => "zeros".to_string(),
            },
        ),
        kv("n", args.n as u64),
        kv("seed", args.seed),
    ];
    config.push(("out", path_value(&args.out)));

    let payload = json!({
        "analyses": truth.universe().len(),
        "yields": truth.universe().n_yields(),
        "stats": to_json(&stats)?,
        "corpus_file": args.out.display().to_string(),
    });
    let text = format!(
        "{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{}\n{:<KEY$}{}\n",
        "analyses",
        truth.universe().len(),
        "yields",
        truth.universe().n_yields(),
        "sentences sampled",
        stats.n_sentences,
        "corpus written",
        args.out.display(),
    );
    out.emit(config, "result", payload, text);
    Ok(())
}

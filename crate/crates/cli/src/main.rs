//! `fsc`: synthesize, verify and export finite-state controllers.
//!
//! Exit codes: 0 success, 2 failure proved, 3 budget exhausted, 64 usage
//! error, 65 malformed input file, 74 I/O error.

mod bench;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fsc_core::andor::andor_synth_with_budget;
use fsc_core::domains::{self, DomainSpec};
use fsc_core::dot::to_dot;
use fsc_core::format::{parse_controller, parse_env, write_controller};
use fsc_core::pandor::{Pandor, DEFAULT_BUDGET};
use fsc_core::prob::parse_rational;
use fsc_core::{exact_measures, Controller, ModelError, ParseError, PlanningProblem, Rational, SynthesisRequest};
use thiserror::Error;

use report::{RunInfo, RunReport, VerifyReport};

#[derive(Parser)]
#[command(name = "fsc", version, about = "Bounded finite-state controller synthesis for probabilistic planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a controller meeting the goal-reaching bound.
    Synth(SynthArgs),
    /// Print exact measures of a controller.
    Verify(VerifyArgs),
    /// Render a controller as Graphviz DOT.
    ExportDot(ExportArgs),
    /// Run the built-in benchmark grid and print CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Environment file.
    #[arg(long, value_name = "FILE", required_unless_present = "domain", conflicts_with = "domain")]
    env: Option<PathBuf>,
    /// Built-in domain.
    #[arg(long, value_name = "NAME")]
    domain: Option<String>,
    /// Domain parameter, e.g. `n=5` or `p=1/2`.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param, requires = "domain")]
    params: Vec<(String, Rational)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Pandor,
    Andor,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Pandor => "pandor",
            Algo::Andor => "andor",
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_name = "N")]
    max_states: usize,
    /// Lower bound on the goal-reaching probability.
    #[arg(long, value_name = "Q", value_parser = parse_prob)]
    lgt_star: Rational,
    /// Lower bound on the termination probability.
    #[arg(long, value_name = "Q", value_parser = parse_prob)]
    lter_star: Option<Rational>,
    #[arg(long, value_enum, default_value_t = Algo::Pandor)]
    algo: Algo,
    /// OR-step budget.
    #[arg(long, value_name = "STEPS", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Search with floating point bounds (pandor only, not exact).
    #[arg(long)]
    float: bool,
    /// Write the controller to this file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the controller as DOT to this file.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_name = "FILE")]
    controller: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_name = "FILE")]
    controller: PathBuf,
    /// Output file, stdout if absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Only run rows of these domains.
    #[arg(long = "only", value_name = "NAME")]
    only: Vec<String>,
    /// Override LGT⋆ of every row.
    #[arg(long, value_name = "Q", value_parser = parse_prob)]
    lgt_star: Option<Rational>,
    #[arg(long, value_name = "STEPS", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    float: bool,
    /// Output file, stdout if absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, Rational), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let v = parse_rational(v).ok_or_else(|| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_prob(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a number"))
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Model(_) => 64,
            CliError::Parse { .. } => 65,
            CliError::Io { .. } | CliError::Csv(_) => 74,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load_problem(args: &ProblemArgs) -> Result<PlanningProblem, CliError> {
    match (&args.env, &args.domain) {
        (Some(path), _) => {
            parse_env(&read(path)?).map_err(|source| CliError::Parse { path: path.display().to_string(), source })
        }
        (None, Some(name)) => {
            let spec = DomainSpec { name: name.clone(), params: args.params.clone() };
            spec.build().map_err(|e| match e {
                ModelError::UnknownDomain(_) => {
                    CliError::Usage(format!("{e} (known: {})", domains::BUILTIN.join(", ")))
                }
                e => e.into(),
            })
        }
        (None, None) => Err(CliError::Usage("one of --env or --domain is required".into())),
    }
}

fn load_controller(path: &Path, problem: &PlanningProblem) -> Result<Controller, CliError> {
    parse_controller(&read(path)?, problem.env())
        .map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

fn synth(args: &SynthArgs) -> Result<u8, CliError> {
    let problem = load_problem(&args.problem)?;
    let mut req = SynthesisRequest::new(problem.clone(), args.max_states, args.lgt_star.clone())?;
    if let Some(l) = &args.lter_star {
        req = req.with_lter(l.clone())?;
    }
    if args.algo == Algo::Andor && (args.float || args.lter_star.is_some()) {
        return Err(CliError::Usage("--float and --lter-star need --algo pandor".into()));
    }
    let start = Instant::now();
    let result = match args.algo {
        Algo::Pandor if args.float => Pandor::<f64>::new(&req).budget(args.budget).run(),
        Algo::Pandor => Pandor::<Rational>::new(&req).budget(args.budget).run(),
        Algo::Andor => andor_synth_with_budget(&problem.clone().into(), args.max_states, args.budget),
    };
    let info = RunInfo {
        algo: args.algo.name(),
        max_states: args.max_states,
        lgt_star: &args.lgt_star,
        lter_star: args.lter_star.as_ref(),
        elapsed: start.elapsed(),
    };
    let report = RunReport::new(&problem, &result, info);
    if let fsc_core::SynthesisOutcome::Controller(c) = &result.outcome {
        if let Some(path) = &args.out {
            write(path, &write_controller(c, problem.env()))?;
        }
        if let Some(path) = &args.dot {
            write(path, &to_dot(c, problem.env()))?;
        }
    }
    if args.json {
        println!("{}", serde_json::to_string(&report).expect("report serializes"));
    } else {
        print!("{}", report.to_text());
    }
    Ok(report::exit_code(&result.outcome))
}

fn verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let problem = load_problem(&args.problem)?;
    let controller = load_controller(&args.controller, &problem)?;
    let m = exact_measures(&problem, &controller);
    if args.json {
        println!("{}", serde_json::to_string(&VerifyReport::from(&m)).expect("report serializes"));
    } else {
        print!("{}", report::verify_text(&m));
    }
    Ok(0)
}

fn export_dot(args: &ExportArgs) -> Result<u8, CliError> {
    let problem = load_problem(&args.problem)?;
    let controller = load_controller(&args.controller, &problem)?;
    let dot = to_dot(&controller, problem.env());
    match &args.out {
        Some(path) => write(path, &dot)?,
        None => print!("{dot}"),
    }
    Ok(0)
}

fn run_bench(args: &BenchArgs) -> Result<u8, CliError> {
    if let Some(unknown) = args.only.iter().find(|d| !domains::BUILTIN.contains(&d.as_str())) {
        return Err(CliError::Usage(format!("unknown domain `{unknown}`")));
    }
    let mut cases = bench::default_grid();
    cases.retain(|c| args.only.is_empty() || args.only.contains(&c.domain.name));
    if let Some(l) = &args.lgt_star {
        for c in &mut cases {
            c.lgt_star = l.clone();
        }
    }
    let rows = bench::run(&cases, args.budget, args.float)?;
    let csv = bench::to_csv(&rows)?;
    match &args.out {
        Some(path) => write(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Verify(a) => verify(a),
        Command::ExportDot(a) => export_dot(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fsc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

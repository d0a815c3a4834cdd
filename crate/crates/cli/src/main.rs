use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cre_core::activation::{InitError, InvestigationConfig, MethodKind};
use cre_core::claimnet::{apply_scenario, export_dot, parse_network, parse_scenario, DotState};
use cre_core::coherence::{solve_exact, CoherenceError, ExactBudget, DEFAULT_CLAIM_BUDGET};
use cre_core::dynamics::{run_batch, trace_csv, NetInputRule, SolverConfig};
use cre_core::medcase::{self, MedcaseError};
use cre_core::report::{to_json, Engine, RunManifest, SolveReport};
use cre_core::{ConstraintNetwork, Parallelism, Scenario};
use serde::Serialize;

const EXIT_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

/// Solve claim constraint networks for reflective equilibrium.
#[derive(Parser)]
#[command(name = "cre", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network file and report its size.
    Validate { network: PathBuf },
    /// Solve a network, optionally under a scenario.
    Solve(SolveArgs),
    /// Estimate claim authenticity from an investigation config.
    Investigate(InvestigateArgs),
    /// Reproduce one of the bundled medical decision-support cases (1, 2 or 3).
    Case(CaseArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Harmony,
    Exact,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Harmony => Engine::Harmony,
            EngineArg::Exact => Engine::Exact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NetInputArg {
    Neighbor,
    Literal,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, value_enum, default_value = "harmony")]
    engine: EngineArg,
    /// Decay rate.
    #[arg(long)]
    gamma: Option<f64>,
    /// Convergence tolerance on the largest activation change.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_enum)]
    net_input: Option<NetInputArg>,
    /// Largest network the exact engine will enumerate.
    #[arg(long, default_value_t = DEFAULT_CLAIM_BUDGET)]
    budget: usize,
    /// Wall-clock limit for the exact engine.
    #[arg(long)]
    time_limit_ms: Option<u64>,
}

impl SolverFlags {
    fn config(&self, record: bool) -> Result<SolverConfig, Failure> {
        let d = SolverConfig::default();
        let config = SolverConfig {
            gamma: self.gamma.unwrap_or(d.gamma),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            net_input: match self.net_input {
                Some(NetInputArg::Neighbor) => NetInputRule::Neighbor,
                Some(NetInputArg::Literal) => NetInputRule::Literal,
                None => d.net_input,
            },
            record_activations: record,
            ..d
        };
        config.validate().map_err(input)?;
        Ok(config)
    }

    fn budget(&self) -> ExactBudget {
        ExactBudget {
            max_claims: self.budget,
            time_limit: self.time_limit_ms.map(Duration::from_millis),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    network: PathBuf,
    /// Scenario file overriding initial activations.
    #[arg(long, conflicts_with = "sweep")]
    scenario: Option<PathBuf>,
    /// Solve every scenario file in a directory concurrently.
    #[arg(long)]
    sweep: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the iteration trace as CSV (harmony engine only).
    #[arg(long, conflicts_with = "sweep")]
    trace: Option<PathBuf>,
    /// Write the solved graph in Graphviz DOT format.
    #[arg(long, conflicts_with = "sweep")]
    dot: Option<PathBuf>,
    /// Write the JSON report here instead of standard output; with
    /// `--sweep`, a directory receiving one report per scenario.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Recorded in the report; the solvers themselves are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct InvestigateArgs {
    config: PathBuf,
    /// Override the method named in the config.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    ClosedForm,
    MonteCarlo,
}

#[derive(Args)]
struct CaseArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    number: u8,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// An error carrying the process exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl fmt::Debug for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error: e.into(),
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

impl From<CoherenceError> for Failure {
    fn from(e: CoherenceError) -> Self {
        let code = match e {
            CoherenceError::BudgetExceeded { .. } | CoherenceError::TimedOut(_) => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Failure { code, error: e.into() }
    }
}

impl From<MedcaseError> for Failure {
    fn from(e: MedcaseError) -> Self {
        match e {
            MedcaseError::Exact(e) => e.into(),
            MedcaseError::Io { .. } => Failure { code: 1, error: e.into() },
            other => input(other),
        }
    }
}

impl From<InitError> for Failure {
    fn from(e: InitError) -> Self {
        input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { network } => validate(&network),
        Command::Solve(args) => solve(&args),
        Command::Investigate(args) => investigate(&args),
        Command::Case(args) => case(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::from)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_network(path: &Path) -> Result<ConstraintNetwork, Failure> {
    parse_network(&read(path)?)
        .with_context(|| format!("invalid network {}", path.display()))
        .map_err(input)
}

fn load_scenario(path: &Path, net: &ConstraintNetwork) -> Result<(Scenario, Vec<f64>), Failure> {
    let scenario = parse_scenario(&read(path)?)
        .with_context(|| format!("invalid scenario {}", path.display()))
        .map_err(input)?;
    let initial = apply_scenario(net, &scenario)
        .with_context(|| format!("scenario {} does not fit the network", path.display()))
        .map_err(input)?;
    Ok((scenario, initial))
}

fn validate(path: &Path) -> Result<u8, Failure> {
    let net = load_network(path)?;
    eprintln!(
        "{}: ok ({} claims, {} positive and {} negative constraints)",
        path.display(),
        net.len(),
        net.positive_count(),
        net.negative_count()
    );
    Ok(0)
}

fn display(path: &Option<PathBuf>) -> Option<String> {
    path.as_ref().map(|p| p.display().to_string())
}

fn solve(args: &SolveArgs) -> Result<u8, Failure> {
    let net = load_network(&args.network)?;
    if let Some(dir) = &args.sweep {
        return sweep(args, &net, dir);
    }
    let config = args.solver.config(args.trace.is_some())?;
    let manifest = RunManifest {
        network: args.network.display().to_string(),
        scenario: display(&args.scenario),
        engine: args.solver.engine.into(),
        solver: config,
        budget: args.solver.budget,
        time_limit_ms: args.solver.time_limit_ms,
        trace: display(&args.trace),
        dot: display(&args.dot),
        seed: args.seed,
    };
    match args.solver.engine {
        EngineArg::Exact => {
            if args.trace.is_some() {
                return Err(input(anyhow!("--trace needs the harmony engine")));
            }
            let solution = solve_exact(&net, &args.solver.budget(), Parallelism::default())?;
            if let Some(p) = &args.dot {
                write(p, &export_dot(&net, DotState::Partition(solution.partition.flags())))?;
            }
            emit(args.json.as_deref(), &to_json(&SolveReport::from_exact(&net, &solution, manifest)))?;
            Ok(0)
        }
        EngineArg::Harmony => {
            let initial = match &args.scenario {
                Some(p) => load_scenario(p, &net)?.1,
                None => net.baseline(),
            };
            let result = run_batch(&net, &[initial], &config, Parallelism::Sequential)
                .pop()
                .expect("one result per initial vector")
                .map_err(input)?;
            if let Some(p) = &args.trace {
                write(p, &trace_csv(&net, &result).expect("activations were recorded"))?;
            }
            if let Some(p) = &args.dot {
                write(p, &export_dot(&net, DotState::Activations(&result.final_state.values)))?;
            }
            let converged = result.converged;
            emit(args.json.as_deref(), &to_json(&SolveReport::from_equilibrium(&net, &result, manifest)))?;
            if converged {
                Ok(0)
            } else {
                eprintln!("warning: no equilibrium within {} iterations", config.max_iters);
                Ok(EXIT_NOT_CONVERGED)
            }
        }
    }
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    let entries = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))
        .map_err(input)?;
    for entry in entries {
        let path = entry.context("listing sweep directory").map_err(input)?.path();
        if path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(input(anyhow!("no scenario files in {}", dir.display())));
    }
    Ok(files)
}

fn sweep(args: &SolveArgs, net: &ConstraintNetwork, dir: &Path) -> Result<u8, Failure> {
    if let EngineArg::Exact = args.solver.engine {
        return Err(input(anyhow!("--sweep needs the harmony engine")));
    }
    let config = args.solver.config(false)?;
    let files = scenario_files(dir)?;
    let initials = files
        .iter()
        .map(|f| load_scenario(f, net).map(|(_, a)| a))
        .collect::<Result<Vec<_>, _>>()?;
    let results = run_batch(net, &initials, &config, Parallelism::default());
    if let Some(out) = &args.json {
        fs::create_dir_all(out)
            .with_context(|| format!("creating {}", out.display()))
            .map_err(Failure::from)?;
    }
    let mut reports = Vec::with_capacity(files.len());
    let mut all_converged = true;
    for (file, result) in files.iter().zip(results) {
        let result = result.map_err(input)?;
        all_converged &= result.converged;
        let manifest = RunManifest {
            network: args.network.display().to_string(),
            scenario: Some(file.display().to_string()),
            engine: Engine::Harmony,
            solver: config,
            budget: args.solver.budget,
            time_limit_ms: args.solver.time_limit_ms,
            trace: None,
            dot: None,
            seed: args.seed,
        };
        let report = SolveReport::from_equilibrium(net, &result, manifest);
        match &args.json {
            Some(out) => {
                let name = file.file_name().expect("listed files have names");
                write(&out.join(name), &to_json(&report))?;
            }
            None => reports.push(report),
        }
    }
    if args.json.is_none() {
        print!("{}", to_json(&reports));
    }
    Ok(if all_converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn investigate(args: &InvestigateArgs) -> Result<u8, Failure> {
    let text = read(&args.config)?;
    let mut config: InvestigationConfig = serde_json::from_str(&text)
        .with_context(|| format!("invalid investigation config {}", args.config.display()))
        .map_err(input)?;
    if let Some(m) = args.method {
        config.method = match m {
            MethodArg::ClosedForm => MethodKind::ClosedForm,
            MethodArg::MonteCarlo => MethodKind::MonteCarlo,
        };
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let report = config.run(Parallelism::default())?;
    #[derive(Serialize)]
    struct Output<'a> {
        #[serde(flatten)]
        report: &'a cre_core::activation::AuthenticityReport,
        config: &'a InvestigationConfig,
    }
    emit(
        args.json.as_deref(),
        &to_json(&Output {
            report: &report,
            config: &config,
        }),
    )?;
    eprintln!("P_A = {:.6}, suggested activation = {:.6}", report.p_a, report.activation);
    Ok(0)
}

fn case(args: &CaseArgs) -> Result<u8, Failure> {
    let config = args.solver.config(false)?;
    let (net, definition) = match std::env::var_os("CRE_FIXTURES") {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            (medcase::load_network(&dir)?, medcase::load_case(&dir, args.number)?)
        }
        None => (medcase::fixture_network(), medcase::case(args.number)?),
    };
    let report = medcase::run_case(&net, &definition, args.solver.engine.into(), &config, &args.solver.budget())?;
    emit(args.json.as_deref(), &to_json(&report))?;
    if !report.matched {
        eprintln!("case {}: mismatched claims: {}", args.number, report.mismatches.join(", "));
        return Ok(EXIT_MISMATCH);
    }
    if report.converged == Some(false) {
        eprintln!("case {}: no equilibrium within {} iterations", args.number, config.max_iters);
        return Ok(EXIT_NOT_CONVERGED);
    }
    eprintln!("case {}: all expectations matched", args.number);
    Ok(0)
}

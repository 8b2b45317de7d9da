//! Command-line front end.
//!
//! Exit codes: [`EXIT_OK`], [`EXIT_USAGE`] for bad or missing arguments,
//! [`EXIT_DATA`] for unreadable or invalid input files, [`EXIT_RUNTIME`] for
//! failures while running a scenario.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::experiment::{
    csv_string, parse_energy_range, parse_thresholds, run_comparison, run_scenario, sweep_report,
    write_csv, write_summary_csv, Algorithm, ExperimentError, ResultRow, Scenario, ScenarioSpec,
    SummaryRow, NOT_AVAILABLE,
};
use crate::routing::{is_strongly_connected, l_min, ArcSet, CostMetric};
use crate::topology::{
    generate_random_topology, load_adjacency_matrix, validate_adjacency_matrix, EnergyRange,
    DEFAULT_ENERGY_RANGE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "greenbridge", version, about = "Energy-aware link switch-off for bridged networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random connected topology as an adjacency matrix
    Generate(GenerateArgs),
    /// Run one scenario and write its per-run CSV
    Run(ScenarioArgs),
    /// Run one algorithm over several arrival rates and summarize
    Sweep(ScenarioArgs),
    /// Run EAR and MEEAFS on identical seeds
    Compare(ScenarioArgs),
    /// Check an adjacency-matrix file
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub nodes: usize,
    /// Number of directed links (twice the physical links)
    #[arg(long)]
    pub links: usize,
    /// Energy weight interval LOW:HIGH
    #[arg(long, value_parser = parse_energy_range, default_value_t = DEFAULT_ENERGY_RANGE)]
    pub energy_range: EnergyRange,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub topology: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct ScenarioArgs {
    /// Scenario config file (key=value); flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Adjacency-matrix file, or random:NODES:LINKS
    #[arg(long)]
    pub topology: Option<String>,
    /// Generate topologies with this many bridges (with --links)
    #[arg(long, requires = "links")]
    pub nodes: Option<usize>,
    #[arg(long, requires = "nodes")]
    pub links: Option<usize>,
    #[arg(long, value_parser = parse_energy_range)]
    pub energy_range: Option<EnergyRange>,
    /// Demand arrival rate per ordered bridge pair; `sweep` takes a comma list
    #[arg(long)]
    pub lambda: Option<String>,
    /// START:STOP:STEP or a comma list, each in [0, 1]
    #[arg(long)]
    pub thresholds: Option<String>,
    #[arg(long)]
    pub runs: Option<u32>,
    /// Base seed; run r uses seed + r. Required (here or in the config)
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// energy or hop
    #[arg(long)]
    pub cost: Option<CostMetric>,
    /// ear or meeafs
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    /// Capacity of every arc, in traffic units
    #[arg(long)]
    pub capacity: Option<f64>,
    /// Scenario label written to the CSV
    #[arg(long)]
    pub name: Option<String>,
    /// Output CSV (standard output when omitted)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Per-threshold summary CSV (sweep and compare)
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Fill the wall_time_ms column (output is then not reproducible)
    #[arg(long)]
    pub timing: bool,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Failure { code: EXIT_DATA, message: message.into() }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match e {
            ExperimentError::Invalid(_) => EXIT_USAGE,
            ExperimentError::Config { .. }
            | ExperimentError::Io { .. }
            | ExperimentError::Topology { .. } => EXIT_DATA,
            _ => EXIT_RUNTIME,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Parses `args` (including the program name) and executes the command.
/// Returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(&a, out),
        Command::Run(a) => run(&a, out, err),
        Command::Sweep(a) => sweep(&a, out, err),
        Command::Compare(a) => compare(&a, out, err),
        Command::Validate(a) => validate(&a.topology, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_RUNTIME, message: format!("{}: {e}", path.display()) }
}

fn generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let topology = generate_random_topology(a.nodes, a.links, a.energy_range, a.seed)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let connected = is_strongly_connected(&topology, &ArcSet::full(&topology));
    std::fs::write(&a.output, topology.to_adjacency_matrix()).map_err(|e| io_failure(&a.output, e))?;
    let _ = writeln!(
        out,
        "wrote {}: nodes={} arcs={} connected={}",
        a.output.display(),
        topology.node_count(),
        topology.arc_count(),
        if connected { "yes" } else { "no" }
    );
    Ok(EXIT_OK)
}

fn validate(path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let report = validate_adjacency_matrix(&text)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let symmetric = !report
        .problems
        .iter()
        .any(|p| matches!(p, crate::topology::TopologyError::Asymmetric { .. }));
    let connected = !report
        .problems
        .iter()
        .any(|p| matches!(p, crate::topology::TopologyError::Disconnected(_)));
    let _ = writeln!(
        out,
        "nodes={} arcs={} l_min={} symmetric={} connected={}",
        report.nodes,
        report.arcs,
        crate::routing::l_min_for(report.nodes),
        yes_no(symmetric),
        yes_no(connected)
    );
    if report.is_valid() {
        // also runs the full constructor checks
        let topology = load_adjacency_matrix(&text).map_err(|e| Failure::data(e.to_string()))?;
        debug_assert_eq!(l_min(&topology), crate::routing::l_min_for(report.nodes));
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(out, "{} violation(s):", report.problems.len());
        for p in &report.problems {
            let _ = writeln!(out, "  {p}");
        }
        Ok(EXIT_DATA)
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Config file entries overridden by flags. `lambda` is left to the caller
/// because `sweep` accepts a list.
fn scenario_spec(a: &ScenarioArgs) -> Result<ScenarioSpec, Failure> {
    let base = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
            ScenarioSpec::parse(&text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?
        }
        None => ScenarioSpec::default(),
    };
    let topology = match (a.nodes, a.links) {
        (Some(n), Some(l)) => Some(format!("random:{n}:{l}")),
        _ => a.topology.clone(),
    };
    let thresholds = a
        .thresholds
        .as_deref()
        .map(parse_thresholds)
        .transpose()
        .map_err(|e| Failure::usage(format!("--thresholds: {e}")))?;
    let flags = ScenarioSpec {
        name: a.name.clone(),
        topology,
        energy_range: a.energy_range,
        algorithm: a.algorithm,
        lambda: None,
        thresholds,
        runs: a.runs,
        seed: a.seed,
        mu: a.mu,
        cost: a.cost,
        capacity: a.capacity,
        output: a.output.clone(),
    };
    Ok(base.merge(flags))
}

fn lambdas(a: &ScenarioArgs) -> Result<Option<Vec<f64>>, Failure> {
    a.lambda
        .as_deref()
        .map(|v| {
            v.split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Failure::usage(format!("--lambda {s:?}: {e}"))))
                .collect()
        })
        .transpose()
}

fn build(spec: &ScenarioSpec, timing: bool) -> Result<Scenario, Failure> {
    let mut scenario = spec.build()?;
    scenario.record_timing = timing;
    Ok(scenario)
}

fn emit_rows(rows: &[ResultRow], output: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_failure(path, e))?;
            write_csv(rows, BufWriter::new(file))?;
        }
        None => {
            let text = csv_string(rows)?;
            out.write_all(text.as_bytes()).map_err(|e| io_failure(Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| NOT_AVAILABLE.to_string(), |x| format!("{x:.digits$}"))
}

fn print_summary(summary: &[SummaryRow], log: &mut dyn Write) {
    for s in summary {
        let _ = writeln!(
            log,
            "{:<6} lambda={} threshold={:.2} sigma={}% rho={:.2}% fi={} runs={}",
            s.algorithm,
            s.lambda,
            s.threshold,
            fmt_opt(s.sigma_mean, 2),
            s.rho_mean,
            fmt_opt(s.fairness_mean, 4),
            s.runs
        );
    }
}

// The human-readable summary goes to stdout unless stdout carries the CSV.
fn summary_sink<'a>(output: Option<&Path>, out: &'a mut dyn Write, err: &'a mut dyn Write) -> &'a mut dyn Write {
    if output.is_some() {
        out
    } else {
        err
    }
}

fn write_summary_file(summary: &[SummaryRow], path: Option<&Path>) -> Result<(), Failure> {
    if let Some(path) = path {
        let file = File::create(path).map_err(|e| io_failure(path, e))?;
        write_summary_csv(summary, BufWriter::new(file))?;
    }
    Ok(())
}

fn run(a: &ScenarioArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let mut spec = scenario_spec(a)?;
    if let Some(ls) = lambdas(a)? {
        if ls.len() != 1 {
            return Err(Failure::usage("run takes a single --lambda; use sweep for several"));
        }
        spec.lambda = Some(ls[0]);
    }
    let scenario = build(&spec, a.timing)?;
    let rows = run_scenario(&scenario)?;
    let output = spec.output.as_deref();
    emit_rows(&rows, output, out)?;
    let summary = sweep_report(&rows);
    write_summary_file(&summary, a.summary.as_deref())?;
    print_summary(&summary, summary_sink(output, out, err));
    Ok(EXIT_OK)
}

fn sweep(a: &ScenarioArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let spec = scenario_spec(a)?;
    let rates = lambdas(a)?.unwrap_or_else(|| vec![spec.lambda.unwrap_or(crate::experiment::DEFAULT_LAMBDA)]);
    let mut rows = Vec::new();
    for lambda in rates {
        let spec = ScenarioSpec { lambda: Some(lambda), ..spec.clone() };
        rows.extend(run_scenario(&build(&spec, a.timing)?)?);
    }
    let output = spec.output.as_deref();
    emit_rows(&rows, output, out)?;
    let summary = sweep_report(&rows);
    write_summary_file(&summary, a.summary.as_deref())?;
    print_summary(&summary, summary_sink(output, out, err));
    Ok(EXIT_OK)
}

fn compare(a: &ScenarioArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let spec = scenario_spec(a)?;
    let rates = lambdas(a)?.unwrap_or_else(|| vec![spec.lambda.unwrap_or(crate::experiment::DEFAULT_LAMBDA)]);
    let mut rows = Vec::new();
    for lambda in rates {
        let spec = ScenarioSpec { lambda: Some(lambda), ..spec.clone() };
        rows.extend(run_comparison(&build(&spec, a.timing)?)?);
    }
    let output = spec.output.as_deref();
    emit_rows(&rows, output, out)?;
    let summary = sweep_report(&rows);
    write_summary_file(&summary, a.summary.as_deref())?;
    print_summary(&summary, summary_sink(output, out, err));
    Ok(EXIT_OK)
}

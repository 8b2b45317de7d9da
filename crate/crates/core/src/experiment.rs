//! Seeded scenario runs, threshold sweeps and CSV output.
//!
//! A [`Scenario`] fixes a topology source, an algorithm, an arrival rate and
//! a threshold grid. Run `r` uses seed `base_seed + r` for both the topology
//! (when generated) and the demands, so identical scenarios always produce
//! identical rows. Runs execute in parallel and are re-ordered before output.
//!
//! The config file is flat `key=value` text with `#` comments:
//!
//! ```text
//! topology=random:50:348      # or a path to an adjacency matrix
//! energy_range=0.1:0.5
//! algorithm=meeafs            # ear | meeafs
//! lambda=0.2
//! thresholds=0:1:0.05         # start:stop:step, or a comma list
//! runs=10
//! seed=1
//! mu=1.0
//! cost=energy                 # energy | hop
//! ```

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ear::{run_ear, PruneError, PruneResult};
use crate::meeafs::{MeeafsConfig, MeeafsPlan};
use crate::metrics::{MetricsError, MetricsReport};
use crate::routing::CostMetric;
use crate::topology::{
    generate_random_topology, load_adjacency_matrix_with_capacity, EnergyRange, Topology,
    TopologyError, DEFAULT_CAPACITY, DEFAULT_ENERGY_RANGE,
};
use crate::traffic::{generate_demands, route_on_trees, TrafficError};

pub const DEFAULT_RUNS: u32 = 10;
pub const DEFAULT_LAMBDA: f64 = 0.2;

/// 0.00, 0.05, ..., 1.00.
pub fn default_thresholds() -> Vec<f64> {
    threshold_grid(0.0, 1.0, 0.05)
}

/// Evenly spaced points from `start` to `stop` inclusive. Points are rounded
/// to 12 decimals so that `0:1:0.05` yields the literals `0.15`, `0.3`, ...
pub fn threshold_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("topology {context}: {source}")]
    Topology { context: String, source: TopologyError },
    #[error("run {run} (seed {seed}): {source}")]
    Prune { run: u32, seed: u64, source: PruneError },
    #[error("run {run} (seed {seed}): {source}")]
    Traffic { run: u32, seed: u64, source: TrafficError },
    #[error("run {run} (seed {seed}): {source}")]
    Metrics { run: u32, seed: u64, source: MetricsError },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl ExperimentError {
    fn config(line: usize, message: impl Into<String>) -> Self {
        ExperimentError::Config { line, message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Ear,
    Meeafs,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Ear => "EAR",
            Algorithm::Meeafs => "MEEAFS",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ear" => Ok(Algorithm::Ear),
            "meeafs" => Ok(Algorithm::Meeafs),
            other => Err(format!("unknown algorithm {other:?} (expected ear or meeafs)")),
        }
    }
}

/// Where each run's topology comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum TopologySource {
    File(PathBuf),
    Random { nodes: usize, links: usize, energy: EnergyRange },
}

impl fmt::Display for TopologySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologySource::File(p) => write!(f, "{}", p.display()),
            TopologySource::Random { nodes, links, energy } => {
                write!(f, "random:{nodes}:{links} energy {energy}")
            }
        }
    }
}

/// `random:NODES:LINKS` or a file path.
fn parse_topology_source(value: &str, energy: EnergyRange) -> Result<TopologySource, String> {
    if let Some(rest) = value.strip_prefix("random:") {
        let mut parts = rest.split(':');
        let nodes = parts.next().and_then(|p| p.trim().parse().ok());
        let links = parts.next().and_then(|p| p.trim().parse().ok());
        match (nodes, links, parts.next()) {
            (Some(nodes), Some(links), None) => {
                Ok(TopologySource::Random { nodes, links, energy })
            }
            _ => Err(format!("expected random:NODES:LINKS, got {value:?}")),
        }
    } else {
        Ok(TopologySource::File(PathBuf::from(value)))
    }
}

/// `LOW:HIGH`.
pub fn parse_energy_range(value: &str) -> Result<EnergyRange, String> {
    let (lo, hi) = value
        .split_once(':')
        .ok_or_else(|| format!("expected LOW:HIGH, got {value:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    EnergyRange::new(lo, hi).map_err(|e| e.to_string())
}

/// `start:stop:step` or a comma-separated list.
pub fn parse_thresholds(value: &str) -> Result<Vec<f64>, String> {
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 3 {
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0 && stop >= start) {
            return Err(format!("bad threshold range {value:?}"));
        }
        return Ok(threshold_grid(start, stop, step));
    }
    value.split(',').filter(|s| !s.trim().is_empty()).map(parse).collect()
}

/// A scenario assembled from a config file and/or command-line flags. Every
/// field is optional until [`ScenarioSpec::build`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScenarioSpec {
    pub name: Option<String>,
    pub topology: Option<String>,
    pub energy_range: Option<EnergyRange>,
    pub algorithm: Option<Algorithm>,
    pub lambda: Option<f64>,
    pub thresholds: Option<Vec<f64>>,
    pub runs: Option<u32>,
    pub seed: Option<u64>,
    pub mu: Option<f64>,
    pub cost: Option<CostMetric>,
    pub capacity: Option<f64>,
    pub output: Option<PathBuf>,
}

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut spec = ScenarioSpec::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ExperimentError::config(line, format!("expected key=value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let err = |m: String| ExperimentError::config(line, format!("{key}: {m}"));
            let num = |v: &str| v.parse::<f64>().map_err(|e| err(format!("{v:?}: {e}")));
            match key {
                "name" => spec.name = Some(value.to_string()),
                "topology" => spec.topology = Some(value.to_string()),
                "energy_range" => spec.energy_range = Some(parse_energy_range(value).map_err(err)?),
                "algorithm" => spec.algorithm = Some(value.parse().map_err(err)?),
                "lambda" => spec.lambda = Some(num(value)?),
                "thresholds" => spec.thresholds = Some(parse_thresholds(value).map_err(err)?),
                "runs" => spec.runs = Some(value.parse().map_err(|e| err(format!("{e}")))?),
                "seed" => spec.seed = Some(value.parse().map_err(|e| err(format!("{e}")))?),
                "mu" => spec.mu = Some(num(value)?),
                "cost" => spec.cost = Some(value.parse().map_err(err)?),
                "capacity" => spec.capacity = Some(num(value)?),
                "output" => spec.output = Some(PathBuf::from(value)),
                other => return Err(ExperimentError::config(line, format!("unknown key {other:?}"))),
            }
        }
        Ok(spec)
    }

    /// Fields set in `overrides` replace ours.
    pub fn merge(self, overrides: ScenarioSpec) -> Self {
        ScenarioSpec {
            name: overrides.name.or(self.name),
            topology: overrides.topology.or(self.topology),
            energy_range: overrides.energy_range.or(self.energy_range),
            algorithm: overrides.algorithm.or(self.algorithm),
            lambda: overrides.lambda.or(self.lambda),
            thresholds: overrides.thresholds.or(self.thresholds),
            runs: overrides.runs.or(self.runs),
            seed: overrides.seed.or(self.seed),
            mu: overrides.mu.or(self.mu),
            cost: overrides.cost.or(self.cost),
            capacity: overrides.capacity.or(self.capacity),
            output: overrides.output.or(self.output),
        }
    }

    pub fn build(&self) -> Result<Scenario, ExperimentError> {
        let topology = self
            .topology
            .as_deref()
            .ok_or_else(|| ExperimentError::Invalid("missing topology".into()))?;
        let base_seed = self.seed.ok_or_else(|| {
            ExperimentError::Invalid("missing seed: every run must be explicitly seeded".into())
        })?;
        let energy = self.energy_range.unwrap_or(DEFAULT_ENERGY_RANGE);
        let scenario = Scenario {
            name: self.name.clone(),
            topology: parse_topology_source(topology, energy).map_err(ExperimentError::Invalid)?,
            algorithm: self.algorithm.unwrap_or(Algorithm::Meeafs),
            lambda: self.lambda.unwrap_or(DEFAULT_LAMBDA),
            thresholds: self.thresholds.clone().unwrap_or_else(default_thresholds),
            runs: self.runs.unwrap_or(DEFAULT_RUNS),
            base_seed,
            mu: self.mu.unwrap_or(1.0),
            cost: self.cost.unwrap_or_default(),
            capacity: self.capacity.unwrap_or(DEFAULT_CAPACITY),
            record_timing: false,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub topology: TopologySource,
    pub algorithm: Algorithm,
    pub lambda: f64,
    /// Ascending, each in `[0, 1]`.
    pub thresholds: Vec<f64>,
    pub runs: u32,
    pub base_seed: u64,
    pub mu: f64,
    pub cost: CostMetric,
    pub capacity: f64,
    /// Fill the `wall_time_ms` column. Off by default: timings make output
    /// non-reproducible.
    pub record_timing: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Invalid(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.thresholds.is_empty() {
            return bad("no thresholds".into());
        }
        if self.thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("thresholds must lie in [0, 1]".into());
        }
        if self.thresholds.windows(2).any(|w| w[0] > w[1]) {
            return bad("thresholds must be sorted ascending".into());
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("lambda {} must be non-negative", self.lambda));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return bad(format!("mu {} outside (0, 1]", self.mu));
        }
        if !(self.capacity.is_finite() && self.capacity > 0.0) {
            return bad(format!("capacity {} must be positive", self.capacity));
        }
        Ok(())
    }

    /// The scenario label written to every row.
    pub fn id(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}-lambda{}", self.algorithm.to_string().to_lowercase(), self.lambda))
    }

    pub fn with_algorithm(&self, algorithm: Algorithm) -> Scenario {
        Scenario { algorithm, ..self.clone() }
    }
}

/// Short content hash of a topology's matrix form.
pub fn topology_hash(topology: &Topology) -> String {
    let digest = Sha256::digest(topology.to_adjacency_matrix().as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunLabel {
    Index(u32),
    /// Aggregate over all runs of one threshold.
    Mean,
}

impl fmt::Display for RunLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunLabel::Index(i) => write!(f, "{i}"),
            RunLabel::Mean => f.write_str("mean"),
        }
    }
}

/// One CSV row. Aggregate rows carry means in the metric columns and sample
/// standard deviations in the `*_std` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub threshold: f64,
    pub run: RunLabel,
    pub seed: Option<u64>,
    pub topology_hash: String,
    pub sigma: Option<f64>,
    pub rho: f64,
    pub fairness: Option<f64>,
    pub energy_on: f64,
    pub active_count: f64,
    pub off_count: f64,
    pub sleeping_links: f64,
    pub max_utilization: f64,
    pub violations: f64,
    pub sigma_std: Option<f64>,
    pub rho_std: Option<f64>,
    pub fairness_std: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

pub const CSV_HEADER: [&str; 20] = [
    "scenario",
    "algorithm",
    "lambda",
    "threshold",
    "run",
    "seed",
    "topology_hash",
    "sigma",
    "rho",
    "fairness",
    "energy_on",
    "active_count",
    "off_count",
    "sleeping_links",
    "max_utilization",
    "violations",
    "sigma_std",
    "rho_std",
    "fairness_std",
    "wall_time_ms",
];

/// Value written for undefined metrics (degenerate sigma, no-traffic fairness).
pub const NOT_AVAILABLE: &str = "NA";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NOT_AVAILABLE.to_string(), |x| x.to_string())
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.algorithm.to_string(),
            self.lambda.to_string(),
            self.threshold.to_string(),
            self.run.to_string(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.topology_hash.clone(),
            opt(self.sigma),
            self.rho.to_string(),
            opt(self.fairness),
            self.energy_on.to_string(),
            self.active_count.to_string(),
            self.off_count.to_string(),
            self.sleeping_links.to_string(),
            self.max_utilization.to_string(),
            self.violations.to_string(),
            self.sigma_std.map(|x| x.to_string()).unwrap_or_default(),
            self.rho_std.map(|x| x.to_string()).unwrap_or_default(),
            self.fairness_std.map(|x| x.to_string()).unwrap_or_default(),
            self.wall_time_ms.map(|x| x.to_string()).unwrap_or_default(),
        ]
    }

    pub fn is_aggregate(&self) -> bool {
        self.run == RunLabel::Mean
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], writer: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String, ExperimentError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

fn read_topology(path: &Path, capacity: f64) -> Result<Topology, ExperimentError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ExperimentError::Io { path: path.to_path_buf(), source })?;
    load_adjacency_matrix_with_capacity(&text, capacity).map_err(|source| ExperimentError::Topology {
        context: path.display().to_string(),
        source,
    })
}

/// Topology used by run `run`.
pub fn scenario_topology(scenario: &Scenario, run: u32) -> Result<Topology, ExperimentError> {
    match &scenario.topology {
        TopologySource::File(path) => read_topology(path, scenario.capacity),
        TopologySource::Random { nodes, links, energy } => {
            let seed = scenario.base_seed + run as u64;
            generate_random_topology(*nodes, *links, *energy, seed)
                .and_then(|t| t.with_uniform_capacity(scenario.capacity))
                .map_err(|source| ExperimentError::Topology {
                    context: format!("run {run} (seed {seed})"),
                    source,
                })
        }
    }
}

fn run_once(
    scenario: &Scenario,
    file_topology: Option<&Topology>,
    run: u32,
) -> Result<Vec<ResultRow>, ExperimentError> {
    let seed = scenario.base_seed + run as u64;
    let generated;
    let topology = match file_topology {
        Some(t) => t,
        None => {
            generated = scenario_topology(scenario, run)?;
            &generated
        }
    };
    let hash = topology_hash(topology);
    let demands = generate_demands(topology, scenario.lambda, seed)
        .map_err(|source| ExperimentError::Traffic { run, seed, source })?;
    let prune_err = |source| ExperimentError::Prune { run, seed, source };
    let metrics_err = |source| ExperimentError::Metrics { run, seed, source };

    let row = |threshold: f64, report: &MetricsReport, elapsed_ms: f64| ResultRow {
        scenario: scenario.id(),
        algorithm: scenario.algorithm,
        lambda: scenario.lambda,
        threshold,
        run: RunLabel::Index(run),
        seed: Some(seed),
        topology_hash: hash.clone(),
        sigma: report.sigma_percent,
        rho: report.rho_percent,
        fairness: report.fairness,
        energy_on: report.energy_on,
        active_count: report.active_count as f64,
        off_count: report.off_count as f64,
        sleeping_links: report.sleeping_links as f64,
        max_utilization: report.max_utilization,
        violations: report.violations as f64,
        sigma_std: None,
        rho_std: None,
        fairness_std: None,
        wall_time_ms: scenario.record_timing.then_some(elapsed_ms),
    };

    let start = Instant::now();
    match scenario.algorithm {
        Algorithm::Ear => {
            let mut result: PruneResult = run_ear(topology, scenario.cost).map_err(prune_err)?;
            let loads = route_on_trees(topology, &result.residual_routing, &demands)
                .map_err(|source| ExperimentError::Traffic { run, seed, source })?;
            let report = MetricsReport::compute(topology, &result, &loads, scenario.mu)
                .map_err(metrics_err)?;
            result.final_loads = Some(loads);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            Ok(scenario.thresholds.iter().map(|&th| row(th, &report, elapsed)).collect())
        }
        Algorithm::Meeafs => {
            let plan = MeeafsPlan::prepare(topology, &demands, scenario.cost).map_err(prune_err)?;
            let prepared = start.elapsed().as_secs_f64() * 1e3;
            scenario
                .thresholds
                .iter()
                .map(|&threshold| {
                    let t0 = Instant::now();
                    let config = MeeafsConfig::new(threshold, scenario.mu).map_err(prune_err)?;
                    let result = plan.apply(topology, &demands, config).map_err(prune_err)?;
                    let loads = result.final_loads.as_ref().expect("MEEAFS routes its demands");
                    let report = MetricsReport::compute(topology, &result, loads, scenario.mu)
                        .map_err(metrics_err)?;
                    Ok(row(threshold, &report, prepared + t0.elapsed().as_secs_f64() * 1e3))
                })
                .collect()
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; `None` for fewer than two values.
fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

fn aggregate(rows: &[ResultRow]) -> ResultRow {
    let first = &rows[0];
    let col = |f: &dyn Fn(&ResultRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let col_opt = |f: &dyn Fn(&ResultRow) -> Option<f64>| rows.iter().filter_map(f).collect::<Vec<f64>>();
    let sigmas = col_opt(&|r| r.sigma);
    let rhos = col(&|r| r.rho);
    let fairs = col_opt(&|r| r.fairness);
    let mean_opt = |v: &[f64]| (!v.is_empty()).then(|| mean(v));
    let hash = if rows.iter().all(|r| r.topology_hash == first.topology_hash) {
        first.topology_hash.clone()
    } else {
        "varies".to_string()
    };
    let times = col_opt(&|r| r.wall_time_ms);
    ResultRow {
        scenario: first.scenario.clone(),
        algorithm: first.algorithm,
        lambda: first.lambda,
        threshold: first.threshold,
        run: RunLabel::Mean,
        seed: None,
        topology_hash: hash,
        sigma: mean_opt(&sigmas),
        rho: mean(&rhos),
        fairness: mean_opt(&fairs),
        energy_on: mean(&col(&|r| r.energy_on)),
        active_count: mean(&col(&|r| r.active_count)),
        off_count: mean(&col(&|r| r.off_count)),
        sleeping_links: mean(&col(&|r| r.sleeping_links)),
        max_utilization: mean(&col(&|r| r.max_utilization)),
        violations: mean(&col(&|r| r.violations)),
        sigma_std: sample_std(&sigmas),
        rho_std: sample_std(&rhos),
        fairness_std: sample_std(&fairs),
        wall_time_ms: mean_opt(&times),
    }
}

/// Executes every run and threshold. Rows are grouped by threshold
/// (ascending); within a group come the runs in order, then one `mean` row.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<ResultRow>, ExperimentError> {
    scenario.validate()?;
    let file_topology = match &scenario.topology {
        TopologySource::File(path) => Some(read_topology(path, scenario.capacity)?),
        TopologySource::Random { .. } => None,
    };
    let per_run: Vec<Vec<ResultRow>> = (0..scenario.runs)
        .into_par_iter()
        .map(|run| run_once(scenario, file_topology.as_ref(), run))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(scenario.thresholds.len() * (scenario.runs as usize + 1));
    for k in 0..scenario.thresholds.len() {
        let group: Vec<ResultRow> = per_run.iter().map(|run_rows| run_rows[k].clone()).collect();
        let agg = aggregate(&group);
        rows.extend(group);
        rows.push(agg);
    }
    Ok(rows)
}

/// Runs the scenario once per algorithm with identical seeds.
pub fn run_comparison(scenario: &Scenario) -> Result<Vec<ResultRow>, ExperimentError> {
    let mut rows = Vec::new();
    for algorithm in [Algorithm::Ear, Algorithm::Meeafs] {
        let s = scenario.with_algorithm(algorithm);
        rows.extend(run_scenario(&s)?);
    }
    Ok(rows)
}

/// Mean metrics at one operating point.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub threshold: f64,
    pub runs: usize,
    pub sigma_mean: Option<f64>,
    pub rho_mean: f64,
    pub fairness_mean: Option<f64>,
    pub max_utilization_mean: f64,
}

/// Per-(algorithm, lambda, threshold) means over the per-run rows; aggregate
/// rows in the input are ignored. Output is sorted by that key.
pub fn sweep_report(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut data: Vec<&ResultRow> = rows.iter().filter(|r| !r.is_aggregate()).collect();
    data.sort_by(|a, b| {
        a.algorithm
            .cmp(&b.algorithm)
            .then(a.lambda.total_cmp(&b.lambda))
            .then(a.threshold.total_cmp(&b.threshold))
    });
    data.chunk_by(|a, b| {
        a.algorithm == b.algorithm && a.lambda == b.lambda && a.threshold == b.threshold
    })
    .map(|group| {
        let sigmas: Vec<f64> = group.iter().filter_map(|r| r.sigma).collect();
        let fairs: Vec<f64> = group.iter().filter_map(|r| r.fairness).collect();
        let rhos: Vec<f64> = group.iter().map(|r| r.rho).collect();
        let utils: Vec<f64> = group.iter().map(|r| r.max_utilization).collect();
        SummaryRow {
            algorithm: group[0].algorithm,
            lambda: group[0].lambda,
            threshold: group[0].threshold,
            runs: group.len(),
            sigma_mean: (!sigmas.is_empty()).then(|| mean(&sigmas)),
            rho_mean: mean(&rhos),
            fairness_mean: (!fairs.is_empty()).then(|| mean(&fairs)),
            max_utilization_mean: mean(&utils),
        }
    })
    .collect()
}

pub fn write_summary_csv<W: Write>(summary: &[SummaryRow], writer: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "algorithm",
        "lambda",
        "threshold",
        "runs",
        "sigma_mean",
        "rho_mean",
        "fairness_mean",
        "max_utilization_mean",
    ])?;
    for s in summary {
        w.write_record([
            s.algorithm.to_string(),
            s.lambda.to_string(),
            s.threshold.to_string(),
            s.runs.to_string(),
            opt(s.sigma_mean),
            s.rho_mean.to_string(),
            opt(s.fairness_mean),
            s.max_utilization_mean.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_clean_decimals() {
        let g = default_thresholds();
        assert_eq!(g.len(), 21);
        assert_eq!(g[3], 0.15);
        assert_eq!(g[6], 0.3);
        assert_eq!(g[20], 1.0);
        assert_eq!(threshold_grid(0.0, 1.0, 0.1).len(), 11);
    }

    #[test]
    fn parse_config_file() {
        let spec = ScenarioSpec::parse(
            "# demo\ntopology = random:50:348\nalgorithm=EAR\nlambda=0.7 # high\n\
             thresholds=0.2,0.5\nruns=3\nseed=9\nmu=0.9\ncost=hop\nenergy_range=0.2:0.4\n",
        )
        .unwrap();
        let s = spec.build().unwrap();
        assert_eq!(s.algorithm, Algorithm::Ear);
        assert_eq!(s.thresholds, vec![0.2, 0.5]);
        assert_eq!(s.runs, 3);
        assert_eq!(s.base_seed, 9);
        assert_eq!(s.cost, CostMetric::Hop);
        assert_eq!(
            s.topology,
            TopologySource::Random {
                nodes: 50,
                links: 348,
                energy: EnergyRange::new(0.2, 0.4).unwrap()
            }
        );
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let err = ScenarioSpec::parse("seed=1\n\nlambda=abc\n").unwrap_err();
        assert!(matches!(err, ExperimentError::Config { line: 3, .. }), "{err}");
        let err = ScenarioSpec::parse("bogus=1\n").unwrap_err();
        assert!(matches!(err, ExperimentError::Config { line: 1, .. }));
        let err = ScenarioSpec::parse("no equals sign\n").unwrap_err();
        assert!(matches!(err, ExperimentError::Config { line: 1, .. }));
    }

    #[test]
    fn seed_is_mandatory() {
        let spec = ScenarioSpec::parse("topology=random:10:30\n").unwrap();
        assert!(matches!(spec.build(), Err(ExperimentError::Invalid(m)) if m.contains("seed")));
    }

    #[test]
    fn merge_prefers_overrides() {
        let base = ScenarioSpec::parse("topology=a.txt\nseed=1\nruns=4\n").unwrap();
        let flags = ScenarioSpec { seed: Some(7), ..Default::default() };
        let merged = base.merge(flags);
        assert_eq!(merged.seed, Some(7));
        assert_eq!(merged.runs, Some(4));
    }

    #[test]
    fn invalid_scenarios() {
        let spec = ScenarioSpec::parse("topology=random:10:30\nseed=1\n").unwrap();
        let mut s = spec.build().unwrap();
        s.thresholds = vec![0.5, 0.2];
        assert!(s.validate().is_err());
        s.thresholds = vec![1.5];
        assert!(s.validate().is_err());
        s.thresholds = vec![0.5];
        s.runs = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn sample_statistics() {
        assert_eq!(mean(&[40.0, 50.0, 60.0]), 50.0);
        assert_eq!(sample_std(&[40.0, 50.0, 60.0]), Some(10.0));
        assert_eq!(sample_std(&[1.0]), None);
    }
}

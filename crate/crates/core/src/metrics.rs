//! Energy saving, average active-link load and Jain's fairness index.

use thiserror::Error;

use crate::ear::PruneResult;
use crate::routing::{l_min_for, ArcSet};
use crate::topology::Topology;
use crate::traffic::{check_utilization, LoadMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("energy saving undefined: {total} arcs leave nothing above the floor of {floor}")]
    Degenerate { total: usize, floor: usize },
    #[error("{active} active arcs outside [{floor}, {total}]")]
    ActiveOutOfRange { active: usize, floor: usize, total: usize },
    #[error("no active arcs")]
    NoActiveArcs,
    #[error("no traffic on the active arcs")]
    NoTraffic,
}

/// Share of the prunable arcs that were switched off, in percent:
/// `100 · (|E| - |E_s|) / (|E| - 2(|N|-1))`.
pub fn sigma(total_arcs: usize, active_arcs: usize, node_count: usize) -> Result<f64, MetricsError> {
    let floor = l_min_for(node_count);
    if total_arcs <= floor {
        return Err(MetricsError::Degenerate { total: total_arcs, floor });
    }
    if active_arcs < floor || active_arcs > total_arcs {
        return Err(MetricsError::ActiveOutOfRange { active: active_arcs, floor, total: total_arcs });
    }
    Ok(100.0 * (total_arcs - active_arcs) as f64 / (total_arcs - floor) as f64)
}

/// Mean utilization of the active arcs, in percent.
pub fn rho(loads: &LoadMap, active: &ArcSet, topology: &Topology) -> Result<f64, MetricsError> {
    if active.is_empty() {
        return Err(MetricsError::NoActiveArcs);
    }
    let sum: f64 = active.iter().map(|a| loads.utilization(topology, a)).sum();
    Ok(100.0 * sum / active.len() as f64)
}

/// Jain's index over raw values: `(Σx)² / (n·Σx²)`.
///
/// Values are divided by their maximum first; the index is scale-invariant,
/// and equal inputs then give exactly 1.
pub fn jain_index(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::NoActiveArcs);
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(MetricsError::NoTraffic);
    }
    let sum: f64 = values.iter().map(|x| x / max).sum();
    let squares: f64 = values.iter().map(|x| (x / max) * (x / max)).sum();
    Ok(sum * sum / (values.len() as f64 * squares))
}

/// Jain's index of the utilizations of the active arcs.
pub fn fairness(loads: &LoadMap, active: &ArcSet, topology: &Topology) -> Result<f64, MetricsError> {
    let values: Vec<f64> = active.iter().map(|a| loads.utilization(topology, a)).collect();
    jain_index(&values)
}

/// Summed energy of the arcs in `active`.
pub fn energy_on(topology: &Topology, active: &ArcSet) -> f64 {
    active.iter().map(|a| topology.arc(a).energy).sum()
}

/// Every metric for one pruning outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    /// `None` when the topology has no arcs above the connectivity floor.
    pub sigma_percent: Option<f64>,
    pub rho_percent: f64,
    /// `None` when no traffic crosses the active arcs.
    pub fairness: Option<f64>,
    pub energy_on: f64,
    pub active_count: usize,
    pub off_count: usize,
    /// Physical links with both directions off.
    pub sleeping_links: usize,
    pub max_utilization: f64,
    /// Arcs whose load exceeds `mu` times capacity.
    pub violations: usize,
}

impl MetricsReport {
    pub fn compute(
        topology: &Topology,
        result: &PruneResult,
        loads: &LoadMap,
        mu: f64,
    ) -> Result<Self, MetricsError> {
        let active = &result.active_arcs;
        let sigma_percent = match sigma(topology.arc_count(), active.len(), topology.node_count()) {
            Ok(s) => Some(s),
            Err(MetricsError::Degenerate { .. }) => None,
            Err(e) => return Err(e),
        };
        let fairness = match fairness(loads, active, topology) {
            Ok(f) => Some(f),
            Err(MetricsError::NoTraffic) => None,
            Err(e) => return Err(e),
        };
        let max_utilization =
            active.iter().map(|a| loads.utilization(topology, a)).fold(0.0, f64::max);
        Ok(MetricsReport {
            sigma_percent,
            rho_percent: rho(loads, active, topology)?,
            fairness,
            energy_on: energy_on(topology, active),
            active_count: active.len(),
            off_count: result.off_arcs.len(),
            sleeping_links: result.sleeping_links(topology),
            max_utilization,
            violations: check_utilization(loads, topology, mu).violations.len(),
        })
    }
}

//! Energy-weighted exporter election and threshold-gated link switch-off.
//!
//! A run has three phases:
//!
//! 1. Every bridge computes its shortest-path tree and its weight `W_i`, the
//!    summed energy of its outgoing arcs. Bridges are elected exporters in
//!    ascending weight; the neighbours of an exporter become its importers.
//! 2. Each importer re-roots its exporter's tree at itself by flipping the
//!    single arc between them ([`Mspt`]). Arcs that no tree uses any more
//!    become switch-off candidates, stopping once only `2(|N|-1)` arcs would
//!    remain on. A candidate whose baseline load exceeds `Th · c` is kept on.
//! 3. Shortest paths are recomputed on the residual topology and the demands
//!    are re-routed.
//!
//! Phases 1 and 2 up to the threshold test do not depend on `Th`, so a
//! threshold sweep prepares a [`MeeafsPlan`] once and applies it per point.

use crate::ear::{elect, Leftover, PruneError, PruneResult, RoleAssignment};
use crate::phases;
use crate::routing::{all_shortest_path_trees, ArcSet, CostMetric, RoutingError, SptTree};
use crate::topology::{BridgeId, Topology};
use crate::traffic::{route_on_trees, DemandSet, LoadMap};

/// An exporter's tree re-rooted at one of its importers.
#[derive(Clone, Debug, PartialEq)]
pub struct Mspt {
    pub importer: BridgeId,
    pub exporter: BridgeId,
    pub tree: SptTree,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeeafsConfig {
    /// Load threshold as a fraction of arc capacity, in `[0, 1]`.
    pub threshold: f64,
    /// Maximum target utilization, in `(0, 1]`.
    pub mu: f64,
}

impl MeeafsConfig {
    pub fn new(threshold: f64, mu: f64) -> Result<Self, PruneError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(PruneError::Config(format!("threshold {threshold} outside [0, 1]")));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(PruneError::Config(format!("mu {mu} outside (0, 1]")));
        }
        Ok(MeeafsConfig { threshold, mu })
    }
}

impl Default for MeeafsConfig {
    fn default() -> Self {
        MeeafsConfig { threshold: 1.0, mu: 1.0 }
    }
}

/// Power-consumption weight of a bridge: one line card per outgoing arc.
pub fn bridge_weight(topology: &Topology, node: BridgeId) -> f64 {
    topology.incident_energy(node).expect("bridge belongs to the topology")
}

/// Lowest weight first, smaller id on ties. A bridge reached after all its
/// neighbours were assigned is still elected.
pub fn elect_exporters_by_energy(topology: &Topology) -> RoleAssignment {
    let weights: Vec<f64> = topology.bridges().map(|b| bridge_weight(topology, b)).collect();
    let mut order: Vec<BridgeId> = topology.bridges().collect();
    order.sort_by(|a, b| weights[a.0].total_cmp(&weights[b.0]).then(a.cmp(b)));
    elect(topology, &order, Leftover::Exporter)
}

/// Makes `new_root`, a child of the tree's root, the new root by reversing
/// the arc between them. Every other arc is kept.
pub fn reroot_at_neighbor(
    topology: &Topology,
    tree: &SptTree,
    new_root: BridgeId,
) -> Result<Mspt, RoutingError> {
    let root = tree.root();
    if !topology.contains(new_root) {
        return Err(RoutingError::UnknownBridge(new_root));
    }
    let link = tree
        .parent_arc(new_root)
        .filter(|&arc| topology.arc(arc).from == root)
        .ok_or(RoutingError::NotAChildOfRoot { root, new_root })?;
    let mut parent: Vec<_> = topology.bridges().map(|b| tree.parent_arc(b)).collect();
    parent[new_root.0] = None;
    parent[root.0] = Some(topology.reverse(link));
    Ok(Mspt {
        importer: new_root,
        exporter: root,
        tree: SptTree::from_parents(topology, new_root, tree.metric(), parent),
    })
}

/// Threshold-independent part of a run.
#[derive(Clone, Debug)]
pub struct MeeafsPlan {
    metric: CostMetric,
    roles: RoleAssignment,
    mspts: Vec<Mspt>,
    candidates: ArcSet,
    baseline_loads: LoadMap,
}

impl MeeafsPlan {
    pub fn prepare(
        topology: &Topology,
        demands: &DemandSet,
        metric: CostMetric,
    ) -> Result<Self, PruneError> {
        let trees = all_shortest_path_trees(topology, None, metric)?;
        let baseline_loads = route_on_trees(topology, &trees, demands)?;
        let roles = elect_exporters_by_energy(topology);
        let phase2 = phases::collect_candidates(topology, &trees, &roles);
        Ok(MeeafsPlan {
            metric,
            roles,
            mspts: phase2.mspts,
            candidates: phase2.candidates,
            baseline_loads,
        })
    }

    pub fn roles(&self) -> &RoleAssignment {
        &self.roles
    }

    /// Off candidates before the threshold test.
    pub fn candidates(&self) -> &ArcSet {
        &self.candidates
    }

    pub fn baseline_loads(&self) -> &LoadMap {
        &self.baseline_loads
    }

    /// Candidates that survive the threshold test and the connectivity guard.
    pub fn off_arcs(&self, topology: &Topology, threshold: f64) -> ArcSet {
        let mut off = self.candidates.clone();
        for arc in self.candidates.iter() {
            if self.baseline_loads.load(arc) > threshold * topology.arc(arc).capacity {
                off.remove(arc);
            }
        }
        phases::connectivity_guard(topology, &mut off);
        off
    }

    /// Finishes the run for one configuration: threshold test, guard, and
    /// re-routing on the residual topology.
    pub fn apply(
        &self,
        topology: &Topology,
        demands: &DemandSet,
        config: MeeafsConfig,
    ) -> Result<PruneResult, PruneError> {
        let off = self.off_arcs(topology, config.threshold);
        let (active_arcs, residual_routing) = phases::residual(topology, &off, self.metric)?;
        let final_loads = route_on_trees(topology, &residual_routing, demands)?;
        Ok(PruneResult {
            roles: self.roles.clone(),
            mspts: self.mspts.clone(),
            off_arcs: off,
            active_arcs,
            residual_routing,
            baseline_loads: Some(self.baseline_loads.clone()),
            final_loads: Some(final_loads),
        })
    }
}

pub fn run_meeafs(
    topology: &Topology,
    demands: &DemandSet,
    config: MeeafsConfig,
    metric: CostMetric,
) -> Result<PruneResult, PruneError> {
    MeeafsConfig::new(config.threshold, config.mu)?;
    MeeafsPlan::prepare(topology, demands, metric)?.apply(topology, demands, config)
}

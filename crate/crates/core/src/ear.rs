//! Degree-elected exporters and the load-oblivious EAR baseline.
//!
//! EAR and MEEAFS share their three-phase skeleton (see [`crate::meeafs`]):
//! every bridge computes its shortest-path tree, importers adopt a tree
//! borrowed from a neighbouring exporter, and the arcs no longer used by any
//! tree are switched off. EAR elects exporters by degree and never looks at
//! traffic.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::phases;
use crate::meeafs::Mspt;
use crate::routing::{all_shortest_path_trees, ArcSet, CostMetric, RoutingError, SptTree};
use crate::topology::{BridgeId, Topology};
use crate::traffic::{LoadMap, TrafficError};

#[derive(Debug, Error)]
pub enum PruneError {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Role of a bridge after exporter election.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Exporter,
    /// Borrows the tree of the given neighbouring exporter.
    Importer(BridgeId),
    Neutral,
}

/// Partition of all bridges into exporters, importers and neutrals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleAssignment {
    roles: Vec<Role>,
}

impl RoleAssignment {
    pub fn role(&self, node: BridgeId) -> Role {
        self.roles[node.0]
    }

    pub fn exporters(&self) -> Vec<BridgeId> {
        self.matching(|r| r == Role::Exporter)
    }

    pub fn neutrals(&self) -> Vec<BridgeId> {
        self.matching(|r| r == Role::Neutral)
    }

    /// Importer to exporter, ascending by importer.
    pub fn importers(&self) -> BTreeMap<BridgeId, BridgeId> {
        self.roles
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match r {
                Role::Importer(e) => Some((BridgeId(i), *e)),
                _ => None,
            })
            .collect()
    }

    fn matching(&self, pred: impl Fn(Role) -> bool) -> Vec<BridgeId> {
        (0..self.roles.len()).filter(|&i| pred(self.roles[i])).map(BridgeId).collect()
    }

    /// Checks that every importer sits next to its exporter, that no two
    /// exporters are adjacent, and that every bridge has exactly one role.
    pub fn satisfies_invariants(&self, topology: &Topology) -> bool {
        if self.roles.len() != topology.node_count() {
            return false;
        }
        topology.bridges().all(|b| match self.role(b) {
            Role::Exporter => topology.neighbors(b).all(|n| self.role(n) != Role::Exporter),
            Role::Importer(e) => {
                self.role(e) == Role::Exporter && topology.find_arc(b, e).is_some()
            }
            Role::Neutral => true,
        })
    }
}

/// What happens to an unassigned bridge whose neighbours are all assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Leftover {
    /// Still elected; it simply has no importers of its own.
    Exporter,
    /// Becomes neutral.
    Neutral,
}

/// Greedy election along `priority`: each still-unassigned bridge becomes an
/// exporter and claims its unassigned neighbours as importers.
pub(crate) fn elect(topology: &Topology, priority: &[BridgeId], leftover: Leftover) -> RoleAssignment {
    let mut roles: Vec<Option<Role>> = vec![None; topology.node_count()];
    for &b in priority {
        if roles[b.0].is_some() {
            continue;
        }
        let has_free_neighbor = topology.neighbors(b).any(|n| roles[n.0].is_none());
        if !has_free_neighbor && leftover == Leftover::Neutral {
            continue;
        }
        roles[b.0] = Some(Role::Exporter);
        for n in topology.neighbors(b) {
            if roles[n.0].is_none() {
                roles[n.0] = Some(Role::Importer(b));
            }
        }
    }
    RoleAssignment { roles: roles.into_iter().map(|r| r.unwrap_or(Role::Neutral)).collect() }
}

/// Highest degree first, smaller id on ties. A bridge whose neighbours are
/// all taken becomes neutral.
pub fn elect_exporters_by_degree(topology: &Topology) -> RoleAssignment {
    let mut order: Vec<BridgeId> = topology.bridges().collect();
    order.sort_by(|a, b| topology.degree(*b).cmp(&topology.degree(*a)).then(a.cmp(b)));
    elect(topology, &order, Leftover::Neutral)
}

/// Outcome of a pruning run.
#[derive(Clone, Debug)]
pub struct PruneResult {
    pub roles: RoleAssignment,
    /// Modified trees adopted by importers, ascending by importer.
    pub mspts: Vec<Mspt>,
    /// Switched-off arcs.
    pub off_arcs: ArcSet,
    /// Arcs left on; the complement of `off_arcs`.
    pub active_arcs: ArcSet,
    /// Shortest-path tree of every bridge over `active_arcs`, indexed by root.
    pub residual_routing: Vec<SptTree>,
    /// Demand routing before any arc was switched off, when traffic was given.
    pub baseline_loads: Option<LoadMap>,
    /// Demand routing over `active_arcs`, when traffic was given.
    pub final_loads: Option<LoadMap>,
}

impl PruneResult {
    /// Physical links with both directions off.
    pub fn sleeping_links(&self, topology: &Topology) -> usize {
        self.off_arcs
            .iter()
            .filter(|&a| {
                let r = topology.reverse(a);
                a < r && self.off_arcs.contains(r)
            })
            .count()
    }

    /// Total energy of the arcs left on.
    pub fn energy_on(&self, topology: &Topology) -> f64 {
        self.active_arcs.iter().map(|a| topology.arc(a).energy).sum()
    }
}

/// Runs EAR: degree election, importer tree adoption, switch-off of unused
/// arcs (bounded below by the connectivity floor and guard), then shortest
/// paths on the residual topology.
pub fn run_ear(topology: &Topology, metric: CostMetric) -> Result<PruneResult, PruneError> {
    let trees = all_shortest_path_trees(topology, None, metric)?;
    let roles = elect_exporters_by_degree(topology);
    let phase2 = phases::collect_candidates(topology, &trees, &roles);
    let mut off = phase2.candidates;
    phases::connectivity_guard(topology, &mut off);
    let (active_arcs, residual_routing) = phases::residual(topology, &off, metric)?;
    Ok(PruneResult {
        roles,
        mspts: phase2.mspts,
        off_arcs: off,
        active_arcs,
        residual_routing,
        baseline_loads: None,
        final_loads: None,
    })
}

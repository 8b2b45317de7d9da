// Phases shared by EAR and MEEAFS.

use crate::ear::{RoleAssignment, PruneError};
use crate::meeafs::{reroot_at_neighbor, Mspt};
use crate::routing::{
    all_shortest_path_trees, is_strongly_connected, l_min, superpose, ArcSet, CostMetric, SptTree,
};
use crate::topology::{ArcId, Topology};

pub(crate) struct Phase2 {
    pub mspts: Vec<Mspt>,
    /// Candidate off arcs before any threshold or guard.
    pub candidates: ArcSet,
}

/// Importers, in ascending id, swap their own tree for the modified tree of
/// their exporter. After each swap every arc used by no tree becomes an off
/// candidate (ascending id), until only `2(|N|-1)` arcs would remain on.
///
/// An arc that is already a candidate but is needed again by the swapped-in
/// tree is taken back out, so candidates never intersect the trees in use.
/// Importers that are not a direct child of their exporter's tree keep their
/// own tree.
pub(crate) fn collect_candidates(
    topology: &Topology,
    trees: &[SptTree],
    roles: &RoleAssignment,
) -> Phase2 {
    let floor = l_min(topology);
    let total = topology.arc_count();
    let mut usage = superpose(topology, trees).contributing_trees;
    let mut off = ArcSet::empty(topology);
    let mut mspts = Vec::new();

    'importers: for (importer, exporter) in roles.importers() {
        if total - off.len() <= floor {
            break;
        }
        let Ok(mspt) = reroot_at_neighbor(topology, &trees[exporter.0], importer) else {
            continue;
        };
        for arc in trees[importer.0].arcs() {
            usage[arc.0] -= 1;
        }
        for arc in mspt.tree.arcs() {
            usage[arc.0] += 1;
            if usage[arc.0] == 1 {
                off.remove(arc);
            }
        }
        mspts.push(mspt);
        for k in 0..total {
            let arc = ArcId(k);
            if usage[k] == 0 && !off.contains(arc) {
                if total - off.len() <= floor {
                    break 'importers;
                }
                off.insert(arc);
            }
        }
    }
    Phase2 { mspts, candidates: off }
}

/// Drops from `off` every arc whose switch-off would break strong
/// connectivity, visiting candidates in ascending id.
pub(crate) fn connectivity_guard(topology: &Topology, off: &mut ArcSet) {
    let active = off.complement();
    if is_strongly_connected(topology, &active) {
        return;
    }
    let mut active = ArcSet::full(topology);
    let candidates: Vec<ArcId> = off.iter().collect();
    for arc in candidates {
        active.remove(arc);
        if !is_strongly_connected(topology, &active) {
            active.insert(arc);
            off.remove(arc);
        }
    }
}

/// Active set and per-bridge shortest-path trees on the residual topology.
pub(crate) fn residual(
    topology: &Topology,
    off: &ArcSet,
    metric: CostMetric,
) -> Result<(ArcSet, Vec<SptTree>), PruneError> {
    let active = off.complement();
    let trees = all_shortest_path_trees(topology, Some(&active), metric)?;
    Ok((active, trees))
}

//! Shortest-path trees, their superposition, and connectivity checks.
//!
//! Dijkstra runs over an optional subset of arcs (an [`ArcSet`]) so the same
//! code serves both the full topology and residual topologies after links
//! are switched off. Ties are broken first on hop count, then on the smaller
//! predecessor id, which makes every tree a pure function of its inputs.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::topology::{ArcId, BridgeId, Topology};

/// Link cost used by Dijkstra.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CostMetric {
    /// Cost of an arc is its energy weight.
    #[default]
    Energy,
    /// Every arc costs 1.
    Hop,
}

impl CostMetric {
    pub fn cost(self, topology: &Topology, arc: ArcId) -> f64 {
        match self {
            CostMetric::Energy => topology.arc(arc).energy,
            CostMetric::Hop => 1.0,
        }
    }
}

impl fmt::Display for CostMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMetric::Energy => "energy",
            CostMetric::Hop => "hop",
        })
    }
}

impl FromStr for CostMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "energy" => Ok(CostMetric::Energy),
            "hop" | "hops" => Ok(CostMetric::Hop),
            other => Err(format!("unknown cost metric {other:?} (expected energy or hop)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("bridge {0} does not exist")]
    UnknownBridge(BridgeId),
    #[error("bridge {unreachable} is unreachable from {root} over the active arcs")]
    Unreachable { root: BridgeId, unreachable: BridgeId },
    #[error("bridge {new_root} is not a child of root {root} in the tree")]
    NotAChildOfRoot { root: BridgeId, new_root: BridgeId },
}

/// Fixed-size set of arcs of one topology.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ArcSet {
    bits: Vec<bool>,
    len: usize,
}

impl ArcSet {
    pub fn empty(topology: &Topology) -> Self {
        ArcSet { bits: vec![false; topology.arc_count()], len: 0 }
    }

    pub fn full(topology: &Topology) -> Self {
        let n = topology.arc_count();
        ArcSet { bits: vec![true; n], len: n }
    }

    pub fn from_ids(topology: &Topology, ids: impl IntoIterator<Item = ArcId>) -> Self {
        let mut set = ArcSet::empty(topology);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn contains(&self, id: ArcId) -> bool {
        self.bits[id.0]
    }

    /// Returns `true` if the arc was not present.
    pub fn insert(&mut self, id: ArcId) -> bool {
        let fresh = !self.bits[id.0];
        if fresh {
            self.bits[id.0] = true;
            self.len += 1;
        }
        fresh
    }

    /// Returns `true` if the arc was present.
    pub fn remove(&mut self, id: ArcId) -> bool {
        let present = self.bits[id.0];
        if present {
            self.bits[id.0] = false;
            self.len -= 1;
        }
        present
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of arcs in the universe (the topology).
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    /// Members in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = ArcId> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| ArcId(k))
    }

    pub fn complement(&self) -> Self {
        ArcSet { bits: self.bits.iter().map(|b| !b).collect(), len: self.bits.len() - self.len }
    }

    pub fn is_subset(&self, other: &ArcSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &ArcSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !(a && b))
    }
}

impl fmt::Debug for ArcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|a| a.0)).finish()
    }
}

/// Shortest-path tree rooted at one bridge, oriented away from the root.
#[derive(Clone, Debug, PartialEq)]
pub struct SptTree {
    root: BridgeId,
    metric: CostMetric,
    parent: Vec<Option<ArcId>>,
    distance: Vec<f64>,
    hops: Vec<usize>,
}

impl SptTree {
    pub fn root(&self) -> BridgeId {
        self.root
    }

    pub fn metric(&self) -> CostMetric {
        self.metric
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    /// Arc entering `node`; `None` for the root.
    pub fn parent_arc(&self, node: BridgeId) -> Option<ArcId> {
        self.parent[node.0]
    }

    pub fn parent(&self, topology: &Topology, node: BridgeId) -> Option<BridgeId> {
        self.parent[node.0].map(|a| topology.arc(a).from)
    }

    pub fn distance(&self, node: BridgeId) -> f64 {
        self.distance[node.0]
    }

    pub fn hops(&self, node: BridgeId) -> usize {
        self.hops[node.0]
    }

    /// Tree arcs in ascending id order.
    pub fn arcs(&self) -> Vec<ArcId> {
        let mut arcs: Vec<ArcId> = self.parent.iter().flatten().copied().collect();
        arcs.sort();
        arcs
    }

    /// Arcs from the root to `target`, in travel order.
    pub fn path_to(&self, topology: &Topology, target: BridgeId) -> Vec<ArcId> {
        let mut path = Vec::with_capacity(self.hops[target.0]);
        let mut at = target;
        while let Some(arc) = self.parent[at.0] {
            path.push(arc);
            at = topology.arc(arc).from;
        }
        path.reverse();
        path
    }

    /// Builds a tree from explicit parent arcs, recomputing distances and hop
    /// counts by walking from the root.
    pub(crate) fn from_parents(
        topology: &Topology,
        root: BridgeId,
        metric: CostMetric,
        parent: Vec<Option<ArcId>>,
    ) -> Self {
        let n = parent.len();
        let mut children: Vec<Vec<ArcId>> = vec![Vec::new(); n];
        for arc in parent.iter().flatten() {
            children[topology.arc(*arc).from.0].push(*arc);
        }
        let mut distance = vec![f64::INFINITY; n];
        let mut hops = vec![usize::MAX; n];
        distance[root.0] = 0.0;
        hops[root.0] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &arc in &children[u.0] {
                let v = topology.arc(arc).to;
                distance[v.0] = distance[u.0] + metric.cost(topology, arc);
                hops[v.0] = hops[u.0] + 1;
                queue.push_back(v);
            }
        }
        SptTree { root, metric, parent, distance, hops }
    }
}

#[derive(PartialEq)]
struct Label {
    distance: f64,
    hops: usize,
    node: BridgeId,
}

impl Eq for Label {}

impl Ord for Label {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .distance
            .total_cmp(&self.distance)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over every arc of the topology.
pub fn shortest_path_tree(
    topology: &Topology,
    root: BridgeId,
    metric: CostMetric,
) -> Result<SptTree, RoutingError> {
    dijkstra(topology, None, root, metric)
}

/// Dijkstra restricted to the arcs in `active`.
pub fn shortest_path_tree_within(
    topology: &Topology,
    active: &ArcSet,
    root: BridgeId,
    metric: CostMetric,
) -> Result<SptTree, RoutingError> {
    dijkstra(topology, Some(active), root, metric)
}

/// One tree per bridge, indexed by root. Roots are processed in parallel.
pub fn all_shortest_path_trees(
    topology: &Topology,
    active: Option<&ArcSet>,
    metric: CostMetric,
) -> Result<Vec<SptTree>, RoutingError> {
    (0..topology.node_count())
        .into_par_iter()
        .map(|root| dijkstra(topology, active, BridgeId(root), metric))
        .collect()
}

fn dijkstra(
    topology: &Topology,
    active: Option<&ArcSet>,
    root: BridgeId,
    metric: CostMetric,
) -> Result<SptTree, RoutingError> {
    if !topology.contains(root) {
        return Err(RoutingError::UnknownBridge(root));
    }
    let n = topology.node_count();
    let mut distance = vec![f64::INFINITY; n];
    let mut hops = vec![usize::MAX; n];
    let mut parent: Vec<Option<ArcId>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();

    distance[root.0] = 0.0;
    hops[root.0] = 0;
    heap.push(Label { distance: 0.0, hops: 0, node: root });

    while let Some(Label { distance: d, hops: h, node: u }) = heap.pop() {
        if settled[u.0] || d != distance[u.0] || h != hops[u.0] {
            continue;
        }
        settled[u.0] = true;
        for &arc in topology.outgoing(u) {
            if active.is_some_and(|set| !set.contains(arc)) {
                continue;
            }
            let v = topology.arc(arc).to;
            if settled[v.0] {
                continue;
            }
            let nd = d + metric.cost(topology, arc);
            let nh = h + 1;
            let better = match nd.total_cmp(&distance[v.0]) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => match nh.cmp(&hops[v.0]) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => parent[v.0].is_some_and(|p| u < topology.arc(p).from),
                },
            };
            if better {
                let improves_key = nd != distance[v.0] || nh != hops[v.0];
                distance[v.0] = nd;
                hops[v.0] = nh;
                parent[v.0] = Some(arc);
                if improves_key {
                    heap.push(Label { distance: nd, hops: nh, node: v });
                }
            }
        }
    }

    if let Some(v) = settled.iter().position(|s| !s) {
        return Err(RoutingError::Unreachable { root, unreachable: BridgeId(v) });
    }
    Ok(SptTree { root, metric, parent, distance, hops })
}

/// Union of several trees' arcs: the active-link set of a shortest-path graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Spg {
    pub active_arcs: ArcSet,
    /// Number of trees each arc belongs to, indexed by arc id.
    pub contributing_trees: Vec<u32>,
}

pub fn superpose<'a>(topology: &Topology, trees: impl IntoIterator<Item = &'a SptTree>) -> Spg {
    let mut counts = vec![0u32; topology.arc_count()];
    for tree in trees {
        for arc in tree.parent.iter().flatten() {
            counts[arc.0] += 1;
        }
    }
    let active_arcs =
        ArcSet::from_ids(topology, (0..counts.len()).filter(|&k| counts[k] > 0).map(ArcId));
    Spg { active_arcs, contributing_trees: counts }
}

/// Minimum number of directed links that keeps every bridge pair connected.
pub fn l_min(topology: &Topology) -> usize {
    l_min_for(topology.node_count())
}

pub fn l_min_for(nodes: usize) -> usize {
    2 * nodes.saturating_sub(1)
}

/// `true` iff every ordered bridge pair is joined by a directed path of
/// arcs in `active`.
pub fn is_strongly_connected(topology: &Topology, active: &ArcSet) -> bool {
    let reach = |forward: bool| {
        let mut seen = vec![false; topology.node_count()];
        let mut queue = VecDeque::from([BridgeId(0)]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            let arcs = if forward { topology.outgoing(u) } else { topology.incoming(u) };
            for &arc in arcs {
                if !active.contains(arc) {
                    continue;
                }
                let a = topology.arc(arc);
                let v = if forward { a.to } else { a.from };
                if !seen[v.0] {
                    seen[v.0] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == topology.node_count()
    };
    reach(true) && reach(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_random_topology, load_adjacency_matrix, DEFAULT_ENERGY_RANGE};

    fn triangle() -> Topology {
        load_adjacency_matrix("0 1 3\n1 0 1\n3 1 0\n").unwrap()
    }

    #[test]
    fn two_node_tree() {
        let t = load_adjacency_matrix("0 0.3\n0.3 0\n").unwrap();
        let tree = shortest_path_tree(&t, BridgeId(0), CostMetric::Energy).unwrap();
        assert_eq!(tree.arcs(), vec![ArcId(0)]);
        assert_eq!(tree.distance(BridgeId(1)), 0.3);
        assert_eq!(tree.parent(&t, BridgeId(0)), None);
    }

    #[test]
    fn triangle_prefers_two_cheap_hops() {
        let t = triangle();
        let tree = shortest_path_tree(&t, BridgeId(0), CostMetric::Energy).unwrap();
        assert_eq!(tree.parent(&t, BridgeId(2)), Some(BridgeId(1)));
        assert_eq!(tree.distance(BridgeId(2)), 2.0);
        assert_eq!(tree.hops(BridgeId(2)), 2);
        let hop = shortest_path_tree(&t, BridgeId(0), CostMetric::Hop).unwrap();
        assert_eq!(hop.parent(&t, BridgeId(2)), Some(BridgeId(0)));
    }

    #[test]
    fn ties_prefer_fewer_hops_then_smaller_predecessor() {
        // 0-3 direct costs 2, 0-1-3 also costs 2: direct arc wins on hops
        let t = load_adjacency_matrix("0 1 1 2\n1 0 0 1\n1 0 0 1\n2 1 1 0\n").unwrap();
        let tree = shortest_path_tree(&t, BridgeId(0), CostMetric::Energy).unwrap();
        assert_eq!(tree.parent(&t, BridgeId(3)), Some(BridgeId(0)));
        // from 1: 1-0-2 and 1-3-2 both cost 2 in 2 hops; predecessor 0 < 3
        let tree = shortest_path_tree(&t, BridgeId(1), CostMetric::Energy).unwrap();
        assert_eq!(tree.parent(&t, BridgeId(2)), Some(BridgeId(0)));
    }

    #[test]
    fn unreachable_within_active_set() {
        let t = load_adjacency_matrix("0 0.3\n0.3 0\n").unwrap();
        let active = ArcSet::from_ids(&t, [ArcId(1)]);
        assert_eq!(
            shortest_path_tree_within(&t, &active, BridgeId(0), CostMetric::Energy),
            Err(RoutingError::Unreachable { root: BridgeId(0), unreachable: BridgeId(1) })
        );
        assert!(matches!(
            shortest_path_tree(&t, BridgeId(5), CostMetric::Energy),
            Err(RoutingError::UnknownBridge(_))
        ));
    }

    #[test]
    fn l_min_values() {
        assert_eq!(l_min_for(50), 98);
        assert_eq!(l_min_for(2), 2);
        assert_eq!(l_min_for(300), 598);
    }

    #[test]
    fn strong_connectivity() {
        let t = load_adjacency_matrix("0 0.3\n0.3 0\n").unwrap();
        assert!(is_strongly_connected(&t, &ArcSet::full(&t)));
        let mut active = ArcSet::full(&t);
        active.remove(t.find_arc(BridgeId(1), BridgeId(0)).unwrap());
        assert!(!is_strongly_connected(&t, &active));
    }

    #[test]
    fn tree_plus_reversals_is_strongly_connected() {
        let t = generate_random_topology(20, 80, DEFAULT_ENERGY_RANGE, 3).unwrap();
        let tree = shortest_path_tree(&t, BridgeId(4), CostMetric::Energy).unwrap();
        let mut active = ArcSet::from_ids(&t, tree.arcs());
        assert!(!is_strongly_connected(&t, &active));
        for arc in tree.arcs() {
            active.insert(t.reverse(arc));
        }
        assert_eq!(active.len(), 38);
        assert!(is_strongly_connected(&t, &active));
    }

    #[test]
    fn single_tree_superposition() {
        let t = generate_random_topology(10, 30, DEFAULT_ENERGY_RANGE, 1).unwrap();
        let tree = shortest_path_tree(&t, BridgeId(0), CostMetric::Energy).unwrap();
        let spg = superpose(&t, [&tree]);
        assert_eq!(spg.active_arcs.len(), 9);
        assert_eq!(spg.active_arcs.iter().collect::<Vec<_>>(), tree.arcs());
    }

    #[test]
    fn arc_set_operations() {
        let t = triangle();
        let mut s = ArcSet::empty(&t);
        assert!(s.insert(ArcId(2)));
        assert!(!s.insert(ArcId(2)));
        assert_eq!(s.len(), 1);
        let c = s.complement();
        assert_eq!(c.len(), 5);
        assert!(s.is_disjoint(&c));
        assert!(s.is_subset(&ArcSet::full(&t)));
        assert!(s.remove(ArcId(2)));
        assert!(s.is_empty());
    }
}

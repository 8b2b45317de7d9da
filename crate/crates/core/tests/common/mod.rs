use greenbridge::prelude::*;
use greenbridge::topology::{link_bounds, EnergyRange};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Best (cost, hops) over every simple path from `root`, found by
/// exhaustive depth-first enumeration.
pub fn enumerate_best(topology: &Topology, root: BridgeId, metric: CostMetric) -> Vec<Option<(f64, usize)>> {
    fn walk(
        topology: &Topology,
        metric: CostMetric,
        node: BridgeId,
        cost: f64,
        hops: usize,
        seen: &mut Vec<bool>,
        best: &mut Vec<Option<(f64, usize)>>,
    ) {
        let better = match best[node.0] {
            None => true,
            Some((c, h)) => cost < c || (cost == c && hops < h),
        };
        if better {
            best[node.0] = Some((cost, hops));
        }
        for &arc in topology.outgoing(node) {
            let next = topology.arc(arc).to;
            if !seen[next.0] {
                seen[next.0] = true;
                walk(topology, metric, next, cost + metric.cost(topology, arc), hops + 1, seen, best);
                seen[next.0] = false;
            }
        }
    }
    let n = topology.node_count();
    let mut seen = vec![false; n];
    let mut best = vec![None; n];
    seen[root.0] = true;
    walk(topology, metric, root, 0.0, 0, &mut seen, &mut best);
    best
}

/// Path chosen by the tie rule: among predecessors consistent with the best
/// (cost, hops) label, the smallest id wins.
pub fn oracle_path(
    topology: &Topology,
    metric: CostMetric,
    best: &[Option<(f64, usize)>],
    root: BridgeId,
    target: BridgeId,
) -> Vec<ArcId> {
    if target == root {
        return Vec::new();
    }
    let (cost, hops) = best[target.0].unwrap();
    let pred = topology
        .incoming(target)
        .iter()
        .filter(|&&a| {
            let p = topology.arc(a).from;
            match best[p.0] {
                Some((pc, ph)) => pc + metric.cost(topology, a) == cost && ph + 1 == hops,
                None => false,
            }
        })
        .min_by_key(|&&a| topology.arc(a).from)
        .copied()
        .unwrap();
    let mut path = oracle_path(topology, metric, best, root, topology.arc(pred).from);
    path.push(pred);
    path
}

/// Connected topology with 2 to 8 bridges; every third case has all
/// weights equal and every other third has weights rounded to one decimal.
pub fn random_small_topology(rng: &mut ChaCha8Rng, case: u64) -> Topology {
    let nodes = rng.random_range(2..=8);
    let (lo, hi) = link_bounds(nodes);
    let links = lo + 2 * rng.random_range(0..=(hi - lo) / 2);
    // Coarse weights force many equal-cost ties.
    let energy = if case % 3 == 0 {
        EnergyRange::new(1.0, 1.0).unwrap()
    } else {
        DEFAULT_ENERGY_RANGE
    };
    let topology = generate_random_topology(nodes, links, energy, case).unwrap();
    if case % 3 == 1 {
        let text = topology.to_adjacency_matrix();
        let coarse: String = text
            .lines()
            .map(|l| {
                l.split(',')
                    .map(|x| {
                        let v: f64 = x.trim().parse().unwrap();
                        if v == 0.0 { "0".to_string() } else { format!("{}", (v * 10.0).round() / 10.0) }
                    })
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n");
        return load_adjacency_matrix(&coarse).unwrap();
    }
    topology
}

/// Compares every tree of `topology` against the enumeration oracle.
/// Returns a description of the first mismatch.
pub fn check_against_oracle(topology: &Topology, metric: CostMetric) -> Result<(), String> {
    for root in topology.bridges() {
        let tree = shortest_path_tree(topology, root, metric).map_err(|e| e.to_string())?;
        let best = enumerate_best(topology, root, metric);
        for target in topology.bridges() {
            let (cost, hops) = best[target.0].ok_or(format!("{target:?} unreachable"))?;
            if tree.distance(target) != cost || tree.hops(target) != hops {
                return Err(format!("{metric} {root:?}->{target:?}: label differs"));
            }
            if tree.path_to(topology, target) != oracle_path(topology, metric, &best, root, target) {
                return Err(format!("{metric} {root:?}->{target:?}: path differs"));
            }
        }
    }
    Ok(())
}

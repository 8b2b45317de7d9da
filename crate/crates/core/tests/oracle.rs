mod common;

use greenbridge::prelude::*;
use greenbridge::routing::{all_shortest_path_trees, l_min_for};
use greenbridge::topology::link_bounds;
use greenbridge::traffic::{conserves_flow, net_flow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn dijkstra_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let topology = common::random_small_topology(&mut rng, case);
        for metric in [CostMetric::Energy, CostMetric::Hop] {
            if let Err(e) = common::check_against_oracle(&topology, metric) {
                panic!("case {case}: {e}");
            }
        }
    }
}

#[test]
fn hop_metric_spg_covers_every_arc() {
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = rng.random_range(3..=30);
        let (lo, hi) = link_bounds(nodes);
        let links = lo + 2 * rng.random_range(0..=(hi - lo) / 2);
        let topology = generate_random_topology(nodes, links, DEFAULT_ENERGY_RANGE, seed).unwrap();
        let trees = all_shortest_path_trees(&topology, None, CostMetric::Hop).unwrap();
        let spg = superpose(&topology, &trees);
        assert_eq!(spg.active_arcs.len(), topology.arc_count(), "seed {seed}");
    }
}

#[test]
fn energy_metric_spg_is_between_floor_and_all_arcs() {
    for seed in 0..30 {
        let topology = generate_random_topology(12, 60, DEFAULT_ENERGY_RANGE, seed).unwrap();
        let trees = all_shortest_path_trees(&topology, None, CostMetric::Energy).unwrap();
        let spg = superpose(&topology, &trees);
        assert!(spg.active_arcs.len() >= l_min_for(12));
        assert!(spg.active_arcs.len() <= topology.arc_count());
        assert!(is_strongly_connected(&topology, &spg.active_arcs));
    }
}

#[test]
fn every_routed_demand_conserves_flow() {
    let mut checked = 0;
    let mut seed = 0;
    while checked < 1000 {
        let topology = generate_random_topology(10, 40, DEFAULT_ENERGY_RANGE, seed).unwrap();
        let demands = generate_demands(&topology, 0.3, seed).unwrap();
        let loads = route_demands(&topology, &ArcSet::full(&topology), &demands, CostMetric::Energy).unwrap();
        for (d, path) in demands.demands.iter().zip(&loads.paths) {
            assert!(conserves_flow(&topology, d, path), "seed {seed} demand {d:?}");
            let net = net_flow(&topology, path, d.volume);
            assert_eq!(net[d.source.0], d.volume);
            assert_eq!(net[d.target.0], -d.volume);
            checked += 1;
        }
        seed += 1;
    }
}

#[test]
fn arc_loads_equal_sum_of_path_volumes() {
    let topology = generate_random_topology(15, 70, DEFAULT_ENERGY_RANGE, 5).unwrap();
    let demands = generate_demands(&topology, 0.5, 5).unwrap();
    let loads = route_demands(&topology, &ArcSet::full(&topology), &demands, CostMetric::Energy).unwrap();
    let mut expected = vec![0.0; topology.arc_count()];
    for (d, path) in demands.demands.iter().zip(&loads.paths) {
        for a in path {
            expected[a.0] += d.volume;
        }
    }
    assert_eq!(loads.load, expected);
}

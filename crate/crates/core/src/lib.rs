//! Energy-aware forwarding for shortest-path-bridged carrier Ethernet cores.
//!
//! The crate models a core network as a symmetric directed graph of bridges
//! ([`topology`]), computes per-bridge shortest-path trees ([`routing`]),
//! routes random demands over them ([`traffic`]) and switches off links with
//! two heuristics that share a three-phase skeleton:
//!
//! * [`ear`]: exporters elected by node degree, traffic ignored;
//! * [`meeafs`]: exporters elected by lowest summed link energy, and a
//!   candidate link stays on when its load exceeds a threshold.
//!
//! [`metrics`] scores the outcome and [`experiment`] drives seeded threshold
//! sweeps that write CSV.
//!
//! ```
//! use greenbridge::prelude::*;
//!
//! let topology = generate_random_topology(50, 348, DEFAULT_ENERGY_RANGE, 7).unwrap();
//! let demands = generate_demands(&topology, 0.2, 7).unwrap();
//! let config = MeeafsConfig::new(0.8, 1.0).unwrap();
//! let result = run_meeafs(&topology, &demands, config, CostMetric::Energy).unwrap();
//!
//! assert!(result.active_arcs.len() >= l_min(&topology));
//! assert!(is_strongly_connected(&topology, &result.active_arcs));
//! let saving = sigma(topology.arc_count(), result.active_arcs.len(), topology.node_count());
//! assert!(saving.unwrap() > 0.0);
//! ```
//!
//! The `book/` directory at the repository root walks through each concept;
//! its code snippets are compiled and run as doctests of this crate.

pub mod cli;
pub mod ear;
pub mod experiment;
pub mod meeafs;
pub mod metrics;
mod phases;
pub mod routing;
pub mod topology;
pub mod traffic;

pub mod prelude {
    pub use crate::ear::{elect_exporters_by_degree, run_ear, PruneResult, Role, RoleAssignment};
    pub use crate::meeafs::{
        bridge_weight, elect_exporters_by_energy, reroot_at_neighbor, run_meeafs, MeeafsConfig,
        MeeafsPlan, Mspt,
    };
    pub use crate::metrics::{fairness, jain_index, rho, sigma, MetricsReport};
    pub use crate::routing::{
        is_strongly_connected, l_min, shortest_path_tree, superpose, ArcSet, CostMetric, SptTree,
    };
    pub use crate::topology::{
        generate_random_topology, load_adjacency_matrix, ArcId, BridgeId, Topology,
        DEFAULT_ENERGY_RANGE,
    };
    pub use crate::traffic::{generate_demands, route_demands, DemandSet, LoadMap};
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/topology.md")]
    mod topology {}
    #[doc = include_str!("../../../book/src/routing.md")]
    mod routing {}
    #[doc = include_str!("../../../book/src/traffic.md")]
    mod traffic {}
    #[doc = include_str!("../../../book/src/election.md")]
    mod election {}
    #[doc = include_str!("../../../book/src/switch-off.md")]
    mod switch_off {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}

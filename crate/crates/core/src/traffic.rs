//! Demand generation, single-path demand routing and load accounting.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, Uniform};
use thiserror::Error;

use crate::routing::{all_shortest_path_trees, ArcSet, CostMetric, RoutingError, SptTree};
use crate::topology::{ArcId, BridgeId, Topology};

/// Demand volumes are drawn from `[LOW, HIGH] · capacity`.
pub const VOLUME_FRACTION_LOW: f64 = 0.001;
pub const VOLUME_FRACTION_HIGH: f64 = 0.1;

// ChaCha stream reserved for demand draws so they never share a stream with
// topology generation under the same seed.
const DEMAND_STREAM: u64 = 1;

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("arrival rate must be finite and non-negative, got {0}")]
    BadLambda(f64),
    #[error("demand {origin}->{target} cannot be routed over the active arcs")]
    Unroutable { origin: BridgeId, target: BridgeId },
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("demand CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("demand CSV line {line}: {reason}")]
    BadRecord { line: u64, reason: String },
}

/// A unit of traffic from `source` to `target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Demand {
    pub source: BridgeId,
    pub target: BridgeId,
    pub volume: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemandSet {
    pub demands: Vec<Demand>,
    pub lambda: f64,
    pub seed: u64,
}

impl DemandSet {
    pub fn empty() -> Self {
        DemandSet { demands: Vec::new(), lambda: 0.0, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        self.demands.iter().map(|d| d.volume).sum()
    }

    /// Writes `source,target,volume` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TrafficError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["source", "target", "volume"])?;
        for d in &self.demands {
            w.write_record([d.source.to_string(), d.target.to_string(), d.volume.to_string()])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads the format produced by [`DemandSet::write_csv`]. `lambda` and
    /// `seed` are not part of the file and are left at zero.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, TrafficError> {
        let mut r = csv::Reader::from_reader(reader);
        let mut demands = Vec::new();
        for record in r.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |k: usize| {
                record.get(k).ok_or_else(|| TrafficError::BadRecord {
                    line,
                    reason: format!("missing column {k}"),
                })
            };
            let bad = |reason: String| TrafficError::BadRecord { line, reason };
            let source: usize = field(0)?.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let target: usize = field(1)?.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let volume: f64 = field(2)?.trim().parse().map_err(|e| bad(format!("{e}")))?;
            if source == target || !(volume.is_finite() && volume > 0.0) {
                return Err(bad("demand needs distinct endpoints and a positive volume".into()));
            }
            demands.push(Demand { source: BridgeId(source), target: BridgeId(target), volume });
        }
        Ok(DemandSet { demands, lambda: 0.0, seed: 0 })
    }
}

/// For every ordered bridge pair draws `k ~ Poisson(lambda)` concurrent
/// demands, each with a volume uniform in `[0.001·c, 0.1·c]` where `c` is the
/// largest arc capacity. Pairs are visited in `(source, target)` order.
pub fn generate_demands(
    topology: &Topology,
    lambda: f64,
    seed: u64,
) -> Result<DemandSet, TrafficError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(TrafficError::BadLambda(lambda));
    }
    let mut demands = Vec::new();
    if lambda > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(DEMAND_STREAM);
        let count = Poisson::new(lambda).map_err(|_| TrafficError::BadLambda(lambda))?;
        let c = topology.max_capacity();
        let volume = Uniform::new_inclusive(VOLUME_FRACTION_LOW * c, VOLUME_FRACTION_HIGH * c)
            .expect("capacity is positive");
        for s in topology.bridges() {
            for t in topology.bridges() {
                if s == t {
                    continue;
                }
                let k = count.sample(&mut rng) as u64;
                for _ in 0..k {
                    demands.push(Demand { source: s, target: t, volume: volume.sample(&mut rng) });
                }
            }
        }
    }
    Ok(DemandSet { demands, lambda, seed })
}

/// Routed traffic: per-arc load and the path each demand took.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadMap {
    /// Load per arc, indexed by arc id.
    pub load: Vec<f64>,
    /// Path of each demand, in the order of the routed [`DemandSet`].
    pub paths: Vec<Vec<ArcId>>,
}

impl LoadMap {
    pub fn zero(topology: &Topology) -> Self {
        LoadMap { load: vec![0.0; topology.arc_count()], paths: Vec::new() }
    }

    pub fn load(&self, arc: ArcId) -> f64 {
        self.load[arc.0]
    }

    pub fn utilization(&self, topology: &Topology, arc: ArcId) -> f64 {
        self.load[arc.0] / topology.arc(arc).capacity
    }
}

/// Routes each demand unsplit along its source's shortest-path tree within
/// `active`.
pub fn route_demands(
    topology: &Topology,
    active: &ArcSet,
    demands: &DemandSet,
    metric: CostMetric,
) -> Result<LoadMap, TrafficError> {
    let trees = all_shortest_path_trees(topology, Some(active), metric).map_err(|e| match e {
        RoutingError::Unreachable { root, unreachable } => {
            TrafficError::Unroutable { origin: root, target: unreachable }
        }
        other => TrafficError::Routing(other),
    })?;
    route_on_trees(topology, &trees, demands)
}

/// Routes demands over precomputed trees, one per root, indexed by root.
pub fn route_on_trees(
    topology: &Topology,
    trees: &[SptTree],
    demands: &DemandSet,
) -> Result<LoadMap, TrafficError> {
    let mut loads = LoadMap::zero(topology);
    loads.paths.reserve(demands.len());
    for d in &demands.demands {
        if !topology.contains(d.source) {
            return Err(RoutingError::UnknownBridge(d.source).into());
        }
        if !topology.contains(d.target) {
            return Err(RoutingError::UnknownBridge(d.target).into());
        }
        let path = trees[d.source.0].path_to(topology, d.target);
        for arc in &path {
            loads.load[arc.0] += d.volume;
        }
        loads.paths.push(path);
    }
    Ok(loads)
}

/// Net outflow of one demand at every bridge, from its recorded path.
pub fn net_flow(topology: &Topology, path: &[ArcId], volume: f64) -> Vec<f64> {
    let mut net = vec![0.0; topology.node_count()];
    for &arc in path {
        let a = topology.arc(arc);
        net[a.from.0] += volume;
        net[a.to.0] -= volume;
    }
    net
}

/// Exact flow-conservation check for a single routed demand: net outflow is
/// `+volume` at the source, `-volume` at the target and zero elsewhere.
pub fn conserves_flow(topology: &Topology, demand: &Demand, path: &[ArcId]) -> bool {
    let net = net_flow(topology, path, demand.volume);
    net.iter().enumerate().all(|(i, &v)| {
        let expected = if i == demand.source.0 {
            demand.volume
        } else if i == demand.target.0 {
            -demand.volume
        } else {
            0.0
        };
        v == expected
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub arc: ArcId,
    pub load: f64,
    pub limit: f64,
    pub excess: f64,
}

/// Arcs whose load exceeds `mu` times their capacity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UtilizationReport {
    pub violations: Vec<Violation>,
}

impl UtilizationReport {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_utilization(loads: &LoadMap, topology: &Topology, mu: f64) -> UtilizationReport {
    let violations = topology
        .arc_ids()
        .filter_map(|arc| {
            let limit = mu * topology.arc(arc).capacity;
            let load = loads.load(arc);
            (load > limit).then(|| Violation { arc, load, limit, excess: load - limit })
        })
        .collect();
    UtilizationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{load_adjacency_matrix, Arc};

    fn pair() -> Topology {
        load_adjacency_matrix("0 0.3\n0.3 0\n").unwrap()
    }

    #[test]
    fn zero_rate_is_empty() {
        let t = pair();
        let d = generate_demands(&t, 0.0, 5).unwrap();
        assert!(d.is_empty());
        assert!(generate_demands(&t, -1.0, 5).is_err());
        assert!(generate_demands(&t, f64::NAN, 5).is_err());
    }

    #[test]
    fn empty_demands_leave_zero_load() {
        let t = pair();
        let l = route_demands(&t, &ArcSet::full(&t), &DemandSet::empty(), CostMetric::Energy)
            .unwrap();
        assert!(l.load.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_demand_on_pair() {
        let t = pair();
        let demands = DemandSet {
            demands: vec![Demand { source: BridgeId(0), target: BridgeId(1), volume: 0.05 }],
            lambda: 0.0,
            seed: 0,
        };
        let l = route_demands(&t, &ArcSet::full(&t), &demands, CostMetric::Energy).unwrap();
        assert_eq!(l.load(t.find_arc(BridgeId(0), BridgeId(1)).unwrap()), 0.05);
        assert_eq!(l.load(t.find_arc(BridgeId(1), BridgeId(0)).unwrap()), 0.0);
        assert!(conserves_flow(&t, &demands.demands[0], &l.paths[0]));
    }

    #[test]
    fn unroutable_pair_is_reported() {
        let t = pair();
        let active = ArcSet::from_ids(&t, [ArcId(0)]);
        let demands = DemandSet {
            demands: vec![Demand { source: BridgeId(0), target: BridgeId(1), volume: 0.05 }],
            lambda: 0.0,
            seed: 0,
        };
        assert!(matches!(
            route_demands(&t, &active, &demands, CostMetric::Energy),
            Err(TrafficError::Unroutable { origin: BridgeId(1), target: BridgeId(0) })
        ));
    }

    #[test]
    fn utilization_report() {
        let t = Topology::new(
            2,
            vec![
                Arc { from: BridgeId(0), to: BridgeId(1), energy: 0.3, capacity: 1.0 },
                Arc { from: BridgeId(1), to: BridgeId(0), energy: 0.3, capacity: 1.0 },
            ],
        )
        .unwrap();
        let mut loads = LoadMap::zero(&t);
        assert!(check_utilization(&loads, &t, 0.8).is_satisfied());
        loads.load[0] = 0.9;
        let r = check_utilization(&loads, &t, 0.8);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].arc, ArcId(0));
        assert!((r.violations[0].excess - 0.1).abs() < 1e-12);
        loads.load[0] = 0.8;
        assert!(check_utilization(&loads, &t, 0.8).is_satisfied());
    }

    #[test]
    fn csv_round_trip() {
        let t = pair();
        let d = generate_demands(&t, 3.0, 11).unwrap();
        assert!(!d.is_empty());
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("source,target,volume\n"));
        let back = DemandSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.demands, d.demands);
        assert!(DemandSet::read_csv("source,target,volume\n1,1,0.5\n".as_bytes()).is_err());
    }
}

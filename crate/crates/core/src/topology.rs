//! Bridges, directed arcs and the adjacency-matrix text format.
//!
//! A [`Topology`] is immutable once built. Every physical link is stored as two
//! arcs, one per direction, each with its own energy weight and capacity.
//! Arcs are kept sorted by `(from, to)`, so an [`ArcId`] order is the same as
//! the lexicographic arc order.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use thiserror::Error;

/// Capacity given to every arc read from an adjacency matrix, in traffic units.
pub const DEFAULT_CAPACITY: f64 = 1.0;

/// Energy weight interval used by the random generator when none is given.
pub const DEFAULT_ENERGY_RANGE: EnergyRange = EnergyRange { low: 0.1, high: 0.5 };

/// Dense bridge index in `[0, node_count)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BridgeId(pub usize);

impl BridgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for BridgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of an arc inside its [`Topology`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcId(pub usize);

impl ArcId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A directed link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub from: BridgeId,
    pub to: BridgeId,
    /// Energy impact of keeping this direction switched on.
    pub energy: f64,
    /// Capacity in traffic units.
    pub capacity: f64,
}

/// Closed interval of energy weights sampled by [`generate_random_topology`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRange {
    pub low: f64,
    pub high: f64,
}

impl EnergyRange {
    pub fn new(low: f64, high: f64) -> Result<Self, TopologyError> {
        if !(low.is_finite() && high.is_finite() && low > 0.0 && low <= high) {
            return Err(TopologyError::InvalidEnergyRange { low, high });
        }
        Ok(EnergyRange { low, high })
    }
}

impl fmt::Display for EnergyRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.low, self.high)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("empty adjacency matrix")]
    Empty,
    #[error("row {row}: expected {expected} entries, found {found}")]
    NotSquare { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {col}: cannot parse {text:?} as a number")]
    BadNumber { row: usize, col: usize, text: String },
    #[error("row {row}, column {col}: weight {value} must be a finite non-negative number")]
    BadWeight { row: usize, col: usize, value: f64 },
    #[error("row {row}, column {col}: diagonal entry must be 0, found {value}")]
    NonZeroDiagonal { row: usize, col: usize, value: f64 },
    #[error("row {row}, column {col}: arc {col}->{row} exists but {row}->{col} does not")]
    Asymmetric { row: usize, col: usize },
    #[error("topology needs at least 2 bridges, found {0}")]
    TooFewNodes(usize),
    #[error("bridge {0} is not reachable from bridge 0")]
    Disconnected(BridgeId),
    #[error("arc {from}->{to}: {reason}")]
    InvalidArc { from: BridgeId, to: BridgeId, reason: &'static str },
    #[error("duplicate arc {from}->{to}")]
    DuplicateArc { from: BridgeId, to: BridgeId },
    #[error("{links} directed links on {nodes} bridges is infeasible: need an even count in [{min}, {max}]")]
    InfeasibleSize { nodes: usize, links: usize, min: usize, max: usize },
    #[error("invalid energy range [{low}, {high}]")]
    InvalidEnergyRange { low: f64, high: f64 },
    #[error("unknown bridge {0}")]
    UnknownBridge(BridgeId),
}

/// Directed, symmetric, connected graph of bridges.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    node_count: usize,
    arcs: Vec<Arc>,
    // outgoing arc ids per bridge, ascending by target
    out: Vec<Vec<ArcId>>,
    // incoming arc ids per bridge, ascending by source
    inc: Vec<Vec<ArcId>>,
}

impl Topology {
    /// Builds a topology and checks every structural invariant.
    pub fn new(node_count: usize, mut arcs: Vec<Arc>) -> Result<Self, TopologyError> {
        if node_count < 2 {
            return Err(TopologyError::TooFewNodes(node_count));
        }
        for a in &arcs {
            let reason = if a.from.0 >= node_count || a.to.0 >= node_count {
                Some("endpoint out of range")
            } else if a.from == a.to {
                Some("self loop")
            } else if !(a.energy.is_finite() && a.energy > 0.0) {
                Some("energy must be positive")
            } else if !(a.capacity.is_finite() && a.capacity > 0.0) {
                Some("capacity must be positive")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(TopologyError::InvalidArc { from: a.from, to: a.to, reason });
            }
        }
        arcs.sort_by_key(|a| (a.from, a.to));
        for w in arcs.windows(2) {
            if (w[0].from, w[0].to) == (w[1].from, w[1].to) {
                return Err(TopologyError::DuplicateArc { from: w[0].from, to: w[0].to });
            }
        }
        let mut out = vec![Vec::new(); node_count];
        let mut inc = vec![Vec::new(); node_count];
        for (k, a) in arcs.iter().enumerate() {
            out[a.from.0].push(ArcId(k));
            inc[a.to.0].push(ArcId(k));
        }
        for list in &mut inc {
            list.sort_by_key(|&id| arcs[id.0].from);
        }
        let topo = Topology { node_count, arcs, out, inc };
        for a in &topo.arcs {
            if topo.find_arc(a.to, a.from).is_none() {
                // report with matrix coordinates of the missing entry
                return Err(TopologyError::Asymmetric { row: a.to.0, col: a.from.0 });
            }
        }
        if let Some(stranded) = topo.first_unreachable() {
            return Err(TopologyError::Disconnected(stranded));
        }
        Ok(topo)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id.0]
    }

    pub fn arc_ids(&self) -> impl Iterator<Item = ArcId> + '_ {
        (0..self.arcs.len()).map(ArcId)
    }

    pub fn bridges(&self) -> impl Iterator<Item = BridgeId> {
        (0..self.node_count).map(BridgeId)
    }

    pub fn contains(&self, node: BridgeId) -> bool {
        node.0 < self.node_count
    }

    /// Outgoing arcs of `node`, ascending by target.
    pub fn outgoing(&self, node: BridgeId) -> &[ArcId] {
        &self.out[node.0]
    }

    /// Incoming arcs of `node`, ascending by source.
    pub fn incoming(&self, node: BridgeId) -> &[ArcId] {
        &self.inc[node.0]
    }

    pub fn neighbors(&self, node: BridgeId) -> impl Iterator<Item = BridgeId> + '_ {
        self.out[node.0].iter().map(move |&id| self.arcs[id.0].to)
    }

    /// Number of neighbours (equal to in-degree and out-degree).
    pub fn degree(&self, node: BridgeId) -> usize {
        self.out[node.0].len()
    }

    pub fn find_arc(&self, from: BridgeId, to: BridgeId) -> Option<ArcId> {
        let list = self.out.get(from.0)?;
        list.binary_search_by_key(&to, |&id| self.arcs[id.0].to)
            .ok()
            .map(|pos| list[pos])
    }

    /// The arc in the opposite direction. Always exists by construction.
    pub fn reverse(&self, id: ArcId) -> ArcId {
        let a = &self.arcs[id.0];
        self.find_arc(a.to, a.from).expect("topology arcs are symmetric")
    }

    /// Sum of the energy of all arcs leaving `node`.
    pub fn incident_energy(&self, node: BridgeId) -> Result<f64, TopologyError> {
        if !self.contains(node) {
            return Err(TopologyError::UnknownBridge(node));
        }
        Ok(self.out[node.0].iter().map(|id| self.arcs[id.0].energy).sum())
    }

    pub fn max_capacity(&self) -> f64 {
        self.arcs.iter().map(|a| a.capacity).fold(0.0, f64::max)
    }

    /// Replaces every arc capacity by `capacity`.
    pub fn with_uniform_capacity(mut self, capacity: f64) -> Result<Self, TopologyError> {
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(TopologyError::InvalidArc {
                from: BridgeId(0),
                to: BridgeId(0),
                reason: "capacity must be positive",
            });
        }
        for a in &mut self.arcs {
            a.capacity = capacity;
        }
        Ok(self)
    }

    fn first_unreachable(&self) -> Option<BridgeId> {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([BridgeId(0)]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !seen[v.0] {
                    seen[v.0] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.iter().position(|s| !s).map(BridgeId)
    }

    /// Serializes energies as an adjacency matrix. Values use the shortest
    /// decimal form that parses back to the same `f64`.
    pub fn to_adjacency_matrix(&self) -> String {
        let n = self.node_count;
        let mut out = String::new();
        for i in 0..n {
            let mut row = vec!["0".to_string(); n];
            for &id in &self.out[i] {
                let a = &self.arcs[id.0];
                row[a.to.0] = format!("{}", a.energy);
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Every problem found in an adjacency matrix, gathered without stopping at
/// the first one.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixReport {
    pub nodes: usize,
    pub arcs: usize,
    pub problems: Vec<TopologyError>,
}

impl MatrixReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>, TopologyError> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row_idx = rows.len();
        let mut row = Vec::new();
        for (col, field) in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .enumerate()
        {
            let value: f64 = field.parse().map_err(|_| TopologyError::BadNumber {
                row: row_idx,
                col,
                text: field.to_string(),
            })?;
            if !(value.is_finite() && value >= 0.0) {
                return Err(TopologyError::BadWeight { row: row_idx, col, value });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(TopologyError::Empty);
    }
    let n = rows.len();
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(TopologyError::NotSquare { row, expected: n, found: r.len() });
        }
    }
    Ok(rows)
}

/// Parses a matrix and lists every invariant violation. Only lexical errors
/// (bad numbers, ragged rows, empty input) are returned as `Err`.
pub fn validate_adjacency_matrix(text: &str) -> Result<MatrixReport, TopologyError> {
    let rows = parse_rows(text)?;
    let n = rows.len();
    let mut problems = Vec::new();
    if n < 2 {
        problems.push(TopologyError::TooFewNodes(n));
    }
    let mut arcs = 0;
    for i in 0..n {
        for j in 0..n {
            let v = rows[i][j];
            if i == j {
                if v != 0.0 {
                    problems.push(TopologyError::NonZeroDiagonal { row: i, col: j, value: v });
                }
                continue;
            }
            if v > 0.0 {
                arcs += 1;
                if rows[j][i] == 0.0 {
                    problems.push(TopologyError::Asymmetric { row: j, col: i });
                }
            }
        }
    }
    if n >= 2 {
        // undirected reachability over any present entry
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if v != u && !seen[v] && (rows[u][v] > 0.0 || rows[v][u] > 0.0) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            problems.push(TopologyError::Disconnected(BridgeId(v)));
        }
    }
    Ok(MatrixReport { nodes: n, arcs, problems })
}

/// Reads a weighted adjacency matrix with [`DEFAULT_CAPACITY`] on every arc.
pub fn load_adjacency_matrix(text: &str) -> Result<Topology, TopologyError> {
    load_adjacency_matrix_with_capacity(text, DEFAULT_CAPACITY)
}

pub fn load_adjacency_matrix_with_capacity(
    text: &str,
    capacity: f64,
) -> Result<Topology, TopologyError> {
    let report = validate_adjacency_matrix(text)?;
    if let Some(first) = report.problems.into_iter().next() {
        return Err(first);
    }
    let rows = parse_rows(text)?;
    let n = rows.len();
    let mut arcs = Vec::with_capacity(report.arcs);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i != j && v > 0.0 {
                arcs.push(Arc { from: BridgeId(i), to: BridgeId(j), energy: v, capacity });
            }
        }
    }
    Topology::new(n, arcs)
}

/// Largest and smallest feasible directed-link counts for `nodes` bridges.
pub fn link_bounds(nodes: usize) -> (usize, usize) {
    (2 * nodes.saturating_sub(1), nodes * nodes.saturating_sub(1))
}

/// Random connected topology: a uniform random spanning tree (decoded from a
/// random Prüfer sequence) plus uniformly chosen extra links, each direction
/// with its own energy drawn from `energy`.
pub fn generate_random_topology(
    nodes: usize,
    directed_links: usize,
    energy: EnergyRange,
    seed: u64,
) -> Result<Topology, TopologyError> {
    let (min, max) = link_bounds(nodes);
    if nodes < 2 || directed_links % 2 != 0 || directed_links < min || directed_links > max {
        return Err(TopologyError::InfeasibleSize { nodes, links: directed_links, min, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut edges: BTreeSet<(usize, usize)> = random_tree(nodes, &mut rng).into_iter().collect();

    let wanted = directed_links / 2;
    if edges.len() < wanted {
        let mut absent: Vec<(usize, usize)> = (0..nodes)
            .flat_map(|i| ((i + 1)..nodes).map(move |j| (i, j)))
            .filter(|e| !edges.contains(e))
            .collect();
        absent.shuffle(&mut rng);
        let missing = wanted - edges.len();
        edges.extend(absent.into_iter().take(missing));
    }

    let weights = Uniform::new_inclusive(energy.low, energy.high)
        .map_err(|_| TopologyError::InvalidEnergyRange { low: energy.low, high: energy.high })?;
    let mut arcs = Vec::with_capacity(directed_links);
    for &(i, j) in &edges {
        for (from, to) in [(i, j), (j, i)] {
            arcs.push(Arc {
                from: BridgeId(from),
                to: BridgeId(to),
                energy: weights.sample(&mut rng),
                capacity: DEFAULT_CAPACITY,
            });
        }
    }
    Topology::new(nodes, arcs)
}

// Undirected edges (smaller endpoint first) of a uniformly random labelled tree.
fn random_tree(nodes: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let order = |a: usize, b: usize| (a.min(b), a.max(b));
    if nodes == 2 {
        return vec![(0, 1)];
    }
    let prufer: Vec<usize> = (0..nodes - 2).map(|_| rng.random_range(0..nodes)).collect();
    let mut degree = vec![1usize; nodes];
    for &p in &prufer {
        degree[p] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..nodes).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(nodes - 1);
    for &p in &prufer {
        let leaf = *leaves.iter().next().expect("a Prüfer decode always has a leaf");
        leaves.remove(&leaf);
        edges.push(order(leaf, p));
        degree[p] -= 1;
        if degree[p] == 1 {
            leaves.insert(p);
        }
    }
    let mut rest = leaves.into_iter();
    let (a, b) = (rest.next().unwrap(), rest.next().unwrap());
    edges.push(order(a, b));
    edges
}

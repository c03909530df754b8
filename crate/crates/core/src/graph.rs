//! Decoding graphs with explicit boundary nodes.
//!
//! Nodes are detectors plus two or more virtual boundary nodes. Every edge is
//! a candidate physical error; an edge touching a boundary node is what the
//! detector error model would call a half-edge. Edge weights are stored as
//! integers (see [`Weight`]) so that every comparison made by the decoder and
//! the soft-output estimators is exact.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a detector or boundary node.
pub type NodeId = usize;

/// Integer units per natural-log unit of weight, before the factor of two.
pub const WEIGHT_SCALE: u64 = 1_000_000;

const UNITS_PER_NAT: f64 = (2 * WEIGHT_SCALE) as f64;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid probability {0}: expected 0 < p <= 0.5")]
    InvalidProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Edge weight in units of `1 / (2 * WEIGHT_SCALE)` nat.
///
/// Conversions from natural units always produce an even number of units, so
/// half of any edge weight is itself an exact `Weight`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Weight(u64);

impl Weight {
    pub const ZERO: Weight = Weight(0);
    pub const MAX: Weight = Weight(u64::MAX);

    pub const fn from_units(units: u64) -> Self {
        Weight(units)
    }

    pub const fn units(self) -> u64 {
        self.0
    }

    /// Rounds a non-negative natural-log weight to the nearest even unit.
    ///
    /// Panics on negative or non-finite input; callers validate first.
    pub fn from_nat(w: f64) -> Self {
        assert!(
            w.is_finite() && w >= 0.0,
            "weight must be finite and non-negative, got {w}"
        );
        let half = (w * WEIGHT_SCALE as f64).round() as u64;
        Weight(2 * half)
    }

    pub fn from_db(db: f64) -> Self {
        Weight::from_nat(db_to_nat(db))
    }

    pub fn nat(self) -> f64 {
        self.0 as f64 / UNITS_PER_NAT
    }

    pub fn db(self) -> f64 {
        nat_to_db(self.nat())
    }

    pub fn half(self) -> Weight {
        Weight(self.0 / 2)
    }

    pub fn saturating_add(self, other: Weight) -> Weight {
        Weight(self.0.saturating_add(other.0))
    }
}

impl std::ops::Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Weight {
    type Output = Weight;
    fn sub(self, rhs: Weight) -> Weight {
        Weight(self.0 - rhs.0)
    }
}

impl std::ops::Mul<u64> for Weight {
    type Output = Weight;
    fn mul(self, rhs: u64) -> Weight {
        Weight(self.0 * rhs)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.nat())
    }
}

/// `ln((1 - p) / p)`, rounded to a [`Weight`].
pub fn weight_from_prob(p: f64) -> Result<Weight, GraphError> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(GraphError::InvalidProbability(p));
    }
    Ok(Weight::from_nat(((1.0 - p) / p).ln()))
}

pub fn nat_to_db(w: f64) -> f64 {
    10.0 * w / std::f64::consts::LN_10
}

pub fn db_to_nat(db: f64) -> f64 {
    db * std::f64::consts::LN_10 / 10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: Weight,
    /// Error probability. `None` for externally supplied edges that only
    /// carry a weight.
    pub prob: Option<f64>,
}

impl Edge {
    pub fn with_prob(u: NodeId, v: NodeId, p: f64) -> Result<Self, GraphError> {
        Ok(Edge {
            u,
            v,
            weight: weight_from_prob(p)?,
            prob: Some(p),
        })
    }

    pub fn with_weight(u: NodeId, v: NodeId, weight: Weight) -> Self {
        Edge {
            u,
            v,
            weight,
            prob: None,
        }
    }

    /// The endpoint opposite `node`.
    #[inline]
    pub fn other(&self, node: NodeId) -> NodeId {
        if self.u == node {
            self.v
        } else {
            self.u
        }
    }
}

/// Parameters recorded by the built-in generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceParams {
    pub distance: usize,
    pub rounds: usize,
    pub p: f64,
}

/// Weighted decoding graph over detectors and boundary nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodingGraph {
    num_nodes: usize,
    boundaries: Vec<NodeId>,
    is_boundary: Vec<bool>,
    edges: Vec<Edge>,
    adj_offsets: Vec<usize>,
    adj_edges: Vec<usize>,
    params: Option<DistanceParams>,
}

impl DecodingGraph {
    /// Validates and indexes a graph. Boundary order is preserved.
    pub fn new(num_nodes: usize, boundaries: Vec<NodeId>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if boundaries.len() < 2 {
            return Err(GraphError::InvalidGraph(
                "at least two boundary nodes are required".into(),
            ));
        }
        let mut is_boundary = vec![false; num_nodes];
        for &b in &boundaries {
            if b >= num_nodes {
                return Err(GraphError::InvalidGraph(format!(
                    "boundary {b} out of range (nodes={num_nodes})"
                )));
            }
            if is_boundary[b] {
                return Err(GraphError::InvalidGraph(format!("boundary {b} listed twice")));
            }
            is_boundary[b] = true;
        }
        let mut degree = vec![0usize; num_nodes];
        for (i, e) in edges.iter().enumerate() {
            if e.u >= num_nodes || e.v >= num_nodes {
                return Err(GraphError::InvalidGraph(format!(
                    "edge {i} references a node out of range"
                )));
            }
            if e.u == e.v {
                return Err(GraphError::InvalidGraph(format!(
                    "edge {i} is a self-loop on node {}",
                    e.u
                )));
            }
            if let Some(p) = e.prob {
                if !(0.0..=0.5).contains(&p) {
                    return Err(GraphError::InvalidProbability(p));
                }
            }
            degree[e.u] += 1;
            degree[e.v] += 1;
        }

        let mut adj_offsets = vec![0usize; num_nodes + 1];
        for n in 0..num_nodes {
            adj_offsets[n + 1] = adj_offsets[n] + degree[n];
        }
        let mut fill = adj_offsets.clone();
        let mut adj_edges = vec![0usize; adj_offsets[num_nodes]];
        for (i, e) in edges.iter().enumerate() {
            adj_edges[fill[e.u]] = i;
            fill[e.u] += 1;
            adj_edges[fill[e.v]] = i;
            fill[e.v] += 1;
        }

        let graph = DecodingGraph {
            num_nodes,
            boundaries,
            is_boundary,
            edges,
            adj_offsets,
            adj_edges,
            params: None,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        if self.num_nodes == 0 {
            return Ok(());
        }
        let mut seen = vec![false; self.num_nodes];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(n) = queue.pop_front() {
            for &ei in self.incident(n) {
                let m = self.edges[ei].other(n);
                if !seen[m] {
                    seen[m] = true;
                    count += 1;
                    queue.push_back(m);
                }
            }
        }
        if count != self.num_nodes {
            return Err(GraphError::InvalidGraph(format!(
                "graph is disconnected ({count} of {} nodes reachable from node 0)",
                self.num_nodes
            )));
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_detectors(&self) -> usize {
        self.num_nodes - self.boundaries.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn boundaries(&self) -> &[NodeId] {
        &self.boundaries
    }

    /// The pair `(b1, b2)`: the first two boundaries.
    pub fn boundary_pair(&self) -> (NodeId, NodeId) {
        (self.boundaries[0], self.boundaries[1])
    }

    #[inline]
    pub fn is_boundary(&self, n: NodeId) -> bool {
        self.is_boundary[n]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    /// Indices of edges incident to `n`.
    #[inline]
    pub fn incident(&self, n: NodeId) -> &[usize] {
        &self.adj_edges[self.adj_offsets[n]..self.adj_offsets[n + 1]]
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adj_offsets[n + 1] - self.adj_offsets[n]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes).map(|n| self.degree(n)).max().unwrap_or(0)
    }

    pub fn params(&self) -> Option<DistanceParams> {
        self.params
    }

    pub fn with_params(mut self, params: DistanceParams) -> Self {
        self.params = Some(params);
        self
    }

    /// Detectors sharing at least one edge with boundary `b`.
    pub fn boundary_neighbors(&self, b: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.incident(b).iter().map(|&ei| self.edges[ei].other(b)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Rotated-surface-code matching graph for Z errors under uniform
/// phenomenological noise, with two boundaries: data qubits on the left edge
/// attach to `b1`, those on the right edge to `b2`.
pub fn build_phenomenological(distance: usize, rounds: usize, p: f64) -> Result<DecodingGraph, GraphError> {
    build_phenomenological_multi(distance, rounds, p, 2)
}

/// Same lattice as [`build_phenomenological`], with the half-edges split into
/// `num_boundaries` groups. Each side is cut into horizontal bands by check
/// row; the left side gets the first `ceil(M/2)` boundaries.
pub fn build_phenomenological_multi(
    distance: usize,
    rounds: usize,
    p: f64,
    num_boundaries: usize,
) -> Result<DecodingGraph, GraphError> {
    if distance < 3 || distance.is_multiple_of(2) {
        return Err(GraphError::InvalidParameter(format!(
            "distance must be odd and >= 3, got {distance}"
        )));
    }
    if rounds < 1 {
        return Err(GraphError::InvalidParameter("rounds must be >= 1".into()));
    }
    let left_groups = num_boundaries.div_ceil(2);
    let right_groups = num_boundaries / 2;
    if num_boundaries < 2 || left_groups > distance + 1 {
        return Err(GraphError::InvalidParameter(format!(
            "cannot place {num_boundaries} boundaries on a distance-{distance} patch"
        )));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(GraphError::InvalidProbability(p));
    }

    let d = distance;
    // X-type plaquettes sit on the (d+1) x (d+1) grid of data-qubit corners.
    let is_check = |r: usize, c: usize| -> bool {
        if !(r + c).is_multiple_of(2) {
            return false;
        }
        let bulk_row = (1..d).contains(&r);
        let bulk_col = (1..d).contains(&c);
        (bulk_row && bulk_col) || ((r == 0 || r == d) && bulk_col)
    };
    let mut check_index = vec![usize::MAX; (d + 1) * (d + 1)];
    let mut check_rows = Vec::new();
    for r in 0..=d {
        for c in 0..=d {
            if is_check(r, c) {
                check_index[r * (d + 1) + c] = check_rows.len();
                check_rows.push(r);
            }
        }
    }
    let per_slice = check_rows.len();
    debug_assert_eq!(per_slice, (d * d - 1) / 2);
    let slices = rounds + 1;
    let num_detectors = per_slice * slices;
    let boundaries: Vec<NodeId> = (0..num_boundaries).map(|k| num_detectors + k).collect();

    let band = |row: usize, groups: usize| row * groups / (d + 1);
    let mut edges = Vec::with_capacity(slices * d * d + rounds * per_slice);
    for t in 0..slices {
        let base = t * per_slice;
        for i in 0..d {
            for j in 0..d {
                let corners = if (i + j) % 2 == 0 {
                    [(i, j), (i + 1, j + 1)]
                } else {
                    [(i, j + 1), (i + 1, j)]
                };
                let ends: Vec<(usize, usize)> = corners.into_iter().filter(|&(r, c)| is_check(r, c)).collect();
                match ends.as_slice() {
                    [a, b] => {
                        let u = base + check_index[a.0 * (d + 1) + a.1];
                        let v = base + check_index[b.0 * (d + 1) + b.1];
                        edges.push(Edge::with_prob(u, v, p)?);
                    }
                    [a] => {
                        let u = base + check_index[a.0 * (d + 1) + a.1];
                        let b = if j == 0 {
                            boundaries[band(a.0, left_groups)]
                        } else {
                            debug_assert_eq!(j, d - 1);
                            boundaries[left_groups + band(a.0, right_groups)]
                        };
                        edges.push(Edge::with_prob(u, b, p)?);
                    }
                    _ => unreachable!("every data qubit touches one or two X checks"),
                }
            }
        }
        if t + 1 < slices {
            for k in 0..per_slice {
                edges.push(Edge::with_prob(base + k, base + per_slice + k, p)?);
            }
        }
    }

    let graph = DecodingGraph::new(num_detectors + num_boundaries, boundaries, edges)?;
    Ok(graph.with_params(DistanceParams { distance, rounds, p }))
}

/// Serializes a graph in the line-oriented `graph v1` format.
pub fn graph_to_string(g: &DecodingGraph) -> String {
    let mut out = String::new();
    let ids: Vec<String> = g.boundaries.iter().map(|b| b.to_string()).collect();
    writeln!(out, "graph v1 nodes={} boundaries={}", g.num_nodes, ids.join(",")).unwrap();
    if let Some(params) = g.params {
        writeln!(
            out,
            "# params d={} rounds={} p={}",
            params.distance, params.rounds, params.p
        )
        .unwrap();
    }
    for e in &g.edges {
        match e.prob {
            Some(p) => writeln!(out, "edge {} {} p={}", e.u, e.v, p).unwrap(),
            None => writeln!(out, "edge {} {} w={}", e.u, e.v, e.weight.nat()).unwrap(),
        }
    }
    out
}

pub fn save_graph(g: &DecodingGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    fs::write(path, graph_to_string(g))?;
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<DecodingGraph, GraphError> {
    parse_graph(&fs::read_to_string(path)?)
}

/// Parses the `graph v1` text format. Errors carry 1-based line numbers.
pub fn parse_graph(text: &str) -> Result<DecodingGraph, GraphError> {
    let mut header: Option<(usize, Vec<NodeId>)> = None;
    let mut params = None;
    let mut edges = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| GraphError::Parse { line: line_no, msg };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("params ") {
                params = Some(parse_params(rest).map_err(err)?);
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("graph") if header.is_none() => {
                if tokens.next() != Some("v1") {
                    return Err(err("unsupported graph format version".into()));
                }
                let mut nodes = None;
                let mut boundaries = None;
                for tok in tokens {
                    if let Some(v) = tok.strip_prefix("nodes=") {
                        nodes = Some(v.parse::<usize>().map_err(|e| err(format!("bad node count: {e}")))?);
                    } else if let Some(v) = tok.strip_prefix("boundaries=") {
                        let ids = v
                            .split(',')
                            .map(|s| s.parse::<usize>())
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|e| err(format!("bad boundary list: {e}")))?;
                        boundaries = Some(ids);
                    } else {
                        return Err(err(format!("unexpected header field '{tok}'")));
                    }
                }
                match (nodes, boundaries) {
                    (Some(n), Some(b)) => {
                        if let Some(&bad) = b.iter().find(|&&id| id >= n) {
                            return Err(err(format!("boundary {bad} out of range (nodes={n})")));
                        }
                        header = Some((n, b));
                    }
                    _ => return Err(err("header needs nodes= and boundaries=".into())),
                }
            }
            Some("graph") => return Err(err("duplicate header".into())),
            Some("edge") => {
                let Some((num_nodes, _)) = header.as_ref() else {
                    return Err(err("edge before header".into()));
                };
                let fields: Vec<&str> = tokens.collect();
                let [u, v, attr] = fields.as_slice() else {
                    return Err(err("expected 'edge <u> <v> w=<weight>|p=<prob>'".into()));
                };
                let u: usize = u.parse().map_err(|e| err(format!("bad node id '{u}': {e}")))?;
                let v: usize = v.parse().map_err(|e| err(format!("bad node id '{v}': {e}")))?;
                for id in [u, v] {
                    if id >= *num_nodes {
                        return Err(err(format!("node {id} out of range (nodes={num_nodes})")));
                    }
                }
                if u == v {
                    return Err(err(format!("self-loop on node {u}")));
                }
                let edge = if let Some(w) = attr.strip_prefix("w=") {
                    let w: f64 = w.parse().map_err(|e| err(format!("bad weight: {e}")))?;
                    if !w.is_finite() || w < 0.0 {
                        return Err(err(format!("weight must be finite and non-negative, got {w}")));
                    }
                    Edge::with_weight(u, v, Weight::from_nat(w))
                } else if let Some(p) = attr.strip_prefix("p=") {
                    let p: f64 = p.parse().map_err(|e| err(format!("bad probability: {e}")))?;
                    Edge::with_prob(u, v, p).map_err(|e| err(e.to_string()))?
                } else {
                    return Err(err(format!("unknown edge attribute '{attr}'")));
                };
                edges.push(edge);
            }
            Some(other) => return Err(err(format!("unknown record '{other}'"))),
            None => unreachable!(),
        }
    }

    let (num_nodes, boundaries) = header.ok_or(GraphError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let graph = DecodingGraph::new(num_nodes, boundaries, edges)?;
    Ok(match params {
        Some(p) => graph.with_params(p),
        None => graph,
    })
}

fn parse_params(text: &str) -> Result<DistanceParams, String> {
    let (mut distance, mut rounds, mut p) = (None, None, None);
    for tok in text.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| format!("bad params field '{tok}'"))?;
        match k {
            "d" => distance = v.parse().ok(),
            "rounds" => rounds = v.parse().ok(),
            "p" => p = v.parse().ok(),
            _ => return Err(format!("unknown params field '{k}'")),
        }
    }
    match (distance, rounds, p) {
        (Some(distance), Some(rounds), Some(p)) => Ok(DistanceParams { distance, rounds, p }),
        _ => Err("params comment needs d=, rounds= and p=".into()),
    }
}

//! Soft outputs computed on top of a finished [`ClusterState`].
//!
//! All four estimators work on the contracted graph G′, in which every
//! cluster collapses to a single node (equivalently, edges inside a cluster
//! weigh zero):
//!
//! * [`cluster_gap`]: shortest `b1 → b2` distance in G′.
//! * [`bounded_cluster_gap`]: the same Dijkstra search, abandoned as soon as
//!   the popped distance exceeds `ε_max`.
//! * [`extra_cluster_gap`]: grow every cluster and boundary by `ε/2` and
//!   report the smallest `ε ≤ ε_max` at which `b1` and `b2` end up in one
//!   merged set. This is the minimax (bottleneck) distance between the
//!   boundaries over hops between clusters.
//! * [`extra_cluster_gap_cg`]: the same growth run to `ε_max`, recording the
//!   distance of every pairwise collision; if the boundaries connect, the
//!   shortest path on that cluster graph is returned.
//!
//! Growth tracks, for every covered node, each origin whose ball reaches it
//! (not just the nearest one). A collision between two origins is therefore
//! recorded at their exact G′ distance even when the shortest path between
//! them runs through a third cluster's territory.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::decoder::{ClusterState, DisjointSets};
use crate::graph::{DecodingGraph, NodeId, Weight};

/// Default early-stopping threshold, in decibels.
pub const DEFAULT_EPSILON_MAX_DB: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapKind {
    Cluster,
    Bounded,
    Extra,
    ExtraCg,
}

impl GapKind {
    pub const ALL: [GapKind; 4] = [GapKind::Cluster, GapKind::Bounded, GapKind::Extra, GapKind::ExtraCg];

    pub fn name(self) -> &'static str {
        match self {
            GapKind::Cluster => "cluster",
            GapKind::Bounded => "bounded",
            GapKind::Extra => "extra",
            GapKind::ExtraCg => "extra-cg",
        }
    }
}

impl std::fmt::Display for GapKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GapKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cluster" => Ok(GapKind::Cluster),
            "bounded" => Ok(GapKind::Bounded),
            "extra" => Ok(GapKind::Extra),
            "extra-cg" | "extra_cg" => Ok(GapKind::ExtraCg),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

/// One soft-output value with its instrumentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapResult {
    pub kind: GapKind,
    /// `None` when the estimator is undefined for this sample.
    pub value: Option<Weight>,
    /// Nodes settled by Dijkstra (cluster and bounded kinds).
    pub visited_nodes: usize,
    /// Bare nodes newly covered by extra growth (extra kinds).
    pub extra_nodes: usize,
    /// Radius the extra growth reached before stopping (extra kinds).
    pub growth_radius: Weight,
    /// Whether the cluster-graph Dijkstra ran (extra-cg only).
    pub cluster_graph_invoked: bool,
}

impl GapResult {
    fn new(kind: GapKind) -> Self {
        GapResult {
            kind,
            value: None,
            visited_nodes: 0,
            extra_nodes: 0,
            growth_radius: Weight::ZERO,
            cluster_graph_invoked: false,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

/// The decoding graph seen through the final clusters: edges inside a
/// cluster weigh zero, all others keep their weight.
#[derive(Clone, Copy)]
pub struct ContractedView<'a> {
    graph: &'a DecodingGraph,
    clusters: &'a ClusterState,
}

impl<'a> ContractedView<'a> {
    pub fn new(graph: &'a DecodingGraph, clusters: &'a ClusterState) -> Self {
        assert_eq!(
            graph.num_nodes(),
            clusters.num_nodes(),
            "cluster state belongs to another graph"
        );
        ContractedView { graph, clusters }
    }

    pub fn graph(&self) -> &'a DecodingGraph {
        self.graph
    }

    pub fn clusters(&self) -> &'a ClusterState {
        self.clusters
    }

    #[inline]
    pub fn set_of(&self, n: NodeId) -> NodeId {
        self.clusters.set_of(n)
    }

    #[inline]
    pub fn edge_weight(&self, ei: usize) -> Weight {
        let e = self.graph.edge(ei);
        if self.set_of(e.u) == self.set_of(e.v) {
            Weight::ZERO
        } else {
            e.weight
        }
    }

    /// Contracted-graph nodes that grow during extra growth: every cluster
    /// and every boundary, ascending by set id.
    pub fn growth_origins(&self) -> Vec<NodeId> {
        self.clusters.roots()
    }
}

/// Dijkstra from the set containing `source` to the set containing `target`,
/// optionally abandoned once the popped distance exceeds `bound`.
fn contracted_dijkstra(
    view: &ContractedView<'_>,
    source: NodeId,
    target: NodeId,
    bound: Option<Weight>,
) -> (Option<Weight>, usize) {
    let g = view.graph();
    let target_set = view.set_of(target);
    let limit = bound.map_or(u64::MAX, Weight::units);
    let mut dist = vec![u64::MAX; g.num_nodes()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0;
    heap.push(Reverse((0u64, source)));
    let mut settled = 0usize;
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        if d > limit {
            break;
        }
        settled += 1;
        if view.set_of(v) == target_set {
            return (Some(Weight::from_units(d)), settled);
        }
        for &ei in g.incident(v) {
            let u = g.edge(ei).other(v);
            let nd = d + view.edge_weight(ei).units();
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Reverse((nd, u)));
            }
        }
    }
    (None, settled)
}

/// Exact shortest `b1 → b2` distance in G′.
pub fn cluster_gap(view: &ContractedView<'_>) -> GapResult {
    let (b1, b2) = view.graph().boundary_pair();
    let (value, visited) = contracted_dijkstra(view, b1, b2, None);
    GapResult {
        value,
        visited_nodes: visited,
        ..GapResult::new(GapKind::Cluster)
    }
}

/// Cluster gap if it is at most `epsilon_max`, otherwise undefined.
pub fn bounded_cluster_gap(view: &ContractedView<'_>, epsilon_max: Weight) -> GapResult {
    let (b1, b2) = view.graph().boundary_pair();
    let (value, visited) = contracted_dijkstra(view, b1, b2, Some(epsilon_max));
    GapResult {
        value,
        visited_nodes: visited,
        ..GapResult::new(GapKind::Bounded)
    }
}

/// Two growth origins whose balls touched, at `distance = ε` (each ball has
/// radius `ε/2` at that moment).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Collision {
    pub distance: Weight,
    pub a: usize,
    pub b: usize,
}

/// Outcome of one extra-growth pass up to `ε_max`.
#[derive(Clone, Debug)]
pub struct ExtraGrowth {
    /// Set ids of the growth origins; collisions index into this.
    pub origins: Vec<NodeId>,
    /// Closest collision per origin pair, sorted by distance then pair.
    pub collisions: Vec<Collision>,
    /// Distance from each node to its nearest origin, if within `ε_max/2`.
    pub covered: Vec<Option<Weight>>,
    pub epsilon_max: Weight,
}

impl ExtraGrowth {
    pub fn origin_index(&self, set: NodeId) -> usize {
        self.origins.binary_search(&set).expect("not a growth origin")
    }

    /// Bare nodes (outside every cluster) whose nearest origin is within
    /// `epsilon / 2`.
    pub fn newly_covered(&self, view: &ContractedView<'_>, epsilon: Weight) -> usize {
        let g = view.graph();
        (0..g.num_nodes())
            .filter(|&v| !g.is_boundary(v) && view.clusters().cluster_of(v).is_none())
            .filter(|&v| matches!(self.covered[v], Some(d) if 2 * d.units() <= epsilon.units()))
            .count()
    }
}

/// Grows every cluster and boundary of `view` until `ε = epsilon_max`.
pub fn extra_growth(view: &ContractedView<'_>, epsilon_max: Weight) -> ExtraGrowth {
    let g = view.graph();
    let n = g.num_nodes();
    let origins = view.growth_origins();
    let reach = epsilon_max.units();

    // Bounded Dijkstra from each origin; ball entries are (node, origin, dist).
    let mut dist = vec![u64::MAX; n];
    let mut touched: Vec<NodeId> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut entries: Vec<(NodeId, usize, u64)> = Vec::new();
    for (oi, &root) in origins.iter().enumerate() {
        dist[root] = 0;
        touched.push(root);
        heap.push(Reverse((0u64, root)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if 2 * d > reach {
                break;
            }
            entries.push((v, oi, d));
            for &ei in g.incident(v) {
                let u = g.edge(ei).other(v);
                let nd = d + view.edge_weight(ei).units();
                if 2 * nd <= reach && nd < dist[u] {
                    if dist[u] == u64::MAX {
                        touched.push(u);
                    }
                    dist[u] = nd;
                    heap.push(Reverse((nd, u)));
                }
            }
        }
        heap.clear();
        for v in touched.drain(..) {
            dist[v] = u64::MAX;
        }
    }

    entries.sort_unstable();
    let mut start = vec![0usize; n + 1];
    for &(v, _, _) in &entries {
        start[v + 1] += 1;
    }
    for v in 0..n {
        start[v + 1] += start[v];
    }
    let covers = |v: NodeId| &entries[start[v]..start[v + 1]];

    let mut covered = vec![None; n];
    for &(v, _, d) in &entries {
        let w = Weight::from_units(d);
        if covered[v].is_none_or(|c| w < c) {
            covered[v] = Some(w);
        }
    }

    // Two balls touch on edge (x, y) once ε reaches d_A(x) + w + d_B(y).
    let mut best: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for ei in 0..g.num_edges() {
        let e = g.edge(ei);
        let (cx, cy) = (covers(e.u), covers(e.v));
        if cx.is_empty() || cy.is_empty() {
            continue;
        }
        let w = view.edge_weight(ei).units();
        for &(_, a, da) in cx {
            for &(_, b, db) in cy {
                if a == b {
                    continue;
                }
                let eps = da + w + db;
                if eps > reach {
                    continue;
                }
                let key = (a.min(b), a.max(b));
                let slot = best.entry(key).or_insert(u64::MAX);
                *slot = (*slot).min(eps);
            }
        }
    }
    let mut collisions: Vec<Collision> = best
        .into_iter()
        .map(|((a, b), eps)| Collision {
            distance: Weight::from_units(eps),
            a,
            b,
        })
        .collect();
    collisions.sort_unstable();

    ExtraGrowth {
        origins,
        collisions,
        covered,
        epsilon_max,
    }
}

/// Smallest `ε ≤ ε_max` at which growth joins `b1` and `b2`, if any.
pub fn extra_cluster_gap(view: &ContractedView<'_>, epsilon_max: Weight) -> GapResult {
    let growth = extra_growth(view, epsilon_max);
    extra_gap_from_growth(view, &growth)
}

/// [`extra_cluster_gap`] on an already computed growth pass.
pub fn extra_gap_from_growth(view: &ContractedView<'_>, growth: &ExtraGrowth) -> GapResult {
    let (b1, b2) = view.graph().boundary_pair();
    let (s1, s2) = (
        growth.origin_index(view.set_of(b1)),
        growth.origin_index(view.set_of(b2)),
    );
    let mut sets = DisjointSets::new(growth.origins.len());
    let mut value = (s1 == s2).then_some(Weight::ZERO);
    if value.is_none() {
        for c in &growth.collisions {
            let (ra, rb) = (sets.find(c.a), sets.find(c.b));
            sets.link(ra, rb);
            if sets.find(s1) == sets.find(s2) {
                value = Some(c.distance);
                break;
            }
        }
    }
    let stop = value.unwrap_or(growth.epsilon_max);
    GapResult {
        value,
        extra_nodes: growth.newly_covered(view, stop),
        growth_radius: stop.half(),
        ..GapResult::new(GapKind::Extra)
    }
}

/// Graph on growth origins weighted by pairwise collision distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterGraph {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<(usize, usize, Weight)>,
}

impl ClusterGraph {
    pub fn from_growth(growth: &ExtraGrowth) -> Self {
        ClusterGraph {
            nodes: growth.origins.clone(),
            edges: growth.collisions.iter().map(|c| (c.a, c.b, c.distance)).collect(),
        }
    }

    /// Dijkstra between two node indices.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Weight> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b, w) in &self.edges {
            adj[a].push((b, w.units()));
            adj[b].push((a, w.units()));
        }
        let mut dist = vec![u64::MAX; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[from] = 0;
        heap.push(Reverse((0u64, from)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if v == to {
                return Some(Weight::from_units(d));
            }
            for &(u, w) in &adj[v] {
                let nd = d + w;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(Reverse((nd, u)));
                }
            }
        }
        None
    }
}

/// Extra-cluster gap refined by a shortest path on the cluster graph.
pub fn extra_cluster_gap_cg(view: &ContractedView<'_>, epsilon_max: Weight) -> GapResult {
    let growth = extra_growth(view, epsilon_max);
    extra_gap_cg_from_growth(view, &growth)
}

/// [`extra_cluster_gap_cg`] on an already computed growth pass.
pub fn extra_gap_cg_from_growth(view: &ContractedView<'_>, growth: &ExtraGrowth) -> GapResult {
    let (b1, b2) = view.graph().boundary_pair();
    let (s1, s2) = (
        growth.origin_index(view.set_of(b1)),
        growth.origin_index(view.set_of(b2)),
    );
    let mut sets = DisjointSets::new(growth.origins.len());
    for c in &growth.collisions {
        let (ra, rb) = (sets.find(c.a), sets.find(c.b));
        sets.link(ra, rb);
    }
    let mut result = GapResult {
        extra_nodes: growth.newly_covered(view, growth.epsilon_max),
        growth_radius: growth.epsilon_max.half(),
        ..GapResult::new(GapKind::ExtraCg)
    };
    if sets.find(s1) == sets.find(s2) {
        result.cluster_graph_invoked = true;
        result.value = ClusterGraph::from_growth(growth).shortest_path(s1, s2);
    }
    result
}

/// Extra-cluster gaps for every boundary pair of a graph with `M ≥ 2`
/// boundaries, from a single growth pass.
#[derive(Clone, Debug)]
pub struct MultiBoundaryGaps {
    /// Keyed by `(b_i, b_j)` node ids with `i < j` in boundary order.
    pub pairs: BTreeMap<(NodeId, NodeId), GapResult>,
    pub growth_passes: usize,
}

pub fn multi_boundary_extra_gap(view: &ContractedView<'_>, epsilon_max: Weight) -> MultiBoundaryGaps {
    let g = view.graph();
    let boundaries = g.boundaries();
    let growth = extra_growth(view, epsilon_max);
    let growth_passes = 1;

    let origin_of: Vec<usize> = boundaries
        .iter()
        .map(|&b| growth.origin_index(view.set_of(b)))
        .collect();
    let mut joined: BTreeMap<(usize, usize), Weight> = BTreeMap::new();
    for i in 0..boundaries.len() {
        for j in i + 1..boundaries.len() {
            if origin_of[i] == origin_of[j] {
                joined.insert((i, j), Weight::ZERO);
            }
        }
    }

    // Boundary indices carried by each component root.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); growth.origins.len()];
    for (i, &o) in origin_of.iter().enumerate() {
        members[o].push(i);
    }
    let mut sets = DisjointSets::new(growth.origins.len());
    for c in &growth.collisions {
        let (ra, rb) = (sets.find(c.a), sets.find(c.b));
        if ra == rb {
            continue;
        }
        for &i in &members[ra] {
            for &j in &members[rb] {
                joined.entry((i.min(j), i.max(j))).or_insert(c.distance);
            }
        }
        let root = sets.link(ra, rb);
        let child = if root == ra { rb } else { ra };
        let moved = std::mem::take(&mut members[child]);
        members[root].extend(moved);
    }

    let mut pairs = BTreeMap::new();
    for i in 0..boundaries.len() {
        for j in i + 1..boundaries.len() {
            let value = joined.get(&(i, j)).copied();
            let stop = value.unwrap_or(epsilon_max);
            pairs.insert(
                (boundaries[i], boundaries[j]),
                GapResult {
                    value,
                    extra_nodes: growth.newly_covered(view, stop),
                    growth_radius: stop.half(),
                    ..GapResult::new(GapKind::Extra)
                },
            );
        }
    }
    MultiBoundaryGaps { pairs, growth_passes }
}

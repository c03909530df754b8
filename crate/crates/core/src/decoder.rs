//! Union-Find cluster decoder.
//!
//! Clusters start as single detection events and grow uniformly along the
//! weighted edges of the decoding graph. Growth is event driven: every step
//! advances all active clusters by exactly the amount needed to fully cover
//! the next edge, so radii are exact integers in [`Weight`] units. When two
//! frontiers growing toward each other leave an odd gap, they meet one unit
//! late; that unit shows up as merge slack on the edge's coverage.
//!
//! A cluster is active while it has odd parity and touches no boundary.
//! Boundary nodes are passive during decoding: they never grow, and a cluster
//! that reaches one stops.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{DecodingGraph, NodeId, Weight};
use crate::sampler::{ErrorPattern, Syndrome};

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

const UNREACHED: usize = usize::MAX;

/// Disjoint-set forest with union by rank and path halving.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
    ops: u64,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
            ops: 0,
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            let grand = self.parent[self.parent[x]];
            self.parent[x] = grand;
            x = grand;
            self.ops += 1;
        }
        self.ops += 1;
        x
    }

    /// Links two roots and returns the surviving root. Higher rank wins; on
    /// equal rank the lower id wins.
    pub(crate) fn link(&mut self, a: usize, b: usize) -> usize {
        debug_assert!(self.parent[a] == a && self.parent[b] == b);
        if a == b {
            return a;
        }
        self.ops += 1;
        let (root, child) = match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Greater => (a, b),
            std::cmp::Ordering::Less => (b, a),
            std::cmp::Ordering::Equal => {
                let (root, child) = if a < b { (a, b) } else { (b, a) };
                self.rank[root] += 1;
                (root, child)
            }
        };
        self.parent[child] = root;
        root
    }

    pub(crate) fn ops(&self) -> u64 {
        self.ops
    }
}

/// Final clusters of one decoding run, plus growth instrumentation.
#[derive(Clone, Debug)]
pub struct ClusterState {
    /// Root of the cluster containing each node, `UNREACHED` for bare nodes.
    cluster_of: Vec<usize>,
    /// Coverage of each edge grown from its `u` and `v` sides.
    coverage: Vec<[u64; 2]>,
    grown: Vec<bool>,
    parity: Vec<bool>,
    touches_boundary: Vec<bool>,
    events: Vec<NodeId>,
    radius: Weight,
    growth_steps: usize,
    merges: usize,
    uf_ops: u64,
}

impl ClusterState {
    /// Cluster root of `n`, or `None` when no cluster reached it.
    #[inline]
    pub fn cluster_of(&self, n: NodeId) -> Option<NodeId> {
        match self.cluster_of[n] {
            UNREACHED => None,
            root => Some(root),
        }
    }

    /// Identifier of the node `n` collapses to in the contracted graph: its
    /// cluster root, or `n` itself when bare.
    #[inline]
    pub fn set_of(&self, n: NodeId) -> NodeId {
        match self.cluster_of[n] {
            UNREACHED => n,
            root => root,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn events(&self) -> &[NodeId] {
        &self.events
    }

    /// Whether the edge was fully covered during growth.
    pub fn is_grown(&self, edge: usize) -> bool {
        self.grown[edge]
    }

    /// Covered lengths of `edge` from its `u` and `v` ends.
    pub fn coverage(&self, edge: usize) -> (Weight, Weight) {
        let [a, b] = self.coverage[edge];
        (Weight::from_units(a), Weight::from_units(b))
    }

    pub fn parity_of(&self, root: NodeId) -> bool {
        self.parity[root]
    }

    pub fn touches_boundary(&self, root: NodeId) -> bool {
        self.touches_boundary[root]
    }

    /// Distinct cluster roots, ascending. Includes boundary-only sets.
    pub fn roots(&self) -> Vec<NodeId> {
        let mut roots: Vec<NodeId> = self.cluster_of.iter().copied().filter(|&r| r != UNREACHED).collect();
        roots.sort_unstable();
        roots.dedup();
        roots
    }

    pub fn growth_steps(&self) -> usize {
        self.growth_steps
    }

    pub fn merges(&self) -> usize {
        self.merges
    }

    pub fn union_find_ops(&self) -> u64 {
        self.uf_ops
    }
}

/// Grows clusters from the detection events until none is active.
pub fn decode(g: &DecodingGraph, syndrome: &Syndrome) -> ClusterState {
    let n = g.num_nodes();
    let mut sets = DisjointSets::new(n);
    let mut reached = vec![false; n];
    let mut parity = vec![false; n];
    let mut touches = vec![false; n];
    let mut frontier: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut coverage = vec![[0u64; 2]; g.num_edges()];
    let mut grown = vec![false; g.num_edges()];

    for &b in g.boundaries() {
        reached[b] = true;
        touches[b] = true;
    }
    for &ev in syndrome.events() {
        reached[ev] = true;
        parity[ev] = true;
        frontier[ev].push(ev);
    }

    let mut active: Vec<NodeId> = syndrome.events().to_vec();
    let mut time = 0u64;
    let mut growth_steps = 0usize;
    let mut merges = 0usize;
    let mut items: Vec<(usize, usize)> = Vec::new();
    let mut newly_grown: Vec<usize> = Vec::new();

    loop {
        let mut roots: Vec<NodeId> = active.iter().map(|&r| sets.find(r)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.retain(|&r| parity[r] && !touches[r]);
        if roots.is_empty() {
            break;
        }

        // Collect every (edge, side) that grows this step and the step size.
        items.clear();
        let mut step = u64::MAX;
        for &root in &roots {
            let mut members = std::mem::take(&mut frontier[root]);
            members.retain(|&m| {
                let mut open = false;
                for &ei in g.incident(m) {
                    if grown[ei] {
                        continue;
                    }
                    open = true;
                    let e = g.edge(ei);
                    let side = usize::from(e.u != m);
                    let other = e.other(m);
                    let other_grows = reached[other] && {
                        let r = sets.find(other);
                        parity[r] && !touches[r]
                    };
                    let [cu, cv] = coverage[ei];
                    let remaining = e.weight.units().saturating_sub(cu + cv);
                    let dt = if other_grows { remaining.div_ceil(2) } else { remaining };
                    step = step.min(dt);
                    items.push((ei, side));
                }
                open
            });
            frontier[root] = members;
        }
        if items.is_empty() {
            // Nothing left to cover; an odd cluster with no reachable boundary.
            break;
        }

        growth_steps += 1;
        time += step;
        newly_grown.clear();
        for &(ei, side) in &items {
            coverage[ei][side] += step;
            let [cu, cv] = coverage[ei];
            if cu + cv >= g.edge(ei).weight.units() {
                newly_grown.push(ei);
            }
        }
        newly_grown.sort_unstable();
        newly_grown.dedup();

        for &ei in &newly_grown {
            grown[ei] = true;
            let e = g.edge(ei);
            for end in [e.u, e.v] {
                if !reached[end] {
                    reached[end] = true;
                    frontier[end].push(end);
                }
            }
            let (ru, rv) = (sets.find(e.u), sets.find(e.v));
            if ru != rv {
                merges += 1;
                let root = sets.link(ru, rv);
                let child = if root == ru { rv } else { ru };
                parity[root] ^= parity[child];
                touches[root] |= touches[child];
                let moved = std::mem::take(&mut frontier[child]);
                if frontier[root].len() < moved.len() {
                    let kept = std::mem::replace(&mut frontier[root], moved);
                    frontier[root].extend(kept);
                } else {
                    frontier[root].extend(moved);
                }
                active.push(root);
            }
        }
    }

    let cluster_of = (0..n)
        .map(|v| if reached[v] { sets.find(v) } else { UNREACHED })
        .collect();
    ClusterState {
        cluster_of,
        coverage,
        grown,
        parity,
        touches_boundary: touches,
        events: syndrome.events().to_vec(),
        radius: Weight::from_units(time),
        growth_steps,
        merges,
        uf_ops: sets.ops(),
    }
}

/// Estimated error: a set of edges whose syndrome equals the input syndrome.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Correction {
    pub edges: Vec<usize>,
}

impl Correction {
    pub fn as_error_pattern(&self) -> ErrorPattern {
        ErrorPattern::new(self.edges.clone())
    }
}

/// Peels a spanning forest of each cluster's grown edges.
///
/// Boundary nodes are tree roots; a cluster without a boundary is rooted at
/// its lowest node and must have even parity.
pub fn peel(g: &DecodingGraph, cs: &ClusterState, syndrome: &Syndrome) -> Result<Correction, DecodeError> {
    let n = g.num_nodes();
    let mut marked = vec![false; n];
    for &ev in syndrome.events() {
        marked[ev] = true;
    }
    let mut visited = vec![false; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut order: Vec<NodeId> = Vec::new();
    let mut queue = VecDeque::new();
    let mut flipped = vec![false; g.num_edges()];

    // Group the nodes of every cluster that holds an event.
    let mut by_root: std::collections::BTreeMap<NodeId, Vec<NodeId>> = Default::default();
    for v in 0..n {
        if let Some(root) = cs.cluster_of(v) {
            by_root.entry(root).or_default().push(v);
        }
    }

    for (root, members) in by_root {
        if !members.iter().any(|&m| marked[m]) {
            continue;
        }
        order.clear();
        let mut tree_roots: Vec<NodeId> = members.iter().copied().filter(|&m| g.is_boundary(m)).collect();
        if tree_roots.is_empty() {
            tree_roots.push(members[0]);
        }
        for &r in &tree_roots {
            visited[r] = true;
            queue.push_back(r);
        }
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &ei in g.incident(v) {
                if !cs.is_grown(ei) {
                    continue;
                }
                let w = g.edge(ei).other(v);
                if visited[w] || g.is_boundary(w) {
                    continue;
                }
                debug_assert_eq!(cs.cluster_of(w), Some(root));
                visited[w] = true;
                parent_edge[w] = ei;
                queue.push_back(w);
            }
        }
        for &v in order.iter().rev() {
            if !marked[v] {
                continue;
            }
            let ei = parent_edge[v];
            if ei == usize::MAX {
                if g.is_boundary(v) {
                    continue;
                }
                return Err(DecodeError::InvariantViolation(format!(
                    "cluster rooted at {root} has odd parity and no boundary"
                )));
            }
            flipped[ei] ^= true;
            marked[v] = false;
            let up = g.edge(ei).other(v);
            marked[up] ^= true;
        }
        if let Some(&left) = members.iter().find(|&&m| marked[m] && !g.is_boundary(m)) {
            return Err(DecodeError::InvariantViolation(format!(
                "node {left} left unpaired after peeling"
            )));
        }
    }

    Ok(Correction {
        edges: (0..g.num_edges()).filter(|&i| flipped[i]).collect(),
    })
}

/// Total growth time, which equals the largest radius any cluster reached.
pub fn max_growth_radius(cs: &ClusterState) -> Weight {
    cs.radius
}

/// Detectors (boundaries excluded) that belong to some cluster.
pub fn nodes_in_clusters(g: &DecodingGraph, cs: &ClusterState) -> usize {
    (0..g.num_nodes())
        .filter(|&v| !g.is_boundary(v) && cs.cluster_of(v).is_some())
        .count()
}

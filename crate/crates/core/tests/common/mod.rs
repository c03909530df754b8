//! Random instances and brute-force oracles shared by integration tests.
//!
//! The oracles only read the cluster partition from `ClusterState` and then
//! work on an explicitly built quotient graph, so they share no search code
//! with the library.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::Rng;
use softgap::{decode, ClusterState, DecodingGraph, Edge, NodeId, Syndrome, Weight};

pub const INF: u64 = u64::MAX / 4;

pub struct Instance {
    pub graph: DecodingGraph,
    pub syndrome: Syndrome,
    pub clusters: ClusterState,
    pub epsilon_max: Weight,
}

/// Multiples of a quarter nat up to 5.5 nat, zero included.
fn grid_weight(rng: &mut impl Rng) -> Weight {
    Weight::from_units(rng.gen_range(0..23u64) * 250_000 * 2)
}

/// Connected random graph with `n` nodes (nodes 0 and 1 are the boundaries),
/// weights on a coarse grid so ties are common, a random syndrome, and a
/// threshold in a range where extra gaps are sometimes defined.
pub fn random_instance(rng: &mut impl Rng, max_nodes: usize) -> Instance {
    let n = rng.gen_range(4..=max_nodes);
    let mut order: Vec<NodeId> = (2..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..order.len() {
        let j = rng.gen_range(0..i);
        edges.push(Edge::with_weight(order[i], order[j], grid_weight(rng)));
    }
    for b in [0, 1] {
        edges.push(Edge::with_weight(b, rng.gen_range(2..n), grid_weight(rng)));
    }
    for _ in 0..rng.gen_range(0..2 * n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && !(u < 2 && v < 2) {
            edges.push(Edge::with_weight(u, v, grid_weight(rng)));
        }
    }
    let graph = DecodingGraph::new(n, vec![0, 1], edges).expect("random graph is valid");
    let density = rng.gen_range(0.0..0.4);
    let events: Vec<NodeId> = (2..n).filter(|_| rng.gen_bool(density)).collect();
    let syndrome = Syndrome::from_events(&graph, events).unwrap();
    let clusters = decode(&graph, &syndrome);
    let epsilon_max = Weight::from_units(2 * rng.gen_range(0..20u64) * 250_000);
    Instance {
        graph,
        syndrome,
        clusters,
        epsilon_max,
    }
}

/// Explicit quotient graph: one node per cluster set or bare node.
pub struct Quotient {
    /// Quotient index of every original node.
    pub index: Vec<usize>,
    pub size: usize,
    pub edges: Vec<(usize, usize, u64)>,
    /// Quotient nodes that grow: clusters and boundaries.
    pub origins: Vec<usize>,
    /// Whether a quotient node is a bare detector.
    pub bare: Vec<bool>,
}

impl Quotient {
    pub fn new(g: &DecodingGraph, cs: &ClusterState) -> Self {
        let n = g.num_nodes();
        let mut label: Vec<NodeId> = (0..n).map(|v| cs.cluster_of(v).unwrap_or(usize::MAX - v)).collect();
        let mut distinct = label.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for l in label.iter_mut() {
            *l = distinct.binary_search(l).unwrap();
        }
        let size = distinct.len();
        let edges = g
            .edges()
            .iter()
            .filter(|e| label[e.u] != label[e.v])
            .map(|e| (label[e.u], label[e.v], e.weight.units()))
            .collect();
        let mut origins: Vec<usize> = (0..n)
            .filter(|&v| cs.cluster_of(v).is_some())
            .map(|v| label[v])
            .collect();
        origins.sort_unstable();
        origins.dedup();
        let mut bare = vec![false; size];
        for v in 0..n {
            if cs.cluster_of(v).is_none() && !g.is_boundary(v) {
                bare[label[v]] = true;
            }
        }
        Quotient {
            index: label,
            size,
            edges,
            origins,
            bare,
        }
    }

    pub fn bellman_ford(&self, src: usize) -> Vec<u64> {
        let mut d = vec![INF; self.size];
        d[src] = 0;
        for _ in 0..self.size {
            let mut changed = false;
            for &(u, v, w) in &self.edges {
                if d[u] + w < d[v] {
                    d[v] = d[u] + w;
                    changed = true;
                }
                if d[v] + w < d[u] {
                    d[u] = d[v] + w;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        d
    }

    pub fn floyd_warshall(&self) -> Vec<Vec<u64>> {
        let n = self.size;
        let mut d = vec![vec![INF; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for &(u, v, w) in &self.edges {
            d[u][v] = d[u][v].min(w);
            d[v][u] = d[v][u].min(w);
        }
        for k in 0..n {
            for i in 0..n {
                let dik = d[i][k];
                if dik == INF {
                    continue;
                }
                for j in 0..n {
                    let via = dik + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }
}

/// Reference values for one instance.
pub struct OracleGaps {
    pub cluster: u64,
    /// Minimax hop distance between the boundary sets over origins.
    pub extra: Option<u64>,
    /// Shortest path over origins using only hops `<= epsilon_max`.
    pub extra_cg: Option<u64>,
    /// Bare nodes within `stop / 2` of some origin, `stop` being the extra
    /// gap if defined and `epsilon_max` otherwise.
    pub extra_nodes: usize,
    /// Bare nodes within `epsilon_max / 2` of some origin.
    pub covered_at_max: usize,
}

pub fn oracle_gaps(inst: &Instance) -> OracleGaps {
    let g = &inst.graph;
    let q = Quotient::new(g, &inst.clusters);
    let (b1, b2) = g.boundary_pair();
    let (s1, s2) = (q.index[b1], q.index[b2]);
    let cluster = q.bellman_ford(s1)[s2];

    let all = q.floyd_warshall();
    let eps = inst.epsilon_max.units();
    let o = &q.origins;
    let m = o.len();
    let hop = |a: usize, b: usize| all[o[a]][o[b]];
    let (i1, i2) = (o.binary_search(&s1).unwrap(), o.binary_search(&s2).unwrap());

    // Bottleneck closure over origins.
    let mut mm = vec![vec![INF; m]; m];
    for a in 0..m {
        for b in 0..m {
            mm[a][b] = if a == b { 0 } else { hop(a, b) };
        }
    }
    for k in 0..m {
        for a in 0..m {
            for b in 0..m {
                let via = mm[a][k].max(mm[k][b]);
                if via < mm[a][b] {
                    mm[a][b] = via;
                }
            }
        }
    }
    let extra = (mm[i1][i2] <= eps).then_some(mm[i1][i2]);

    // Shortest path on the thresholded origin graph.
    let mut sp = vec![vec![INF; m]; m];
    for a in 0..m {
        for b in 0..m {
            sp[a][b] = if a == b {
                0
            } else if hop(a, b) <= eps {
                hop(a, b)
            } else {
                INF
            };
        }
    }
    for k in 0..m {
        for a in 0..m {
            for b in 0..m {
                let via = sp[a][k].saturating_add(sp[k][b]);
                if via < sp[a][b] {
                    sp[a][b] = via;
                }
            }
        }
    }
    let extra_cg = (sp[i1][i2] < INF).then_some(sp[i1][i2]);

    let count_within = |limit: u64| {
        (0..q.size)
            .filter(|&x| q.bare[x] && o.iter().any(|&s| 2 * all[s][x] <= limit))
            .count()
    };
    OracleGaps {
        cluster,
        extra,
        extra_cg,
        extra_nodes: count_within(extra.unwrap_or(eps)),
        covered_at_max: count_within(eps),
    }
}

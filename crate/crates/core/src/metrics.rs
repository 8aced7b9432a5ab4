//! Unweighted graph statistics: degrees, components, vertex connectivity,
//! local and average clustering and the variance of clustering
//! coefficients.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphgen::ProximityGraph;
use crate::spectral::connected_components;

/// Minimum number of vertices whose removal disconnects `g` or leaves a
/// single vertex. Disconnected graphs give 0, `K_k` gives `k - 1`.
///
/// Uses Even's reduction: with `δ` the minimum degree, any minimum cut
/// misses one of the first `δ + 1` vertices, so it suffices to take the
/// minimum local connectivity between those vertices and every vertex not
/// adjacent to them.
pub fn vertex_connectivity(g: &ProximityGraph) -> usize {
    let k = g.vertex_count();
    if k <= 1 {
        return 0;
    }
    if connected_components(g).len() > 1 {
        return 0;
    }
    let min_degree = (0..k).map(|v| g.degree(v)).min().unwrap_or(0);
    let mut best = min_degree;
    let mut flow = SplitFlow::new(g);
    for s in 0..=min_degree.min(k - 1) {
        if s > best {
            break;
        }
        for t in 0..k {
            if t == s || g.has_edge(s, t) {
                continue;
            }
            let local = flow.local_connectivity(s, t, best);
            best = best.min(local);
            if best == 0 {
                return 0;
            }
        }
    }
    best
}

/// Unit-capacity flow network with every vertex `v` split into
/// `v_in = 2v` and `v_out = 2v + 1`. Arcs are stored in pairs so that arc
/// `a ^ 1` is the reverse of arc `a`.
struct SplitFlow {
    k: usize,
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    initial: Vec<u32>,
    residual: Vec<u32>,
}

impl SplitFlow {
    fn new(g: &ProximityGraph) -> Self {
        let k = g.vertex_count();
        let mut net = SplitFlow { k, head: vec![Vec::new(); 2 * k], to: vec![], initial: vec![], residual: vec![] };
        for v in 0..k {
            net.add_arc(2 * v, 2 * v + 1);
            for &w in g.neighbors(v) {
                net.add_arc(2 * v + 1, 2 * w);
            }
        }
        net.residual = net.initial.clone();
        net
    }

    fn add_arc(&mut self, from: usize, to: usize) {
        self.head[from].push(self.to.len());
        self.to.push(to);
        self.initial.push(1);
        self.head[to].push(self.to.len());
        self.to.push(from);
        self.initial.push(0);
    }

    /// Number of internally vertex-disjoint s-t paths, capped at `limit`.
    fn local_connectivity(&mut self, s: usize, t: usize, limit: usize) -> usize {
        self.residual.copy_from_slice(&self.initial);
        let source = 2 * s + 1;
        let sink = 2 * t;
        let mut total = 0;
        let mut via = vec![usize::MAX; 2 * self.k];
        while total < limit {
            via.iter_mut().for_each(|p| *p = usize::MAX);
            let mut queue = VecDeque::from([source]);
            let mut reached = false;
            'bfs: while let Some(u) = queue.pop_front() {
                for &arc in &self.head[u] {
                    let w = self.to[arc];
                    if self.residual[arc] > 0 && w != source && via[w] == usize::MAX {
                        via[w] = arc;
                        if w == sink {
                            reached = true;
                            break 'bfs;
                        }
                        queue.push_back(w);
                    }
                }
            }
            if !reached {
                break;
            }
            let mut w = sink;
            while w != source {
                let arc = via[w];
                self.residual[arc] -= 1;
                self.residual[arc ^ 1] += 1;
                w = self.to[arc ^ 1];
            }
            total += 1;
        }
        total
    }
}

/// Number of edges with both endpoints among the neighbors of `v`.
pub fn neighbor_edge_count(g: &ProximityGraph, v: usize) -> usize {
    let nb = g.neighbors(v);
    let mut count = 0;
    for (a, &x) in nb.iter().enumerate() {
        for &y in &nb[a + 1..] {
            if g.has_edge(x, y) {
                count += 1;
            }
        }
    }
    count
}

/// Number of edges meeting the neighborhood of `v` (at least one endpoint
/// among its neighbors). Kept as a diagnostic; it is not bounded by
/// `C(d_v, 2)` and so does not give a coefficient in [0, 1].
pub fn neighborhood_incident_edges(g: &ProximityGraph, v: usize) -> usize {
    let nb = g.neighbors(v);
    g.edges()
        .into_iter()
        .filter(|&(a, b)| nb.binary_search(&a).is_ok() || nb.binary_search(&b).is_ok())
        .count()
}

/// `C_v = |edges among neighbors of v| / C(d_v, 2)`, or 0 when `d_v < 2`.
pub fn local_clustering(g: &ProximityGraph, v: usize) -> f64 {
    let d = g.degree(v);
    if d < 2 {
        return 0.0;
    }
    neighbor_edge_count(g, v) as f64 / (d * (d - 1) / 2) as f64
}

pub fn local_clustering_all(g: &ProximityGraph) -> Vec<f64> {
    (0..g.vertex_count()).map(|v| local_clustering(g, v)).collect()
}

/// Mean of the local coefficients over all vertices.
pub fn average_clustering(g: &ProximityGraph) -> Result<f64> {
    let c = local_clustering_all(g);
    if c.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Ok(c.iter().sum::<f64>() / c.len() as f64)
}

/// Population variance of the local clustering coefficients.
pub fn clustering_variance(g: &ProximityGraph) -> f64 {
    population_variance(&local_clustering_all(g))
}

pub fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexStats {
    pub label: String,
    pub degree: usize,
    pub clustering: f64,
    /// Edges with both endpoints in the neighborhood.
    pub neighbor_edges: usize,
    /// Edges with at least one endpoint in the neighborhood.
    pub incident_neighborhood_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub component_count: usize,
    /// Descending.
    pub component_sizes: Vec<usize>,
    pub vertex_connectivity: usize,
    pub average_clustering: f64,
    pub clustering_variance: f64,
    /// `|E| - |V| + #components`; zero exactly for forests.
    pub betti_1: usize,
    pub vertices: Vec<VertexStats>,
}

impl GraphSummary {
    pub fn degree_by_vertex(&self) -> BTreeMap<&str, usize> {
        self.vertices.iter().map(|v| (v.label.as_str(), v.degree)).collect()
    }
}

pub fn graph_summary(g: &ProximityGraph) -> GraphSummary {
    let k = g.vertex_count();
    let partition = connected_components(g);
    let clustering = local_clustering_all(g);
    let edge_count = g.edge_count();
    let vertices = (0..k)
        .map(|v| VertexStats {
            label: g.vertex_labels()[v].clone(),
            degree: g.degree(v),
            clustering: clustering[v],
            neighbor_edges: neighbor_edge_count(g, v),
            incident_neighborhood_edges: neighborhood_incident_edges(g, v),
        })
        .collect();
    GraphSummary {
        vertex_count: k,
        edge_count,
        component_count: partition.len(),
        component_sizes: partition.sizes(),
        vertex_connectivity: vertex_connectivity(g),
        average_clustering: if k == 0 { 0.0 } else { clustering.iter().sum::<f64>() / k as f64 },
        clustering_variance: population_variance(&clustering),
        betti_1: edge_count + partition.len() - k,
        vertices,
    }
}

//! Proximity graphs over data points and their heat-kernel weighting.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ingest::FeatureMatrix;

/// Symmetric matrix of squared Euclidean distances. On {0,1} data each
/// entry is the Hamming distance between the two rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    sq_dist: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds from a full row-major `k x k` array, checking symmetry, zero
    /// diagonal and nonnegativity.
    pub fn from_square(size: usize, sq_dist: Vec<f64>) -> Result<Self> {
        if sq_dist.len() != size * size {
            return Err(Error::DimensionMismatch { expected: size * size, found: sq_dist.len() });
        }
        for i in 0..size {
            if sq_dist[i * size + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in 0..size {
                let v = sq_dist[i * size + j];
                if !(v >= 0.0) || v != sq_dist[j * size + i] {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) is negative or asymmetric"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { size, sq_dist })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sq_dist[i * self.size + j]
    }

    /// Smallest and largest off-diagonal entries, `None` for fewer than two
    /// points.
    pub fn off_diagonal_range(&self) -> Option<(f64, f64)> {
        let mut it = (0..self.size)
            .flat_map(|i| (i + 1..self.size).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j));
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Copy with vertices reordered so that new vertex `i` is old `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> DistanceMatrix {
        let k = self.size;
        let mut sq_dist = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                sq_dist[i * k + j] = self.get(perm[i], perm[j]);
            }
        }
        DistanceMatrix { size: k, sq_dist }
    }
}

/// Squared Euclidean distances between all rows of `m`.
pub fn pairwise_sq_distances(m: &FeatureMatrix) -> Result<DistanceMatrix> {
    pairwise_sq_distances_with(m, Execution::default())
}

pub fn pairwise_sq_distances_with(m: &FeatureMatrix, exec: Execution) -> Result<DistanceMatrix> {
    let rows = m.dense_rows()?;
    let k = rows.len();
    let upper = exec.map_indexed(k, |i| {
        (0..k)
            .map(|j| {
                rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            })
            .collect::<Vec<f64>>()
    });
    let mut sq_dist: Vec<f64> = upper.into_iter().flatten().collect();
    // make symmetry exact regardless of summation order
    for i in 0..k {
        for j in 0..i {
            sq_dist[i * k + j] = sq_dist[j * k + i];
        }
    }
    Ok(DistanceMatrix { size: k, sq_dist })
}

/// Adjacency rule and its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum GraphRule {
    /// Edge iff squared distance `< ε`.
    Epsilon(f64),
    /// Edge iff one endpoint is among the other's `n` nearest neighbors.
    Nearest(usize),
    /// Edge iff one endpoint is among the other's `n` farthest vertices.
    Farthest(usize),
}

/// Undirected simple graph on `k` labelled vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityGraph {
    vertex_labels: Vec<String>,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    rule: Option<GraphRule>,
}

impl ProximityGraph {
    /// Builds a graph from an edge list. Self-loops and out-of-range
    /// endpoints are rejected; duplicate edges collapse.
    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![false; k * k];
        for &(i, j) in edges {
            if i >= k || j >= k || i == j {
                return Err(Error::InvalidParameter(format!("bad edge ({i}, {j}) for {k} vertices")));
            }
            adjacency[i * k + j] = true;
            adjacency[j * k + i] = true;
        }
        Ok(Self::from_adjacency(default_labels(k), adjacency, None))
    }

    fn from_adjacency(vertex_labels: Vec<String>, adjacency: Vec<bool>, rule: Option<GraphRule>) -> Self {
        let k = vertex_labels.len();
        let neighbors = (0..k)
            .map(|i| (0..k).filter(|&j| adjacency[i * k + j]).collect())
            .collect();
        ProximityGraph { vertex_labels, adjacency, neighbors, rule }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch { expected: self.vertex_count(), found: labels.len() });
        }
        self.vertex_labels = labels;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn vertex_labels(&self) -> &[String] {
        &self.vertex_labels
    }

    pub fn rule(&self) -> Option<GraphRule> {
        self.rule
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.vertex_count() + j]
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.vertex_count())
            .flat_map(|i| self.neighbors[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_complete(&self) -> bool {
        let k = self.vertex_count();
        self.edge_count() == k * k.saturating_sub(1) / 2
    }

    /// Induced subgraph after deleting the vertices in `removed`.
    pub fn without_vertices(&self, removed: &[usize]) -> ProximityGraph {
        let k = self.vertex_count();
        let keep: Vec<usize> = (0..k).filter(|v| !removed.contains(v)).collect();
        let n = keep.len();
        let mut adjacency = vec![false; n * n];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                adjacency[a * n + b] = self.has_edge(i, j);
            }
        }
        let labels = keep.iter().map(|&i| self.vertex_labels[i].clone()).collect();
        Self::from_adjacency(labels, adjacency, self.rule)
    }
}

fn default_labels(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

/// Edge `{i, j}` iff `sq_dist[i][j] < epsilon` (strict).
pub fn epsilon_graph(d: &DistanceMatrix, epsilon: f64) -> Result<ProximityGraph> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let k = d.size();
    let mut adjacency = vec![false; k * k];
    for i in 0..k {
        for j in 0..k {
            adjacency[i * k + j] = i != j && d.get(i, j) < epsilon;
        }
    }
    Ok(ProximityGraph::from_adjacency(default_labels(k), adjacency, Some(GraphRule::Epsilon(epsilon))))
}

/// `n`-nearest-neighbor graph, symmetrized by union. Equal distances rank
/// the lower vertex index first.
pub fn knn_graph(d: &DistanceMatrix, n: usize) -> Result<ProximityGraph> {
    ranked_graph(d, n, false)
}

/// `n`-farthest graph, symmetrized by union. Equal distances rank the lower
/// vertex index first.
pub fn farthest_graph(d: &DistanceMatrix, n: usize) -> Result<ProximityGraph> {
    ranked_graph(d, n, true)
}

fn ranked_graph(d: &DistanceMatrix, n: usize, farthest: bool) -> Result<ProximityGraph> {
    let k = d.size();
    if n == 0 || n + 1 > k {
        return Err(Error::NeighborCountOutOfRange { n, max: k.saturating_sub(1) });
    }
    let mut adjacency = vec![false; k * k];
    let mut order: Vec<usize> = Vec::with_capacity(k);
    for i in 0..k {
        order.clear();
        order.extend((0..k).filter(|&j| j != i));
        order.sort_by(|&a, &b| {
            let by_dist = d.get(i, a).total_cmp(&d.get(i, b));
            let by_dist = if farthest { by_dist.reverse() } else { by_dist };
            by_dist.then(a.cmp(&b))
        });
        for &j in &order[..n] {
            adjacency[i * k + j] = true;
            adjacency[j * k + i] = true;
        }
    }
    let rule = if farthest { GraphRule::Farthest(n) } else { GraphRule::Nearest(n) };
    Ok(ProximityGraph::from_adjacency(default_labels(k), adjacency, Some(rule)))
}

/// Dispatches on `rule`.
pub fn build_graph(d: &DistanceMatrix, rule: GraphRule) -> Result<ProximityGraph> {
    match rule {
        GraphRule::Epsilon(e) => epsilon_graph(d, e),
        GraphRule::Nearest(n) => knn_graph(d, n),
        GraphRule::Farthest(n) => farthest_graph(d, n),
    }
}

/// A proximity graph with heat-kernel weights, degrees and Laplacian.
#[derive(Debug, Clone)]
pub struct HeatWeightedGraph {
    pub graph: ProximityGraph,
    pub t: f64,
    pub weights: DMatrix<f64>,
    pub degrees: DVector<f64>,
    pub laplacian: DMatrix<f64>,
}

/// `W_ij = exp(-sq_dist[i][j] / t)` on edges, zero elsewhere; `D_ii` the
/// row sums of `W`; `L = D - W`. `t = +inf` gives unit weights.
pub fn heat_weights(g: &ProximityGraph, d: &DistanceMatrix, t: f64) -> Result<HeatWeightedGraph> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("heat parameter t must be positive, got {t}")));
    }
    let k = g.vertex_count();
    if d.size() != k {
        return Err(Error::DimensionMismatch { expected: k, found: d.size() });
    }
    let mut weights = DMatrix::zeros(k, k);
    for (i, j) in g.edges() {
        let w = (-d.get(i, j) / t).exp();
        weights[(i, j)] = w;
        weights[(j, i)] = w;
    }
    Ok(assemble(g.clone(), t, weights))
}

/// Laplacian data for explicitly given weights on the edges of `g`.
pub fn with_weights(g: &ProximityGraph, weight: impl Fn(usize, usize) -> f64) -> HeatWeightedGraph {
    let k = g.vertex_count();
    let mut weights = DMatrix::zeros(k, k);
    for (i, j) in g.edges() {
        let w = weight(i, j);
        weights[(i, j)] = w;
        weights[(j, i)] = w;
    }
    assemble(g.clone(), f64::INFINITY, weights)
}

fn assemble(graph: ProximityGraph, t: f64, weights: DMatrix<f64>) -> HeatWeightedGraph {
    let k = graph.vertex_count();
    let degrees = DVector::from_iterator(k, (0..k).map(|i| weights.column(i).sum()));
    let laplacian = DMatrix::from_diagonal(&degrees) - &weights;
    HeatWeightedGraph { graph, t, weights, degrees, laplacian }
}

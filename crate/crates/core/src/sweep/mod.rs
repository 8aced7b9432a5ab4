//! ε-t (and n) parameter-space exploration.
//!
//! Every sweep takes a matrix whose rows are the graph vertices. The entity
//! vectors that get reduced are its columns: with parameters as vertices,
//! each language is a vector of parameter values of length `k`, which is
//! the only length the `m x k` transform can act on.
//!
//! Grid cells are independent; they are evaluated through [`Execution`] and
//! stored by index, so sequential and parallel runs agree bit for bit.

pub mod fit;
pub mod stats;

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graphgen::{epsilon_graph, heat_weights, knn_graph, pairwise_sq_distances_with, DistanceMatrix};
use crate::ingest::{random_binary, FeatureMatrix};
use crate::metrics::{average_clustering, clustering_variance, population_variance, vertex_connectivity};
use crate::spectral::{connected_components, embed_dense, SpectralEmbedding};

pub use fit::{fit_gaussian, GaussianFitResult, GaussianParams};

/// Tunables shared by the sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// IQR multiplier of the Tukey fences.
    pub tukey_multiplier: f64,
    pub execution: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { tukey_multiplier: 1.5, execution: Execution::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveRule {
    Epsilon,
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub value: f64,
    pub vertex_connectivity: usize,
    pub average_clustering: f64,
    pub component_count: usize,
    pub edge_count: usize,
}

/// Vertex connectivity and average clustering of the graph built at each
/// value of `values` (ε thresholds or neighbor counts).
pub fn curve_connectivity_clustering(
    points: &FeatureMatrix,
    rule: CurveRule,
    values: &[f64],
    exec: Execution,
) -> Result<Vec<CurveRow>> {
    check_ascending(values, "curve values")?;
    let d = pairwise_sq_distances_with(points, exec)?;
    exec.map_indexed(values.len(), |i| {
        let value = values[i];
        let g = match rule {
            CurveRule::Epsilon => epsilon_graph(&d, value)?,
            CurveRule::Nearest => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::InvalidParameter(format!("neighbor count {value} is not a count")));
                }
                knn_graph(&d, value as usize)?
            }
        };
        Ok(CurveRow {
            value,
            vertex_connectivity: vertex_connectivity(&g),
            average_clustering: average_clustering(&g)?,
            component_count: connected_components(&g).len(),
            edge_count: g.edge_count(),
        })
    })
    .into_iter()
    .collect()
}

fn check_ascending(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} must be nonempty")));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(format!("{what} must be strictly ascending")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub epsilon: f64,
    pub t: f64,
    /// Mean over reduced coordinates of the population variance across entities.
    pub mean_variance: f64,
    pub max_variance: f64,
    /// Tukey outliers per reduced coordinate, averaged over coordinates.
    pub outliers: f64,
    pub edge_count: usize,
    pub component_count: usize,
}

/// Cells indexed `[ε index][t index]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub epsilon_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub m_dims: usize,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, eps_idx: usize, t_idx: usize) -> &SweepCell {
        &self.cells[eps_idx * self.t_values.len() + t_idx]
    }

    fn argmax(&self, key: impl Fn(&SweepCell) -> f64) -> Option<&SweepCell> {
        // first maximum in (ε, t) order
        self.cells.iter().fold(None, |best: Option<&SweepCell>, c| match best {
            Some(b) if key(b) >= key(c) => Some(b),
            _ => Some(c),
        })
    }

    /// Cell with the largest mean variance.
    pub fn variance_peak(&self) -> Option<&SweepCell> {
        self.argmax(|c| c.mean_variance)
    }

    pub fn outlier_peak(&self) -> Option<&SweepCell> {
        self.argmax(|c| c.outliers)
    }
}

/// Evaluates both the variance and the outlier measure at every (ε, t).
pub fn sweep_grid(
    points: &FeatureMatrix,
    epsilon_values: &[f64],
    t_values: &[f64],
    m_dims: usize,
    opts: SweepOptions,
) -> Result<SweepGrid> {
    check_ascending(epsilon_values, "epsilon grid")?;
    check_ascending(t_values, "t grid")?;
    if m_dims == 0 {
        return Err(Error::InvalidParameter("m_dims must be at least 1".into()));
    }
    let d = pairwise_sq_distances_with(points, opts.execution)?;
    let rows = points.dense_rows()?;
    // entity vectors are the columns of `points`
    let entities = DMatrix::from_fn(points.ncols(), points.nrows(), |e, v| rows[v][e]);
    let nt = t_values.len();
    let cells = opts
        .execution
        .map_indexed(epsilon_values.len() * nt, |idx| {
            let (epsilon, t) = (epsilon_values[idx / nt], t_values[idx % nt]);
            sweep_cell(&d, &entities, epsilon, t, m_dims, opts.tukey_multiplier)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        epsilon_values: epsilon_values.to_vec(),
        t_values: t_values.to_vec(),
        m_dims,
        cells,
    })
}

/// Variance contour grid. Same cells as [`sweep_grid`].
pub fn sweep_variance(
    points: &FeatureMatrix,
    epsilon_values: &[f64],
    t_values: &[f64],
    m_dims: usize,
    opts: SweepOptions,
) -> Result<SweepGrid> {
    sweep_grid(points, epsilon_values, t_values, m_dims, opts)
}

/// Outlier contour grid. Same cells as [`sweep_grid`].
pub fn sweep_outliers(
    points: &FeatureMatrix,
    epsilon_values: &[f64],
    t_values: &[f64],
    m_dims: usize,
    opts: SweepOptions,
) -> Result<SweepGrid> {
    sweep_grid(points, epsilon_values, t_values, m_dims, opts)
}

fn sweep_cell(
    d: &DistanceMatrix,
    entities: &DMatrix<f64>,
    epsilon: f64,
    t: f64,
    m_dims: usize,
    tukey: f64,
) -> Result<SweepCell> {
    let g = epsilon_graph(d, epsilon)?;
    let edge_count = g.edge_count();
    let mut cell = SweepCell {
        epsilon,
        t,
        mean_variance: 0.0,
        max_variance: 0.0,
        outliers: 0.0,
        edge_count,
        component_count: connected_components(&g).len(),
    };
    if edge_count == 0 {
        return Ok(cell);
    }
    let h = heat_weights(&g, d, t)?;
    let emb = SpectralEmbedding::compute_with(&h, m_dims, Execution::Sequential)?;
    let reduced = embed_dense(entities, &emb.transform);
    let (var, out) = coordinate_stats(&reduced, tukey);
    cell.mean_variance = var.iter().sum::<f64>() / var.len() as f64;
    cell.max_variance = var.iter().copied().fold(0.0, f64::max);
    cell.outliers = out.iter().sum::<usize>() as f64 / out.len() as f64;
    Ok(cell)
}

/// Per reduced coordinate (column): population variance and outlier count.
pub fn coordinate_stats(reduced: &DMatrix<f64>, tukey: f64) -> (Vec<f64>, Vec<usize>) {
    reduced
        .column_iter()
        .map(|col| {
            let xs: Vec<f64> = col.iter().copied().collect();
            (population_variance(&xs), stats::count_outliers(&xs, tukey))
        })
        .unzip()
}

/// `(ε, clustering variance of the ε-graph)` for each ε.
pub fn clustering_variance_curve(
    points: &FeatureMatrix,
    epsilon_values: &[f64],
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    let d = pairwise_sq_distances_with(points, exec)?;
    clustering_variance_curve_from(&d, epsilon_values, exec)
}

pub fn clustering_variance_curve_from(
    d: &DistanceMatrix,
    epsilon_values: &[f64],
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    check_ascending(epsilon_values, "epsilon grid")?;
    exec.map_indexed(epsilon_values.len(), |i| {
        let e = epsilon_values[i];
        Ok((e, clustering_variance(&epsilon_graph(d, e)?)))
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRow {
    pub n: usize,
    pub seed: u64,
    pub fit: GaussianFitResult,
}

/// Seed of the random matrix with `n` rows, derived from the run seed.
pub fn baseline_seed(seed: u64, n: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    rng.next_u64()
}

/// For each size `n`: a uniform random binary `n x n_coords` matrix (rows
/// as vertices), its clustering-variance curve over `epsilon_values`, and
/// the Gaussian fit of that curve.
pub fn random_baseline(
    sizes: &[usize],
    n_coords: usize,
    epsilon_values: &[f64],
    seed: u64,
    exec: Execution,
) -> Result<Vec<BaselineRow>> {
    if let Some(&n) = sizes.iter().find(|&&n| n < 4) {
        return Err(Error::InvalidParameter(format!("baseline size {n} below 4")));
    }
    exec.map_indexed(sizes.len(), |i| {
        let n = sizes[i];
        let s = baseline_seed(seed, n);
        let m = random_binary(n, n_coords, s);
        let curve = clustering_variance_curve(&m, epsilon_values, Execution::Sequential)?;
        let fit = match fit_gaussian(&curve) {
            Err(Error::ConstantSeries) => fit::flat_fit(&curve),
            other => other?,
        };
        Ok(BaselineRow { n, seed: s, fit })
    })
    .into_iter()
    .collect()
}

/// `a:b:step` inclusive of `b` when it lands on the lattice.
pub fn grid_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(end >= start) {
        return Err(Error::InvalidParameter(format!("bad grid {start}:{end}:{step}")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

//! Generalized eigenproblem `L ψ = λ D ψ` per connected component, and the
//! reduction transform built from the low-frequency eigenvectors.
//!
//! Each component of size `s ≥ 2` is solved through the symmetric matrix
//! `N = D^{-1/2} L D^{-1/2}`, whose eigenpairs `(λ, u)` give `ψ = D^{-1/2} u`.
//! The null vector `u₀ ∝ D^{1/2} 1` is known in closed form, so it is
//! deflated with a Householder reflector before the dense solve: `λ₀` is
//! exactly zero, `ψ₀` exactly constant, and the remaining `s - 1` vectors are
//! D-orthogonal to it by construction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graphgen::{HeatWeightedGraph, ProximityGraph};
use crate::ingest::FeatureMatrix;

/// Connected components, each sorted ascending, ordered by decreasing size
/// then by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentPartition {
    pub components: Vec<Vec<usize>>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(Vec::len).collect()
    }
}

pub fn connected_components(g: &ProximityGraph) -> ComponentPartition {
    let k = g.vertex_count();
    let mut seen = vec![false; k];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..k {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    ComponentPartition { components }
}

/// Eigenpairs of one component, in ascending eigenvalue order. Vectors are
/// indexed like `vertices` (local to the component) and D-orthonormal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSpectrum {
    pub vertices: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

impl ComponentSpectrum {
    /// Singletons carry the single eigenvalue 0 and a zero embedding.
    fn singleton(v: usize) -> Self {
        ComponentSpectrum { vertices: vec![v], eigenvalues: vec![0.0], eigenvectors: vec![vec![1.0]] }
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }

    /// The eigenvector `idx` spread onto all `k` vertices (zero elsewhere).
    pub fn global_vector(&self, idx: usize, k: usize) -> DVector<f64> {
        let mut out = DVector::zeros(k);
        for (&v, &x) in self.vertices.iter().zip(&self.eigenvectors[idx]) {
            out[v] = x;
        }
        out
    }
}

/// Solves `L ψ = λ D ψ` restricted to `comp`, a connected component with at
/// least two vertices.
pub fn solve_component_eigen(h: &HeatWeightedGraph, comp: &[usize]) -> Result<ComponentSpectrum> {
    let s = comp.len();
    if s < 2 {
        return Err(Error::ComponentTooSmall);
    }
    let mut sqrt_deg = Vec::with_capacity(s);
    for &v in comp {
        let d = h.degrees[v];
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::ZeroDegree(v));
        }
        sqrt_deg.push(d.sqrt());
    }

    // N = D^{-1/2} L D^{-1/2}
    let mut n = DMatrix::from_fn(s, s, |a, b| {
        h.laplacian[(comp[a], comp[b])] / (sqrt_deg[a] * sqrt_deg[b])
    });
    n = (&n + n.transpose()) * 0.5;

    // Householder reflector P with P u0 = -sign(u0_0) e0, u0 = D^{1/2} 1 / |.|
    let norm = sqrt_deg.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u0 = DVector::from_iterator(s, sqrt_deg.iter().map(|x| x / norm));
    let mut v = u0.clone();
    v[0] += u0[0].signum() * 1.0;
    let v = &v / v.norm();
    let reflector = DMatrix::identity(s, s) - (&v * v.transpose()) * 2.0;
    let rotated = &reflector * &n * &reflector;
    let block = rotated.view((1, 1), (s - 1, s - 1)).into_owned();
    let block = (&block + block.transpose()) * 0.5;
    let eig = SymmetricEigen::new(block);

    let mut order: Vec<usize> = (0..s - 1).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let to_psi = |u: &DVector<f64>| -> Vec<f64> {
        let mut psi: Vec<f64> = u.iter().zip(&sqrt_deg).map(|(x, d)| x / d).collect();
        normalize_sign(&mut psi);
        psi
    };

    let mut eigenvalues = Vec::with_capacity(s);
    let mut eigenvectors = Vec::with_capacity(s);
    eigenvalues.push(0.0);
    eigenvectors.push(to_psi(&u0));
    for idx in order {
        let mut padded = DVector::zeros(s);
        padded.rows_mut(1, s - 1).copy_from(&eig.eigenvectors.column(idx));
        let u = &reflector * padded;
        eigenvalues.push(eig.eigenvalues[idx].max(0.0));
        eigenvectors.push(to_psi(&u));
    }
    Ok(ComponentSpectrum { vertices: comp.to_vec(), eigenvalues, eigenvectors })
}

/// Flips `psi` so that its largest-magnitude entry is positive; among
/// entries of equal magnitude the lowest index decides.
fn normalize_sign(psi: &mut [f64]) {
    let max = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = max * 1e-12;
    if let Some(lead) = psi.iter().find(|x| x.abs() >= max - tol) {
        if *lead < 0.0 {
            psi.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Builds the `m x k` transform whose row `j` holds `ψ_{j+1}` of every
/// component (zero where a component has fewer than `j + 1` nontrivial
/// eigenvectors, and on singletons).
pub fn build_transform(spectra: &[ComponentSpectrum], m: usize, k: usize) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::InvalidParameter("target dimension must be at least 1".into()));
    }
    let mut t = DMatrix::zeros(m, k);
    for spec in spectra {
        for row in 0..m.min(spec.eigenvalues.len() - 1) {
            for (&v, &x) in spec.vertices.iter().zip(&spec.eigenvectors[row + 1]) {
                if v >= k {
                    return Err(Error::DimensionMismatch { expected: k, found: v + 1 });
                }
                t[(row, v)] = x;
            }
        }
    }
    Ok(t)
}

/// `p'_j = Σ_i T_ji p_i` for every row `p` of `entities`; returns a
/// `rows x m` matrix.
pub fn embed(entities: &FeatureMatrix, transform: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if entities.ncols() != transform.ncols() {
        return Err(Error::DimensionMismatch { expected: transform.ncols(), found: entities.ncols() });
    }
    let rows = entities.dense_rows()?;
    let p = DMatrix::from_fn(rows.len(), transform.ncols(), |r, c| rows[r][c]);
    Ok(embed_dense(&p, transform))
}

/// [`embed`] on a plain matrix whose rows are the entity vectors.
pub fn embed_dense(p: &DMatrix<f64>, transform: &DMatrix<f64>) -> DMatrix<f64> {
    p * transform.transpose()
}

/// Spectra of every component plus the reduction transform.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralEmbedding {
    pub partition: ComponentPartition,
    pub spectra: Vec<ComponentSpectrum>,
    pub m: usize,
    #[serde(skip)]
    pub transform: DMatrix<f64>,
}

impl SpectralEmbedding {
    pub fn compute(h: &HeatWeightedGraph, m: usize) -> Result<Self> {
        Self::compute_with(h, m, Execution::default())
    }

    /// Component solves are independent; `exec` decides whether they fan out.
    pub fn compute_with(h: &HeatWeightedGraph, m: usize, exec: Execution) -> Result<Self> {
        let partition = connected_components(&h.graph);
        let spectra = exec
            .map_indexed(partition.len(), |c| {
                let comp = &partition.components[c];
                if comp.len() == 1 {
                    Ok(ComponentSpectrum::singleton(comp[0]))
                } else {
                    solve_component_eigen(h, comp)
                }
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let transform = build_transform(&spectra, m, h.graph.vertex_count())?;
        Ok(SpectralEmbedding { partition, spectra, m, transform })
    }

    /// All eigenvalues of the graph, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.spectra.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn zero_eigenvalue_count(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|l| l.abs() <= tol).count()
    }
}

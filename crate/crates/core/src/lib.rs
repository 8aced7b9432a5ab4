//! Laplacian eigenmaps over binary (or ternary) feature matrices.
//!
//! The pipeline runs in five stages, one module each:
//!
//! * [`ingest`] parses feature CSVs, filters rows by coverage and imputes
//!   missing cells.
//! * [`graphgen`] builds proximity graphs (ε-neighborhood, n-nearest,
//!   n-farthest) on squared Euclidean distances and attaches heat-kernel
//!   weights `W_ij = exp(-|x_i - x_j|^2 / t)`.
//! * [`spectral`] solves `L ψ = λ D ψ` per connected component and builds
//!   the reduction transform.
//! * [`metrics`] computes vertex connectivity, clustering coefficients and
//!   component summaries.
//! * [`sweep`] explores the ε-t parameter space and fits Gaussian curves to
//!   clustering-variance series.
//!
//! Data-parallel loops go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and falls back to plain iteration otherwise.

pub mod error;
pub mod exec;
pub mod export;
pub mod graphgen;
pub mod ingest;
pub mod metrics;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use exec::Execution;
pub use graphgen::{DistanceMatrix, GraphRule, HeatWeightedGraph, ProximityGraph};
pub use ingest::{FeatureMatrix, Orientation, ValueDomain};
pub use metrics::GraphSummary;
pub use spectral::{ComponentPartition, ComponentSpectrum, SpectralEmbedding};
pub use sweep::{GaussianFitResult, SweepGrid};

//! Least-squares fit of `f(x) = A exp(-(x - H)^2 / σ^2) + V`.
//!
//! Two stages: a coarse grid over `(H, σ)` where the linear parameters
//! `(A, V)` are solved exactly for every candidate, then Levenberg-Marquardt
//! refinement of all four parameters from the best candidate. Refinement
//! only accepts steps that lower the residual, so the result is never worse
//! than the grid optimum.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};

const GRID_CENTERS: usize = 61;
const GRID_WIDTHS: usize = 48;
const MAX_ITERATIONS: usize = 500;
const MIN_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianParams {
    #[serde(rename = "A")]
    pub amplitude: f64,
    #[serde(rename = "H")]
    pub center: f64,
    pub sigma: f64,
    #[serde(rename = "V")]
    pub shift: f64,
}

impl GaussianParams {
    pub fn eval(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.sigma;
        self.amplitude * (-z * z).exp() + self.shift
    }

    fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.amplitude, self.center, self.sigma, self.shift)
    }

    fn from_vector(v: &Vector4<f64>) -> Self {
        GaussianParams { amplitude: v[0], center: v[1], sigma: v[2], shift: v[3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFitResult {
    #[serde(flatten)]
    pub params: GaussianParams,
    /// 1σ uncertainties, absolute.
    pub errors: GaussianParams,
    /// 1σ uncertainties as a percentage of `|value|`.
    pub errors_percent: GaussianParams,
    /// Euclidean norm of the residual vector at the optimum.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One coarse-grid candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCandidate {
    pub params: GaussianParams,
    pub sum_sq: f64,
}

fn sum_sq(series: &[(f64, f64)], p: &GaussianParams) -> f64 {
    series.iter().map(|&(x, y)| (y - p.eval(x)).powi(2)).sum()
}

fn validate(series: &[(f64, f64)]) -> Result<()> {
    if series.len() < MIN_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_POINTS, got: series.len() });
    }
    if series.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidParameter("series contains non-finite values".into()));
    }
    let y0 = series[0].1;
    if series.iter().all(|&(_, y)| y == y0) {
        return Err(Error::ConstantSeries);
    }
    Ok(())
}

/// Every coarse-grid candidate with its optimal `(A, V)`.
pub fn coarse_grid(series: &[(f64, f64)]) -> Result<Vec<GridCandidate>> {
    validate(series)?;
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    let span = (hi - lo).max(f64::EPSILON);
    let mut xs: Vec<f64> = series.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    let min_gap = xs
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > 0.0)
        .fold(span, f64::min);
    let (w_lo, w_hi) = (min_gap * 0.5, span * 2.0);

    let mut out = Vec::with_capacity(GRID_CENTERS * GRID_WIDTHS);
    for ci in 0..GRID_CENTERS {
        let center = lo + span * ci as f64 / (GRID_CENTERS - 1) as f64;
        for wi in 0..GRID_WIDTHS {
            let sigma = w_lo * (w_hi / w_lo).powf(wi as f64 / (GRID_WIDTHS - 1) as f64);
            if let Some(c) = linear_solve(series, center, sigma) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Exact `(A, V)` for fixed `(H, σ)`; `None` when the basis is degenerate.
fn linear_solve(series: &[(f64, f64)], center: f64, sigma: f64) -> Option<GridCandidate> {
    let n = series.len() as f64;
    let (mut sg, mut sgg, mut sy, mut sgy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in series {
        let z = (x - center) / sigma;
        let g = (-z * z).exp();
        sg += g;
        sgg += g * g;
        sy += y;
        sgy += g * y;
    }
    let det = sgg * n - sg * sg;
    if !(det.abs() > 1e-12 * (sgg * n).max(f64::MIN_POSITIVE)) {
        return None;
    }
    let amplitude = (sgy * n - sg * sy) / det;
    let shift = (sgg * sy - sg * sgy) / det;
    let params = GaussianParams { amplitude, center, sigma, shift };
    Some(GridCandidate { params, sum_sq: sum_sq(series, &params) })
}

fn jacobian_row(p: &GaussianParams, x: f64) -> Vector4<f64> {
    let d = x - p.center;
    let s2 = p.sigma * p.sigma;
    let e = (-d * d / s2).exp();
    Vector4::new(
        e,
        p.amplitude * e * 2.0 * d / s2,
        p.amplitude * e * 2.0 * d * d / (s2 * p.sigma),
        1.0,
    )
}

fn normal_equations(series: &[(f64, f64)], p: &GaussianParams) -> (Matrix4<f64>, Vector4<f64>) {
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    for &(x, y) in series {
        let j = jacobian_row(p, x);
        let r = y - p.eval(x);
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (jtj, jtr)
}

/// Fits the Gaussian-plus-shift model to `(x, y)` samples.
pub fn fit_gaussian(series: &[(f64, f64)]) -> Result<GaussianFitResult> {
    let grid = coarse_grid(series)?;
    let start = grid
        .iter()
        .min_by(|a, b| a.sum_sq.total_cmp(&b.sum_sq))
        .copied()
        .ok_or(Error::ConstantSeries)?;

    let mut p = start.params;
    let mut cost = start.sum_sq;
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let (jtj, jtr) = normal_equations(series, &p);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for i in 0..4 {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = GaussianParams::from_vector(&(p.to_vector() + step));
            let trial_cost = sum_sq(series, &trial);
            if trial_cost.is_finite() && trial_cost < cost {
                let rel = step
                    .iter()
                    .zip(p.to_vector().iter())
                    .map(|(s, v)| s.abs() / (v.abs() + 1e-12))
                    .fold(0.0, f64::max);
                let drop = (cost - trial_cost) / cost;
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < 1e-12 || drop < 1e-15 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = true;
        }
        if converged {
            break;
        }
    }

    p.sigma = p.sigma.abs();
    let errors = parameter_errors(series, &p, cost);
    let pct = |e: f64, v: f64| if v == 0.0 { f64::INFINITY } else { 100.0 * e / v.abs() };
    Ok(GaussianFitResult {
        params: p,
        errors,
        errors_percent: GaussianParams {
            amplitude: pct(errors.amplitude, p.amplitude),
            center: pct(errors.center, p.center),
            sigma: pct(errors.sigma, p.sigma),
            shift: pct(errors.shift, p.shift),
        },
        residual_norm: cost.sqrt(),
        iterations,
        converged,
    })
}

/// Degenerate result for a constant series: zero amplitude, the constant
/// as shift, centre and width spanning the x range, not converged.
pub fn flat_fit(series: &[(f64, f64)]) -> GaussianFitResult {
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    let params = GaussianParams {
        amplitude: 0.0,
        center: 0.5 * (lo + hi),
        sigma: (hi - lo).max(f64::MIN_POSITIVE),
        shift: series.first().map_or(0.0, |p| p.1),
    };
    let inf = GaussianParams { amplitude: f64::INFINITY, center: f64::INFINITY, sigma: f64::INFINITY, shift: f64::INFINITY };
    GaussianFitResult {
        params,
        errors: inf,
        errors_percent: inf,
        residual_norm: 0.0,
        iterations: 0,
        converged: false,
    }
}

/// Square roots of the diagonal of `s^2 (J^T J)^{-1}` with
/// `s^2 = SSR / (n - 4)`.
fn parameter_errors(series: &[(f64, f64)], p: &GaussianParams, cost: f64) -> GaussianParams {
    let (jtj, _) = normal_equations(series, p);
    let dof = (series.len() - 4) as f64;
    let s2 = cost / dof;
    let cov = jtj.try_inverse().map(|inv| inv * s2);
    let err = |i: usize| cov.map_or(f64::INFINITY, |c| c[(i, i)].max(0.0).sqrt());
    GaussianParams { amplitude: err(0), center: err(1), sigma: err(2), shift: err(3) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(p: GaussianParams, xs: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
        xs.map(|x| (x, p.eval(x))).collect()
    }

    const TRUTH: GaussianParams = GaussianParams { amplitude: 0.4, center: 18.0, sigma: 18.5, shift: 0.03 };

    #[test]
    fn recovers_noiseless_parameters() {
        let series = sample(TRUTH, (0..=60).map(f64::from));
        let fit = fit_gaussian(&series).unwrap();
        assert!(fit.converged);
        let got = fit.params.to_vector();
        let want = TRUTH.to_vector();
        for i in 0..4 {
            assert!(((got[i] - want[i]) / want[i]).abs() < 1e-6, "{:?}", fit.params);
        }
        assert!(fit.residual_norm < 1e-9);
    }

    #[test]
    fn refinement_never_loses_to_grid() {
        let series: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let x = f64::from(i);
                (x, (-(x - 22.0).powi(2) / 60.0).exp() * 0.2 + if i % 3 == 0 { 0.01 } else { -0.004 })
            })
            .collect();
        let fit = fit_gaussian(&series).unwrap();
        let best_fit = fit.residual_norm.powi(2);
        for c in coarse_grid(&series).unwrap() {
            assert!(best_fit <= c.sum_sq * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sigma_is_reported_positive() {
        let series = sample(GaussianParams { sigma: 5.0, ..TRUTH }, (0..30).map(f64::from));
        assert!(fit_gaussian(&series).unwrap().params.sigma > 0.0);
    }

    #[test]
    fn rejects_bad_series() {
        assert!(matches!(fit_gaussian(&[(0.0, 1.0); 4]), Err(Error::TooFewPoints { .. })));
        let flat: Vec<_> = (0..10).map(|i| (f64::from(i), 0.3)).collect();
        assert_eq!(fit_gaussian(&flat), Err(Error::ConstantSeries));
    }

    #[test]
    fn errors_scale_with_noise() {
        let noisy: Vec<(f64, f64)> = (0..=60)
            .map(|i| {
                let x = f64::from(i);
                (x, TRUTH.eval(x) + if i % 2 == 0 { 0.005 } else { -0.005 })
            })
            .collect();
        let fit = fit_gaussian(&noisy).unwrap();
        assert!(fit.errors.amplitude > 0.0 && fit.errors.amplitude.is_finite());
        assert!((fit.errors_percent.center - 100.0 * fit.errors.center / fit.params.center).abs() < 1e-9);
    }
}

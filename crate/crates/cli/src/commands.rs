use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use eigenmap::graphgen::{build_graph, heat_weights, pairwise_sq_distances_with};
use eigenmap::ingest::{
    filter_rows_by_coverage, generate_synthetic, impute_missing, parse_matrix, transpose_orientation,
};
use eigenmap::metrics::graph_summary;
use eigenmap::spectral::embed;
use eigenmap::sweep::{
    clustering_variance_curve, curve_connectivity_clustering, fit::flat_fit, fit_gaussian, random_baseline,
    sweep_grid, BaselineRow, CurveRule, SweepOptions,
};
use eigenmap::{export, Error, Execution, FeatureMatrix, SpectralEmbedding};
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, DEFAULT_T};

/// Zero eigenvalue tolerance used for reporting.
const ZERO_TOL: f64 = 1e-9;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input. Exit code 2.
    Usage(String),
    /// The computation itself failed. Exit code 1.
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::NoDataRows | Error::EmptyAfterFilter | Error::FillOutOfDomain { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Compute(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Files produced by a command, written together once everything succeeded.
#[derive(Default)]
pub struct Outputs(Vec<(&'static str, String)>);

impl Outputs {
    fn add(&mut self, name: &'static str, body: String) {
        self.0.push((name, body));
    }

    fn json(&mut self, name: &'static str, value: &impl Serialize) -> CliResult<()> {
        let mut body = serde_json::to_string_pretty(value).map_err(|e| CliError::Compute(e.to_string()))?;
        body.push('\n');
        self.add(name, body);
        Ok(())
    }

    /// Writes every file into `dir`. On failure, files already written by
    /// this call are removed again.
    pub fn write(self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let io_err = |p: &Path, e: std::io::Error| CliError::Usage(format!("{}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let mut written = Vec::new();
        for (name, body) in self.0 {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, body) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(io_err(&path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Cleaned input, languages as rows, plus bookkeeping for the report.
struct Loaded {
    cleaned: FeatureMatrix,
    rows_in: usize,
    missing_before: usize,
}

fn load_cleaned(cfg: &RunConfig) -> CliResult<Loaded> {
    let path = cfg.input.as_ref().ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    // parse in the widened domain so fractional cells from an earlier
    // imputation round-trip, then narrow back when every cell allows it
    let raw = parse_matrix(&text, cfg.domain.widened())
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        .narrowed();
    let rows_in = raw.nrows();
    let filtered = filter_rows_by_coverage(&raw, cfg.min_coverage)?;
    let missing_before = filtered.missing_count();
    let cleaned = impute_missing(&filtered, cfg.fill_value())?;
    Ok(Loaded { cleaned, rows_in, missing_before })
}

/// Matrix whose rows are the graph vertices.
fn vertex_points(cfg: &RunConfig, cleaned: &FeatureMatrix) -> FeatureMatrix {
    if cfg.vertices_are_params {
        transpose_orientation(cleaned)
    } else {
        cleaned.clone()
    }
}

pub fn ingest(cfg: &RunConfig) -> CliResult<Outputs> {
    let loaded = load_cleaned(cfg)?;
    let m = &loaded.cleaned;
    let coverage: Vec<_> = m
        .row_labels()
        .iter()
        .zip(m.row_coverage())
        .map(|(l, c)| json!({ "label": l, "coverage": c }))
        .collect();
    let mut out = Outputs::default();
    out.add("cleaned.csv", m.to_csv());
    out.json(
        "coverage.json",
        &json!({
            "rows_in": loaded.rows_in,
            "rows_kept": m.nrows(),
            "columns": m.ncols(),
            "min_coverage": cfg.min_coverage,
            "missing_imputed": loaded.missing_before,
            "fill": cfg.fill_value(),
            "domain": m.domain().to_string(),
            "rows": coverage,
        }),
    )?;
    Ok(out)
}

pub fn graph(cfg: &RunConfig, exec: Execution) -> CliResult<Outputs> {
    let points = vertex_points(cfg, &load_cleaned(cfg)?.cleaned);
    let d = pairwise_sq_distances_with(&points, exec)?;
    let g = build_graph(&d, cfg.graph_rule())?.with_labels(points.row_labels().to_vec())?;
    let weighted = cfg.t.map(|t| heat_weights(&g, &d, t)).transpose()?;
    let mut out = Outputs::default();
    out.add("graph.graphml", export::to_graphml(&g, &d, weighted.as_ref()));
    out.add("graph.dot", export::to_dot(&g, &d, weighted.as_ref()));
    out.json(
        "summary.json",
        &json!({ "rule": cfg.graph_rule(), "t": cfg.t, "summary": graph_summary(&g) }),
    )?;
    Ok(out)
}

pub fn embed_cmd(cfg: &RunConfig, exec: Execution) -> CliResult<Outputs> {
    let points = vertex_points(cfg, &load_cleaned(cfg)?.cleaned);
    let d = pairwise_sq_distances_with(&points, exec)?;
    let g = build_graph(&d, cfg.graph_rule())?.with_labels(points.row_labels().to_vec())?;
    let t = cfg.t.unwrap_or(DEFAULT_T);
    let h = heat_weights(&g, &d, t)?;
    let emb = SpectralEmbedding::compute_with(&h, cfg.m_dims, exec)?;
    let entities = transpose_orientation(&points);
    let reduced = embed(&entities, &emb.transform)?;
    let labels = points.row_labels();
    let components: Vec<_> = emb
        .spectra
        .iter()
        .map(|s| {
            json!({
                "vertices": s.vertices.iter().map(|&v| &labels[v]).collect::<Vec<_>>(),
                "eigenvalues": s.eigenvalues,
            })
        })
        .collect();
    let mut out = Outputs::default();
    out.add("embedding.csv", export::embedding_csv(entities.row_labels(), &reduced));
    out.json(
        "eigen.json",
        &json!({
            "rule": cfg.graph_rule(),
            "t": t,
            "m_dims": cfg.m_dims,
            "component_count": emb.partition.len(),
            "zero_eigenvalues": emb.zero_eigenvalue_count(ZERO_TOL),
            "components": components,
        }),
    )?;
    Ok(out)
}

fn fit_or_flat(series: &[(f64, f64)]) -> CliResult<eigenmap::GaussianFitResult> {
    match fit_gaussian(series) {
        Err(Error::ConstantSeries) => Ok(flat_fit(series)),
        other => Ok(other?),
    }
}

fn baseline_csv(rows: &[BaselineRow]) -> String {
    let mut s = String::from("n,seed,A,H,sigma,V,err_A,err_H,err_sigma,err_V,residual_norm,converged\n");
    for r in rows {
        let (p, e) = (&r.fit.params, &r.fit.errors);
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.seed,
            p.amplitude,
            p.center,
            p.sigma,
            p.shift,
            e.amplitude,
            e.center,
            e.sigma,
            e.shift,
            r.fit.residual_norm,
            r.fit.converged
        )
        .unwrap();
    }
    s
}

pub fn sweep(cfg: &RunConfig, exec: Execution) -> CliResult<Outputs> {
    let points = vertex_points(cfg, &load_cleaned(cfg)?.cleaned);
    let mut out = Outputs::default();
    let eps_curve = curve_connectivity_clustering(&points, CurveRule::Epsilon, &cfg.eps_grid, exec)?;
    out.add("curve_eps.csv", export::curve_csv(&eps_curve));
    if let Some(n_grid) = &cfg.n_grid {
        let knn_curve = curve_connectivity_clustering(&points, CurveRule::Nearest, n_grid, exec)?;
        out.add("curve_knn.csv", export::curve_csv(&knn_curve));
    }
    let opts = SweepOptions { tukey_multiplier: cfg.tukey, execution: exec };
    let grid = sweep_grid(&points, &cfg.eps_grid, &cfg.t_grid, cfg.m_dims, opts)?;
    out.add("grid.csv", export::grid_csv(&grid));
    out.json(
        "grid_peaks.json",
        &json!({
            "m_dims": grid.m_dims,
            "variance_peak": grid.variance_peak(),
            "outlier_peak": grid.outlier_peak(),
        }),
    )?;
    let curve = clustering_variance_curve(&points, &cfg.eps_grid, exec)?;
    out.add("clustering_variance.csv", export::series_csv(&curve));
    out.json("fit.json", &fit_or_flat(&curve)?)?;
    if let Some(sizes) = &cfg.baseline {
        let rows = random_baseline(sizes, cfg.coords, &cfg.eps_grid, cfg.seed, exec)?;
        out.add("baseline.csv", baseline_csv(&rows));
    }
    Ok(out)
}

pub const DEFAULT_BASELINE_SIZES: [usize; 4] = [25, 50, 100, 200];

pub fn baseline(cfg: &RunConfig, explicit_eps_grid: bool, exec: Execution) -> CliResult<Outputs> {
    let sizes = cfg.baseline.clone().unwrap_or_else(|| DEFAULT_BASELINE_SIZES.to_vec());
    let eps = cfg.baseline_eps_grid(explicit_eps_grid);
    let rows = random_baseline(&sizes, cfg.coords, &eps, cfg.seed, exec)?;
    let mut out = Outputs::default();
    out.add("baseline.csv", baseline_csv(&rows));
    out.json(
        "baseline.json",
        &json!({ "coords": cfg.coords, "seed": cfg.seed, "epsilon_values": eps, "rows": rows }),
    )?;
    Ok(out)
}

/// Writes the synthetic points as columns, so that the default
/// orientation makes them the graph vertices.
pub fn synth(cfg: &RunConfig) -> CliResult<Outputs> {
    let m = generate_synthetic(cfg.points, cfg.coords, cfg.clusters, cfg.flip_prob, cfg.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut out = Outputs::default();
    out.add("synthetic.csv", transpose_orientation(&m).to_csv());
    Ok(out)
}

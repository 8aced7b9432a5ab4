//! Acceptance checks. Prints one line per criterion:
//!
//! ```text
//! PASS  <name>  <detail>
//! FAIL  <name>  <detail>
//! SKIP  <name>  <why>
//! ```
//!
//! Criteria listed in `KNOWN_RED` still print FAIL but do not fail the run.
//! Any other FAIL makes the process exit nonzero.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use eigenmap::export;
use eigenmap::graphgen::{
    build_graph, epsilon_graph, heat_weights, knn_graph, pairwise_sq_distances, pairwise_sq_distances_with,
    with_weights,
};
use eigenmap::ingest::{
    filter_rows_by_coverage, generate_synthetic, impute_missing, parse_matrix, random_binary, transpose_orientation,
};
use eigenmap::metrics::{local_clustering, neighbor_edge_count, vertex_connectivity};
use eigenmap::spectral::{connected_components, solve_component_eigen};
use eigenmap::sweep::fit::GaussianParams;
use eigenmap::sweep::{
    clustering_variance_curve, fit_gaussian, grid_range, random_baseline, sweep_grid, SweepOptions,
};
use eigenmap::{Execution, FeatureMatrix, GraphRule, ProximityGraph, SpectralEmbedding, ValueDomain};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Random baseline trend: unattainable for a single random draw per size,
/// see the project decisions ledger. Reported, not enforced.
const KNOWN_RED: &[&str] = &["random_baseline_trend"];

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn random_graph(rng: &mut ChaCha8Rng, k: usize) -> ProximityGraph {
    let p: f64 = rng.random_range(0.1..0.9);
    let mut edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    ProximityGraph::from_edges(k, &edges).unwrap()
}

fn adjacency(g: &ProximityGraph) -> Vec<Vec<bool>> {
    let k = g.vertex_count();
    (0..k).map(|i| (0..k).map(|j| g.has_edge(i, j)).collect()).collect()
}

/// Seeded ε-graphs with heat weights used by the Laplacian and residual checks.
fn laplacian_suite() -> Vec<eigenmap::HeatWeightedGraph> {
    (0..100u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = rng.random_range(2..=30);
            let coords = rng.random_range(4..=40);
            let m = random_binary(k, coords, seed ^ 0x5eed);
            let d = pairwise_sq_distances(&m).unwrap();
            let (_, hi) = d.off_diagonal_range().unwrap();
            let eps = rng.random_range(0.5..hi + 1.0);
            let t = rng.random_range(1.0..=100.0);
            let g = epsilon_graph(&d, eps).unwrap();
            heat_weights(&g, &d, t).unwrap()
        })
        .collect()
}

fn laplacian_invariants() -> Outcome {
    let start = Instant::now();
    let mut worst_row = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut multiplicity_mismatch = 0;
    for h in laplacian_suite() {
        for row in h.laplacian.row_iter() {
            worst_row = worst_row.max(row.sum().abs());
        }
        let emb = SpectralEmbedding::compute(&h, 1).unwrap();
        for l in emb.eigenvalues() {
            lo = lo.min(l);
            hi = hi.max(l);
        }
        if emb.zero_eigenvalue_count(1e-9) != emb.partition.len() {
            multiplicity_mismatch += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        worst_row <= 1e-10
            && lo >= -1e-8
            && hi <= 2.0 + 1e-8
            && multiplicity_mismatch == 0
            && elapsed < Duration::from_secs(10),
        format!(
            "100 graphs: max |row sum| {worst_row:.1e}, eigenvalues in [{lo:.3e}, {hi:.6}], \
             multiplicity mismatches {multiplicity_mismatch}, {}",
            secs(elapsed)
        ),
    )
}

fn spectral_residuals() -> Outcome {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for h in laplacian_suite() {
        let k = h.graph.vertex_count();
        let emb = SpectralEmbedding::compute(&h, 1).unwrap();
        for s in &emb.spectra {
            for (idx, &lambda) in s.eigenvalues.iter().enumerate() {
                let psi = s.global_vector(idx, k);
                let d_psi = DVector::from_fn(k, |i, _| h.degrees[i] * psi[i]);
                let r = (&h.laplacian * &psi - lambda * &d_psi).norm();
                let scale = d_psi.norm();
                if scale > 0.0 {
                    worst = worst.max(r / scale);
                } else if r > 0.0 {
                    worst = f64::INFINITY;
                }
                pairs += 1;
            }
        }
    }
    check(worst <= 1e-8, format!("{pairs} eigenpairs, max ||Lψ-λDψ||/||Dψ|| = {worst:.2e}"))
}

fn complete_graph_spectra() -> Outcome {
    let mut worst = 0.0f64;
    for k in 3..=6usize {
        let edges: Vec<_> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        let g = ProximityGraph::from_edges(k, &edges).unwrap();
        let h = with_weights(&g, |_, _| 1.0);
        let spec = solve_component_eigen(&h, &(0..k).collect::<Vec<_>>()).unwrap();
        let expected = k as f64 / (k - 1) as f64;
        worst = worst.max(spec.eigenvalues[0].abs());
        for &l in &spec.eigenvalues[1..] {
            worst = worst.max((l - expected).abs());
        }
        if spec.eigenvalues.len() != k {
            return Outcome::Fail(format!("K_{k}: {} eigenvalues", spec.eigenvalues.len()));
        }
    }
    check(worst <= 1e-9, format!("K_3..K_6, max deviation {worst:.1e}"))
}

fn clustering_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mismatches = 0;
    for _ in 0..200 {
        let k = rng.random_range(1..=12);
        let g = random_graph(&mut rng, k);
        let a = adjacency(&g);
        let mut triangles = vec![0usize; k];
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    if a[i][j] && a[j][l] && a[i][l] {
                        triangles[i] += 1;
                        triangles[j] += 1;
                        triangles[l] += 1;
                    }
                }
            }
        }
        for v in 0..k {
            let d = a[v].iter().filter(|&&x| x).count();
            let expected = if d < 2 { 0.0 } else { triangles[v] as f64 / (d * (d - 1) / 2) as f64 };
            if neighbor_edge_count(&g, v) != triangles[v] || local_clustering(&g, v) != expected {
                mismatches += 1;
            }
        }
    }
    check(mismatches == 0, format!("200 graphs, {mismatches} vertex mismatches"))
}

fn connected_without(a: &[Vec<bool>], removed: u32) -> bool {
    let k = a.len();
    let alive: Vec<usize> = (0..k).filter(|&v| removed & (1 << v) == 0).collect();
    let Some(&first) = alive.first() else { return true };
    let mut seen = 1u32 << first;
    let mut stack = vec![first];
    while let Some(v) = stack.pop() {
        for &w in &alive {
            if a[v][w] && seen & (1 << w) == 0 {
                seen |= 1 << w;
                stack.push(w);
            }
        }
    }
    alive.iter().all(|&v| seen & (1 << v) != 0)
}

/// Smallest vertex set whose removal disconnects the graph or leaves at
/// most one vertex.
fn brute_force_connectivity(a: &[Vec<bool>]) -> usize {
    let k = a.len();
    (0u32..1 << k)
        .filter(|&s| {
            let left = k - s.count_ones() as usize;
            left <= 1 || !connected_without(a, s)
        })
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap_or(0)
}

fn connectivity_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut mismatches = 0;
    let mut seen = BTreeSet::new();
    for _ in 0..100 {
        let k = rng.random_range(1..=8);
        let g = random_graph(&mut rng, k);
        let expected = brute_force_connectivity(&adjacency(&g));
        seen.insert(expected);
        if vertex_connectivity(&g) != expected {
            mismatches += 1;
        }
    }
    check(
        mismatches == 0,
        format!("100 graphs, {mismatches} mismatches, connectivities seen {seen:?}"),
    )
}

fn monotonicity() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for seed in 0..20u64 {
        let m = random_binary(10 + seed as usize, 30, 100 + seed);
        let d = pairwise_sq_distances(&m).unwrap();
        let (lo, hi) = d.off_diagonal_range().unwrap();
        if lo < 2.0 {
            continue;
        }
        checked += 1;
        let grid = grid_range(lo - 1.0, hi + 1.0, 0.5).unwrap();
        let mut prev: Option<(BTreeSet<(usize, usize)>, usize, bool)> = None;
        for &e in &grid {
            let g = epsilon_graph(&d, e).unwrap();
            let edges: BTreeSet<_> = g.edges().into_iter().collect();
            let connected = connected_components(&g).len() == 1;
            let kappa = vertex_connectivity(&g);
            if let Some((pe, pk, pc)) = &prev {
                if !pe.is_subset(&edges) {
                    failures.push(format!("seed {seed}: edges not nested at ε={e}"));
                }
                if *pc && connected && kappa < *pk {
                    failures.push(format!("seed {seed}: connectivity dropped at ε={e}"));
                }
            }
            prev = Some((edges, kappa, connected));
        }
        let curve = clustering_variance_curve(&m, &grid, Execution::Sequential).unwrap();
        let first = epsilon_graph(&d, grid[0]).unwrap();
        let last = epsilon_graph(&d, *grid.last().unwrap()).unwrap();
        if first.edge_count() != 0 || !last.is_complete() || curve[0].1 != 0.0 || curve.last().unwrap().1 != 0.0 {
            failures.push(format!("seed {seed}: curve endpoints not edgeless/complete with zero variance"));
        }
    }
    check(
        failures.is_empty() && checked >= 10,
        if failures.is_empty() {
            format!("{checked} point sets, nested edges, κ non-decreasing, endpoints 0/0")
        } else {
            failures.join("; ")
        },
    )
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn gaussian_recovery() -> Outcome {
    let start = Instant::now();
    let truth = GaussianParams { amplitude: 0.4, center: 18.0, sigma: 18.5, shift: 0.03 };
    let xs: Vec<f64> = (1..=80).map(f64::from).collect();
    let clean: Vec<(f64, f64)> = xs.iter().map(|&x| (x, truth.eval(x))).collect();
    let fit = fit_gaussian(&clean).unwrap().params;
    let noiseless = [
        rel(fit.amplitude, truth.amplitude),
        rel(fit.center, truth.center),
        rel(fit.sigma.abs(), truth.sigma),
        rel(fit.shift, truth.shift),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut worst_a: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    let trials = 20;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<(f64, f64)> = xs.iter().map(|&x| (x, truth.eval(x) + noise.sample(&mut rng))).collect();
        let p = fit_gaussian(&noisy).unwrap().params;
        worst_a = worst_a.max(rel(p.amplitude, truth.amplitude));
        worst_h = worst_h.max(rel(p.center, truth.center));
    }
    let elapsed = start.elapsed();
    check(
        noiseless <= 1e-6 && worst_a <= 0.05 && worst_h <= 0.05 && elapsed < Duration::from_secs(5),
        format!(
            "noiseless max rel err {noiseless:.1e}; sd 0.01 over {trials} seeds: A {:.2}%, H {:.2}%; {}",
            100.0 * worst_a,
            100.0 * worst_h,
            secs(elapsed)
        ),
    )
}

fn random_baseline_trend() -> (Outcome, String) {
    let start = Instant::now();
    let sizes = [25, 50, 100, 200];
    let grid = grid_range(1.0, 260.0, 1.0).unwrap();
    let mut signed = 0;
    let mut magnitude = 0;
    let mut pairs = Vec::new();
    for seed in 0..5 {
        let rows = random_baseline(&sizes, 260, &grid, seed, Execution::default()).unwrap();
        let (v25, v200) = (rows[0].fit.params.shift, rows[3].fit.params.shift);
        signed += usize::from(v200 < v25);
        magnitude += usize::from(v200.abs() < v25.abs());
        pairs.push(format!("{v25:.1e}->{v200:.1e}"));
    }
    let elapsed = start.elapsed();
    let outcome = check(
        signed >= 4 && elapsed < Duration::from_secs(120),
        format!("V(200) < V(25) in {signed}/5 seeds [{}], {}", pairs.join(", "), secs(elapsed)),
    );
    (outcome, format!("|V(200)| < |V(25)| in {magnitude}/5 seeds"))
}

fn render_sweep(points: &FeatureMatrix, exec: Execution) -> String {
    let opts = SweepOptions { execution: exec, ..SweepOptions::default() };
    let eps = grid_range(2.0, 20.0, 2.0).unwrap();
    let grid = sweep_grid(points, &eps, &[1.0, 10.0, 100.0], 2, opts).unwrap();
    let curve = clustering_variance_curve(points, &eps, exec).unwrap();
    let d = pairwise_sq_distances_with(points, exec).unwrap();
    let g = build_graph(&d, GraphRule::Nearest(2)).unwrap();
    let h = heat_weights(&g, &d, 5.0).unwrap();
    let emb = SpectralEmbedding::compute_with(&h, 2, exec).unwrap();
    let reduced = eigenmap::spectral::embed(&transpose_orientation(points), &emb.transform).unwrap();
    let base = random_baseline(&[8, 12], 24, &grid_range(1.0, 24.0, 1.0).unwrap(), 9, exec).unwrap();
    format!(
        "{}{}{}{}{}{:?}",
        points.to_csv(),
        export::grid_csv(&grid),
        export::series_csv(&curve),
        export::to_graphml(&g, &d, Some(&h)),
        export::embedding_csv(points.col_labels(), &reduced),
        base
    )
}

fn determinism() -> Outcome {
    let run = |exec| {
        let points = generate_synthetic(24, 20, 3, 0.1, 42).unwrap();
        render_sweep(&points, exec)
    };
    let a = run(Execution::Sequential);
    let b = run(Execution::Sequential);
    let c = run(Execution::Parallel);
    check(
        a == b && a == c,
        format!("{} bytes of output identical across reruns and execution modes", a.len()),
    )
}

fn load(path: &str, domain: ValueDomain, min_coverage: f64) -> FeatureMatrix {
    let text = std::fs::read_to_string(path).unwrap();
    let m = parse_matrix(&text, domain.widened()).unwrap().narrowed();
    let m = filter_rows_by_coverage(&m, min_coverage).unwrap();
    transpose_orientation(&impute_missing(&m, domain.default_fill()).unwrap())
}

fn is_tree(g: &ProximityGraph, comp: &[usize]) -> bool {
    let edges = g.edges().into_iter().filter(|(i, _)| comp.contains(i)).count();
    edges + 1 == comp.len()
}

/// Runs only when the real datasets are supplied through
/// `EIGENMAP_LONGOBARDI_CSV` (ternary, fully recorded rows kept) and
/// `EIGENMAP_SSWL_CSV` (binary, rows with at least 55% coverage, fill 0.5).
fn dataset_integration() -> Outcome {
    let longobardi = std::env::var("EIGENMAP_LONGOBARDI_CSV").ok();
    let sswl = std::env::var("EIGENMAP_SSWL_CSV").ok();
    if longobardi.is_none() && sswl.is_none() {
        return Outcome::Skip("set EIGENMAP_LONGOBARDI_CSV and/or EIGENMAP_SSWL_CSV to run".into());
    }
    let mut notes = Vec::new();
    let mut ok = true;
    if let Some(path) = longobardi {
        let points = load(&path, ValueDomain::Ternary, 1.0);
        let d = pairwise_sq_distances(&points).unwrap();
        let g = epsilon_graph(&d, 8.0).unwrap();
        let mut sizes: Vec<usize> =
            connected_components(&g).sizes().into_iter().filter(|&s| s > 1).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let pass = sizes == [9, 7, 5, 2, 2];
        ok &= pass;
        notes.push(format!("longobardi ε=8 nontrivial components {sizes:?}"));
    }
    if let Some(path) = sswl {
        let points = load(&path, ValueDomain::Binary, 0.55);
        let d = pairwise_sq_distances(&points).unwrap();
        let labels = points.row_labels();
        let g = epsilon_graph(&d, 22.0).unwrap();
        let want: BTreeSet<String> = (6..=10).map(|i| format!("Neg{i:02}")).collect();
        let clique = connected_components(&g).components.iter().any(|c| {
            let names: BTreeSet<String> = c
                .iter()
                .map(|&v| labels[v].split(|ch: char| !ch.is_ascii_alphanumeric()).next().unwrap().to_owned())
                .collect();
            c.len() == 5 && names == want && c.iter().all(|&v| g.degree(v) == 4)
        });
        ok &= clique;
        notes.push(format!("sswl ε=22 Neg06-Neg10 complete component: {clique}"));
        let g1 = knn_graph(&d, 1).unwrap();
        let comps = connected_components(&g1);
        let pass = comps.len() == 2 && comps.components.iter().any(|c| is_tree(&g1, c));
        ok &= pass;
        notes.push(format!("sswl n=1 components {}, one a tree: {pass}", comps.len()));
    }
    check(ok, notes.join("; "))
}

fn main() {
    // `cargo test -- --list` and friends expect a quiet exit
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut red = Vec::new();
    let mut report = |name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                if KNOWN_RED.contains(&name) {
                    ("FAIL", format!("{d} (known unattainable)"))
                } else {
                    red.push(name.to_owned());
                    ("FAIL", d)
                }
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag}  {name}  {detail}");
    };
    report("laplacian_invariants", laplacian_invariants());
    report("spectral_residuals", spectral_residuals());
    report("complete_graph_spectra", complete_graph_spectra());
    report("clustering_oracle", clustering_oracle());
    report("connectivity_oracle", connectivity_oracle());
    report("monotonicity", monotonicity());
    report("gaussian_fit_recovery", gaussian_recovery());
    let (baseline, info) = random_baseline_trend();
    report("random_baseline_trend", baseline);
    println!("INFO  random_baseline_magnitude  {info}");
    report("determinism", determinism());
    report("dataset_integration", dataset_integration());
    if !red.is_empty() {
        eprintln!("failed criteria: {}", red.join(", "));
        std::process::exit(1);
    }
}

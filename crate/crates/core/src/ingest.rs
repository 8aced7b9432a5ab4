//! Feature-matrix ingestion: CSV parsing, coverage filtering, imputation,
//! orientation changes and a seeded synthetic generator.
//!
//! File format: a header `id,<col_1>,...,<col_c>` followed by rows
//! `<row_label>,<cell>,...,<cell>`. Cells are `0`, `1` (binary), `-1`, `0`,
//! `1` (ternary) or `?` for a missing value. Labels are restricted to
//! `[A-Za-z0-9_.-]`, so no quoting is needed.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MISSING_MARKER: &str = "?";

/// Set of admissible values for known cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueDomain {
    /// {0, 1}
    Binary,
    /// {-1, 0, +1}; 0 is the "undefined" state and is analyzed as a value.
    Ternary,
    /// [0, 1]; binary data after imputation.
    UnitInterval,
    /// [-1, 1]; ternary data imputed with a non-integer fill.
    SignedUnitInterval,
}

impl ValueDomain {
    pub fn contains(self, v: f64) -> bool {
        match self {
            ValueDomain::Binary => v == 0.0 || v == 1.0,
            ValueDomain::Ternary => v == -1.0 || v == 0.0 || v == 1.0,
            ValueDomain::UnitInterval => (0.0..=1.0).contains(&v),
            ValueDomain::SignedUnitInterval => (-1.0..=1.0).contains(&v),
        }
    }

    /// The continuous hull a discrete domain widens to after imputation.
    pub fn widened(self) -> ValueDomain {
        match self {
            ValueDomain::Binary | ValueDomain::UnitInterval => ValueDomain::UnitInterval,
            ValueDomain::Ternary | ValueDomain::SignedUnitInterval => {
                ValueDomain::SignedUnitInterval
            }
        }
    }

    /// Default imputation value: 0.5 for binary data, 0 for ternary data.
    pub fn default_fill(self) -> f64 {
        match self {
            ValueDomain::Binary | ValueDomain::UnitInterval => 0.5,
            ValueDomain::Ternary | ValueDomain::SignedUnitInterval => 0.0,
        }
    }
}

impl fmt::Display for ValueDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueDomain::Binary => "binary",
            ValueDomain::Ternary => "ternary",
            ValueDomain::UnitInterval => "unit-interval",
            ValueDomain::SignedUnitInterval => "signed-unit-interval",
        };
        f.write_str(s)
    }
}

/// Which entity the rows of a matrix represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    LanguagesAsRows,
    ParametersAsRows,
}

impl Orientation {
    pub fn flipped(self) -> Orientation {
        match self {
            Orientation::LanguagesAsRows => Orientation::ParametersAsRows,
            Orientation::ParametersAsRows => Orientation::LanguagesAsRows,
        }
    }
}

/// Dense labelled matrix of feature values; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    /// Row-major.
    values: Vec<Option<f64>>,
    domain: ValueDomain,
    orientation: Orientation,
}

impl FeatureMatrix {
    /// Builds a matrix after checking every invariant: unique labels,
    /// matching dimensions and known cells inside `domain`.
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: Vec<Option<f64>>,
        domain: ValueDomain,
        orientation: Orientation,
    ) -> Result<Self> {
        check_unique(&row_labels, "row")?;
        check_unique(&col_labels, "column")?;
        let expected = row_labels.len() * col_labels.len();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: values.len() });
        }
        if let Some(v) = values.iter().flatten().find(|v| !domain.contains(**v)) {
            return Err(Error::InvalidParameter(format!(
                "value {v} outside the {domain} domain"
            )));
        }
        Ok(FeatureMatrix { row_labels, col_labels, values, domain, orientation })
    }

    /// Convenience constructor for fully known matrices given as nested rows.
    pub fn from_rows(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        rows: &[Vec<f64>],
        domain: ValueDomain,
        orientation: Orientation,
    ) -> Result<Self> {
        let values = rows.iter().flat_map(|r| r.iter().map(|&v| Some(v))).collect();
        Self::new(row_labels, col_labels, values, domain, orientation)
    }

    pub fn nrows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn domain(&self) -> ValueDomain {
        self.domain
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.ncols() + col]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let c = self.ncols();
        &self.values[row * c..(row + 1) * c]
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(Option::is_none)
    }

    /// Fraction of known cells in each row.
    pub fn row_coverage(&self) -> Vec<f64> {
        let c = self.ncols();
        (0..self.nrows())
            .map(|r| {
                if c == 0 {
                    1.0
                } else {
                    self.row(r).iter().filter(|v| v.is_some()).count() as f64 / c as f64
                }
            })
            .collect()
    }

    /// Fully known rows as plain vectors; fails if any cell is missing.
    pub fn dense_rows(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.nrows())
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|v| v.ok_or(Error::MissingCells))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect()
    }

    /// Re-labels the orientation without moving any data.
    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// Narrows a widened domain back to binary/ternary when every known
    /// cell allows it.
    pub fn narrowed(mut self) -> Self {
        for d in [ValueDomain::Binary, ValueDomain::Ternary] {
            if self.domain.widened() == d.widened()
                && self.values.iter().flatten().all(|v| d.contains(*v))
            {
                self.domain = d;
                break;
            }
        }
        self
    }

    /// Serializes back to the CSV format accepted by [`parse_matrix`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for c in &self.col_labels {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in 0..self.nrows() {
            out.push_str(&self.row_labels[r]);
            for v in self.row(r) {
                out.push(',');
                match v {
                    Some(x) => write!(out, "{x}").unwrap(),
                    None => out.push_str(MISSING_MARKER),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidParameter(format!("duplicate {what} label '{l}'")));
        }
    }
    Ok(())
}

fn valid_label(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

/// Parses a feature CSV. Known cells must lie in `domain`; the result is
/// tagged languages-as-rows.
pub fn parse_matrix(source: &str, domain: ValueDomain) -> Result<FeatureMatrix> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let mut fields = header.split(',').map(str::trim);
    if fields.next() != Some("id") {
        return Err(Error::Parse {
            line: header_line,
            message: "header must start with 'id'".into(),
        });
    }
    let col_labels: Vec<String> = fields.map(str::to_owned).collect();
    if col_labels.is_empty() {
        return Err(Error::Parse { line: header_line, message: "header has no columns".into() });
    }
    let mut seen = HashSet::new();
    for c in &col_labels {
        if !valid_label(c) {
            return Err(Error::Parse {
                line: header_line,
                message: format!("invalid column label '{c}'"),
            });
        }
        if !seen.insert(c.as_str()) {
            return Err(Error::Parse {
                line: header_line,
                message: format!("duplicate column label '{c}'"),
            });
        }
    }

    let mut row_labels = Vec::new();
    let mut values = Vec::new();
    let mut seen_rows = HashSet::new();
    for (line_no, line) in lines {
        let mut fields = line.split(',').map(str::trim);
        let label = fields.next().unwrap_or_default().to_owned();
        if !valid_label(&label) {
            return Err(Error::Parse { line: line_no, message: format!("invalid row label '{label}'") });
        }
        if !seen_rows.insert(label.clone()) {
            return Err(Error::Parse { line: line_no, message: format!("duplicate row label '{label}'") });
        }
        let start = values.len();
        for cell in fields {
            if cell == MISSING_MARKER {
                values.push(None);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("unparseable cell '{cell}'"),
            })?;
            if !domain.contains(v) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("cell '{cell}' outside the {domain} domain"),
                });
            }
            values.push(Some(v));
        }
        let width = values.len() - start;
        if width != col_labels.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("ragged row: expected {} cells, found {width}", col_labels.len()),
            });
        }
        row_labels.push(label);
    }
    if row_labels.is_empty() {
        return Err(Error::NoDataRows);
    }
    FeatureMatrix::new(row_labels, col_labels, values, domain, Orientation::LanguagesAsRows)
}

/// Keeps the rows whose fraction of known cells is at least `min_fraction`.
pub fn filter_rows_by_coverage(m: &FeatureMatrix, min_fraction: f64) -> Result<FeatureMatrix> {
    if !(0.0..=1.0).contains(&min_fraction) {
        return Err(Error::InvalidParameter(format!(
            "min_fraction {min_fraction} outside [0, 1]"
        )));
    }
    if m.orientation != Orientation::LanguagesAsRows {
        return Err(Error::InvalidParameter(
            "coverage filtering expects languages as rows".into(),
        ));
    }
    let keep: Vec<usize> = m
        .row_coverage()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= min_fraction)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyAfterFilter);
    }
    let row_labels = keep.iter().map(|&r| m.row_labels[r].clone()).collect();
    let values = keep.iter().flat_map(|&r| m.row(r).iter().copied()).collect();
    Ok(FeatureMatrix {
        row_labels,
        col_labels: m.col_labels.clone(),
        values,
        domain: m.domain,
        orientation: m.orientation,
    })
}

/// Replaces every missing cell with `fill`. The domain widens to its
/// continuous hull unless `fill` is itself a member of the discrete domain
/// or nothing was missing.
pub fn impute_missing(m: &FeatureMatrix, fill: f64) -> Result<FeatureMatrix> {
    let hull = m.domain.widened();
    if !hull.contains(fill) {
        return Err(Error::FillOutOfDomain { fill, domain: hull.to_string() });
    }
    if !m.has_missing() {
        return Ok(m.clone());
    }
    let domain = if m.domain.contains(fill) { m.domain } else { hull };
    Ok(FeatureMatrix {
        values: m.values.iter().map(|v| Some(v.unwrap_or(fill))).collect(),
        domain,
        ..m.clone()
    })
}

/// Swaps rows and columns along with their labels and flips the orientation.
pub fn transpose_orientation(m: &FeatureMatrix) -> FeatureMatrix {
    let (r, c) = (m.nrows(), m.ncols());
    let mut values = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            values.push(m.values[i * c + j]);
        }
    }
    FeatureMatrix {
        row_labels: m.col_labels.clone(),
        col_labels: m.row_labels.clone(),
        values,
        domain: m.domain,
        orientation: m.orientation.flipped(),
    }
}

/// Seeded binary data with planted clusters.
///
/// `n_clusters` random binary centroids are drawn first; point `i` belongs
/// to cluster `i % n_clusters` and copies its centroid with each coordinate
/// flipped independently with probability `flip_prob`. Row labels are
/// `p<i>_c<cluster>`.
pub fn generate_synthetic(
    n_points: usize,
    n_coords: usize,
    n_clusters: usize,
    flip_prob: f64,
    seed: u64,
) -> Result<FeatureMatrix> {
    if n_clusters == 0 || n_clusters > n_points {
        return Err(Error::InvalidParameter(format!(
            "n_clusters must lie in 1..={n_points}, got {n_clusters}"
        )));
    }
    if !(0.0..0.5).contains(&flip_prob) {
        return Err(Error::InvalidParameter(format!("flip_prob {flip_prob} outside [0, 0.5)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centroids: Vec<Vec<bool>> = (0..n_clusters)
        .map(|_| (0..n_coords).map(|_| rng.random::<bool>()).collect())
        .collect();
    let mut values = Vec::with_capacity(n_points * n_coords);
    let mut row_labels = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let cluster = i % n_clusters;
        row_labels.push(format!("p{i}_c{cluster}"));
        for &bit in &centroids[cluster] {
            let flip = flip_prob > 0.0 && rng.random_bool(flip_prob);
            values.push(Some(if bit ^ flip { 1.0 } else { 0.0 }));
        }
    }
    let col_labels = (0..n_coords).map(|j| format!("f{j}")).collect();
    FeatureMatrix::new(
        row_labels,
        col_labels,
        values,
        ValueDomain::Binary,
        Orientation::ParametersAsRows,
    )
}

/// Uniform random binary matrix, rows used as graph vertices.
pub fn random_binary(n_rows: usize, n_cols: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n_rows * n_cols)
        .map(|_| Some(if rng.random::<bool>() { 1.0 } else { 0.0 }))
        .collect();
    FeatureMatrix {
        row_labels: (0..n_rows).map(|i| format!("v{i}")).collect(),
        col_labels: (0..n_cols).map(|j| format!("c{j}")).collect(),
        values,
        domain: ValueDomain::Binary,
        orientation: Orientation::ParametersAsRows,
    }
}

/// Cluster index encoded in a synthetic row label (`..._c<k>`).
pub fn synthetic_cluster(label: &str) -> Option<usize> {
    label.rsplit_once("_c").and_then(|(_, c)| c.parse().ok())
}

//! Plain-text writers: GraphML, DOT and the CSV tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::graphgen::{DistanceMatrix, HeatWeightedGraph, ProximityGraph};
use crate::sweep::{CurveRow, SweepGrid};

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// GraphML with vertex attribute `label` and edge attributes `sq_dist` and,
/// for weighted graphs, `weight`.
pub fn to_graphml(g: &ProximityGraph, d: &DistanceMatrix, weighted: Option<&HeatWeightedGraph>) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    if weighted.is_some() {
        out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    }
    out.push_str("  <key id=\"sq_dist\" for=\"edge\" attr.name=\"sq_dist\" attr.type=\"double\"/>\n");
    out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for (i, label) in g.vertex_labels().iter().enumerate() {
        writeln!(out, "    <node id=\"n{i}\"><data key=\"label\">{}</data></node>", xml_escape(label)).unwrap();
    }
    for (i, j) in g.edges() {
        write!(out, "    <edge source=\"n{i}\" target=\"n{j}\">").unwrap();
        if let Some(h) = weighted {
            write!(out, "<data key=\"weight\">{}</data>", h.weights[(i, j)]).unwrap();
        }
        writeln!(out, "<data key=\"sq_dist\">{}</data></edge>", d.get(i, j)).unwrap();
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// Undirected DOT graph with the same attributes as [`to_graphml`].
pub fn to_dot(g: &ProximityGraph, d: &DistanceMatrix, weighted: Option<&HeatWeightedGraph>) -> String {
    let mut out = String::from("graph G {\n");
    for (i, label) in g.vertex_labels().iter().enumerate() {
        writeln!(out, "  n{i} [label=\"{}\"];", label.replace('"', "\\\"")).unwrap();
    }
    for (i, j) in g.edges() {
        write!(out, "  n{i} -- n{j} [").unwrap();
        if let Some(h) = weighted {
            write!(out, "weight={}, ", h.weights[(i, j)]).unwrap();
        }
        writeln!(out, "sq_dist={}];", d.get(i, j)).unwrap();
    }
    out.push_str("}\n");
    out
}

/// `row_label,c1,..,cm`.
pub fn embedding_csv(labels: &[String], reduced: &DMatrix<f64>) -> String {
    let mut out = String::from("row_label");
    for c in 1..=reduced.ncols() {
        write!(out, ",c{c}").unwrap();
    }
    out.push('\n');
    for (r, label) in labels.iter().enumerate() {
        out.push_str(label);
        for c in 0..reduced.ncols() {
            write!(out, ",{}", reduced[(r, c)]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Long format `epsilon,t,mean_variance,max_variance,outliers`.
pub fn grid_csv(grid: &SweepGrid) -> String {
    let mut out = String::from("epsilon,t,mean_variance,max_variance,outliers\n");
    for c in &grid.cells {
        writeln!(out, "{},{},{},{},{}", c.epsilon, c.t, c.mean_variance, c.max_variance, c.outliers).unwrap();
    }
    out
}

/// `x,y`.
pub fn series_csv(series: &[(f64, f64)]) -> String {
    let mut out = String::from("x,y\n");
    for (x, y) in series {
        writeln!(out, "{x},{y}").unwrap();
    }
    out
}

/// `value,vertex_connectivity,average_clustering,components,edges`.
pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("value,vertex_connectivity,average_clustering,components,edges\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.value, r.vertex_connectivity, r.average_clustering, r.component_count, r.edge_count
        )
        .unwrap();
    }
    out
}

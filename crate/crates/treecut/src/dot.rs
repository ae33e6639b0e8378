//! DOT rendering of the display graph and its line graph. Output is sorted
//! and byte-stable for a fixed input: leaves draw as boxes, internal
//! vertices as circles, edges colored by source tree.

use std::fmt::Write;

use crate::display_graph::DisplayGraph;
use crate::elig::Elig;

const PALETTE: [&str; 8] = [
    "red",
    "blue",
    "forestgreen",
    "darkorange",
    "purple",
    "saddlebrown",
    "deeppink",
    "teal",
];

fn tree_color(tree: usize) -> &'static str {
    PALETTE[tree % PALETTE.len()]
}

fn edge_color(trees: &[usize]) -> String {
    trees
        .iter()
        .map(|&t| tree_color(t))
        .collect::<Vec<_>>()
        .join(":")
}

/// Render the display graph.
pub fn display_graph_dot(g: &DisplayGraph) -> String {
    let mut out = String::from("graph display {\n");
    for v in 0..g.vertex_count() {
        let shape = if g.is_leaf(v) { "box" } else { "circle" };
        writeln!(out, "  \"{}\" [shape={}];", g.vertex_name(v), shape).unwrap();
    }
    for e in g.edges() {
        writeln!(
            out,
            "  \"{}\" -- \"{}\" [color=\"{}\"];",
            g.vertex_name(e.u),
            g.vertex_name(e.v),
            edge_color(&e.trees)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// Render the edge label intersection graph. Vertices carry the compact
/// `uv` edge names; an edge between vertices of the same input tree takes
/// that tree's color, mixed ones stay black.
pub fn elig_dot(g: &DisplayGraph, elig: &Elig) -> String {
    let mut out = String::from("graph edge_label_intersection {\n");
    for v in 0..elig.vertex_count() {
        writeln!(
            out,
            "  \"{}\" [shape=circle, color=\"{}\"];",
            g.edge_name_compact(v),
            edge_color(&g.edge(v).trees)
        )
        .unwrap();
    }
    for u in 0..elig.vertex_count() {
        for &v in elig.neighbors(u) {
            if u < v {
                let shared: Vec<usize> = g
                    .edge(u)
                    .trees
                    .iter()
                    .copied()
                    .filter(|t| g.edge(v).trees.contains(t))
                    .collect();
                let color = if shared.is_empty() {
                    "black".to_owned()
                } else {
                    edge_color(&shared)
                };
                writeln!(
                    out,
                    "  \"{}\" -- \"{}\" [color=\"{}\"];",
                    g.edge_name_compact(u),
                    g.edge_name_compact(v),
                    color
                )
                .unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

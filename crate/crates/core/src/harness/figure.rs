use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{GeometricGraph, NodeId, NodeRecord};
use crate::traversal::{Hand, TraceEvent};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FigureError {
    #[error("path `{label}` refers to node {node}, which is not in the graph")]
    UnknownNode { label: String, node: usize },
    #[error("trace step {step} refers to node {node}, which is not in the graph")]
    UnknownTraceNode { step: u64, node: usize },
}

/// A labelled node sequence to highlight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigurePath {
    pub label: String,
    pub nodes: Vec<usize>,
}

/// One token hop from an event trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEdge {
    pub from: usize,
    pub to: usize,
    pub hand: Option<Hand>,
    pub annihilated: bool,
}

/// Plot-ready data: node coordinates, edges and highlighted routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteFigure {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<[usize; 2]>,
    pub paths: Vec<FigurePath>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEdge>,
}

pub fn emit_route_figure(
    g: &GeometricGraph,
    paths: &[FigurePath],
    trace: &[TraceEvent],
) -> Result<RouteFigure, FigureError> {
    for p in paths {
        if let Some(&bad) = p.nodes.iter().find(|&&n| !g.contains(NodeId(n))) {
            return Err(FigureError::UnknownNode {
                label: p.label.clone(),
                node: bad,
            });
        }
    }
    for e in trace {
        if let Some(&bad) = [e.from, e.to].iter().find(|&&n| !g.contains(NodeId(n))) {
            return Err(FigureError::UnknownTraceNode {
                step: e.step,
                node: bad,
            });
        }
    }
    let nodes = g
        .nodes()
        .map(|n| {
            let p = g.position(n);
            NodeRecord {
                id: n.0,
                x: p.x(),
                y: p.y(),
            }
        })
        .collect();
    Ok(RouteFigure {
        nodes,
        edges: g.edges().iter().map(|(a, b)| [a.0, b.0]).collect(),
        paths: paths.to_vec(),
        trace: trace
            .iter()
            .map(|e| TraceEdge {
                from: e.from,
                to: e.to,
                hand: e.hand,
                annihilated: e.annihilated,
            })
            .collect(),
    })
}

const PALETTE: [&str; 6] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// SVG drawing of the figure, y axis pointing up.
pub fn render_svg(fig: &RouteFigure) -> String {
    const SIZE: f64 = 600.0;
    const MARGIN: f64 = 30.0;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for n in &fig.nodes {
        x0 = x0.min(n.x);
        y0 = y0.min(n.y);
        x1 = x1.max(n.x);
        y1 = y1.max(n.y);
    }
    if fig.nodes.is_empty() {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let at = |id: usize| {
        let n = &fig.nodes[id];
        (
            MARGIN + (n.x - x0) * scale,
            SIZE - MARGIN - (n.y - y0) * scale,
        )
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r##"<g stroke="#bbbbbb" stroke-width="1">"##);
    for [a, b] in &fig.edges {
        let ((ax, ay), (bx, by)) = (at(*a), at(*b));
        let _ = writeln!(
            s,
            r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}"/>"#
        );
    }
    let _ = writeln!(s, "</g>");
    if !fig.trace.is_empty() {
        let _ = writeln!(s, r#"<g stroke-width="2" stroke-opacity="0.5">"#);
        for e in &fig.trace {
            let color = match e.hand {
                Some(Hand::L) => "#1f77b4",
                Some(Hand::R) => "#d62728",
                None => "#555555",
            };
            let ((ax, ay), (bx, by)) = (at(e.from), at(e.to));
            let _ = writeln!(
                s,
                r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="{color}"/>"#
            );
        }
        let _ = writeln!(s, "</g>");
    }
    for (i, p) in fig.paths.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = p
            .nodes
            .iter()
            .map(|&n| {
                let (x, y) = at(n);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="3" stroke-opacity="0.8"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}" font-family="sans-serif" font-size="14">{}</text>"#,
            MARGIN,
            MARGIN + 16.0 * i as f64,
            escape(&p.label)
        );
    }
    let _ = writeln!(s, r#"<g fill="black">"#);
    for n in &fig.nodes {
        let (x, y) = at(n.id);
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"><title>{}</title></circle>"#,
            n.id
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

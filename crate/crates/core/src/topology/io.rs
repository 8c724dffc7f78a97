use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GeometricGraph, GraphMeta, TopologyError};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

/// JSON interchange format between `gen`, `route` and `experiment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub area_side: f64,
    pub u: f64,
    pub seed: u64,
    pub nodes: Vec<NodeRecord>,
    /// Each edge once, smaller id first.
    pub edges: Vec<[usize; 2]>,
    pub planar: bool,
}

impl From<&GeometricGraph> for GraphFile {
    fn from(g: &GeometricGraph) -> Self {
        let meta = g.meta();
        GraphFile {
            area_side: meta.area_side,
            u: meta.radius,
            seed: meta.seed,
            nodes: g
                .nodes()
                .map(|n| {
                    let p = g.position(n);
                    NodeRecord {
                        id: n.0,
                        x: p.x(),
                        y: p.y(),
                    }
                })
                .collect(),
            edges: g.edges().iter().map(|(a, b)| [a.0, b.0]).collect(),
            planar: g.is_planar(),
        }
    }
}

impl TryFrom<GraphFile> for GeometricGraph {
    type Error = TopologyError;

    fn try_from(file: GraphFile) -> Result<Self, Self::Error> {
        let mut nodes = file.nodes;
        nodes.sort_by_key(|r| r.id);
        if nodes.iter().enumerate().any(|(i, r)| r.id != i) {
            return Err(TopologyError::Format(
                "node ids must form the dense range 0..n".into(),
            ));
        }
        let positions = nodes
            .iter()
            .map(|r| Point::new(r.x, r.y))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| TopologyError::Format(e.to_string()))?;
        let edges: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = GeometricGraph::from_edges(positions, &edges)?;
        if file.planar && !g.is_planar() {
            return Err(TopologyError::Format(
                "file claims planarity but edges cross".into(),
            ));
        }
        Ok(g.with_meta(GraphMeta {
            area_side: file.area_side,
            radius: file.u,
            seed: file.seed,
        }))
    }
}

pub fn read_graph(path: &Path) -> Result<GeometricGraph, TopologyError> {
    let text = fs::read_to_string(path).map_err(|e| TopologyError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let file: GraphFile =
        serde_json::from_str(&text).map_err(|e| TopologyError::Format(e.to_string()))?;
    GeometricGraph::try_from(file)
}

pub fn write_graph(g: &GeometricGraph, path: &Path) -> Result<(), TopologyError> {
    let text = serde_json::to_string_pretty(&GraphFile::from(g))
        .map_err(|e| TopologyError::Format(e.to_string()))?;
    fs::write(path, text).map_err(|e| TopologyError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

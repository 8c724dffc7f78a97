//! Unit-disk graph generation, Gabriel planarization, face decomposition and
//! the hop-count oracle.

mod crossing;
mod faces;
mod graph;
mod io;

use thiserror::Error;

pub use crossing::{corner_at_edge, corner_toward, crossing_edges, pair_is_degenerate, Crossing};
pub use faces::{decompose_faces, right_hand_successor, Dart, Face, FaceDecomposition, FaceId};
pub use graph::{
    gabriel_planarize, generate_unit_disk, shortest_path_hops, GeometricGraph, GraphMeta, NodeId,
    Rejected, COINCIDENT_EPS,
};
pub use io::{read_graph, write_graph, GraphFile, NodeRecord};

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("edge references unknown node {0}")]
    UnknownNode(usize),
    #[error("self loop at node {0}")]
    SelfLoop(usize),
    #[error("nodes {0} and {1} coincide")]
    Coincident(usize, usize),
    #[error("node {0} has two neighbors in the same direction")]
    CollinearNeighbors(usize),
    #[error("graph is not planar")]
    NotPlanar,
    #[error("graph has no edges")]
    NoEdges,
    #[error("no face has non-positive signed area")]
    NoExternalFace,
    #[error("malformed graph file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

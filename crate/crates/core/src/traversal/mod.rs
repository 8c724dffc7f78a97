//! Face traversal: the bi-directional token protocol and the
//! single-direction FACE-1 / FACE-2 walkers.

mod single;
mod twoface;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dist, Sense};
use crate::kernel::{KernelError, MsgId, RunStats};
use crate::topology::{
    corner_at_edge, corner_toward, crossing_edges, Crossing, Dart, FaceDecomposition, FaceId,
    GeometricGraph, NodeId,
};

pub use single::{route_face1, route_face2, Strategy, Walker, WalkerProtocol};
pub use twoface::{
    route_2face, DirectoryMode, Packet, Parent, SpawnRecord, TwoFace, TwoFaceOptions,
};

#[derive(Debug, Error)]
pub enum TraversalError {
    #[error("source and destination are both {0}")]
    SameEndpoints(NodeId),
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("node {0} has no neighbors")]
    Isolated(NodeId),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hand {
    L,
    R,
}

impl Hand {
    pub fn opposite(self) -> Hand {
        match self {
            Hand::L => Hand::R,
            Hand::R => Hand::L,
        }
    }

    /// Rotation used to pick the next edge after the arrival edge.
    pub fn sense(self) -> Sense {
        match self {
            Hand::R => Sense::Cw,
            Hand::L => Sense::Ccw,
        }
    }

    /// Next hop of a token of this hand leaving `corner`.
    ///
    /// A corner is the dart leaving its node along the right-hand walk of
    /// its face, so right-hand tokens follow it and left-hand tokens leave
    /// over the dart that enters the corner.
    pub fn next_hop(self, g: &GeometricGraph, corner: Dart) -> NodeId {
        match self {
            Hand::R => corner.to,
            Hand::L => g.next_neighbor(corner.from, corner.to, Sense::Ccw),
        }
    }

    /// Corner reached by a token of this hand that traversed `arrival`.
    pub fn arrival_corner(self, g: &GeometricGraph, arrival: Dart) -> Dart {
        let n = arrival.to;
        match self {
            Hand::R => Dart::new(n, g.next_neighbor(n, arrival.from, Sense::Cw)),
            Hand::L => Dart::new(n, arrival.from),
        }
    }

    /// Corner a token of this hand leaves when sent from `from` to `to`.
    pub fn departure_corner(self, g: &GeometricGraph, from: NodeId, to: NodeId) -> Dart {
        match self {
            Hand::R => Dart::new(from, to),
            Hand::L => Dart::new(from, g.next_neighbor(from, to, Sense::Cw)),
        }
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hand::L => "L",
            Hand::R => "R",
        })
    }
}

/// A face-traversal token.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Token {
    pub hand: Hand,
    pub source: NodeId,
    pub dest: NodeId,
    pub face: FaceId,
    /// Distance to the destination of the crossing through which this
    /// token's face was entered.
    pub entry_dist: f64,
}

impl Token {
    /// Whether `other` is this token's opposite for annihilation purposes.
    pub fn matches_opposite(&self, other: &Token) -> bool {
        self.source == other.source
            && self.dest == other.dest
            && self.face == other.face
            && self.hand == other.hand.opposite()
    }
}

/// A face the token may move into from its current one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryTarget {
    pub crossing: usize,
    pub face: FaceId,
    /// Corner of the new face at the entry point, next to the crossing edge.
    pub corner: Dart,
    pub dist_to_dest: f64,
}

/// Crossings of the segment from an anchor node to the destination,
/// indexed by the nodes that act as entry points.
#[derive(Debug, Clone)]
pub struct SessionGeometry {
    pub anchor: NodeId,
    pub dest: NodeId,
    pub crossings: Vec<Crossing>,
    by_node: HashMap<NodeId, Vec<usize>>,
    /// Corner at the anchor whose face contains the start of the segment.
    pub start_corner: Dart,
    pub start_dist: f64,
}

impl SessionGeometry {
    /// With `both_endpoints`, either endpoint of a crossing edge acts as an
    /// entry point instead of only the designated one.
    pub fn new(
        g: &GeometricGraph,
        fd: &FaceDecomposition,
        anchor: NodeId,
        dest: NodeId,
        both_endpoints: bool,
    ) -> Result<Self, TraversalError> {
        let start_corner =
            corner_toward(g, anchor, g.position(dest)).ok_or(TraversalError::Isolated(anchor))?;
        let crossings = crossing_edges(g, fd, anchor, dest);
        let mut by_node: HashMap<NodeId, Vec<usize>> = HashMap::new();
        for (i, x) in crossings.iter().enumerate() {
            if both_endpoints {
                by_node.entry(x.edge.0).or_default().push(i);
                by_node.entry(x.edge.1).or_default().push(i);
            } else {
                by_node.entry(x.designated).or_default().push(i);
            }
        }
        Ok(SessionGeometry {
            anchor,
            dest,
            crossings,
            by_node,
            start_corner,
            start_dist: dist(g.position(anchor), g.position(dest)),
        })
    }

    /// Faces that a token on `face`, entered at distance `entry_dist` from
    /// the destination, may enter at node `n`: crossings where `n` is an
    /// entry point, `face` lies on the source side, and the crossing is
    /// strictly closer to the destination. Closest first.
    pub fn entry_targets(
        &self,
        g: &GeometricGraph,
        fd: &FaceDecomposition,
        n: NodeId,
        face: FaceId,
        entry_dist: f64,
    ) -> Vec<EntryTarget> {
        let Some(idx) = self.by_node.get(&n) else {
            return Vec::new();
        };
        let mut out: Vec<EntryTarget> = idx
            .iter()
            .filter_map(|&i| {
                let x = &self.crossings[i];
                if x.near != face || x.far == face || x.dist_to_dest >= entry_dist {
                    return None;
                }
                let corner = corner_at_edge(g, fd, x.far, n, x.other_endpoint(n))?;
                Some(EntryTarget {
                    crossing: i,
                    face: x.far,
                    corner,
                    dist_to_dest: x.dist_to_dest,
                })
            })
            .collect();
        out.sort_by(|a, b| a.dist_to_dest.total_cmp(&b.dist_to_dest));
        out
    }

    pub fn is_entry_point(
        &self,
        g: &GeometricGraph,
        fd: &FaceDecomposition,
        n: NodeId,
        face: FaceId,
        entry_dist: f64,
    ) -> Option<EntryTarget> {
        self.entry_targets(g, fd, n, face, entry_dist)
            .into_iter()
            .next()
    }

    /// Distinct faces touching the segment.
    pub fn crossed_faces(&self, fd: &FaceDecomposition) -> Vec<FaceId> {
        let mut faces: Vec<FaceId> = self
            .crossings
            .iter()
            .flat_map(|x| [x.near, x.far])
            .chain(std::iter::once(fd.face_of(self.start_corner)))
            .collect();
        faces.sort();
        faces.dedup();
        faces
    }
}

/// One accepted token at the destination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub msg: MsgId,
    pub depth: u32,
    pub hand: Option<Hand>,
    pub face: Option<FaceId>,
    /// Dart over which the token reached the destination.
    pub arrival: Dart,
}

/// Per-run accounting of the exactly-once traversal property.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TraversalAudit {
    pub l_spawns: u64,
    pub r_spawns: u64,
    pub annihilations: u64,
    /// Largest number of times a token of one hand left one face corner.
    pub max_departures_per_corner: u32,
    /// Corners of traversed faces that no token reached.
    pub unvisited_corners: u64,
}

impl TraversalAudit {
    pub fn holds(&self) -> bool {
        self.max_departures_per_corner <= 1
            && self.l_spawns == self.r_spawns
            && self.r_spawns == self.annihilations
            && self.unvisited_corners == 0
    }
}

#[derive(Debug, Clone, Default)]
pub struct RouteOutcome {
    pub stats: RunStats,
    pub delivered: bool,
    /// Nodes of the first delivering token's causal chain, source first.
    pub path: Vec<NodeId>,
    pub delivery: Option<Delivery>,
    /// Greedy-to-face transitions.
    pub face_entries: u32,
    pub audit: Option<TraversalAudit>,
    pub annihilation_sites: Vec<NodeId>,
    pub spawn_nodes: Vec<NodeId>,
}

impl RouteOutcome {
    pub fn path_hops(&self) -> Option<u32> {
        self.delivered
            .then(|| self.path.len().saturating_sub(1) as u32)
    }
}

/// One line of the JSON Lines event trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub step: u64,
    pub from: usize,
    pub to: usize,
    pub hand: Option<Hand>,
    pub face: Option<[usize; 2]>,
    pub causal_depth: u32,
    pub annihilated: bool,
}

pub type TraceSink<'a> = Option<&'a mut dyn FnMut(TraceEvent)>;

pub(crate) fn check_endpoints(
    g: &GeometricGraph,
    s: NodeId,
    d: NodeId,
) -> Result<(), TraversalError> {
    for n in [s, d] {
        if !g.contains(n) {
            return Err(TraversalError::UnknownNode(n));
        }
    }
    if s == d {
        return Err(TraversalError::SameEndpoints(s));
    }
    Ok(())
}

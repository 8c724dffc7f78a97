use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GeometricGraph, NodeId, TopologyError};
use crate::geometry::Sense;

/// A directed edge `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dart {
    pub from: NodeId,
    pub to: NodeId,
}

impl Dart {
    pub fn new(from: NodeId, to: NodeId) -> Self {
        Dart { from, to }
    }

    pub fn reversed(self) -> Self {
        Dart {
            from: self.to,
            to: self.from,
        }
    }
}

impl fmt::Display for Dart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

/// Identifies a face by the lexicographically smallest dart on its
/// right-hand boundary walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceId(pub Dart);

impl FaceId {
    pub fn as_pair(self) -> [usize; 2] {
        [self.0.from.0, self.0.to.0]
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F[{}]", self.0)
    }
}

/// Successor of `d` on the right-hand walk: at `d.to`, take the next edge
/// clockwise after the arrival edge.
pub fn right_hand_successor(g: &GeometricGraph, d: Dart) -> Dart {
    Dart::new(d.to, g.next_neighbor(d.to, d.from, Sense::Cw))
}

#[derive(Debug, Clone)]
pub struct Face {
    pub id: FaceId,
    /// Darts in right-hand walk order, starting at the canonical dart.
    pub boundary: Vec<Dart>,
    /// Shoelace area of the walk; positive for bounded faces.
    pub signed_area: f64,
}

impl Face {
    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }
}

/// Faces of a planar embedding as orbits of the right-hand successor.
#[derive(Debug, Clone)]
pub struct FaceDecomposition {
    face_of: HashMap<Dart, FaceId>,
    faces: BTreeMap<FaceId, Face>,
    external: FaceId,
}

impl FaceDecomposition {
    pub fn face_of(&self, d: Dart) -> FaceId {
        *self
            .face_of
            .get(&d)
            .unwrap_or_else(|| panic!("dart {d} is not an edge of the decomposed graph"))
    }

    pub fn try_face_of(&self, d: Dart) -> Option<FaceId> {
        self.face_of.get(&d).copied()
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[&id]
    }

    pub fn faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.values()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn external(&self) -> FaceId {
        self.external
    }

    pub fn boundary_len(&self, id: FaceId) -> usize {
        self.faces[&id].boundary.len()
    }
}

pub fn decompose_faces(g: &GeometricGraph) -> Result<FaceDecomposition, TopologyError> {
    if !g.is_planar() {
        return Err(TopologyError::NotPlanar);
    }
    let mut face_of: HashMap<Dart, FaceId> = HashMap::with_capacity(2 * g.edge_count());
    let mut faces = BTreeMap::new();

    for (a, b) in g.edges() {
        for start in [Dart::new(a, b), Dart::new(b, a)] {
            if face_of.contains_key(&start) {
                continue;
            }
            let mut walk = vec![start];
            let mut cur = right_hand_successor(g, start);
            while cur != start {
                walk.push(cur);
                cur = right_hand_successor(g, cur);
            }
            let min_pos = walk
                .iter()
                .enumerate()
                .min_by_key(|(_, d)| **d)
                .map(|(i, _)| i)
                .expect("non-empty walk");
            walk.rotate_left(min_pos);
            let id = FaceId(walk[0]);
            let signed_area = 0.5
                * walk
                    .iter()
                    .map(|d| {
                        let p = g.position(d.from);
                        let q = g.position(d.to);
                        p.x() * q.y() - q.x() * p.y()
                    })
                    .sum::<f64>();
            for d in &walk {
                face_of.insert(*d, id);
            }
            faces.insert(
                id,
                Face {
                    id,
                    boundary: walk,
                    signed_area,
                },
            );
        }
    }

    let external = faces
        .values()
        .min_by(|x, y| x.signed_area.total_cmp(&y.signed_area))
        .map(|f| f.id)
        .ok_or(TopologyError::NoEdges)?;
    if faces[&external].signed_area > 0.0 {
        return Err(TopologyError::NoExternalFace);
    }
    Ok(FaceDecomposition {
        face_of,
        faces,
        external,
    })
}

use super::{Dart, FaceDecomposition, FaceId, GeometricGraph, NodeId};
use crate::geometry::{
    dist, orientation, segments_intersect, Intersection, Orientation, Point, Segment, Sense,
};

/// Nodes closer than this to the source-destination segment make a pair degenerate.
pub const ON_SEGMENT_EPS: f64 = 1e-9;

/// An edge whose interior crosses the segment from `s` to `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    /// Endpoints with the smaller id first.
    pub edge: (NodeId, NodeId),
    pub point: Point,
    pub dist_from_source: f64,
    pub dist_to_dest: f64,
    /// Face on the source side of the crossing.
    pub near: FaceId,
    /// Face on the destination side of the crossing.
    pub far: FaceId,
    /// The endpoint closer to `d` (smaller id on a tie).
    pub designated: NodeId,
}

impl Crossing {
    pub fn other_endpoint(&self, n: NodeId) -> NodeId {
        if self.edge.0 == n {
            self.edge.1
        } else {
            self.edge.0
        }
    }
}

/// Edges properly crossing segment `(s, d)`, ordered by distance from `s`.
pub fn crossing_edges(
    g: &GeometricGraph,
    fd: &FaceDecomposition,
    s: NodeId,
    d: NodeId,
) -> Vec<Crossing> {
    let ps = g.position(s);
    let pd = g.position(d);
    let Ok(line) = Segment::new(ps, pd) else {
        return Vec::new();
    };
    let mut out: Vec<Crossing> = g
        .edges()
        .into_iter()
        .filter_map(|(a, b)| {
            let seg = Segment::new(g.position(a), g.position(b)).ok()?;
            let Intersection::Proper(point) = segments_intersect(&line, &seg) else {
                return None;
            };
            let (near, far) = match orientation(g.position(a), g.position(b), ps) {
                Orientation::CounterClockwise => {
                    (fd.face_of(Dart::new(a, b)), fd.face_of(Dart::new(b, a)))
                }
                _ => (fd.face_of(Dart::new(b, a)), fd.face_of(Dart::new(a, b))),
            };
            let da = dist(g.position(a), pd);
            let db = dist(g.position(b), pd);
            let designated = if db < da { b } else { a };
            Some(Crossing {
                edge: (a, b),
                point,
                dist_from_source: dist(ps, point),
                dist_to_dest: dist(point, pd),
                near,
                far,
                designated,
            })
        })
        .collect();
    out.sort_by(|x, y| {
        x.dist_from_source
            .total_cmp(&y.dist_from_source)
            .then(x.edge.cmp(&y.edge))
    });
    out
}

/// Whether some node other than `s` and `d` lies on the segment between them.
pub fn pair_is_degenerate(g: &GeometricGraph, s: NodeId, d: NodeId) -> bool {
    let ps = g.position(s);
    let pd = g.position(d);
    let len = dist(ps, pd);
    if len < ON_SEGMENT_EPS {
        return true;
    }
    g.nodes().filter(|&n| n != s && n != d).any(|n| {
        let p = g.position(n);
        let (dx, dy) = (pd.x() - ps.x(), pd.y() - ps.y());
        let t = ((p.x() - ps.x()) * dx + (p.y() - ps.y()) * dy) / (len * len);
        if !(0.0..=1.0).contains(&t) {
            return false;
        }
        let cross = (dx * (p.y() - ps.y()) - dy * (p.x() - ps.x())).abs() / len;
        cross < ON_SEGMENT_EPS
    })
}

/// The corner of `face` at `n` adjacent to edge `(n, m)`, identified by the
/// dart leaving `n` along the right-hand walk of that face.
///
/// Returns `None` when the edge does not border `face`.
pub fn corner_at_edge(
    g: &GeometricGraph,
    fd: &FaceDecomposition,
    face: FaceId,
    n: NodeId,
    m: NodeId,
) -> Option<Dart> {
    let out = Dart::new(n, m);
    if fd.face_of(out) == face {
        return Some(out);
    }
    if fd.face_of(out.reversed()) == face {
        return Some(Dart::new(n, g.next_neighbor(n, m, Sense::Cw)));
    }
    None
}

/// The corner at `n` whose wedge contains the direction towards `toward`:
/// its dart leads to the first neighbor clockwise from that direction.
pub fn corner_toward(g: &GeometricGraph, n: NodeId, toward: Point) -> Option<Dart> {
    let nbrs = g.neighbors(n);
    if nbrs.is_empty() {
        return None;
    }
    let here = g.position(n);
    let target = here.bearing_to(&toward);
    // adjacency is sorted by bearing ascending; pick the last one not past `target`
    let pos = nbrs.partition_point(|&m| here.bearing_to(&g.position(m)) <= target);
    let m = if pos == 0 {
        nbrs[nbrs.len() - 1]
    } else {
        nbrs[pos - 1]
    };
    Some(Dart::new(n, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;
    use crate::topology::{decompose_faces, gabriel_planarize, generate_unit_disk};

    fn square_with_diagonal() -> GeometricGraph {
        // 0 and 2 are opposite corners; diagonal 1-3 crosses segment 0-2
        GeometricGraph::from_edges(
            vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)],
            &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)],
        )
        .unwrap()
    }

    #[test]
    fn adjacent_pair_has_no_crossings() {
        let g = square_with_diagonal();
        let fd = decompose_faces(&g).unwrap();
        assert!(crossing_edges(&g, &fd, NodeId(0), NodeId(1)).is_empty());
    }

    #[test]
    fn diagonal_crossing() {
        let g = square_with_diagonal();
        let fd = decompose_faces(&g).unwrap();
        let xs = crossing_edges(&g, &fd, NodeId(0), NodeId(2));
        assert_eq!(xs.len(), 1);
        let x = &xs[0];
        assert_eq!(x.edge, (NodeId(1), NodeId(3)));
        assert!(dist(x.point, pt(0.5, 0.5)) < 1e-12);
        // lower triangle 0-1-3 holds the source, upper triangle the destination
        let lower = fd.face_of(Dart::new(NodeId(0), NodeId(1)));
        let upper = fd.face_of(Dart::new(NodeId(1), NodeId(2)));
        assert_eq!(x.near, lower);
        assert_eq!(x.far, upper);
        // both endpoints equidistant from d: the smaller id wins
        assert_eq!(x.designated, NodeId(1));
    }

    #[test]
    fn corner_helpers() {
        let g = square_with_diagonal();
        let fd = decompose_faces(&g).unwrap();
        let upper = fd.face_of(Dart::new(NodeId(1), NodeId(2)));
        let c = corner_at_edge(&g, &fd, upper, NodeId(1), NodeId(3)).unwrap();
        assert_eq!(c, Dart::new(NodeId(1), NodeId(2)));
        assert_eq!(fd.face_of(c), upper);
        let toward = corner_toward(&g, NodeId(0), pt(1.0, 1.0)).unwrap();
        assert_eq!(
            fd.face_of(toward),
            fd.face_of(Dart::new(NodeId(0), NodeId(1)))
        );
    }

    #[test]
    fn degenerate_pair_detection() {
        let g = GeometricGraph::from_edges(
            vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0), pt(1.0, 1.0)],
            &[(0, 3), (3, 2), (1, 3)],
        )
        .unwrap();
        assert!(pair_is_degenerate(&g, NodeId(0), NodeId(2)));
        assert!(!pair_is_degenerate(&g, NodeId(0), NodeId(3)));
    }

    #[test]
    fn crossings_strictly_ordered_and_proper() {
        let mut checked = 0;
        for seed in 0..100u64 {
            let Ok(g) = generate_unit_disk(50, 2.0, 0.5, seed) else {
                continue;
            };
            let p = gabriel_planarize(&g);
            let fd = decompose_faces(&p).unwrap();
            let (s, d) = (NodeId(0), NodeId(49));
            if pair_is_degenerate(&p, s, d) {
                continue;
            }
            let xs = crossing_edges(&p, &fd, s, d);
            for w in xs.windows(2) {
                assert!(w[0].dist_from_source < w[1].dist_from_source);
            }
            // brute force over all edges
            let line = Segment::new(p.position(s), p.position(d)).unwrap();
            let brute = p
                .edges()
                .iter()
                .filter(|(a, b)| {
                    let seg = Segment::new(p.position(*a), p.position(*b)).unwrap();
                    segments_intersect(&line, &seg).is_proper()
                })
                .count();
            assert_eq!(xs.len(), brute);
            checked += 1;
        }
        assert!(checked > 5);
    }
}

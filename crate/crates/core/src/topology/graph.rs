use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TopologyError;
use crate::geometry::{dist, dist_sq, segments_intersect, Point, Segment, Sense};

/// Two nodes closer than this are considered coincident.
pub const COINCIDENT_EPS: f64 = 1e-9;
/// Minimum bearing separation between two neighbors of the same node.
const BEARING_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parameters a graph was generated with. Hand-built graphs carry zeros.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphMeta {
    pub area_side: f64,
    pub radius: f64,
    pub seed: u64,
}

/// Why a generated graph was thrown away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejected {
    Disconnected,
    /// Coincident nodes or two neighbors in the same direction.
    Degenerate,
}

/// Nodes embedded in the plane; every adjacency list is sorted by bearing,
/// counter-clockwise from the +x axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricGraph {
    positions: Vec<Point>,
    adjacency: Vec<Vec<NodeId>>,
    planar: bool,
    meta: GraphMeta,
}

impl GeometricGraph {
    /// Builds a graph from explicit edges. Duplicate edges are merged.
    ///
    /// The planar flag is computed by brute force over all edge pairs.
    pub fn from_edges(
        positions: Vec<Point>,
        edges: &[(usize, usize)],
    ) -> Result<Self, TopologyError> {
        let n = positions.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(TopologyError::UnknownNode(a.max(b)));
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            if !adjacency[a].contains(&NodeId(b)) {
                adjacency[a].push(NodeId(b));
                adjacency[b].push(NodeId(a));
            }
        }
        let mut g = GeometricGraph {
            positions,
            adjacency,
            planar: false,
            meta: GraphMeta::default(),
        };
        g.check_degeneracy()?;
        g.sort_adjacency();
        g.planar = g.proper_crossings().is_empty();
        Ok(g)
    }

    /// Connects every pair of points strictly closer than `radius`.
    pub fn unit_disk(positions: Vec<Point>, radius: f64) -> Result<Self, TopologyError> {
        let mut edges = Vec::new();
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                if dist(positions[i], positions[j]) < radius {
                    edges.push((i, j));
                }
            }
        }
        let mut g = Self::from_edges(positions, &edges)?;
        g.meta.radius = radius;
        Ok(g)
    }

    pub fn with_meta(mut self, meta: GraphMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn meta(&self) -> GraphMeta {
        self.meta
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.positions.len()).map(NodeId)
    }

    /// Undirected edges, each once with the smaller id first, in id order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out: Vec<(NodeId, NodeId)> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, nbrs)| {
                nbrs.iter()
                    .filter(move |b| b.0 > a)
                    .map(move |b| (NodeId(a), *b))
            })
            .collect();
        out.sort();
        out
    }

    pub fn position(&self, n: NodeId) -> Point {
        self.positions[n.0]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.adjacency[n.0]
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adjacency[n.0].len()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.0 < self.positions.len()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.contains(a) && self.adjacency[a.0].contains(&b)
    }

    pub fn is_planar(&self) -> bool {
        self.planar
    }

    /// Neighbor of `at` first met when rotating from edge `(at, from)` in
    /// the given sense. Returns `from` itself when it is the only neighbor.
    ///
    /// Panics if `from` is not adjacent to `at`.
    pub fn next_neighbor(&self, at: NodeId, from: NodeId, sense: Sense) -> NodeId {
        let nbrs = &self.adjacency[at.0];
        let idx = nbrs
            .iter()
            .position(|&x| x == from)
            .unwrap_or_else(|| panic!("{from} is not a neighbor of {at}"));
        let k = nbrs.len();
        match sense {
            Sense::Ccw => nbrs[(idx + 1) % k],
            Sense::Cw => nbrs[(idx + k - 1) % k],
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.positions.is_empty() {
            return true;
        }
        self.hops_from(NodeId(0)).iter().all(Option::is_some)
    }

    /// Breadth-first hop counts from `s` to every node.
    pub fn hops_from(&self, s: NodeId) -> Vec<Option<u32>> {
        let mut hops = vec![None; self.positions.len()];
        let mut queue = VecDeque::new();
        hops[s.0] = Some(0);
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let h = hops[u.0].expect("queued nodes have hops");
            for &v in &self.adjacency[u.0] {
                if hops[v.0].is_none() {
                    hops[v.0] = Some(h + 1);
                    queue.push_back(v);
                }
            }
        }
        hops
    }

    /// Pairs of edges whose interiors cross.
    pub fn proper_crossings(&self) -> Vec<((NodeId, NodeId), (NodeId, NodeId))> {
        let edges = self.edges();
        let segs: Vec<Segment> = edges
            .iter()
            .map(|&(a, b)| {
                Segment::new(self.position(a), self.position(b)).expect("distinct endpoints")
            })
            .collect();
        let mut out = Vec::new();
        for i in 0..edges.len() {
            for j in (i + 1)..edges.len() {
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if a == c || a == d || b == c || b == d {
                    continue;
                }
                if segments_intersect(&segs[i], &segs[j]).is_proper() {
                    out.push((edges[i], edges[j]));
                }
            }
        }
        out
    }

    /// Mirror image across the x axis; ids and edges are preserved.
    pub fn reflected(&self) -> GeometricGraph {
        let positions = self.positions.iter().map(Point::reflect_x).collect();
        let edges: Vec<(usize, usize)> = self.edges().iter().map(|(a, b)| (a.0, b.0)).collect();
        GeometricGraph::from_edges(positions, &edges)
            .expect("reflection keeps the graph valid")
            .with_meta(self.meta)
    }

    fn sort_adjacency(&mut self) {
        for (i, nbrs) in self.adjacency.iter_mut().enumerate() {
            let c = self.positions[i];
            nbrs.sort_by(|a, b| {
                c.bearing_to(&self.positions[a.0])
                    .total_cmp(&c.bearing_to(&self.positions[b.0]))
                    .then(a.cmp(b))
            });
        }
    }

    fn check_degeneracy(&self) -> Result<(), TopologyError> {
        let eps_sq = COINCIDENT_EPS * COINCIDENT_EPS;
        for i in 0..self.positions.len() {
            for j in (i + 1)..self.positions.len() {
                if dist_sq(self.positions[i], self.positions[j]) < eps_sq {
                    return Err(TopologyError::Coincident(i, j));
                }
            }
        }
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            let c = self.positions[i];
            let mut bearings: Vec<f64> = nbrs
                .iter()
                .map(|b| c.bearing_to(&self.positions[b.0]))
                .collect();
            bearings.sort_by(f64::total_cmp);
            if bearings.windows(2).any(|w| w[1] - w[0] < BEARING_EPS) {
                return Err(TopologyError::CollinearNeighbors(i));
            }
        }
        Ok(())
    }
}

/// Uniform random points in an `area_side` square, connected when closer
/// than `radius`. Disconnected or degenerate draws are rejected so the
/// caller can retry with another seed.
pub fn generate_unit_disk(
    n: usize,
    area_side: f64,
    radius: f64,
    seed: u64,
) -> Result<GeometricGraph, Rejected> {
    assert!(n >= 2, "need at least two nodes");
    assert!(radius > 0.0 && area_side > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Point> = (0..n)
        .map(|_| {
            let x = rng.gen::<f64>() * area_side;
            let y = rng.gen::<f64>() * area_side;
            Point::new(x, y).expect("finite")
        })
        .collect();
    let g = GeometricGraph::unit_disk(positions, radius).map_err(|_| Rejected::Degenerate)?;
    if !g.is_connected() {
        return Err(Rejected::Disconnected);
    }
    Ok(g.with_meta(GraphMeta {
        area_side,
        radius,
        seed,
    }))
}

/// Keeps edge `(a, b)` iff no other node lies strictly inside the circle
/// with diameter `ab`.
pub fn gabriel_planarize(g: &GeometricGraph) -> GeometricGraph {
    let kept: Vec<(usize, usize)> = g
        .edges()
        .into_iter()
        .filter(|&(a, b)| {
            let pa = g.position(a);
            let pb = g.position(b);
            let mid = pa.midpoint(&pb);
            let r_sq = dist_sq(pa, pb) / 4.0;
            g.nodes()
                .filter(|&w| w != a && w != b)
                .all(|w| dist_sq(g.position(w), mid) >= r_sq)
        })
        .map(|(a, b)| (a.0, b.0))
        .collect();
    GeometricGraph::from_edges(g.positions.clone(), &kept)
        .expect("subgraph of a valid graph")
        .with_meta(g.meta)
}

/// Minimum hop count between `s` and `d`, or `None` when unreachable.
pub fn shortest_path_hops(g: &GeometricGraph, s: NodeId, d: NodeId) -> Option<u32> {
    g.hops_from(s)[d.0]
}

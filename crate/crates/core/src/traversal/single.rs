use std::collections::HashMap;

use super::{
    check_endpoints, Delivery, EntryTarget, Hand, RouteOutcome, SessionGeometry, TraceEvent,
    TraceSink, TraversalError,
};
use crate::geometry::dist;
use crate::kernel::{
    default_step_budget, Kernel, Protocol, Reception, SchedulePolicy, StepContext,
};
use crate::routing::{greedy_step, GreedyStep};
use crate::topology::{Dart, FaceDecomposition, FaceId, GeometricGraph, NodeId};

/// Single-token routing strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Face1(Hand),
    Face2(Hand),
    /// Greedy with FACE-2 recovery from local minima.
    Gfg(Hand),
}

/// State carried by the single token.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Walker {
    Greedy,
    Face2 {
        hand: Hand,
        face: FaceId,
        entry_dist: f64,
        anchor: NodeId,
        /// Return to greedy once strictly closer than this (GFG only).
        recovery: Option<f64>,
    },
    Face1 {
        hand: Hand,
        face: FaceId,
        entry_dist: f64,
        /// Corner where the current lap started.
        start: Dart,
        best: Option<(NodeId, EntryTarget)>,
        returning: bool,
    },
}

pub struct WalkerProtocol<'a> {
    planar: &'a GeometricGraph,
    fd: &'a FaceDecomposition,
    full: &'a GeometricGraph,
    dest: NodeId,
    strategy: Strategy,
    geoms: HashMap<NodeId, SessionGeometry>,
    face_entries: u32,
    delivery: Option<Delivery>,
    origin: Option<NodeId>,
}

impl<'a> WalkerProtocol<'a> {
    pub fn new(
        planar: &'a GeometricGraph,
        fd: &'a FaceDecomposition,
        full: &'a GeometricGraph,
        dest: NodeId,
        strategy: Strategy,
    ) -> Self {
        WalkerProtocol {
            planar,
            fd,
            full,
            dest,
            strategy,
            geoms: HashMap::new(),
            face_entries: 0,
            delivery: None,
            origin: None,
        }
    }

    fn geometry(&mut self, anchor: NodeId) -> Option<&SessionGeometry> {
        if !self.geoms.contains_key(&anchor) {
            let geom = SessionGeometry::new(self.planar, self.fd, anchor, self.dest, false).ok()?;
            self.geoms.insert(anchor, geom);
        }
        self.geoms.get(&anchor)
    }

    /// Corner a walk from `anchor` starts at. When the destination is a
    /// neighbor the segment runs along an edge, so take the side whose
    /// first hop is the destination.
    fn start_corner(&mut self, anchor: NodeId, hand: Hand) -> Option<(Dart, f64)> {
        let (planar, dest) = (self.planar, self.dest);
        let geom = self.geometry(anchor)?;
        let corner = if planar.has_edge(anchor, dest) {
            hand.departure_corner(planar, anchor, dest)
        } else {
            geom.start_corner
        };
        Some((corner, geom.start_dist))
    }

    /// First hop from the source.
    fn start(&mut self, s: NodeId) -> Option<(NodeId, Walker)> {
        match self.strategy {
            Strategy::Gfg(_) => self.greedy_from(s),
            Strategy::Face2(hand) => self.enter_face2(s, hand, None),
            Strategy::Face1(hand) => {
                self.origin = Some(s);
                let (corner, entry) = self.start_corner(s, hand)?;
                let face = self.fd.face_of(corner);
                self.face1_switch(s, hand, face, entry, corner)
            }
        }
    }

    fn greedy_from(&mut self, n: NodeId) -> Option<(NodeId, Walker)> {
        match greedy_step(self.full, n, self.dest) {
            GreedyStep::NextHop(m) => Some((m, Walker::Greedy)),
            GreedyStep::LocalMinimum => match self.strategy {
                Strategy::Gfg(hand) => {
                    self.face_entries += 1;
                    let recovery = dist(self.full.position(n), self.full.position(self.dest));
                    self.enter_face2(n, hand, Some(recovery))
                }
                _ => None,
            },
        }
    }

    fn enter_face2(
        &mut self,
        anchor: NodeId,
        hand: Hand,
        recovery: Option<f64>,
    ) -> Option<(NodeId, Walker)> {
        let (corner, entry) = self.start_corner(anchor, hand)?;
        let face = self.fd.face_of(corner);
        Some(self.face2_depart(anchor, corner, hand, face, entry, anchor, recovery))
    }

    /// Switches faces at `n` for as long as `n` is an entry point ahead of
    /// the current face, then moves on along the final face.
    #[allow(clippy::too_many_arguments)]
    fn face2_depart(
        &mut self,
        n: NodeId,
        mut corner: Dart,
        hand: Hand,
        mut face: FaceId,
        mut entry_dist: f64,
        anchor: NodeId,
        recovery: Option<f64>,
    ) -> (NodeId, Walker) {
        let geom = &self.geoms[&anchor];
        while let Some(t) = geom.is_entry_point(self.planar, self.fd, n, face, entry_dist) {
            face = t.face;
            entry_dist = t.dist_to_dest;
            corner = t.corner;
        }
        (
            hand.next_hop(self.planar, corner),
            Walker::Face2 {
                hand,
                face,
                entry_dist,
                anchor,
                recovery,
            },
        )
    }

    /// Begins a lap of `face` at `corner`, noting crossings at the start node.
    fn face1_switch(
        &mut self,
        n: NodeId,
        hand: Hand,
        face: FaceId,
        entry_dist: f64,
        corner: Dart,
    ) -> Option<(NodeId, Walker)> {
        let best = self.face1_candidate(n, face, entry_dist).map(|t| (n, t));
        Some((
            hand.next_hop(self.planar, corner),
            Walker::Face1 {
                hand,
                face,
                entry_dist,
                start: corner,
                best,
                returning: false,
            },
        ))
    }

    fn face1_candidate(&mut self, n: NodeId, face: FaceId, entry: f64) -> Option<EntryTarget> {
        let (planar, fd) = (self.planar, self.fd);
        let anchor = self.origin?;
        self.geoms[&anchor].is_entry_point(planar, fd, n, face, entry)
    }

    fn advance(&mut self, n: NodeId, from: NodeId, w: Walker) -> Option<(NodeId, Walker)> {
        match w {
            Walker::Greedy => self.greedy_from(n),
            Walker::Face2 {
                hand,
                face,
                entry_dist,
                anchor,
                recovery,
            } => {
                if let Some(limit) = recovery {
                    let here = dist(self.full.position(n), self.full.position(self.dest));
                    if here < limit {
                        return self.greedy_from(n);
                    }
                }
                let corner = hand.arrival_corner(self.planar, Dart::new(from, n));
                Some(self.face2_depart(n, corner, hand, face, entry_dist, anchor, recovery))
            }
            Walker::Face1 {
                hand,
                face,
                entry_dist,
                start,
                best,
                returning,
            } => {
                let corner = hand.arrival_corner(self.planar, Dart::new(from, n));
                if returning {
                    let (target_node, target) = best.expect("returning towards a crossing");
                    if target_node == n {
                        return self.face1_switch(
                            n,
                            hand,
                            target.face,
                            target.dist_to_dest,
                            target.corner,
                        );
                    }
                    let next = Walker::Face1 {
                        hand,
                        face,
                        entry_dist,
                        start,
                        best,
                        returning,
                    };
                    return Some((hand.next_hop(self.planar, corner), next));
                }
                if corner == start {
                    // lap complete
                    let (target_node, target) = best?;
                    if target_node == n {
                        return self.face1_switch(
                            n,
                            hand,
                            target.face,
                            target.dist_to_dest,
                            target.corner,
                        );
                    }
                    let next = Walker::Face1 {
                        hand,
                        face,
                        entry_dist,
                        start,
                        best,
                        returning: true,
                    };
                    return Some((hand.next_hop(self.planar, corner), next));
                }
                let mut best = best;
                if let Some(t) = self.face1_candidate(n, face, entry_dist) {
                    if best.is_none_or(|(_, b)| t.dist_to_dest < b.dist_to_dest) {
                        best = Some((n, t));
                    }
                }
                let next = Walker::Face1 {
                    hand,
                    face,
                    entry_dist,
                    start,
                    best,
                    returning: false,
                };
                Some((hand.next_hop(self.planar, corner), next))
            }
        }
    }

    fn step_budget(&self) -> u64 {
        default_step_budget(self.planar.edge_count(), self.planar.node_count())
            + self.full.node_count() as u64
    }

    pub fn run(
        &mut self,
        s: NodeId,
        policy: SchedulePolicy,
        trace: TraceSink<'_>,
    ) -> Result<RouteOutcome, TraversalError> {
        check_endpoints(self.planar, s, self.dest)?;
        let mut kernel: Kernel<Walker> = Kernel::new(policy);
        if let Some((to, w)) = self.start(s) {
            kernel.inject(s, to, w);
        }
        let budget = self.step_budget();
        let mut trace = trace;
        let stats = kernel.run_observed(self, budget, |rec| {
            if let Some(sink) = trace.as_deref_mut() {
                let (hand, face) = match rec.msg {
                    Walker::Face1 { hand, face, .. } | Walker::Face2 { hand, face, .. } => {
                        (Some(hand), Some(face.as_pair()))
                    }
                    _ => (None, None),
                };
                sink(TraceEvent {
                    step: rec.step,
                    from: rec.from.0,
                    to: rec.to.0,
                    hand,
                    face,
                    causal_depth: rec.causal_depth,
                    annihilated: false,
                });
            }
        })?;
        let path = self
            .delivery
            .map_or_else(Vec::new, |d| kernel.causal_path(d.msg));
        Ok(RouteOutcome {
            stats,
            delivered: self.delivery.is_some(),
            path,
            delivery: self.delivery,
            face_entries: self.face_entries,
            ..RouteOutcome::default()
        })
    }
}

impl Protocol for WalkerProtocol<'_> {
    type Msg = Walker;

    fn on_receive(&mut self, cx: &mut StepContext<'_, Walker>, w: Walker) -> Reception {
        let n = cx.node();
        if n == self.dest {
            cx.deliver();
            let hand = match w {
                Walker::Face1 { hand, .. } | Walker::Face2 { hand, .. } => Some(hand),
                _ => None,
            };
            self.delivery.get_or_insert(Delivery {
                msg: cx.msg_id(),
                depth: cx.causal_depth(),
                hand,
                face: None,
                arrival: Dart::new(cx.from(), n),
            });
            return Reception::Processed;
        }
        if let Some((to, next)) = self.advance(n, cx.from(), w) {
            cx.send(to, next);
        }
        Reception::Processed
    }
}

/// Single-direction traversal that switches faces at the first entry point
/// ahead of the current face.
pub fn route_face2(
    g: &GeometricGraph,
    fd: &FaceDecomposition,
    s: NodeId,
    d: NodeId,
    hand: Hand,
    policy: SchedulePolicy,
) -> Result<RouteOutcome, TraversalError> {
    WalkerProtocol::new(g, fd, g, d, Strategy::Face2(hand)).run(s, policy, None)
}

/// Single-direction traversal that walks each face fully before moving to
/// the crossing closest to the destination.
pub fn route_face1(
    g: &GeometricGraph,
    fd: &FaceDecomposition,
    s: NodeId,
    d: NodeId,
    hand: Hand,
    policy: SchedulePolicy,
) -> Result<RouteOutcome, TraversalError> {
    WalkerProtocol::new(g, fd, g, d, Strategy::Face1(hand)).run(s, policy, None)
}

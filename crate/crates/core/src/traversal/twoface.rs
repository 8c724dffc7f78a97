use std::collections::{BTreeSet, HashMap, HashSet};

use super::{
    check_endpoints, Delivery, Hand, RouteOutcome, SessionGeometry, Token, TraceEvent, TraceSink,
    TraversalAudit, TraversalError,
};
use crate::kernel::{
    default_step_budget, Kernel, Protocol, Reception, SchedulePolicy, StepContext,
};
use crate::routing::{greedy_step, DirectoryEntry, GreedyStep, SessionDirectory, SessionKey};
use crate::topology::{Dart, FaceDecomposition, FaceId, GeometricGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Packet {
    /// Greedy forwarding on the full graph, before any face traversal.
    Greedy {
        source: NodeId,
        dest: NodeId,
    },
    Face(Token),
}

/// What nodes do with their session directory while handling tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectoryMode {
    #[default]
    Off,
    /// Entry points remember the direction that first reached them.
    Learn,
    /// Every node reached drops all state for the session.
    Forget,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TwoFaceOptions {
    /// Let both endpoints of a crossing edge act as entry points.
    pub both_endpoints: bool,
    pub directory: DirectoryMode,
    /// Start in greedy mode on this full graph, switching to bi-directional
    /// traversal at the first local minimum.
    pub greedy_prefix: bool,
}

/// The token that made an entry point start a new pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Parent {
    pub face: FaceId,
    pub corner: Dart,
    pub hand: Hand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpawnRecord {
    pub node: NodeId,
    pub face: FaceId,
    pub corner: Dart,
    pub entry_dist: f64,
    /// `None` for the pair started at the anchor.
    pub parent: Option<Parent>,
}

/// Node handlers of the bi-directional traversal for one session.
pub struct TwoFace<'a> {
    g: &'a GeometricGraph,
    fd: &'a FaceDecomposition,
    full: Option<&'a GeometricGraph>,
    source: NodeId,
    dest: NodeId,
    opts: TwoFaceOptions,
    geom: Option<SessionGeometry>,
    visited: HashSet<Dart>,
    traversed: BTreeSet<FaceId>,
    spawns: Vec<SpawnRecord>,
    deliveries: Vec<Delivery>,
    annihilation_sites: Vec<NodeId>,
    face_entries: u32,
    directory: Option<&'a mut SessionDirectory>,
}

impl<'a> TwoFace<'a> {
    pub fn new(
        g: &'a GeometricGraph,
        fd: &'a FaceDecomposition,
        source: NodeId,
        dest: NodeId,
        opts: TwoFaceOptions,
    ) -> Self {
        TwoFace {
            g,
            fd,
            full: None,
            source,
            dest,
            opts,
            geom: None,
            visited: HashSet::new(),
            traversed: BTreeSet::new(),
            spawns: Vec::new(),
            deliveries: Vec::new(),
            annihilation_sites: Vec::new(),
            face_entries: 0,
            directory: None,
        }
    }

    pub fn with_full_graph(mut self, full: &'a GeometricGraph) -> Self {
        self.full = Some(full);
        self
    }

    pub fn with_directory(mut self, dir: &'a mut SessionDirectory) -> Self {
        self.directory = Some(dir);
        self
    }

    pub fn geometry(&self) -> Option<&SessionGeometry> {
        self.geom.as_ref()
    }

    pub fn spawns(&self) -> &[SpawnRecord] {
        &self.spawns
    }

    pub fn deliveries(&self) -> &[Delivery] {
        &self.deliveries
    }

    fn key(&self) -> SessionKey {
        SessionKey {
            source: self.source,
            dest: self.dest,
        }
    }

    /// Sets up face traversal from `anchor` and returns the pair to send.
    fn begin_faces(&mut self, anchor: NodeId) -> Result<[(NodeId, Token); 2], TraversalError> {
        let geom =
            SessionGeometry::new(self.g, self.fd, anchor, self.dest, self.opts.both_endpoints)?;
        let corner = geom.start_corner;
        let entry = geom.start_dist;
        self.geom = Some(geom);
        let face = self.fd.face_of(corner);
        Ok(self.spawn_pair(anchor, corner, face, entry, None))
    }

    /// Records a new pair on `face` at `corner` and returns both tokens with
    /// their first hops, left hand first.
    fn spawn_pair(
        &mut self,
        node: NodeId,
        corner: Dart,
        face: FaceId,
        entry_dist: f64,
        parent: Option<Parent>,
    ) -> [(NodeId, Token); 2] {
        self.visited.insert(corner);
        self.traversed.insert(face);
        self.spawns.push(SpawnRecord {
            node,
            face,
            corner,
            entry_dist,
            parent,
        });
        if self.opts.directory == DirectoryMode::Learn {
            let key = self.key();
            if let Some(dir) = self.directory.as_deref_mut() {
                dir.learn(node, key, DirectoryEntry::learning(face, corner, parent));
            }
        }
        let token = |hand| Token {
            hand,
            source: self.source,
            dest: self.dest,
            face,
            entry_dist,
        };
        [
            (Hand::L.next_hop(self.g, corner), token(Hand::L)),
            (Hand::R.next_hop(self.g, corner), token(Hand::R)),
        ]
    }

    /// Starts pairs on every face this node is an entry point to, given the
    /// token that just reached `corner`, following through faces entered at
    /// the same node.
    fn spawn_closure(&mut self, node: NodeId, t: &Token, corner: Dart) -> Vec<(NodeId, Token)> {
        let parent = Parent {
            face: t.face,
            corner,
            hand: t.hand,
        };
        let mut out = Vec::new();
        let mut frontier = vec![(t.face, t.entry_dist)];
        while let Some((face, entry)) = frontier.pop() {
            let targets = match &self.geom {
                Some(geom) => geom.entry_targets(self.g, self.fd, node, face, entry),
                None => Vec::new(),
            };
            for target in targets {
                if self.visited.contains(&target.corner) {
                    continue;
                }
                let pair = self.spawn_pair(
                    node,
                    target.corner,
                    target.face,
                    target.dist_to_dest,
                    Some(parent),
                );
                out.extend(pair);
                frontier.push((target.face, target.dist_to_dest));
            }
        }
        out
    }

    fn on_face_token(&mut self, cx: &mut StepContext<'_, Packet>, t: Token) -> Reception {
        let n = cx.node();
        let arrival = Dart::new(cx.from(), n);
        let corner = t.hand.arrival_corner(self.g, arrival);
        debug_assert_eq!(self.fd.face_of(corner), t.face);

        if self.opts.directory == DirectoryMode::Forget {
            let key = self.key();
            if let Some(dir) = self.directory.as_deref_mut() {
                dir.forget(n, key);
            }
        }

        let g = self.g;
        let matched = cx.take_queued(|to, m| match m {
            Packet::Face(o) => {
                o.matches_opposite(&t) && o.hand.departure_corner(g, n, to) == corner
            }
            Packet::Greedy { .. } => false,
        });
        self.visited.insert(corner);
        if matched.is_some() {
            self.annihilation_sites.push(n);
            return Reception::Annihilated;
        }

        if n == self.dest {
            cx.deliver();
            self.deliveries.push(Delivery {
                msg: cx.msg_id(),
                depth: cx.causal_depth(),
                hand: Some(t.hand),
                face: Some(t.face),
                arrival,
            });
        } else {
            for (to, spawned) in self.spawn_closure(n, &t, corner) {
                cx.send(to, Packet::Face(spawned));
            }
        }
        cx.send(t.hand.next_hop(self.g, corner), Packet::Face(t));
        Reception::Processed
    }

    fn on_greedy(
        &mut self,
        cx: &mut StepContext<'_, Packet>,
        source: NodeId,
        dest: NodeId,
    ) -> Reception {
        let n = cx.node();
        if n == dest {
            cx.deliver();
            self.deliveries.push(Delivery {
                msg: cx.msg_id(),
                depth: cx.causal_depth(),
                hand: None,
                face: None,
                arrival: Dart::new(cx.from(), n),
            });
            return Reception::Processed;
        }
        let full = self.full.unwrap_or(self.g);
        match greedy_step(full, n, dest) {
            GreedyStep::NextHop(m) => {
                cx.send(m, Packet::Greedy { source, dest });
            }
            GreedyStep::LocalMinimum => {
                self.face_entries += 1;
                // an isolated planar node cannot happen in a connected graph
                if let Ok(pair) = self.begin_faces(n) {
                    for (to, t) in pair {
                        cx.send(to, Packet::Face(t));
                    }
                }
            }
        }
        Reception::Processed
    }

    /// Runs the session from its source until every token is gone.
    pub fn run(
        &mut self,
        policy: SchedulePolicy,
        trace: TraceSink<'_>,
    ) -> Result<RouteOutcome, TraversalError> {
        check_endpoints(self.g, self.source, self.dest)?;
        let mut kernel: Kernel<Packet> = Kernel::new(policy);
        let (s, d) = (self.source, self.dest);
        let start_greedy = self.opts.greedy_prefix;
        if start_greedy {
            let full = self.full.unwrap_or(self.g);
            match greedy_step(full, s, d) {
                GreedyStep::NextHop(m) => {
                    kernel.inject(s, m, Packet::Greedy { source: s, dest: d });
                }
                GreedyStep::LocalMinimum => {
                    self.face_entries += 1;
                    for (to, t) in self.begin_faces(s)? {
                        kernel.inject(s, to, Packet::Face(t));
                    }
                }
            }
        } else {
            for (to, t) in self.begin_faces(s)? {
                kernel.inject(s, to, Packet::Face(t));
            }
        }

        let budget = default_step_budget(self.g.edge_count(), self.fd.face_count())
            + self.full.map_or(0, |f| f.node_count() as u64);
        let mut departures: HashMap<(Dart, Hand), u32> = HashMap::new();
        let g = self.g;
        let mut trace = trace;
        let stats = kernel.run_observed(self, budget, |rec| {
            if let Packet::Face(t) = rec.msg {
                let corner = t.hand.departure_corner(g, rec.from, rec.to);
                *departures.entry((corner, t.hand)).or_default() += 1;
            }
            if let Some(sink) = trace.as_deref_mut() {
                sink(trace_event(rec));
            }
        })?;

        let delivery = self
            .deliveries
            .iter()
            .min_by_key(|d| (d.depth, d.hand, d.msg))
            .copied();
        let path = delivery.map_or_else(Vec::new, |d| kernel.causal_path(d.msg));
        let unvisited = self
            .traversed
            .iter()
            .flat_map(|f| self.fd.face(*f).boundary.iter())
            .filter(|c| !self.visited.contains(c))
            .count() as u64;
        let audit = TraversalAudit {
            l_spawns: self.spawns.len() as u64,
            r_spawns: self.spawns.len() as u64,
            annihilations: stats.annihilations,
            max_departures_per_corner: departures.values().copied().max().unwrap_or(0),
            unvisited_corners: unvisited,
        };
        let mut spawn_nodes: Vec<NodeId> = self.spawns.iter().map(|r| r.node).collect();
        spawn_nodes.dedup();
        Ok(RouteOutcome {
            delivered: delivery.is_some(),
            stats,
            path,
            delivery,
            face_entries: self.face_entries,
            audit: Some(audit),
            annihilation_sites: self.annihilation_sites.clone(),
            spawn_nodes,
        })
    }
}

fn trace_event(rec: &crate::kernel::StepRecord<Packet>) -> TraceEvent {
    let (hand, face) = match rec.msg {
        Packet::Face(t) => (Some(t.hand), Some(t.face.as_pair())),
        Packet::Greedy { .. } => (None, None),
    };
    TraceEvent {
        step: rec.step,
        from: rec.from.0,
        to: rec.to.0,
        hand,
        face,
        causal_depth: rec.causal_depth,
        annihilated: rec.reception == Reception::Annihilated,
    }
}

impl Protocol for TwoFace<'_> {
    type Msg = Packet;

    fn on_receive(&mut self, cx: &mut StepContext<'_, Packet>, msg: Packet) -> Reception {
        match msg {
            Packet::Face(t) => self.on_face_token(cx, t),
            Packet::Greedy { source, dest } => self.on_greedy(cx, source, dest),
        }
    }
}

/// Bi-directional face traversal from `s` to `d` on a planar graph.
pub fn route_2face(
    g: &GeometricGraph,
    fd: &FaceDecomposition,
    s: NodeId,
    d: NodeId,
    policy: SchedulePolicy,
) -> Result<RouteOutcome, TraversalError> {
    TwoFace::new(g, fd, s, d, TwoFaceOptions::default()).run(policy, None)
}

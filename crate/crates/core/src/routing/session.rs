use std::collections::BTreeMap;

use crate::kernel::{
    default_step_budget, Kernel, MsgId, Protocol, Reception, RunStats, SchedulePolicy, StepContext,
};
use crate::topology::{Dart, FaceDecomposition, FaceId, GeometricGraph, NodeId};
use crate::traversal::{
    check_endpoints, Delivery, DirectoryMode, Hand, Parent, RouteOutcome, TraversalError, TwoFace,
    TwoFaceOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionKey {
    pub source: NodeId,
    pub dest: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryState {
    Learning,
    /// Forwarding hand on the entry's face, set by the traceback.
    Established(Hand),
}

/// What an entry point remembers about one face it started a pair on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectoryEntry {
    pub face: FaceId,
    pub corner: Dart,
    pub parent: Option<Parent>,
    pub state: EntryState,
}

impl DirectoryEntry {
    pub fn learning(face: FaceId, corner: Dart, parent: Option<Parent>) -> Self {
        DirectoryEntry {
            face,
            corner,
            parent,
            state: EntryState::Learning,
        }
    }
}

type NodeTable = BTreeMap<SessionKey, BTreeMap<Dart, DirectoryEntry>>;

/// Per-node session state, keyed by node, then session, then corner.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionDirectory {
    nodes: BTreeMap<NodeId, NodeTable>,
}

impl SessionDirectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keeps the first entry learned at a corner.
    pub fn learn(&mut self, node: NodeId, key: SessionKey, entry: DirectoryEntry) {
        self.nodes
            .entry(node)
            .or_default()
            .entry(key)
            .or_default()
            .entry(entry.corner)
            .or_insert(entry);
    }

    pub fn forget(&mut self, node: NodeId, key: SessionKey) {
        if let Some(table) = self.nodes.get_mut(&node) {
            table.remove(&key);
            if table.is_empty() {
                self.nodes.remove(&node);
            }
        }
    }

    /// Drops one corner's entry, and any maps left empty.
    pub fn remove(&mut self, node: NodeId, key: SessionKey, corner: Dart) {
        let Some(table) = self.nodes.get_mut(&node) else {
            return;
        };
        if let Some(m) = table.get_mut(&key) {
            m.remove(&corner);
            if m.is_empty() {
                table.remove(&key);
            }
        }
        if table.is_empty() {
            self.nodes.remove(&node);
        }
    }

    pub fn entry(&self, node: NodeId, key: SessionKey, corner: Dart) -> Option<&DirectoryEntry> {
        self.nodes.get(&node)?.get(&key)?.get(&corner)
    }

    pub fn entries(&self, node: NodeId, key: SessionKey) -> impl Iterator<Item = &DirectoryEntry> {
        self.nodes
            .get(&node)
            .and_then(|t| t.get(&key))
            .into_iter()
            .flat_map(|m| m.values())
    }

    fn establish(&mut self, node: NodeId, key: SessionKey, corner: Dart, hand: Hand) -> bool {
        match self
            .nodes
            .get_mut(&node)
            .and_then(|t| t.get_mut(&key))
            .and_then(|m| m.get_mut(&corner))
        {
            Some(e) => {
                e.state = EntryState::Established(hand);
                true
            }
            None => false,
        }
    }

    pub fn entry_count(&self) -> usize {
        self.nodes
            .values()
            .flat_map(|t| t.values())
            .map(|m| m.len())
            .sum()
    }

    pub fn established_count(&self, key: SessionKey) -> usize {
        self.nodes
            .values()
            .filter_map(|t| t.get(&key))
            .flat_map(|m| m.values())
            .filter(|e| matches!(e.state, EntryState::Established(_)))
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Canonical byte image of every node's state.
    pub fn snapshot(&self) -> Vec<u8> {
        format!("{:?}", self.nodes).into_bytes()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Walk {
    hand: Hand,
    face: FaceId,
}

/// The destination's reverse message along the delivering token's route.
struct Traceback<'a> {
    g: &'a GeometricGraph,
    key: SessionKey,
    dir: &'a mut SessionDirectory,
    arrived: Option<MsgId>,
    established: usize,
}

impl Protocol for Traceback<'_> {
    type Msg = Walk;

    fn on_receive(&mut self, cx: &mut StepContext<'_, Walk>, w: Walk) -> Reception {
        let n = cx.node();
        let mut corner = w.hand.arrival_corner(self.g, Dart::new(cx.from(), n));
        let mut w = w;
        while let Some(e) = self.dir.entry(n, self.key, corner).copied() {
            if e.face != w.face {
                break;
            }
            self.dir.establish(n, self.key, corner, w.hand.opposite());
            self.established += 1;
            match e.parent {
                None => {
                    cx.deliver();
                    self.arrived = Some(cx.msg_id());
                    return Reception::Processed;
                }
                Some(p) => {
                    corner = p.corner;
                    w = Walk {
                        hand: p.hand.opposite(),
                        face: p.face,
                    };
                }
            }
        }
        cx.send(w.hand.next_hop(self.g, corner), w);
        Reception::Processed
    }
}

#[derive(Debug, Clone, Default)]
pub struct TracebackOutcome {
    pub stats: RunStats,
    pub reached_source: bool,
    /// Preferred path, source first.
    pub preferred_path: Vec<NodeId>,
    pub established: usize,
}

impl TracebackOutcome {
    pub fn preferred_hops(&self) -> Option<u32> {
        self.reached_source
            .then(|| self.preferred_path.len().saturating_sub(1) as u32)
    }
}

/// Retraces a face delivery from the destination back to the source,
/// turning every learning entry point on the way into an established one.
pub fn run_traceback(
    g: &GeometricGraph,
    key: SessionKey,
    delivery: &Delivery,
    dir: &mut SessionDirectory,
    policy: SchedulePolicy,
) -> Result<TracebackOutcome, TraversalError> {
    let (Some(hand), Some(face)) = (delivery.hand, delivery.face) else {
        return Ok(TracebackOutcome::default());
    };
    let d = key.dest;
    let back = hand.opposite();
    let corner = hand.arrival_corner(g, delivery.arrival);
    let mut kernel: Kernel<Walk> = Kernel::new(policy);
    kernel.inject(d, back.next_hop(g, corner), Walk { hand: back, face });
    let mut tb = Traceback {
        g,
        key,
        dir,
        arrived: None,
        established: 0,
    };
    let budget = default_step_budget(g.edge_count(), g.node_count());
    let stats = kernel.run_to_quiescence(&mut tb, budget)?;
    let mut preferred_path = tb.arrived.map_or_else(Vec::new, |m| kernel.causal_path(m));
    preferred_path.reverse();
    Ok(TracebackOutcome {
        stats,
        reached_source: tb.arrived.is_some(),
        preferred_path,
        established: tb.established,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Repeat {
    hand: Hand,
    face: FaceId,
    /// Set on the final message of a session.
    last: bool,
}

/// A session message following established directions.
struct Follower<'a> {
    g: &'a GeometricGraph,
    key: SessionKey,
    dir: &'a mut SessionDirectory,
    delivery: Option<Delivery>,
}

impl Follower<'_> {
    /// Moves onto the face an established entry at `n` continues with.
    /// The final message drops each entry it follows.
    fn switch(&mut self, n: NodeId, mut r: Repeat, mut corner: Dart) -> (Repeat, Dart) {
        loop {
            let from = Parent {
                face: r.face,
                corner,
                hand: r.hand,
            };
            let next = self.dir.entries(n, self.key).find_map(|e| match e.state {
                EntryState::Established(h) if e.parent == Some(from) => Some((e, h)),
                _ => None,
            });
            match next {
                Some((e, h)) => {
                    let e = *e;
                    if r.last {
                        self.dir.remove(n, self.key, e.corner);
                    }
                    r.hand = h;
                    r.face = e.face;
                    corner = e.corner;
                }
                None => return (r, corner),
            }
        }
    }
}

impl Protocol for Follower<'_> {
    type Msg = Repeat;

    fn on_receive(&mut self, cx: &mut StepContext<'_, Repeat>, r: Repeat) -> Reception {
        let n = cx.node();
        let arrival = Dart::new(cx.from(), n);
        if n == self.key.dest {
            cx.deliver();
            self.delivery.get_or_insert(Delivery {
                msg: cx.msg_id(),
                depth: cx.causal_depth(),
                hand: Some(r.hand),
                face: Some(r.face),
                arrival,
            });
            return Reception::Processed;
        }
        let (r, corner) = self.switch(n, r, r.hand.arrival_corner(self.g, arrival));
        cx.send(r.hand.next_hop(self.g, corner), r);
        Reception::Processed
    }
}

/// Sends one session message from the source along established directions.
/// With `last`, it drops every entry it follows.
pub fn run_repeat(
    g: &GeometricGraph,
    key: SessionKey,
    dir: &mut SessionDirectory,
    last: bool,
    policy: SchedulePolicy,
) -> Result<RouteOutcome, TraversalError> {
    let s = key.source;
    let anchor = dir.entries(s, key).find_map(|e| match (e.parent, e.state) {
        (None, EntryState::Established(h)) => Some((*e, h)),
        _ => None,
    });
    let Some((e, hand)) = anchor else {
        return Ok(RouteOutcome::default());
    };
    let mut fol = Follower {
        g,
        key,
        dir,
        delivery: None,
    };
    let start = Repeat {
        hand,
        face: e.face,
        last,
    };
    if last {
        fol.dir.remove(s, key, e.corner);
    }
    let (r, corner) = fol.switch(s, start, e.corner);
    let mut kernel: Kernel<Repeat> = Kernel::new(policy);
    kernel.inject(s, r.hand.next_hop(g, corner), r);
    let budget = default_step_budget(g.edge_count(), g.node_count());
    let stats = kernel.run_to_quiescence(&mut fol, budget)?;
    let delivery = fol.delivery;
    Ok(RouteOutcome {
        stats,
        delivered: delivery.is_some(),
        path: delivery.map_or_else(Vec::new, |d| kernel.causal_path(d.msg)),
        delivery,
        ..RouteOutcome::default()
    })
}

/// Everything measured over one session of `k` messages.
#[derive(Debug, Clone)]
pub struct SessionReport {
    pub first: RouteOutcome,
    pub traceback: TracebackOutcome,
    /// Messages 2..k.
    pub repeats: Vec<RouteOutcome>,
    pub cleanup: RouteOutcome,
    /// Directory entries left once the session ended.
    pub residual_entries: usize,
    /// Directory image after the session equals the one before it.
    pub stateless: bool,
}

impl SessionReport {
    pub fn preferred_hops(&self) -> Option<u32> {
        self.traceback.preferred_hops()
    }

    /// Messages spent beyond the first delivery: traceback and cleanup.
    pub fn overhead_messages(&self) -> u64 {
        self.traceback.stats.total_messages + self.cleanup.stats.total_messages
    }

    pub fn total_messages(&self) -> u64 {
        self.first.stats.total_messages
            + self.overhead_messages()
            + self
                .repeats
                .iter()
                .map(|r| r.stats.total_messages)
                .sum::<u64>()
    }

    pub fn all_delivered(&self) -> bool {
        self.first.delivered
            && self.traceback.reached_source
            && self.repeats.iter().all(|r| r.delivered)
    }
}

/// Runs a session of `k` messages from `s` to `d`.
///
/// The first message learns entry points with bi-directional traversal and
/// is retraced by the destination; the rest follow the preferred path, the
/// final one clearing state on it. A second bi-directional pass at session
/// end clears state everywhere else.
#[allow(clippy::too_many_arguments)]
pub fn route_session(
    g: &GeometricGraph,
    fd: &FaceDecomposition,
    s: NodeId,
    d: NodeId,
    k: usize,
    dir: &mut SessionDirectory,
    policy: SchedulePolicy,
) -> Result<SessionReport, TraversalError> {
    check_endpoints(g, s, d)?;
    let k = k.max(1);
    let key = SessionKey { source: s, dest: d };
    let before = dir.snapshot();

    let learn = TwoFaceOptions {
        directory: DirectoryMode::Learn,
        ..TwoFaceOptions::default()
    };
    let first = TwoFace::new(g, fd, s, d, learn)
        .with_directory(dir)
        .run(policy, None)?;
    let traceback = match &first.delivery {
        Some(del) => run_traceback(g, key, del, dir, policy)?,
        None => TracebackOutcome::default(),
    };
    let mut repeats = Vec::with_capacity(k - 1);
    for i in 2..=k {
        repeats.push(run_repeat(g, key, dir, i == k, policy)?);
    }
    let forget = TwoFaceOptions {
        directory: DirectoryMode::Forget,
        ..TwoFaceOptions::default()
    };
    let cleanup = TwoFace::new(g, fd, s, d, forget)
        .with_directory(dir)
        .run(policy, None)?;

    let residual_entries = g.nodes().map(|n| dir.entries(n, key).count()).sum();
    Ok(SessionReport {
        first,
        traceback,
        repeats,
        cleanup,
        residual_entries,
        stateless: dir.snapshot() == before,
    })
}

//! End-to-end routing: greedy and compass forwarding, their compositions
//! with face traversal, and the preferred-path session protocol.

mod session;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{cross, dist, Point};
use crate::kernel::{Kernel, Protocol, Reception, SchedulePolicy, StepContext};
use crate::topology::{Dart, FaceDecomposition, GeometricGraph, NodeId};
use crate::traversal::{
    check_endpoints, Delivery, Hand, RouteOutcome, Strategy, TraceEvent, TraceSink, TraversalError,
    TwoFace, TwoFaceOptions, WalkerProtocol,
};

pub use session::{
    route_session, run_repeat, run_traceback, DirectoryEntry, EntryState, SessionDirectory,
    SessionKey, SessionReport, TracebackOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyStep {
    NextHop(NodeId),
    LocalMinimum,
}

/// Neighbor closest to `dest` if it is strictly closer than `n`.
pub fn greedy_step(g: &GeometricGraph, n: NodeId, dest: NodeId) -> GreedyStep {
    let target = g.position(dest);
    let here = dist(g.position(n), target);
    let best = g
        .neighbors(n)
        .iter()
        .map(|&m| (dist(g.position(m), target), m))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    match best {
        Some((d, m)) if d < here => GreedyStep::NextHop(m),
        _ => GreedyStep::LocalMinimum,
    }
}

/// Unsigned angle at `at` between the directions to `a` and `b`.
fn angle_between(at: Point, a: Point, b: Point) -> f64 {
    let (ux, uy) = (a.x() - at.x(), a.y() - at.y());
    let (vx, vy) = (b.x() - at.x(), b.y() - at.y());
    cross(at, a, b).abs().atan2(ux * vx + uy * vy)
}

/// Neighbor whose direction is closest to the direction of `dest`.
///
/// # Panics
/// If `n` has no neighbors.
pub fn compass_step(g: &GeometricGraph, n: NodeId, dest: NodeId) -> NodeId {
    let (here, target) = (g.position(n), g.position(dest));
    g.neighbors(n)
        .iter()
        .map(|&m| (angle_between(here, g.position(m), target), m))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, m)| m)
        .expect("compass step from an isolated node")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Greedy,
    Compass,
}

/// Memoryless per-hop forwarding of a single message.
struct Forwarder<'a> {
    g: &'a GeometricGraph,
    dest: NodeId,
    rule: Rule,
    delivery: Option<Delivery>,
}

impl Forwarder<'_> {
    fn next(&self, n: NodeId) -> Option<NodeId> {
        match self.rule {
            Rule::Greedy => match greedy_step(self.g, n, self.dest) {
                GreedyStep::NextHop(m) => Some(m),
                GreedyStep::LocalMinimum => None,
            },
            Rule::Compass => Some(compass_step(self.g, n, self.dest)),
        }
    }
}

impl Protocol for Forwarder<'_> {
    type Msg = ();

    fn on_receive(&mut self, cx: &mut StepContext<'_, ()>, _msg: ()) -> Reception {
        let n = cx.node();
        if n == self.dest {
            cx.deliver();
            self.delivery.get_or_insert(Delivery {
                msg: cx.msg_id(),
                depth: cx.causal_depth(),
                hand: None,
                face: None,
                arrival: Dart::new(cx.from(), n),
            });
        } else if let Some(m) = self.next(n) {
            cx.send(m, ());
        }
        Reception::Processed
    }
}

fn forward(
    g: &GeometricGraph,
    s: NodeId,
    d: NodeId,
    rule: Rule,
    policy: SchedulePolicy,
    trace: TraceSink<'_>,
) -> Result<RouteOutcome, TraversalError> {
    check_endpoints(g, s, d)?;
    if g.degree(s) == 0 {
        return Err(TraversalError::Isolated(s));
    }
    let mut fw = Forwarder {
        g,
        dest: d,
        rule,
        delivery: None,
    };
    let mut kernel: Kernel<()> = Kernel::new(policy);
    if let Some(m) = fw.next(s) {
        kernel.inject(s, m, ());
    }
    // a memoryless walk that outlasts every node twice is cycling
    let budget = 2 * g.node_count() as u64 + 2;
    let mut trace = trace;
    let stats = kernel.run_observed(&mut fw, budget, |rec| {
        if let Some(sink) = trace.as_deref_mut() {
            sink(TraceEvent {
                step: rec.step,
                from: rec.from.0,
                to: rec.to.0,
                hand: None,
                face: None,
                causal_depth: rec.causal_depth,
                annihilated: false,
            });
        }
    })?;
    let path = fw
        .delivery
        .map_or_else(Vec::new, |d| kernel.causal_path(d.msg));
    Ok(RouteOutcome {
        stats,
        delivered: fw.delivery.is_some(),
        path,
        delivery: fw.delivery,
        ..RouteOutcome::default()
    })
}

/// Greedy forwarding; the message is dropped at a local minimum.
pub fn route_greedy(
    g: &GeometricGraph,
    s: NodeId,
    d: NodeId,
    policy: SchedulePolicy,
) -> Result<RouteOutcome, TraversalError> {
    forward(g, s, d, Rule::Greedy, policy, None)
}

/// Compass forwarding. A livelock surfaces as an exhausted step budget.
pub fn route_compass(
    g: &GeometricGraph,
    s: NodeId,
    d: NodeId,
    policy: SchedulePolicy,
) -> Result<RouteOutcome, TraversalError> {
    forward(g, s, d, Rule::Compass, policy, None)
}

/// Greedy on the full graph with single-direction face recovery on the
/// planar subgraph, returning to greedy once strictly closer than the
/// local minimum.
pub fn route_gfg(
    full: &GeometricGraph,
    planar: &GeometricGraph,
    fd: &FaceDecomposition,
    s: NodeId,
    d: NodeId,
    hand: Hand,
    policy: SchedulePolicy,
) -> Result<RouteOutcome, TraversalError> {
    WalkerProtocol::new(planar, fd, full, d, Strategy::Gfg(hand)).run(s, policy, None)
}

/// Greedy on the full graph until the first local minimum, then
/// bi-directional face traversal to the destination.
pub fn route_g2fg(
    full: &GeometricGraph,
    planar: &GeometricGraph,
    fd: &FaceDecomposition,
    s: NodeId,
    d: NodeId,
    policy: SchedulePolicy,
) -> Result<RouteOutcome, TraversalError> {
    let opts = TwoFaceOptions {
        greedy_prefix: true,
        ..TwoFaceOptions::default()
    };
    TwoFace::new(planar, fd, s, d, opts)
        .with_full_graph(full)
        .run(policy, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "compass")]
    Compass,
    #[serde(rename = "face1")]
    Face1,
    #[serde(rename = "face2")]
    Face2,
    #[serde(rename = "2face")]
    TwoFace,
    #[serde(rename = "gfg")]
    Gfg,
    #[serde(rename = "g2fg")]
    G2fg,
    #[serde(rename = "session")]
    Session,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Greedy,
        Algorithm::Compass,
        Algorithm::Face1,
        Algorithm::Face2,
        Algorithm::TwoFace,
        Algorithm::Gfg,
        Algorithm::G2fg,
        Algorithm::Session,
    ];

    /// Identifiers of algorithms that are recognized but not provided.
    pub const RESERVED: [&'static str; 4] = ["void2", "2void", "g2vg", "shortcut2hop"];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Compass => "compass",
            Algorithm::Face1 => "face1",
            Algorithm::Face2 => "face2",
            Algorithm::TwoFace => "2face",
            Algorithm::Gfg => "gfg",
            Algorithm::G2fg => "g2fg",
            Algorithm::Session => "session",
        }
    }

    /// Whether any hop may use an edge outside the planar subgraph.
    pub fn uses_full_graph(self) -> bool {
        matches!(
            self,
            Algorithm::Greedy | Algorithm::Compass | Algorithm::Gfg | Algorithm::G2fg
        )
    }

    /// Whether the algorithm discovers a preferred path.
    pub fn is_bidirectional(self) -> bool {
        matches!(
            self,
            Algorithm::TwoFace | Algorithm::G2fg | Algorithm::Session
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgorithmParseError {
    #[error("algorithm `{0}` is reserved but not implemented (void traversal and 2-hop shortcuts are out of scope)")]
    Reserved(String),
    #[error("unknown algorithm `{0}`; expected one of greedy, compass, face1, face2, 2face, gfg, g2fg, session")]
    Unknown(String),
}

impl FromStr for Algorithm {
    type Err = AlgorithmParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        if let Some(a) = Algorithm::ALL.iter().find(|a| a.id() == key) {
            return Ok(*a);
        }
        if Algorithm::RESERVED.contains(&key.as_str()) {
            return Err(AlgorithmParseError::Reserved(key));
        }
        Err(AlgorithmParseError::Unknown(s.to_string()))
    }
}

/// The graphs an algorithm may route on.
#[derive(Clone, Copy)]
pub struct Network<'a> {
    pub full: &'a GeometricGraph,
    pub planar: &'a GeometricGraph,
    pub fd: &'a FaceDecomposition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub policy: SchedulePolicy,
    /// Hand of single-direction face traversal.
    pub hand: Hand,
    /// Messages per session.
    pub session_k: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            policy: SchedulePolicy::Fifo,
            hand: Hand::R,
            session_k: 5,
        }
    }
}

/// Session-specific results of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionSummary {
    pub k: usize,
    pub stateless: bool,
    pub residual_entries: usize,
    pub all_delivered: bool,
    /// Hop counts of messages 2..k.
    pub repeat_hops: Vec<Option<u32>>,
    pub traceback_messages: u64,
    pub cleanup_messages: u64,
}

/// Uniform result of running any algorithm on one pair.
#[derive(Debug, Clone)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub outcome: RouteOutcome,
    /// Hops of the path repeat messages would take.
    pub preferred_hops: Option<u32>,
    /// Messages charged to the run; for sessions the first message plus
    /// traceback and cleanup.
    pub total_messages: u64,
    /// The step budget ran out (a compass livelock).
    pub livelock: bool,
    pub session: Option<SessionSummary>,
}

impl AlgorithmRun {
    pub fn delivered(&self) -> bool {
        self.outcome.delivered
    }

    /// Description of a broken protocol guarantee, if any.
    pub fn violation(&self) -> Option<String> {
        let a = self.algorithm;
        if !matches!(a, Algorithm::Greedy | Algorithm::Compass) && !self.delivered() {
            return Some(format!("{a} did not deliver"));
        }
        if let Some(audit) = &self.outcome.audit {
            if !audit.holds() {
                return Some(format!("{a} token accounting failed: {audit:?}"));
            }
        }
        if let Some(s) = &self.session {
            if !s.stateless || !s.all_delivered {
                return Some(format!("session check failed: {s:?}"));
            }
        }
        None
    }
}

fn plain_run(algorithm: Algorithm, outcome: RouteOutcome) -> AlgorithmRun {
    let preferred_hops = if algorithm.is_bidirectional() {
        outcome.path_hops()
    } else {
        None
    };
    AlgorithmRun {
        algorithm,
        total_messages: outcome.stats.total_messages,
        preferred_hops,
        outcome,
        livelock: false,
        session: None,
    }
}

/// Runs `algorithm` from `s` to `d`, optionally tracing every step.
pub fn run_algorithm(
    algorithm: Algorithm,
    net: Network<'_>,
    s: NodeId,
    d: NodeId,
    opts: RunOptions,
    trace: TraceSink<'_>,
) -> Result<AlgorithmRun, TraversalError> {
    let Network { full, planar, fd } = net;
    let policy = opts.policy;
    let outcome = match algorithm {
        Algorithm::Greedy | Algorithm::Compass => {
            let rule = if algorithm == Algorithm::Greedy {
                Rule::Greedy
            } else {
                Rule::Compass
            };
            match forward(full, s, d, rule, policy, trace) {
                Err(TraversalError::Kernel(crate::kernel::KernelError::StepBudgetExceeded {
                    budget,
                })) => {
                    let mut run = plain_run(algorithm, RouteOutcome::default());
                    run.total_messages = budget;
                    run.livelock = true;
                    return Ok(run);
                }
                other => other?,
            }
        }
        Algorithm::Face1 => WalkerProtocol::new(planar, fd, planar, d, Strategy::Face1(opts.hand))
            .run(s, policy, trace)?,
        Algorithm::Face2 => WalkerProtocol::new(planar, fd, planar, d, Strategy::Face2(opts.hand))
            .run(s, policy, trace)?,
        Algorithm::Gfg => WalkerProtocol::new(planar, fd, full, d, Strategy::Gfg(opts.hand))
            .run(s, policy, trace)?,
        Algorithm::TwoFace => {
            TwoFace::new(planar, fd, s, d, TwoFaceOptions::default()).run(policy, trace)?
        }
        Algorithm::G2fg => {
            let o = TwoFaceOptions {
                greedy_prefix: true,
                ..TwoFaceOptions::default()
            };
            TwoFace::new(planar, fd, s, d, o)
                .with_full_graph(full)
                .run(policy, trace)?
        }
        Algorithm::Session => {
            let mut dir = SessionDirectory::new();
            let rep = route_session(planar, fd, s, d, opts.session_k, &mut dir, policy)?;
            if let Some(sink) = trace {
                // replay the first message for the trace
                TwoFace::new(planar, fd, s, d, TwoFaceOptions::default())
                    .run(policy, Some(sink))?;
            }
            let summary = SessionSummary {
                k: opts.session_k.max(1),
                stateless: rep.stateless,
                residual_entries: rep.residual_entries,
                all_delivered: rep.all_delivered(),
                repeat_hops: rep.repeats.iter().map(|r| r.path_hops()).collect(),
                traceback_messages: rep.traceback.stats.total_messages,
                cleanup_messages: rep.cleanup.stats.total_messages,
            };
            return Ok(AlgorithmRun {
                algorithm,
                preferred_hops: rep.preferred_hops(),
                total_messages: rep.first.stats.total_messages + rep.overhead_messages(),
                outcome: rep.first,
                livelock: false,
                session: Some(summary),
            });
        }
    };
    Ok(plain_run(algorithm, outcome))
}

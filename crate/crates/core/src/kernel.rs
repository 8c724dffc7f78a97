//! Asynchronous execution engine with atomic send-queue steps.
//!
//! Channels have zero capacity: removing a token from the sender's queue and
//! running the receiver's handler happen in one step, so no token is ever in
//! flight between steps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::NodeId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("step budget of {budget} exhausted before quiescence")]
    StepBudgetExceeded { budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchedulePolicy {
    /// Oldest queued token first.
    Fifo,
    /// Uniformly random queued token, from a seeded generator.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MsgId(pub usize);

#[derive(Debug, Clone)]
struct Queued<M> {
    id: MsgId,
    from: NodeId,
    to: NodeId,
    depth: u32,
    msg: M,
}

/// Provenance of a transmitted message.
#[derive(Debug, Clone, Copy)]
struct Lineage {
    from: NodeId,
    to: NodeId,
    parent: Option<MsgId>,
}

/// What the receiver did with a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reception {
    Processed,
    /// The token met its opposite and both were destroyed.
    Annihilated,
}

/// One executed step.
#[derive(Debug, Clone)]
pub struct StepRecord<M> {
    pub step: u64,
    pub id: MsgId,
    pub from: NodeId,
    pub to: NodeId,
    pub causal_depth: u32,
    pub msg: M,
    pub reception: Reception,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Number of deliver events executed.
    pub total_messages: u64,
    /// Smallest causal depth at which the destination accepted a token.
    pub delivery_causal_depth: Option<u32>,
    pub annihilations: u64,
    /// Longest causal chain in the run.
    pub max_causal_depth: u32,
    /// Largest number of steps any token sat in a queue.
    pub max_wait: u64,
}

/// Handler view of one atomic step at the receiving node.
pub struct StepContext<'a, M> {
    node: NodeId,
    from: NodeId,
    id: MsgId,
    depth: u32,
    step: u64,
    queue: &'a mut Vec<Queued<M>>,
    enqueued_at: &'a mut Vec<u64>,
    lineage: &'a mut Vec<Lineage>,
    delivered: &'a mut Option<u32>,
}

impl<M> StepContext<'_, M> {
    pub fn node(&self) -> NodeId {
        self.node
    }

    /// Neighbor the token arrived from.
    pub fn from(&self) -> NodeId {
        self.from
    }

    pub fn msg_id(&self) -> MsgId {
        self.id
    }

    pub fn causal_depth(&self) -> u32 {
        self.depth
    }

    /// Appends a token to this node's send queue, causally after the one
    /// being handled.
    pub fn send(&mut self, to: NodeId, msg: M) -> MsgId {
        let id = MsgId(self.lineage.len());
        self.lineage.push(Lineage {
            from: self.node,
            to,
            parent: Some(self.id),
        });
        self.enqueued_at.push(self.step);
        self.queue.push(Queued {
            id,
            from: self.node,
            to,
            depth: self.depth + 1,
            msg,
        });
        id
    }

    /// Tokens waiting in this node's send queue, with their next hop.
    pub fn queued(&self) -> impl Iterator<Item = (NodeId, &M)> {
        let node = self.node;
        self.queue
            .iter()
            .filter(move |q| q.from == node)
            .map(|q| (q.to, &q.msg))
    }

    /// Removes the first token in this node's queue matching `pred`.
    pub fn take_queued(&mut self, mut pred: impl FnMut(NodeId, &M) -> bool) -> Option<M> {
        let node = self.node;
        let pos = self
            .queue
            .iter()
            .position(|q| q.from == node && pred(q.to, &q.msg))?;
        Some(self.queue.remove(pos).msg)
    }

    pub fn deliver(&mut self) {
        if self.delivered.is_none_or(|d| self.depth < d) {
            *self.delivered = Some(self.depth);
        }
    }
}

pub trait Protocol {
    type Msg: Clone;

    fn on_receive(&mut self, cx: &mut StepContext<'_, Self::Msg>, msg: Self::Msg) -> Reception;
}

pub struct Kernel<M> {
    queue: Vec<Queued<M>>,
    enqueued_at: Vec<u64>,
    lineage: Vec<Lineage>,
    policy: SchedulePolicy,
    rng: ChaCha8Rng,
    steps: u64,
    stats: RunStats,
}

impl<M: Clone> Kernel<M> {
    pub fn new(policy: SchedulePolicy) -> Self {
        let seed = match policy {
            SchedulePolicy::Fifo => 0,
            SchedulePolicy::Random(s) => s,
        };
        Kernel {
            queue: Vec::new(),
            enqueued_at: Vec::new(),
            lineage: Vec::new(),
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
            stats: RunStats::default(),
        }
    }

    /// Queues an initial token at `from`; its delivery has causal depth 1.
    pub fn inject(&mut self, from: NodeId, to: NodeId, msg: M) -> MsgId {
        let id = MsgId(self.lineage.len());
        self.lineage.push(Lineage {
            from,
            to,
            parent: None,
        });
        self.enqueued_at.push(self.steps);
        self.queue.push(Queued {
            id,
            from,
            to,
            depth: 1,
            msg,
        });
        id
    }

    pub fn is_quiescent(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Executes one atomic step, or returns `None` when every queue is empty.
    pub fn step<P: Protocol<Msg = M>>(&mut self, protocol: &mut P) -> Option<StepRecord<M>> {
        if self.queue.is_empty() {
            return None;
        }
        let pick = match self.policy {
            SchedulePolicy::Fifo => 0,
            SchedulePolicy::Random(_) => self.rng.gen_range(0..self.queue.len()),
        };
        let q = self.queue.remove(pick);
        self.steps += 1;
        let waited = self.steps - self.enqueued_at[q.id.0];
        self.stats.max_wait = self.stats.max_wait.max(waited);
        self.stats.total_messages += 1;
        self.stats.max_causal_depth = self.stats.max_causal_depth.max(q.depth);

        let msg = q.msg.clone();
        let mut cx = StepContext {
            node: q.to,
            from: q.from,
            id: q.id,
            depth: q.depth,
            step: self.steps,
            queue: &mut self.queue,
            enqueued_at: &mut self.enqueued_at,
            lineage: &mut self.lineage,
            delivered: &mut self.stats.delivery_causal_depth,
        };
        let reception = protocol.on_receive(&mut cx, q.msg);
        if reception == Reception::Annihilated {
            self.stats.annihilations += 1;
        }
        Some(StepRecord {
            step: self.steps,
            id: q.id,
            from: q.from,
            to: q.to,
            causal_depth: q.depth,
            msg,
            reception,
        })
    }

    /// Steps until quiescence, handing every step to `observe`.
    pub fn run_observed<P: Protocol<Msg = M>>(
        &mut self,
        protocol: &mut P,
        max_steps: u64,
        mut observe: impl FnMut(&StepRecord<M>),
    ) -> Result<RunStats, KernelError> {
        assert!(max_steps > 0, "step budget must be positive");
        let start = self.steps;
        while !self.queue.is_empty() {
            if self.steps - start >= max_steps {
                return Err(KernelError::StepBudgetExceeded { budget: max_steps });
            }
            let rec = self.step(protocol).expect("queue is non-empty");
            observe(&rec);
        }
        Ok(self.stats.clone())
    }

    pub fn run_to_quiescence<P: Protocol<Msg = M>>(
        &mut self,
        protocol: &mut P,
        max_steps: u64,
    ) -> Result<RunStats, KernelError> {
        self.run_observed(protocol, max_steps, |_| {})
    }

    /// Nodes visited by the causal chain ending with message `id`, starting
    /// at the node that injected the first message of the chain.
    pub fn causal_path(&self, id: MsgId) -> Vec<NodeId> {
        let mut rev = vec![self.lineage[id.0].to];
        let mut cur = Some(id);
        while let Some(m) = cur {
            let l = self.lineage[m.0];
            if rev.last() != Some(&l.from) {
                rev.push(l.from);
            }
            cur = l.parent;
        }
        rev.reverse();
        rev
    }
}

/// Step budget for face-traversal runs: fifty times the edge count per
/// token pair, plus one pair of headroom.
pub fn default_step_budget(edge_count: usize, pairs: usize) -> u64 {
    50 * edge_count.max(1) as u64 * (pairs as u64 + 1)
}

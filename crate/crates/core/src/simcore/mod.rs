//! Synchronous round scheduler for the SLEEPING LOCAL model.
//!
//! Each round has two sub-phases. First every awake node produces its
//! outgoing messages from its state at the start of the round; those are
//! delivered to receivers that are awake in the same round and silently
//! dropped otherwise. Then every awake node sees its inbox (sorted by sender)
//! and picks an [`Action`]. Decisions never observe other nodes' decisions of
//! the same round, so the order in which nodes are visited is irrelevant.
//!
//! A node that sleeps for `r` rounds at round `t` is absent from rounds
//! `t+1..=t+r` and awake again at `t+r+1`. Terminated nodes are silent for
//! good. A node is charged one awake round for every round it is awake in,
//! including the round in which it terminates.

mod rng;
mod trace;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::error::ProgramError;
use crate::graph::{Graph, NodeId};

pub use rng::{mix_seed, node_rng, NodeRng};
pub use trace::{Trace, TraceAct, TraceEvent, TraceStatus};

/// Global round number, starting at 1.
pub type Round = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Awake,
    Sleeping { wake_round: Round },
    Terminated,
}

/// Whether a message can pass between nodes in the given states.
pub fn deliverable(sender: NodeStatus, receiver: NodeStatus) -> bool {
    sender == NodeStatus::Awake && receiver == NodeStatus::Awake
}

/// Messages a node emits in the send sub-phase of a round.
#[derive(Debug, Clone)]
pub enum Outbox<M> {
    Silent,
    /// Same payload to every neighbor.
    Broadcast(M),
    /// Individual payloads; every target must be a neighbor.
    Directed(Vec<(NodeId, M)>),
}

/// What a node does at the end of a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action<O> {
    Continue,
    /// Sleep for `r >= 1` rounds.
    Sleep(u64),
    Terminate(O),
}

impl<O> Action<O> {
    /// `Continue` if `wake` is the next round, otherwise the sleep that makes
    /// the node awake again exactly at `wake`.
    pub fn wake_at(now: Round, wake: Round) -> Self {
        debug_assert!(wake > now);
        if wake == now + 1 {
            Action::Continue
        } else {
            Action::Sleep(wake - now - 1)
        }
    }
}

/// What a node knows about the current round and itself.
pub struct RoundContext<'a> {
    pub round: Round,
    pub id: NodeId,
    index: usize,
    graph: &'a Graph,
}

impl RoundContext<'_> {
    pub fn degree(&self) -> usize {
        self.graph.degree(self.index)
    }

    pub fn neighbors(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.graph.neighbors(self.index).iter().map(|&j| self.graph.id(j))
    }
}

impl fmt::Debug for RoundContext<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RoundContext")
            .field("round", &self.round)
            .field("id", &self.id)
            .finish()
    }
}

/// Behaviour run identically by every node.
pub trait NodeProgram {
    type State: fmt::Debug;
    type Msg: Clone + fmt::Debug;
    type Output: Clone + fmt::Debug;

    /// Send sub-phase: reads the state as of the start of the round.
    fn send(
        &self,
        ctx: &RoundContext<'_>,
        state: &mut Self::State,
        rng: &mut NodeRng,
    ) -> Outbox<Self::Msg>;

    /// Receive-and-decide sub-phase. `inbox` holds `(sender, payload)` for
    /// every message delivered this round, ordered by sender id.
    fn on_round(
        &self,
        ctx: &RoundContext<'_>,
        state: &mut Self::State,
        inbox: &[(NodeId, Self::Msg)],
        rng: &mut NodeRng,
    ) -> Result<Action<Self::Output>, ProgramError>;
}

/// Order in which awake nodes are visited inside a sub-phase. Has no effect
/// on results; exposed so that this can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VisitOrder {
    #[default]
    Ascending,
    Descending,
    Shuffled(u64),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub seed: u64,
    /// Round number of the first simulated round.
    pub first_round: Round,
    /// When set, the run stops after this round and hands every
    /// non-terminated node back to the caller instead of failing.
    pub last_round: Option<Round>,
    /// No round beyond this one is ever executed.
    pub round_cap: Round,
    pub trace: bool,
    pub visit_order: VisitOrder,
}

impl SimConfig {
    pub fn new(seed: u64, round_cap: Round) -> Self {
        Self {
            seed,
            first_round: 1,
            last_round: None,
            round_cap,
            trace: false,
            visit_order: VisitOrder::Ascending,
        }
    }
}

/// Initial setup of one node: its program state and whether it is awake at
/// the first round or sleeping until a later one.
#[derive(Debug, Clone)]
pub struct NodeInit<S> {
    pub state: S,
    pub wake_round: Option<Round>,
}

impl<S> NodeInit<S> {
    pub fn awake(state: S) -> Self {
        Self {
            state,
            wake_round: None,
        }
    }

    pub fn sleeping_until(state: S, wake_round: Round) -> Self {
        Self {
            state,
            wake_round: Some(wake_round),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodeReport<S, O> {
    pub id: NodeId,
    pub state: S,
    pub status: NodeStatus,
    pub output: Option<O>,
    pub awake_rounds: u64,
    pub termination_round: Option<Round>,
}

#[derive(Debug, Clone)]
pub struct SimOutcome<S, O> {
    /// One report per graph node, in index order.
    pub nodes: Vec<NodeReport<S, O>>,
    /// Last round that was executed (`first_round - 1` if none was).
    pub last_round: Round,
    pub trace: Option<Trace>,
}

impl<S, O> SimOutcome<S, O> {
    pub fn pending(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.status != NodeStatus::Terminated)
            .count()
    }
}

#[derive(Debug, Error)]
pub enum SimError<S: fmt::Debug, O: fmt::Debug> {
    #[error("{} node(s) not terminated when the round cap was reached", .0.pending())]
    RunIncomplete(Box<SimOutcome<S, O>>),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

/// Runs `program` on `graph` until every node terminates, or until
/// `last_round` when one is configured.
pub fn run_simulation<P: NodeProgram>(
    graph: &Graph,
    program: &P,
    init: Vec<NodeInit<P::State>>,
    config: &SimConfig,
) -> Result<SimOutcome<P::State, P::Output>, SimError<P::State, P::Output>> {
    let n = graph.node_count();
    assert_eq!(init.len(), n, "one NodeInit per node");

    let mut states = Vec::with_capacity(n);
    let mut status = Vec::with_capacity(n);
    let mut wakeups: BTreeMap<Round, Vec<usize>> = BTreeMap::new();
    let mut awake: Vec<usize> = Vec::new();
    for (i, node) in init.into_iter().enumerate() {
        states.push(node.state);
        match node.wake_round {
            Some(w) if w > config.first_round => {
                status.push(NodeStatus::Sleeping { wake_round: w });
                wakeups.entry(w).or_default().push(i);
            }
            _ => {
                status.push(NodeStatus::Awake);
                awake.push(i);
            }
        }
    }
    let mut rngs: Vec<NodeRng> = graph.ids().iter().map(|&id| node_rng(config.seed, id)).collect();
    let mut outputs: Vec<Option<P::Output>> = vec![None; n];
    let mut awake_rounds = vec![0u64; n];
    let mut termination = vec![None; n];
    let mut inboxes: Vec<Vec<(NodeId, P::Msg)>> = vec![Vec::new(); n];
    let mut sent = vec![false; n];
    let mut trace = config.trace.then(Trace::default);
    let mut visit = Vec::new();
    let tracing = config.trace;
    let (mut round_msgs, mut round_nodes) = (Vec::new(), Vec::new());

    let mut round = config.first_round;
    let mut last_executed = config.first_round.saturating_sub(1);
    let stop = config.last_round.unwrap_or(Round::MAX);

    loop {
        if awake.is_empty() {
            match wakeups.keys().next() {
                Some(&w) => round = round.max(w),
                None => break,
            }
        }
        if round > stop {
            break;
        }
        if round > config.round_cap {
            return Err(SimError::RunIncomplete(Box::new(finish(
                graph, states, status, outputs, awake_rounds, termination, last_executed, trace,
            ))));
        }
        if let Some(woken) = wakeups.remove(&round) {
            for &i in &woken {
                status[i] = NodeStatus::Awake;
            }
            awake.extend(woken);
            awake.sort_unstable();
        }

        visit.clear();
        visit.extend_from_slice(&awake);
        match config.visit_order {
            VisitOrder::Ascending => {}
            VisitOrder::Descending => visit.reverse(),
            VisitOrder::Shuffled(s) => {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(mix_seed(s, round));
                visit.shuffle(&mut r);
            }
        }

        // Send sub-phase.
        for &i in &visit {
            let ctx = RoundContext {
                round,
                id: graph.id(i),
                index: i,
                graph,
            };
            let outbox = program.send(&ctx, &mut states[i], &mut rngs[i]);
            let mut post = |j: usize, msg: P::Msg| {
                let ok = deliverable(status[i], status[j]);
                if tracing {
                    round_msgs.push(TraceEvent::Message {
                        round,
                        from: graph.id(i),
                        to: graph.id(j),
                        delivered: ok,
                    });
                }
                if ok {
                    inboxes[j].push((graph.id(i), msg));
                }
            };
            sent[i] = match outbox {
                Outbox::Silent => false,
                Outbox::Broadcast(msg) => {
                    for &j in graph.neighbors(i) {
                        post(j, msg.clone());
                    }
                    true
                }
                Outbox::Directed(list) => {
                    let any = !list.is_empty();
                    for (to, msg) in list {
                        match graph.index_of(to).filter(|&j| graph.are_adjacent(i, j)) {
                            Some(j) => post(j, msg),
                            None => {
                                return Err(ProgramError::NotANeighbor {
                                    round,
                                    from: graph.id(i),
                                    to,
                                }
                                .into())
                            }
                        }
                    }
                    any
                }
            };
        }

        // Receive-and-decide sub-phase.
        let mut still_awake = Vec::with_capacity(awake.len());
        for &i in &visit {
            let id = graph.id(i);
            let ctx = RoundContext {
                round,
                id,
                index: i,
                graph,
            };
            let mut inbox = std::mem::take(&mut inboxes[i]);
            inbox.sort_by_key(|(from, _)| *from);
            let action = program.on_round(&ctx, &mut states[i], &inbox, &mut rngs[i])?;
            inbox.clear();
            inboxes[i] = inbox;
            awake_rounds[i] += 1;
            let act = match action {
                Action::Continue => {
                    still_awake.push(i);
                    if sent[i] {
                        TraceAct::Send
                    } else {
                        TraceAct::Continue
                    }
                }
                Action::Sleep(0) => return Err(ProgramError::ZeroSleep { round, node: id }.into()),
                Action::Sleep(r) => {
                    let wake_round = round + r + 1;
                    status[i] = NodeStatus::Sleeping { wake_round };
                    wakeups.entry(wake_round).or_default().push(i);
                    TraceAct::Sleep(r)
                }
                Action::Terminate(out) => {
                    status[i] = NodeStatus::Terminated;
                    outputs[i] = Some(out);
                    termination[i] = Some(round);
                    TraceAct::Terminate
                }
            };
            if tracing {
                round_nodes.push(TraceEvent::Node {
                    round,
                    node: id,
                    status: TraceStatus::Awake,
                    act,
                });
            }
        }
        if let Some(t) = trace.as_mut() {
            // Canonical order within a round, independent of visit order.
            round_msgs.sort_by_key(|e| match e {
                TraceEvent::Message { from, to, .. } => (*from, *to),
                _ => unreachable!(),
            });
            round_nodes.sort_by_key(|e| match e {
                TraceEvent::Node { node, .. } => *node,
                _ => unreachable!(),
            });
            t.events.append(&mut round_msgs);
            t.events.append(&mut round_nodes);
        }
        still_awake.sort_unstable();
        awake = still_awake;
        last_executed = round;
        round += 1;
    }

    Ok(finish(
        graph, states, status, outputs, awake_rounds, termination, last_executed, trace,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish<S, O>(
    graph: &Graph,
    states: Vec<S>,
    status: Vec<NodeStatus>,
    outputs: Vec<Option<O>>,
    awake_rounds: Vec<u64>,
    termination: Vec<Option<Round>>,
    last_round: Round,
    trace: Option<Trace>,
) -> SimOutcome<S, O> {
    let nodes = states
        .into_iter()
        .zip(status)
        .zip(outputs)
        .zip(awake_rounds.into_iter().zip(termination))
        .enumerate()
        .map(
            |(i, (((state, status), output), (awake_rounds, termination_round)))| NodeReport {
                id: graph.id(i),
                state,
                status,
                output,
                awake_rounds,
                termination_round,
            },
        )
        .collect();
    SimOutcome {
        nodes,
        last_round,
        trace,
    }
}

/// Default Las Vegas safety net: `10 * (log2 n)^14 + 100`, saturating.
pub fn default_round_cap(n: usize) -> Round {
    let l = (n.max(1) as f64).log2();
    let cap = 10.0 * l.powi(14) + 100.0;
    if cap >= Round::MAX as f64 {
        Round::MAX
    } else {
        cap as Round
    }
}

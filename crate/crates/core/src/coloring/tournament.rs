//! Class-by-class list coloring over a tournament tree of interim classes.
//!
//! Classes `0..C` are the leaves of a binary tree whose left child always
//! takes the larger half. The tree is processed left to right: each leaf has
//! one round in which its nodes greedily adopt, and each internal tree node
//! has one announce round between its two subtrees in which left-subtree
//! nodes repeat their colors to right-subtree neighbors. A node is only awake
//! for its own leaf and for the announce rounds where it has a neighbor on
//! the other side, so it is awake at most `depth + 1` times after the
//! preliminary class exchange. The result is the sequential greedy coloring
//! in interim-class order.

use crate::error::ProgramError;
use crate::graph::{Color, NodeId};
use crate::simcore::{Action, NodeProgram, NodeRng, Outbox, Round, RoundContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Duty {
    /// Preliminary round: exchange interim classes.
    Exchange,
    /// Hear colors announced by neighbors in the left sibling subtree.
    Listen,
    /// Own leaf round.
    Adopt,
    /// Repeat the adopted color to neighbors in the right sibling subtree.
    Announce,
}

/// Number of tree rounds for `classes` leaves.
pub fn tree_rounds(classes: u64) -> u64 {
    2 * classes.max(1) - 1
}

/// Depth of the tree over `classes` leaves, `ceil(log2 classes)`.
pub fn tree_depth(classes: u64) -> u32 {
    classes.max(1).next_power_of_two().trailing_zeros()
}

/// Wake-up schedule of a node of class `class` given the sorted classes of
/// its neighbors. Tree rounds start at `tree_start`.
pub fn duty_schedule(
    class: u64,
    classes: u64,
    neighbor_classes: &[u64],
    tree_start: Round,
) -> Vec<(Round, Duty)> {
    let any_in = |lo: u64, hi: u64| {
        let i = neighbor_classes.partition_point(|&c| c < lo);
        i < neighbor_classes.len() && neighbor_classes[i] < hi
    };
    let (mut lo, mut hi, mut offset) = (0u64, classes, tree_start);
    let mut duties = Vec::new();
    let mut announces = Vec::new();
    while hi - lo > 1 {
        let mid = lo + (hi - lo).div_ceil(2);
        let announce = offset + tree_rounds(mid - lo);
        if class < mid {
            if any_in(mid, hi) {
                announces.push((announce, Duty::Announce));
            }
            hi = mid;
        } else {
            if any_in(lo, mid) {
                duties.push((announce, Duty::Listen));
            }
            lo = mid;
            offset = announce + 1;
        }
    }
    duties.push((offset, Duty::Adopt));
    duties.extend(announces.into_iter().rev());
    duties
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TournamentState {
    pub list: Vec<Color>,
    pub class: u64,
    /// Colors heard from earlier classes, sorted.
    pub heard: Vec<Color>,
    pub duties: Vec<(Round, Duty)>,
    pub next: usize,
    pub adopted: Option<Color>,
}

impl TournamentState {
    pub fn new(list: Vec<Color>, class: u64) -> Self {
        Self {
            list,
            class,
            heard: Vec::new(),
            duties: Vec::new(),
            next: 0,
            adopted: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TournamentMsg {
    Class(u64),
    Adopt(Color),
}

#[derive(Debug, Clone)]
pub struct TournamentProgram {
    pub classes: u64,
    pub tree_start: Round,
}

impl TournamentProgram {
    /// Whether the preliminary exchange round (at `tree_start - 1`) is run.
    pub fn has_preliminary(&self) -> bool {
        self.classes > 1
    }

    /// Initial state. Without a preliminary round the only duty is the leaf.
    pub fn init(&self, list: Vec<Color>, class: u64) -> TournamentState {
        let mut state = TournamentState::new(list, class);
        state.duties = if self.has_preliminary() {
            vec![(self.tree_start - 1, Duty::Exchange)]
        } else {
            duty_schedule(class, self.classes, &[], self.tree_start)
        };
        state
    }

    pub fn first_round(&self) -> Round {
        self.tree_start - self.has_preliminary() as Round
    }

    pub fn last_round(&self) -> Round {
        self.tree_start + tree_rounds(self.classes) - 1
    }
}

impl NodeProgram for TournamentProgram {
    type State = TournamentState;
    type Msg = TournamentMsg;
    type Output = Color;

    fn send(&self, _: &RoundContext<'_>, state: &mut TournamentState, _: &mut NodeRng) -> Outbox<TournamentMsg> {
        match state.duties.get(state.next).map(|d| d.1) {
            Some(Duty::Exchange) => Outbox::Broadcast(TournamentMsg::Class(state.class)),
            Some(Duty::Announce) => match state.adopted {
                Some(c) => Outbox::Broadcast(TournamentMsg::Adopt(c)),
                None => Outbox::Silent,
            },
            _ => Outbox::Silent,
        }
    }

    fn on_round(
        &self,
        ctx: &RoundContext<'_>,
        state: &mut TournamentState,
        inbox: &[(NodeId, TournamentMsg)],
        _: &mut NodeRng,
    ) -> Result<Action<Color>, ProgramError> {
        let violation = |detail: String| ProgramError::InvariantViolation {
            round: ctx.round,
            node: ctx.id,
            detail,
        };
        let (round, duty) = *state
            .duties
            .get(state.next)
            .ok_or_else(|| violation("awake without a duty".into()))?;
        if round != ctx.round {
            return Err(violation(format!("duty scheduled for round {round}")));
        }
        match duty {
            Duty::Exchange => {
                let mut classes: Vec<u64> = inbox
                    .iter()
                    .filter_map(|(_, m)| match m {
                        TournamentMsg::Class(c) => Some(*c),
                        TournamentMsg::Adopt(_) => None,
                    })
                    .collect();
                if classes.contains(&state.class) {
                    return Err(violation(format!("neighbor shares interim class {}", state.class)));
                }
                classes.sort_unstable();
                state.duties = duty_schedule(state.class, self.classes, &classes, self.tree_start);
                state.next = 0;
                return Ok(Action::wake_at(ctx.round, state.duties[0].0));
            }
            Duty::Listen => {
                for (_, m) in inbox {
                    if let TournamentMsg::Adopt(c) = m {
                        state.heard.push(*c);
                    }
                }
                state.heard.sort_unstable();
                state.heard.dedup();
            }
            Duty::Adopt => {
                let free = state
                    .list
                    .iter()
                    .find(|c| state.heard.binary_search(c).is_err())
                    .copied()
                    .ok_or_else(|| violation("no free color left in the list".into()))?;
                state.adopted = Some(free);
            }
            Duty::Announce => {}
        }
        state.next += 1;
        match state.duties.get(state.next) {
            Some(&(next, _)) => Ok(Action::wake_at(ctx.round, next)),
            None => state
                .adopted
                .map(Action::Terminate)
                .ok_or_else(|| violation("schedule ended before adoption".into())),
        }
    }
}

//! Randomized color trials: each iteration is a propose round followed by a
//! resolve round.
//!
//! In the propose round a node draws `c_v`: no color with probability 1/2,
//! otherwise a uniform color of its current list, and sends the draw to all
//! neighbors. A node whose draw is a color that no neighbor drew keeps it and
//! announces it in the resolve round; every other node removes the announced
//! colors from its list and tries again in the next iteration.
//!
//! Phase 1 runs a fixed number of iterations on every uncolored node, and a
//! node that keeps its draw terminates. Phase 2 runs the same iterations only
//! on nodes whose uncolored degree is at or above a threshold, until they
//! either keep a draw or fall below the threshold; a phase-2 node that keeps
//! a draw stays alive to re-announce it when phase 3 opens.

use crate::error::ProgramError;
use crate::graph::{Color, NodeId};
use crate::simcore::{Action, NodeProgram, NodeRng, Outbox, Round, RoundContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subphase {
    Propose,
    Resolve,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase1State {
    /// Current list `L_v`; colors kept by neighbors are removed.
    pub remaining_list: Vec<Color>,
    /// This iteration's draw; `None` is the "no color" outcome.
    pub tentative: Option<Color>,
    /// Colors drawn by neighbors this iteration (`T_v`), sorted.
    pub seen: Vec<Color>,
    /// Current iteration, starting at 1.
    pub iteration: u32,
    pub subphase: Subphase,
    /// Number of neighbors that are still uncolored.
    pub live_degree: usize,
    /// Set once the node keeps its draw.
    pub adopted: Option<Color>,
}

impl Phase1State {
    pub fn new(list: Vec<Color>, live_degree: usize) -> Self {
        Self {
            remaining_list: list,
            tentative: None,
            seen: Vec::new(),
            iteration: 1,
            subphase: Subphase::Propose,
            live_degree,
            adopted: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialMsg {
    Propose(Option<Color>),
    Adopt(Color),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialMode {
    /// Phase 1: keep the draw and terminate.
    Terminate,
    /// Phase 2: keep the draw, then sleep until `handoff`; also stop once the
    /// live degree drops below `threshold`.
    Defer { threshold: usize, handoff: Round },
}

#[derive(Debug, Clone)]
pub struct TrialProgram {
    pub iterations: u32,
    pub mode: TrialMode,
}

/// Draws `c_v`: `None` with probability 1/2, else each list color with
/// probability `1 / (2 |list|)`.
pub fn draw(list: &[Color], rng: &mut NodeRng) -> Option<Color> {
    if rng.coin() {
        None
    } else {
        Some(list[rng.below(list.len())])
    }
}

impl NodeProgram for TrialProgram {
    type State = Phase1State;
    type Msg = TrialMsg;
    type Output = Color;

    fn send(
        &self,
        _ctx: &RoundContext<'_>,
        state: &mut Phase1State,
        rng: &mut NodeRng,
    ) -> Outbox<TrialMsg> {
        match state.subphase {
            Subphase::Propose => {
                state.tentative = draw(&state.remaining_list, rng);
                Outbox::Broadcast(TrialMsg::Propose(state.tentative))
            }
            Subphase::Resolve => match state.adopted {
                Some(c) => Outbox::Broadcast(TrialMsg::Adopt(c)),
                None => Outbox::Silent,
            },
        }
    }

    fn on_round(
        &self,
        ctx: &RoundContext<'_>,
        state: &mut Phase1State,
        inbox: &[(NodeId, TrialMsg)],
        _rng: &mut NodeRng,
    ) -> Result<Action<Color>, ProgramError> {
        match state.subphase {
            Subphase::Propose => {
                state.seen = inbox
                    .iter()
                    .filter_map(|(_, m)| match m {
                        TrialMsg::Propose(Some(c)) => Some(*c),
                        _ => None,
                    })
                    .collect();
                state.seen.sort_unstable();
                state.seen.dedup();
                if let Some(c) = state.tentative {
                    if state.seen.binary_search(&c).is_err() {
                        state.adopted = Some(c);
                    }
                }
                state.subphase = Subphase::Resolve;
                Ok(Action::Continue)
            }
            Subphase::Resolve => {
                if let Some(c) = state.adopted {
                    return Ok(match self.mode {
                        TrialMode::Terminate => Action::Terminate(c),
                        TrialMode::Defer { handoff, .. } => Action::wake_at(ctx.round, handoff),
                    });
                }
                for (_, m) in inbox {
                    if let TrialMsg::Adopt(c) = m {
                        state.live_degree -= 1;
                        if let Ok(pos) = state.remaining_list.binary_search(c) {
                            state.remaining_list.remove(pos);
                        }
                    }
                }
                if state.remaining_list.len() < state.live_degree + 1 {
                    return Err(ProgramError::InvariantViolation {
                        round: ctx.round,
                        node: ctx.id,
                        detail: format!(
                            "list of {} colors with {} uncolored neighbors",
                            state.remaining_list.len(),
                            state.live_degree
                        ),
                    });
                }
                state.tentative = None;
                state.subphase = Subphase::Propose;
                state.iteration += 1;
                if let TrialMode::Defer { threshold, handoff } = self.mode {
                    if state.live_degree < threshold || state.iteration > self.iterations {
                        return Ok(Action::wake_at(ctx.round, handoff));
                    }
                }
                // In phase 1 the segment ends right after the last iteration.
                Ok(Action::Continue)
            }
        }
    }
}

//! Deterministic O(Δ²)-coloring from unique identifiers by polynomial color
//! reduction.
//!
//! A color `x < q^(d+1)` is read as the polynomial over GF(q) whose
//! coefficients are the base-`q` digits of `x`. Two distinct polynomials of
//! degree at most `d` agree on at most `d` points, so with `q > Δ·d` a node
//! can always find an evaluation point `a` where it differs from all of its
//! neighbors; its new color is `a·q + p_x(a)`, from a palette of `q²`.
//! Every node derives the same step sequence from the id bit size and the
//! degree bound, so one exchange round per step suffices.

use crate::error::ProgramError;
use crate::graph::{Color, NodeId};
use crate::simcore::{Action, NodeProgram, NodeRng, Outbox, Round, RoundContext};

/// Palette bound constant: the reduction always ends at `≤ 9·Δ²` colors.
pub const PALETTE_CONSTANT: u128 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionStep {
    /// Field size, a prime.
    pub q: u64,
    /// Polynomial degree.
    pub degree: u32,
}

impl ReductionStep {
    pub fn palette(&self) -> u128 {
        self.q as u128 * self.q as u128
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterimSchedule {
    pub steps: Vec<ReductionStep>,
    /// Number of interim colors after the last step.
    pub palette: u128,
    pub max_degree: usize,
}

fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x.is_multiple_of(2) {
        return x == 2;
    }
    let mut f = 3u64;
    while f * f <= x {
        if x.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

fn next_prime(mut x: u64) -> u64 {
    while !is_prime(x) {
        x += 1;
    }
    x
}

fn pow_sat(base: u64, exp: u32) -> u128 {
    (base as u128).checked_pow(exp).unwrap_or(u128::MAX)
}

/// Smallest `r` with `r^k >= m`.
fn int_root_ceil(m: u128, k: u32) -> u64 {
    let mut r = (m as f64).powf(1.0 / k as f64).floor().max(1.0) as u64;
    while r > 1 && pow_sat(r - 1, k) >= m {
        r -= 1;
    }
    while pow_sat(r, k) < m {
        r += 1;
    }
    r
}

fn best_step(m: u128, max_degree: usize) -> ReductionStep {
    (1..=64u32)
        .map(|d| {
            let floor = (max_degree as u64 * d as u64 + 1).max(int_root_ceil(m, d + 1));
            let mut q = next_prime(floor);
            while pow_sat(q, d + 1) < m {
                q = next_prime(q + 1);
            }
            ReductionStep { q, degree: d }
        })
        .min_by_key(|s| (s.palette(), s.degree))
        .expect("non-empty range")
}

/// Reduction steps for identifiers of `id_bits` bits and maximum degree
/// `max_degree`. Steps are taken while they strictly shrink the palette.
pub fn interim_schedule(id_bits: u32, max_degree: usize) -> InterimSchedule {
    if max_degree == 0 {
        return InterimSchedule {
            steps: Vec::new(),
            palette: 1,
            max_degree,
        };
    }
    let mut m: u128 = 1u128 << id_bits;
    let mut steps = Vec::new();
    loop {
        let step = best_step(m, max_degree);
        if step.palette() >= m {
            break;
        }
        m = step.palette();
        steps.push(step);
    }
    InterimSchedule {
        steps,
        palette: m,
        max_degree,
    }
}

fn eval(color: u64, step: ReductionStep, a: u64) -> u64 {
    let q = step.q as u128;
    let mut x = color as u128;
    let (mut acc, mut pow) = (0u128, 1u128);
    for _ in 0..=step.degree {
        acc = (acc + (x % q) * pow) % q;
        pow = pow * a as u128 % q;
        x /= q;
    }
    acc as u64
}

/// One reduction step for a node holding `own` whose neighbors hold
/// `neighbors` (all different from `own`). Returns `None` only if the input
/// coloring was not proper or exceeded the step's degree bound.
pub fn reduce_color(step: ReductionStep, own: u64, neighbors: &[u64]) -> Option<u64> {
    (0..step.q).find_map(|a| {
        let mine = eval(own, step, a);
        neighbors
            .iter()
            .all(|&y| eval(y, step, a) != mine)
            .then_some(a * step.q + mine)
    })
}

/// Per-node state of the interim stage of phase 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InterimRole {
    /// A node colored in phase 2 that still has to tell its neighbors.
    Announcer(Color),
    Residual { list: Vec<Color>, color: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterimMsg {
    Adopt(Color),
    Color(u64),
}

/// Runs `exchange_rounds` consecutive all-awake rounds starting at
/// `first_round`. The first one is the phase-3 opening: announcers publish
/// their colors and terminate, and residual nodes learn which neighbors are
/// still uncolored. Reduction step `j` is applied at the end of exchange
/// round `j`.
#[derive(Debug, Clone)]
pub struct InterimProgram<'a> {
    pub schedule: &'a InterimSchedule,
    pub first_round: Round,
    pub exchange_rounds: u64,
    /// Residual nodes without uncolored neighbors take their smallest color
    /// right after the opening round.
    pub adopt_isolated: bool,
}

impl<'a> InterimProgram<'a> {
    /// Opening round needed when there are announcements to deliver or the
    /// degree bound is positive.
    pub fn exchange_rounds_for(schedule: &InterimSchedule, announcements: bool) -> u64 {
        let opening = announcements || schedule.max_degree > 0;
        (schedule.steps.len() as u64).max(opening as u64)
    }

    /// Initial color of a residual node.
    pub fn initial_color(schedule: &InterimSchedule, id: NodeId) -> u64 {
        if schedule.max_degree == 0 {
            0
        } else {
            id.0
        }
    }
}

impl NodeProgram for InterimProgram<'_> {
    type State = InterimRole;
    type Msg = InterimMsg;
    type Output = Color;

    fn send(&self, _: &RoundContext<'_>, state: &mut InterimRole, _: &mut NodeRng) -> Outbox<InterimMsg> {
        Outbox::Broadcast(match state {
            InterimRole::Announcer(c) => InterimMsg::Adopt(*c),
            InterimRole::Residual { color, .. } => InterimMsg::Color(*color),
        })
    }

    fn on_round(
        &self,
        ctx: &RoundContext<'_>,
        state: &mut InterimRole,
        inbox: &[(NodeId, InterimMsg)],
        _: &mut NodeRng,
    ) -> Result<Action<Color>, ProgramError> {
        let (list, color) = match state {
            InterimRole::Announcer(c) => return Ok(Action::Terminate(*c)),
            InterimRole::Residual { list, color } => (list, color),
        };
        let j = ctx.round - self.first_round;
        let violation = |detail: String| ProgramError::InvariantViolation {
            round: ctx.round,
            node: ctx.id,
            detail,
        };
        let neighbor_colors: Vec<u64> = inbox
            .iter()
            .filter_map(|(_, m)| match m {
                InterimMsg::Color(c) => Some(*c),
                InterimMsg::Adopt(_) => None,
            })
            .collect();
        if j == 0 {
            for (_, m) in inbox {
                if let InterimMsg::Adopt(c) = m {
                    if let Ok(pos) = list.binary_search(c) {
                        list.remove(pos);
                    }
                }
            }
            if list.len() < neighbor_colors.len() + 1 {
                return Err(violation(format!(
                    "{} colors left for {} uncolored neighbors",
                    list.len(),
                    neighbor_colors.len()
                )));
            }
            if self.adopt_isolated && neighbor_colors.is_empty() {
                return Ok(Action::Terminate(list[0]));
            }
        }
        if let Some(&step) = self.schedule.steps.get(j as usize) {
            *color = reduce_color(step, *color, &neighbor_colors)
                .ok_or_else(|| violation(format!("no evaluation point for color {color}")))?;
        }
        Ok(Action::Continue)
    }
}

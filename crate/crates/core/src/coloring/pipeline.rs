use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Color, Coloring, ColoringInstance, Graph, NodeId};
use crate::metrics::{self, NodeMetrics, Phase, RunMetrics};
use crate::simcore::{
    mix_seed, run_simulation, NodeInit, NodeProgram, NodeReport, Round, SimConfig, SimError,
    SimOutcome, Trace,
};

use super::interim::{interim_schedule, InterimProgram, InterimRole, InterimSchedule};
use super::tournament::{tree_rounds, TournamentProgram};
use super::trial::{Phase1State, TrialMode, TrialProgram};
use super::{PartialRun, Phase3Stats, PipelineConfig, PipelineRun};

/// Accumulates per-node accounting across simulation segments.
struct Ledger<'a> {
    instance: &'a ColoringInstance,
    records: BTreeMap<NodeId, NodeMetrics>,
    coloring: Coloring,
    iterations: u32,
    round_cap: Round,
    last_round: Round,
    phase2_incomplete: bool,
    trace: Option<Trace>,
}

impl<'a> Ledger<'a> {
    fn new(instance: &'a ColoringInstance, iterations: u32, round_cap: Round, trace: bool) -> Self {
        Self {
            instance,
            records: instance
                .graph()
                .ids()
                .iter()
                .map(|&id| (id, NodeMetrics::default()))
                .collect(),
            coloring: Coloring::new(),
            iterations,
            round_cap,
            last_round: 0,
            phase2_incomplete: false,
            trace: trace.then(Trace::default),
        }
    }

    fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    fn mark_colored(&mut self, id: NodeId, color: Color, phase: Phase) {
        self.coloring.assign(id, color);
        let m = self.records.get_mut(&id).expect("node of the instance");
        m.colored_in.get_or_insert(phase);
    }

    fn absorb<S>(&mut self, nodes: &[NodeReport<S, Color>], phase: Phase, last_round: Round, trace: Option<Trace>) {
        for r in nodes {
            let m = self.records.get_mut(&r.id).expect("node of the instance");
            m.charge(phase, r.awake_rounds);
            if r.termination_round.is_some() {
                m.termination_round = r.termination_round;
            }
            if let Some(c) = r.output {
                self.mark_colored(r.id, c, phase);
            }
        }
        self.last_round = self.last_round.max(last_round);
        if let (Some(all), Some(t)) = (self.trace.as_mut(), trace) {
            all.append(t);
        }
    }

    fn run<P: NodeProgram<Output = Color>>(
        &mut self,
        graph: &Graph,
        program: &P,
        init: Vec<NodeInit<P::State>>,
        config: &SimConfig,
        phase: Phase,
    ) -> Result<SimOutcome<P::State, Color>> {
        match run_simulation(graph, program, init, config) {
            Ok(mut out) => {
                let trace = out.trace.take();
                self.absorb(&out.nodes, phase, out.last_round, trace);
                Ok(out)
            }
            Err(SimError::Program(e)) => Err(e.into()),
            Err(SimError::RunIncomplete(mut out)) => {
                let trace = out.trace.take();
                self.absorb(&out.nodes, phase, out.last_round, trace);
                let metrics = self.metrics()?;
                Err(Error::RunIncomplete {
                    round_cap: self.round_cap,
                    pending: self.instance.node_count() - self.coloring.len(),
                    partial: Box::new(PartialRun {
                        coloring: self.coloring.clone(),
                        metrics,
                    }),
                })
            }
        }
    }

    fn metrics(&self) -> Result<RunMetrics> {
        metrics::collect(
            self.records.clone(),
            &self.coloring,
            self.instance,
            self.iterations,
            self.last_round,
            self.phase2_incomplete,
        )
    }
}

fn restrict<S>(
    instance: &ColoringInstance,
    nodes: &[NodeReport<S, Color>],
    keep: impl Fn(&NodeReport<S, Color>) -> bool,
    list: impl Fn(usize, &S) -> Vec<Color>,
) -> Result<ColoringInstance> {
    instance
        .restrict(|i| keep(&nodes[i]), |i| list(i, &nodes[i].state))
        .map_err(|e| Error::Internal(format!("residual instance is not admissible: {e}")))
}

fn trial_init(instance: &ColoringInstance, i: usize) -> Phase1State {
    Phase1State::new(instance.list(i).to_vec(), instance.graph().degree(i))
}

/// Phase 1 on rounds `1..=2K`; returns the residual instance.
fn segment1(ledger: &mut Ledger<'_>, instance: &ColoringInstance, k: u32, seed: u64) -> Result<ColoringInstance> {
    let graph = instance.graph();
    let init = (0..graph.node_count())
        .map(|i| NodeInit::awake(trial_init(instance, i)))
        .collect();
    let program = TrialProgram {
        iterations: k,
        mode: TrialMode::Terminate,
    };
    let config = SimConfig {
        last_round: Some(2 * k as Round),
        trace: ledger.tracing(),
        ..SimConfig::new(seed, ledger.round_cap)
    };
    let out = ledger.run(graph, &program, init, &config, Phase::One)?;
    restrict(
        instance,
        &out.nodes,
        |r| r.output.is_none(),
        |_, s| s.remaining_list.clone(),
    )
}

struct Segment2 {
    /// Final trial state per node of the input instance, in index order.
    states: Vec<Phase1State>,
    /// Most iterations run by a single node.
    iterations: u64,
}

/// Trials restricted to nodes of degree at least `threshold`, on rounds
/// `first..first + window`. Low nodes sleep through the window. A node that
/// keeps a color sleeps until `first + window` without telling anyone.
fn segment2(
    ledger: &mut Ledger<'_>,
    residual: &ColoringInstance,
    threshold: usize,
    cap: u32,
    seed: u64,
    first: Round,
) -> Result<Segment2> {
    let graph = residual.graph();
    let window = 2 * cap as Round;
    let handoff = first + window;
    let high = |i: usize| graph.degree(i) >= threshold;
    if window == 0 || !(0..graph.node_count()).any(high) {
        return Ok(Segment2 {
            states: (0..graph.node_count()).map(|i| trial_init(residual, i)).collect(),
            iterations: 0,
        });
    }
    let init = (0..graph.node_count())
        .map(|i| {
            let state = trial_init(residual, i);
            if high(i) {
                NodeInit::awake(state)
            } else {
                NodeInit::sleeping_until(state, handoff)
            }
        })
        .collect();
    let program = TrialProgram {
        iterations: cap,
        mode: TrialMode::Defer { threshold, handoff },
    };
    let config = SimConfig {
        first_round: first,
        last_round: Some(handoff - 1),
        trace: ledger.tracing(),
        ..SimConfig::new(seed, ledger.round_cap)
    };
    let out = ledger.run(graph, &program, init, &config, Phase::Two)?;
    let iterations = out.nodes.iter().map(|r| r.awake_rounds / 2).max().unwrap_or(0);
    let states: Vec<Phase1State> = out.nodes.into_iter().map(|r| r.state).collect();
    for (i, s) in states.iter().enumerate() {
        if let Some(c) = s.adopted {
            ledger.mark_colored(graph.id(i), c, Phase::Two);
        }
    }
    Ok(Segment2 { states, iterations })
}

/// Whether nodes left uncolored by phase 2 still have `threshold` or more
/// uncolored neighbors.
fn above_threshold(graph: &Graph, states: &[Phase1State], threshold: usize) -> bool {
    let rest = graph.induced(|i| states[i].adopted.is_none());
    rest.node_count() > 0 && rest.max_degree() >= threshold
}

/// Degree bound and reduction schedule for the nodes left after phase 2.
fn phase3_schedule(graph: &Graph, states: &[Phase1State]) -> InterimSchedule {
    let rest = graph.induced(|i| states[i].adopted.is_none());
    interim_schedule(graph.id_bit_size(), rest.max_degree())
}

fn palette_classes(schedule: &InterimSchedule) -> Result<u64> {
    u64::try_from(schedule.palette)
        .map_err(|_| Error::Internal(format!("interim palette {} does not fit in 64 bits", schedule.palette)))
}

/// Runs the whole pipeline on one instance.
pub fn run_pipeline(instance: &ColoringInstance, config: &PipelineConfig) -> Result<PipelineRun> {
    let n = instance.node_count();
    let k = config.iterations(n);
    let threshold = config.threshold(n);
    if k == 0 || threshold == 0 {
        return Err(Error::Usage("k1 and the phase-2 threshold must be at least 1".into()));
    }
    let mut ledger = Ledger::new(instance, k, config.round_cap(n), config.trace);
    let mut phase3 = Phase3Stats::default();

    let residual1 = segment1(&mut ledger, instance, k, config.seed)?;
    let phase2_start = 2 * k as Round + 1;
    let cap2 = if threshold < n { config.phase2_iteration_cap } else { 0 };
    let seg2 = segment2(
        &mut ledger,
        &residual1,
        threshold,
        cap2,
        mix_seed(config.seed, 2),
        phase2_start,
    )?;
    let graph1 = residual1.graph();
    ledger.phase2_incomplete = above_threshold(graph1, &seg2.states, threshold);
    let opening = phase2_start + 2 * cap2 as Round;

    if config.phase3_enabled && graph1.node_count() > 0 {
        let schedule = phase3_schedule(graph1, &seg2.states);
        phase3.residual_max_degree = schedule.max_degree;
        phase3.reduction_steps = schedule.steps.len();
        phase3.classes = palette_classes(&schedule)?;
        let exchange = InterimProgram::exchange_rounds_for(&schedule, cap2 > 0);

        // Interim coloring, preceded by the phase-2 announcements.
        let (tournament_instance, classes) = if exchange > 0 {
            let program = InterimProgram {
                schedule: &schedule,
                first_round: opening,
                exchange_rounds: exchange,
                adopt_isolated: true,
            };
            let init = seg2
                .states
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    NodeInit::awake(match s.adopted {
                        Some(c) => InterimRole::Announcer(c),
                        None => InterimRole::Residual {
                            list: s.remaining_list.clone(),
                            color: InterimProgram::initial_color(&schedule, graph1.id(i)),
                        },
                    })
                })
                .collect();
            let sim = SimConfig {
                first_round: opening,
                last_round: Some(opening + exchange - 1),
                trace: ledger.tracing(),
                ..SimConfig::new(config.seed, ledger.round_cap)
            };
            let out = ledger.run(graph1, &program, init, &sim, Phase::Three)?;
            let classes: Vec<u64> = out
                .nodes
                .iter()
                .filter(|r| r.termination_round.is_none())
                .map(|r| match &r.state {
                    InterimRole::Residual { color, .. } => *color,
                    InterimRole::Announcer(_) => unreachable!("announcers terminate in the opening round"),
                })
                .collect();
            let inst = restrict(
                &residual1,
                &out.nodes,
                |r| r.termination_round.is_none(),
                |_, s| match s {
                    InterimRole::Residual { list, .. } => list.clone(),
                    InterimRole::Announcer(_) => Vec::new(),
                },
            )?;
            (inst, classes)
        } else {
            let classes = vec![0; graph1.node_count()];
            let inst = residual1
                .restrict(|_| true, |i| seg2.states[i].remaining_list.clone())
                .map_err(|e| Error::Internal(e.to_string()))?;
            (inst, classes)
        };

        let tg = tournament_instance.graph();
        phase3.tournament_nodes = tg.node_count();
        if tg.node_count() > 0 {
            let program = TournamentProgram {
                classes: phase3.classes,
                tree_start: opening + exchange + (phase3.classes > 1) as Round,
            };
            let init = (0..tg.node_count())
                .map(|i| NodeInit::awake(program.init(tournament_instance.list(i).to_vec(), classes[i])))
                .collect();
            let sim = SimConfig {
                first_round: program.first_round(),
                trace: ledger.tracing(),
                ..SimConfig::new(config.seed, ledger.round_cap)
            };
            ledger.run(tg, &program, init, &sim, Phase::Three)?;
        }
    }

    let metrics = ledger.metrics()?;
    Ok(PipelineRun {
        coloring: ledger.coloring,
        metrics,
        trace: ledger.trace,
        phase3,
    })
}

#[derive(Debug, Clone)]
pub struct Phase1Result {
    pub coloring: Coloring,
    /// Uncolored nodes with their pruned lists.
    pub residual: ColoringInstance,
    pub metrics: RunMetrics,
}

/// `k` iterations of randomized color trials on every node.
pub fn phase1(instance: &ColoringInstance, k: u32, seed: u64) -> Result<Phase1Result> {
    if k == 0 {
        return Err(Error::Usage("phase 1 needs at least one iteration".into()));
    }
    let mut ledger = Ledger::new(instance, k, 2 * k as Round, false);
    let residual = segment1(&mut ledger, instance, k, seed)?;
    Ok(Phase1Result {
        metrics: ledger.metrics()?,
        coloring: ledger.coloring,
        residual,
    })
}

#[derive(Debug, Clone)]
pub struct Phase2Result {
    pub coloring: Coloring,
    /// Uncolored nodes with lists pruned by the colors taken in this phase.
    pub residual: ColoringInstance,
    pub metrics: RunMetrics,
    /// Some uncolored node still has `threshold` or more uncolored neighbors.
    pub incomplete: bool,
    /// Most iterations any node took part in.
    pub iterations: u64,
}

/// Degree reduction: trials among nodes of degree at least `threshold`.
/// The colors taken are applied to the neighbors' lists directly.
pub fn phase2_degree_reduction(
    residual: &ColoringInstance,
    threshold: usize,
    iteration_cap: u32,
    seed: u64,
) -> Result<Phase2Result> {
    if threshold == 0 {
        return Err(Error::Usage("the phase-2 threshold must be at least 1".into()));
    }
    let mut ledger = Ledger::new(residual, 0, Round::MAX, false);
    let seg = segment2(&mut ledger, residual, threshold, iteration_cap, seed, 1)?;
    let graph = residual.graph();
    ledger.phase2_incomplete = above_threshold(graph, &seg.states, threshold);
    let next = residual
        .restrict(
            |i| seg.states[i].adopted.is_none(),
            |i| {
                let taken: Vec<Color> = graph
                    .neighbors(i)
                    .iter()
                    .filter_map(|&j| seg.states[j].adopted)
                    .collect();
                seg.states[i]
                    .remaining_list
                    .iter()
                    .copied()
                    .filter(|c| !taken.contains(c))
                    .collect()
            },
        )
        .map_err(|e| Error::Internal(format!("residual instance is not admissible: {e}")))?;
    Ok(Phase2Result {
        metrics: ledger.metrics()?,
        incomplete: ledger.phase2_incomplete,
        coloring: ledger.coloring,
        residual: next,
        iterations: seg.iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterimColoring {
    pub colors: BTreeMap<NodeId, u64>,
    /// Every color is below this bound.
    pub palette: u128,
    /// Rounds spent, all nodes awake in each.
    pub rounds: u64,
}

/// Deterministic proper coloring with at most `9·Δ²` colors (one color when
/// there are no edges).
pub fn phase3_interim_coloring(residual: &ColoringInstance) -> Result<InterimColoring> {
    let graph = residual.graph();
    let schedule = interim_schedule(graph.id_bit_size(), graph.max_degree());
    let exchange = InterimProgram::exchange_rounds_for(&schedule, false);
    let program = InterimProgram {
        schedule: &schedule,
        first_round: 1,
        exchange_rounds: exchange,
        adopt_isolated: false,
    };
    let init = (0..graph.node_count())
        .map(|i| {
            NodeInit::awake(InterimRole::Residual {
                list: residual.list(i).to_vec(),
                color: InterimProgram::initial_color(&schedule, graph.id(i)),
            })
        })
        .collect();
    let config = SimConfig {
        last_round: Some(exchange),
        ..SimConfig::new(0, Round::MAX)
    };
    let out = run_simulation(graph, &program, init, &config).map_err(|e| match e {
        SimError::Program(p) => Error::Program(p),
        SimError::RunIncomplete(_) => Error::Internal("interim coloring hit the round cap".into()),
    })?;
    let colors = out
        .nodes
        .iter()
        .map(|r| match r.state {
            InterimRole::Residual { color, .. } => Ok((r.id, color)),
            InterimRole::Announcer(_) => Err(Error::Internal("unexpected announcer".into())),
        })
        .collect::<Result<_>>()?;
    Ok(InterimColoring {
        colors,
        palette: schedule.palette,
        rounds: exchange,
    })
}

#[derive(Debug, Clone)]
pub struct TournamentRun {
    pub coloring: Coloring,
    pub classes: u64,
    /// Awake rounds per node, preliminary round included.
    pub awake: BTreeMap<NodeId, u64>,
    /// Rounds from the preliminary exchange to the last leaf.
    pub rounds: u64,
    pub trace: Trace,
}

/// Tournament over the classes of `interim`, starting at round 1.
pub fn phase3_tournament_reduction(residual: &ColoringInstance, interim: &InterimColoring) -> Result<TournamentRun> {
    let graph = residual.graph();
    let classes = u64::try_from(interim.palette)
        .map_err(|_| Error::Usage("interim palette does not fit in 64 bits".into()))?;
    let mut class_of = Vec::with_capacity(graph.node_count());
    for &id in graph.ids() {
        match interim.colors.get(&id) {
            Some(&c) if (c as u128) < interim.palette => class_of.push(c),
            Some(&c) => return Err(Error::Usage(format!("interim color {c} of node {id} is outside the palette"))),
            None => return Err(Error::Usage(format!("node {id} has no interim color"))),
        }
    }
    let program = TournamentProgram {
        classes,
        tree_start: 1 + (classes > 1) as Round,
    };
    let init = (0..graph.node_count())
        .map(|i| NodeInit::awake(program.init(residual.list(i).to_vec(), class_of[i])))
        .collect();
    let config = SimConfig {
        first_round: program.first_round(),
        trace: true,
        ..SimConfig::new(0, Round::MAX)
    };
    let out = run_simulation(graph, &program, init, &config).map_err(|e| match e {
        SimError::Program(p) => Error::Program(p),
        SimError::RunIncomplete(_) => Error::Internal("tournament hit the round cap".into()),
    })?;
    let mut coloring = Coloring::new();
    let mut awake = BTreeMap::new();
    for r in &out.nodes {
        let c = r
            .output
            .ok_or_else(|| Error::Internal(format!("node {} finished without a color", r.id)))?;
        coloring.assign(r.id, c);
        awake.insert(r.id, r.awake_rounds);
    }
    Ok(TournamentRun {
        coloring,
        classes,
        awake,
        rounds: tree_rounds(classes) + program.has_preliminary() as u64,
        trace: out.trace.unwrap_or_default(),
    })
}

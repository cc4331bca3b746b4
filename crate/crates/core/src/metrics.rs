//! Awake/round complexity accounting and validity verdicts.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::{Coloring, ColoringInstance, NodeId, Validity};
use crate::simcore::Round;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    One,
    Two,
    Three,
}

impl Phase {
    pub fn index(self) -> usize {
        match self {
            Phase::One => 0,
            Phase::Two => 1,
            Phase::Three => 2,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeMetrics {
    /// Awake rounds, terminating round included.
    pub awake_rounds: u64,
    pub awake_by_phase: [u64; 3],
    pub termination_round: Option<Round>,
    /// Phase whose procedure gave the node its color.
    pub colored_in: Option<Phase>,
}

impl NodeMetrics {
    pub fn charge(&mut self, phase: Phase, rounds: u64) {
        self.awake_by_phase[phase.index()] += rounds;
        self.awake_rounds += rounds;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMetrics {
    pub per_node: BTreeMap<NodeId, NodeMetrics>,
    pub worst_case_awake: u64,
    pub average_awake: Ratio<u64>,
    /// Last round in which any node was active.
    pub total_rounds: Round,
    /// `decay_histogram[i - 1]` is `X_i`: nodes colored by phase 1 after
    /// being awake for `2i - 1` or `2i` rounds.
    pub decay_histogram: Vec<u64>,
    pub validity: Validity,
    pub phase2_incomplete: bool,
}

impl RunMetrics {
    pub fn node_count(&self) -> usize {
        self.per_node.len()
    }

    /// Nodes not yet colored by phase 1 after `i` iterations.
    pub fn uncolored_after(&self, i: usize) -> u64 {
        let done: u64 = self.decay_histogram.iter().take(i).sum();
        self.per_node.len() as u64 - done
    }

    pub fn average_awake_f64(&self) -> f64 {
        *self.average_awake.numer() as f64 / *self.average_awake.denom() as f64
    }

    pub fn worst_awake_in(&self, phase: Phase) -> u64 {
        self.per_node
            .values()
            .map(|m| m.awake_by_phase[phase.index()])
            .max()
            .unwrap_or(0)
    }
}

/// Six-digit decimal rendering of an exact ratio.
pub fn decimal6(r: &Ratio<u64>) -> String {
    let (n, d) = (*r.numer() as u128, *r.denom() as u128);
    let scaled = (n * 1_000_000 * 2 + d) / (2 * d);
    format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
}

/// Builds run metrics from per-node accounting. `iterations` is the phase-1
/// budget, which fixes the length of the decay histogram; `last_round` is the
/// last executed round (relevant for runs that did not complete).
pub fn collect(
    records: BTreeMap<NodeId, NodeMetrics>,
    coloring: &Coloring,
    instance: &ColoringInstance,
    iterations: u32,
    last_round: Round,
    phase2_incomplete: bool,
) -> Result<RunMetrics> {
    let graph = instance.graph();
    if records.len() != graph.node_count() || records.keys().any(|&v| !graph.contains(v)) {
        return Err(Error::Internal(
            "accounting records do not match the instance's nodes".into(),
        ));
    }
    if let Some((v, _)) = coloring.iter().find(|&(v, _)| {
        records
            .get(&v)
            .is_none_or(|m| m.colored_in.is_none())
    }) {
        return Err(Error::Internal(format!("node {v} is colored but has no coloring phase")));
    }
    let worst_case_awake = records.values().map(|m| m.awake_rounds).max().unwrap_or(0);
    let total_awake: u64 = records.values().map(|m| m.awake_rounds).sum();
    let average_awake = Ratio::new(total_awake, (records.len() as u64).max(1));
    let total_rounds = records
        .values()
        .filter_map(|m| m.termination_round)
        .chain(std::iter::once(last_round))
        .max()
        .unwrap_or(0);
    let mut decay_histogram = vec![0u64; iterations as usize];
    for m in records.values() {
        if m.colored_in == Some(Phase::One) {
            let i = m.awake_by_phase[0].div_ceil(2) as usize;
            if (1..=decay_histogram.len()).contains(&i) {
                decay_histogram[i - 1] += 1;
            } else {
                return Err(Error::Internal(format!(
                    "phase-1 node awake for {} rounds with a budget of {iterations} iterations",
                    m.awake_by_phase[0]
                )));
            }
        }
    }
    Ok(RunMetrics {
        validity: coloring.verdict(instance),
        per_node: records,
        worst_case_awake,
        average_awake,
        total_rounds,
        decay_histogram,
        phase2_incomplete,
    })
}

/// Distribution summary of one numeric field across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub p50: f64,
    pub p95: f64,
}

impl FieldSummary {
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty());
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            p50: nearest_rank(&sorted, 50.0),
            p95: nearest_rank(&sorted, 95.0),
        }
    }
}

/// Nearest-rank percentile of ascending `sorted`.
pub fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub worst_awake: FieldSummary,
    pub average_awake: FieldSummary,
    pub total_rounds: FieldSummary,
    pub all_valid: bool,
    pub phase2_incomplete_runs: usize,
}

pub fn aggregate(runs: &[RunMetrics]) -> Result<Summary> {
    if runs.is_empty() {
        return Err(Error::Usage("cannot aggregate zero runs".into()));
    }
    let field = |f: &dyn Fn(&RunMetrics) -> f64| {
        FieldSummary::of(&runs.iter().map(f).collect::<Vec<_>>())
    };
    Ok(Summary {
        runs: runs.len(),
        worst_awake: field(&|r| r.worst_case_awake as f64),
        average_awake: field(&|r| r.average_awake_f64()),
        total_rounds: field(&|r| r.total_rounds as f64),
        all_valid: runs.iter().all(|r| r.validity == Validity::ProperTotal),
        phase2_incomplete_runs: runs.iter().filter(|r| r.phase2_incomplete).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, make_default_instance, Color};

    fn fake(worst: u64) -> RunMetrics {
        RunMetrics {
            per_node: BTreeMap::new(),
            worst_case_awake: worst,
            average_awake: Ratio::new(worst, 2),
            total_rounds: worst * 2,
            decay_histogram: vec![],
            validity: Validity::ProperTotal,
            phase2_incomplete: false,
        }
    }

    fn record(awake: u64, term: Round, phase: Phase) -> NodeMetrics {
        let mut m = NodeMetrics::default();
        m.charge(phase, awake);
        m.termination_round = Some(term);
        m.colored_in = Some(phase);
        m
    }

    #[test]
    fn single_node() {
        let inst = make_default_instance(build_graph(&[], &[0]).unwrap());
        let mut c = Coloring::new();
        c.assign(NodeId(0), Color(1));
        let recs = BTreeMap::from([(NodeId(0), record(1, 1, Phase::Three))]);
        let m = collect(recs, &c, &inst, 1, 1, false).unwrap();
        assert_eq!((m.worst_case_awake, m.total_rounds), (1, 1));
        assert_eq!(m.average_awake, Ratio::from_integer(1));
        assert_eq!(m.validity, Validity::ProperTotal);
    }

    #[test]
    fn k3_average_and_histogram() {
        let inst = make_default_instance(build_graph(&[(0, 1), (1, 2), (0, 2)], &[0, 1, 2]).unwrap());
        let mut c = Coloring::new();
        for v in 0..3 {
            c.assign(NodeId(v), Color(v as u32 + 1));
        }
        let recs = BTreeMap::from([
            (NodeId(0), record(2, 2, Phase::One)),
            (NodeId(1), record(4, 4, Phase::One)),
            (NodeId(2), record(5, 9, Phase::Three)),
        ]);
        let m = collect(recs, &c, &inst, 3, 9, false).unwrap();
        assert_eq!(m.average_awake, Ratio::new(11, 3));
        assert_eq!(m.decay_histogram, vec![1, 1, 0]);
        assert_eq!(m.uncolored_after(1), 2);
        assert_eq!(m.uncolored_after(3), 1);
        assert_eq!(decimal6(&m.average_awake), "3.666667");
        assert!(m.average_awake <= Ratio::from_integer(m.worst_case_awake));
        assert!(m.worst_case_awake <= m.total_rounds);
    }

    #[test]
    fn improper_coloring_is_invalid() {
        let inst = make_default_instance(build_graph(&[(0, 1)], &[0, 1]).unwrap());
        let mut c = Coloring::new();
        c.assign(NodeId(0), Color(1));
        c.assign(NodeId(1), Color(1));
        let recs = BTreeMap::from([
            (NodeId(0), record(2, 2, Phase::One)),
            (NodeId(1), record(2, 2, Phase::One)),
        ]);
        let m = collect(recs, &c, &inst, 2, 2, false).unwrap();
        assert_eq!(m.validity, Validity::Invalid);
    }

    #[test]
    fn mismatched_records_are_rejected() {
        let inst = make_default_instance(build_graph(&[(0, 1)], &[0, 1]).unwrap());
        let recs = BTreeMap::from([(NodeId(0), record(2, 2, Phase::One))]);
        assert!(matches!(
            collect(recs, &Coloring::new(), &inst, 1, 2, false),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn aggregation() {
        assert!(matches!(aggregate(&[]), Err(Error::Usage(_))));
        let one = aggregate(&[fake(3)]).unwrap();
        assert_eq!(one.worst_awake.max, 3.0);
        assert_eq!(one.worst_awake.mean, 3.0);
        let two = aggregate(&[fake(3), fake(5)]).unwrap();
        assert_eq!((two.worst_awake.max, two.worst_awake.mean), (5.0, 4.0));
        let hundred: Vec<_> = (1..=100).rev().map(fake).collect();
        assert_eq!(aggregate(&hundred).unwrap().worst_awake.p95, 95.0);
    }

    #[test]
    fn six_digit_rounding() {
        assert_eq!(decimal6(&Ratio::new(2, 3)), "0.666667");
        assert_eq!(decimal6(&Ratio::new(7, 1)), "7.000000");
        assert_eq!(decimal6(&Ratio::new(1, 8)), "0.125000");
    }
}

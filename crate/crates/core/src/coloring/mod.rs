//! Three-phase randomized (deg+1)-list-coloring in the sleeping model.
//!
//! 1. A fixed number `K` of randomized color trials on every node.
//! 2. Further trials restricted to the nodes whose uncolored degree is still
//!    at or above a threshold, until the uncolored graph falls below it.
//! 3. A deterministic finish: an interim `O(Δ²)`-coloring by polynomial
//!    color reduction, then a tournament over the interim classes.
//!
//! All phases run on one global round clock that every node can compute
//! from `n` and the configuration, so nodes finished with a phase sleep
//! until the next one starts instead of staying awake.

pub mod interim;
mod pipeline;
pub mod tournament;
pub mod trial;

use crate::graph::Coloring;
use crate::metrics::RunMetrics;
use crate::simcore::{default_round_cap, Round, Trace};

pub use interim::{interim_schedule, reduce_color, InterimSchedule, ReductionStep};
pub use pipeline::{
    phase1, phase2_degree_reduction, phase3_interim_coloring, phase3_tournament_reduction,
    run_pipeline, InterimColoring, Phase1Result, Phase2Result, TournamentRun,
};
pub use tournament::{duty_schedule, tree_depth, tree_rounds, Duty};
pub use trial::{draw, Phase1State, Subphase, TrialMode, TrialMsg, TrialProgram};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Phase-1 iteration budget; derived from `n` when unset.
    pub k1: Option<u32>,
    pub k1_coefficient: f64,
    /// Phase-2 degree threshold; derived from `n` when unset.
    pub phase2_threshold: Option<usize>,
    pub phase2_iteration_cap: u32,
    pub phase3_enabled: bool,
    pub seed: u64,
    /// Last round any segment may execute; derived from `n` when unset.
    pub round_cap: Option<Round>,
    pub trace: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k1: None,
            k1_coefficient: 3.0,
            phase2_threshold: None,
            phase2_iteration_cap: 40,
            phase3_enabled: true,
            seed: 0,
            round_cap: None,
            trace: false,
        }
    }
}

fn log2(n: usize) -> f64 {
    (n.max(1) as f64).log2()
}

impl PipelineConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// `K = max(1, ceil(k1_coefficient * log2 log2 n))`.
    pub fn iterations(&self, n: usize) -> u32 {
        self.k1.unwrap_or_else(|| {
            let l = log2(n);
            let ll = if l <= 1.0 { 0.0 } else { l.log2() };
            ((self.k1_coefficient * ll).ceil().max(1.0)).min(u32::MAX as f64) as u32
        })
    }

    /// `max(8, ceil((log2 n)^7))` unless overridden.
    pub fn threshold(&self, n: usize) -> usize {
        self.phase2_threshold.unwrap_or_else(|| {
            let t = log2(n).powi(7).ceil();
            if t >= usize::MAX as f64 {
                usize::MAX
            } else {
                (t as usize).max(8)
            }
        })
    }

    pub fn round_cap(&self, n: usize) -> Round {
        self.round_cap.unwrap_or_else(|| default_round_cap(n))
    }

    /// Flat `key=value` rendering of the effective configuration for `n`.
    pub fn to_kv(&self, n: usize) -> Vec<(String, String)> {
        [
            ("k1", self.iterations(n).to_string()),
            ("k1_coefficient", self.k1_coefficient.to_string()),
            ("phase2_threshold", self.threshold(n).to_string()),
            ("phase2_iteration_cap", self.phase2_iteration_cap.to_string()),
            ("phase3_enabled", self.phase3_enabled.to_string()),
            ("seed", self.seed.to_string()),
            ("round_cap", self.round_cap(n).to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// What had been computed when a run hit its round cap.
#[derive(Debug, Clone)]
pub struct PartialRun {
    pub coloring: Coloring,
    pub metrics: RunMetrics,
}

/// Shape of phase 3 in one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Phase3Stats {
    /// Maximum degree of the graph left after phase 2.
    pub residual_max_degree: usize,
    pub reduction_steps: usize,
    /// Interim palette size, which is also the number of tournament classes.
    pub classes: u64,
    /// Nodes that went through the tournament.
    pub tournament_nodes: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub coloring: Coloring,
    pub metrics: RunMetrics,
    pub trace: Option<Trace>,
    pub phase3: Phase3Stats,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_parameters() {
        let c = PipelineConfig::default();
        assert_eq!(c.iterations(1), 1);
        assert_eq!(c.iterations(2), 1);
        assert_eq!(c.iterations(4), 3);
        assert_eq!(c.iterations(16), 6);
        assert_eq!(c.iterations(256), 9);
        assert_eq!(c.iterations(1 << 14), 12);
        assert_eq!(c.threshold(1), 8);
        assert_eq!(c.threshold(2), 8);
        assert_eq!(c.threshold(4), 128);
        assert_eq!(c.threshold(1 << 10), 10_000_000);
        let c = PipelineConfig {
            k1: Some(5),
            k1_coefficient: 1.0,
            phase2_threshold: Some(16),
            ..c
        };
        assert_eq!((c.iterations(1 << 20), c.threshold(1 << 20)), (5, 16));
        assert_eq!(PipelineConfig { k1: None, ..c }.iterations(1 << 16), 4);
    }

    #[test]
    fn kv_block() {
        let kv = PipelineConfig::with_seed(7).to_kv(256);
        let keys: Vec<&str> = kv.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys[0], "k1");
        assert!(kv.contains(&("seed".into(), "7".into())));
        assert!(kv.contains(&("k1".into(), "9".into())));
    }
}

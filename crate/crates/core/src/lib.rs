//! Simulator for the sleeping variant of the LOCAL model, plus a three-phase
//! randomized (deg+1)-list-coloring algorithm with low awake complexity.
//!
//! * [`simcore`] runs synchronous node programs with sleeping and awake-round
//!   accounting.
//! * [`coloring`] holds the coloring phases and the full pipeline.
//! * [`oracle`] computes exact single-iteration probabilities on tiny inputs.
//! * [`metrics`] turns runs into complexity figures.
//! * [`cli`] is the experiment harness behind the `sleepcolor` binary.

pub mod cli;
pub mod coloring;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod simcore;

pub use coloring::{run_pipeline, PipelineConfig, PipelineRun};
pub use error::{Error, Result};
pub use graph::{Color, Coloring, ColoringInstance, Graph, NodeId, Validity};
pub use metrics::RunMetrics;

use std::io;

use thiserror::Error;

use crate::graph::NodeId;
use crate::simcore::Round;

/// Problems with a graph or a list-coloring instance.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge endpoint {0} is not a declared node")]
    UnknownEndpoint(NodeId),
    #[error("node {0} has no color list")]
    MissingList(NodeId),
    #[error("node {node} has a list of {len} colors but degree {degree} (needs at least degree+1)")]
    ListTooShort {
        node: NodeId,
        len: usize,
        degree: usize,
    },
    #[error("node {0} lists color 0, which is reserved")]
    ZeroColor(NodeId),
    #[error("node {0} lists a color twice")]
    DuplicateColor(NodeId),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
}

/// A malformed line in an instance file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// Misbehaviour of a node program detected by the kernel, or an internal
/// invariant of one of the coloring programs that failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("round {round}: node {from} sent to non-neighbor {to}")]
    NotANeighbor {
        round: Round,
        from: NodeId,
        to: NodeId,
    },
    #[error("round {round}: node {node} asked to sleep for 0 rounds")]
    ZeroSleep { round: Round, node: NodeId },
    #[error("round {round}: algorithm invariant violated at node {node}: {detail}")]
    InvariantViolation {
        round: Round,
        node: NodeId,
        detail: String,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance: {0}")]
    Instance(#[from] InstanceError),
    #[error("parse: {0}")]
    Parse(#[from] ParseError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("program: {0}")]
    Program(#[from] ProgramError),
    #[error("run incomplete: {pending} node(s) still running at round cap {round_cap}")]
    RunIncomplete {
        round_cap: Round,
        pending: usize,
        partial: Box<crate::coloring::PartialRun>,
    },
    #[error("oracle: instance has {combinations} joint outcomes, limit is {limit}")]
    TooLargeForOracle { combinations: u128, limit: u128 },
    #[error("usage: {0}")]
    Usage(String),
    #[error("internal: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

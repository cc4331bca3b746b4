use std::collections::BTreeMap;
use std::fmt;

use super::Round;
use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStatus {
    Awake,
    Sleeping,
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceAct {
    Send,
    Sleep(u64),
    Terminate,
    Continue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Node {
        round: Round,
        node: NodeId,
        status: TraceStatus,
        act: TraceAct,
    },
    Message {
        round: Round,
        from: NodeId,
        to: NodeId,
        delivered: bool,
    },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TraceEvent::Node {
                round,
                node,
                status,
                act,
            } => {
                let status = match status {
                    TraceStatus::Awake => "A",
                    TraceStatus::Sleeping => "S",
                    TraceStatus::Terminated => "T",
                };
                write!(f, "t={round} v={node} status={status} act=")?;
                match act {
                    TraceAct::Send => f.write_str("send"),
                    TraceAct::Sleep(r) => write!(f, "sleep:{r}"),
                    TraceAct::Terminate => f.write_str("term"),
                    TraceAct::Continue => f.write_str("cont"),
                }
            }
            TraceEvent::Message {
                round,
                from,
                to,
                delivered,
            } => write!(f, "msg t={round} {from}->{to} delivered={}", delivered as u8),
        }
    }
}

/// Event log of a run. Node lines are emitted for nodes that are awake in a
/// round; message lines for every message sent, delivered or not.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn append(&mut self, other: Trace) {
        self.events.extend(other.events);
    }

    /// Recounts awake rounds per node from node lines alone.
    pub fn awake_counts(&self) -> BTreeMap<NodeId, u64> {
        let mut counts = BTreeMap::new();
        for e in &self.events {
            if let TraceEvent::Node {
                node,
                status: TraceStatus::Awake,
                ..
            } = e
            {
                *counts.entry(*node).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Rounds at which `node` was awake, ascending.
    pub fn awake_rounds_of(&self, node: NodeId) -> Vec<Round> {
        self.events
            .iter()
            .filter_map(|e| match *e {
                TraceEvent::Node {
                    round,
                    node: v,
                    status: TraceStatus::Awake,
                    ..
                } if v == node => Some(round),
                _ => None,
            })
            .collect()
    }

    pub fn messages(&self) -> impl Iterator<Item = (Round, NodeId, NodeId, bool)> + '_ {
        self.events.iter().filter_map(|e| match *e {
            TraceEvent::Message {
                round,
                from,
                to,
                delivered,
            } => Some((round, from, to, delivered)),
            _ => None,
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let node = TraceEvent::Node {
            round: 3,
            node: NodeId(7),
            status: TraceStatus::Awake,
            act: TraceAct::Sleep(2),
        };
        assert_eq!(node.to_string(), "t=3 v=7 status=A act=sleep:2");
        let msg = TraceEvent::Message {
            round: 3,
            from: NodeId(7),
            to: NodeId(1),
            delivered: false,
        };
        assert_eq!(msg.to_string(), "msg t=3 7->1 delivered=0");
    }
}

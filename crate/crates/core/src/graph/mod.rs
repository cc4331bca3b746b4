//! Network topology, (deg+1)-list-coloring instances and colorings.
//!
//! Nodes carry arbitrary distinct `u64` identifiers. Internally a [`Graph`]
//! keeps them sorted and addresses nodes by their position in that order
//! (the *index*), so index order and identifier order coincide.

mod generate;
mod io;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::InstanceError;

pub use generate::{generate, Family};
pub use io::{parse_instance, read_instance, render_instance, write_instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A list color. Always positive; `0` is the "no color" draw of a trial and
/// never appears in a list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Color(pub u32);

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Immutable undirected simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<NodeId>,
    adj: Vec<Vec<usize>>,
    max_degree: usize,
    id_bit_size: u32,
}

/// Number of bits needed to write `max_id`, i.e. `ceil(log2(max_id + 1))`.
pub fn bits_for(max_id: u64) -> u32 {
    u64::BITS - max_id.leading_zeros()
}

impl Graph {
    /// Builds a graph from node ids and an edge list. Edges are undirected;
    /// `(u, v)` and `(v, u)` describe the same edge and may not both appear.
    pub fn build(
        node_ids: &[NodeId],
        edges: &[(NodeId, NodeId)],
    ) -> Result<Self, InstanceError> {
        let mut ids = node_ids.to_vec();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(InstanceError::DuplicateNode(w[0]));
        }
        let mut adj = vec![Vec::new(); ids.len()];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(InstanceError::SelfLoop(u));
            }
            let ui = ids
                .binary_search(&u)
                .map_err(|_| InstanceError::UnknownEndpoint(u))?;
            let vi = ids
                .binary_search(&v)
                .map_err(|_| InstanceError::UnknownEndpoint(v))?;
            let key = (ui.min(vi), ui.max(vi));
            if !seen.insert(key) {
                return Err(InstanceError::DuplicateEdge(u, v));
            }
            adj[ui].push(vi);
            adj[vi].push(ui);
        }
        let max_id = ids.last().map_or(0, |id| id.0);
        Ok(Self::from_parts(ids, adj, bits_for(max_id)))
    }

    fn from_parts(ids: Vec<NodeId>, mut adj: Vec<Vec<usize>>, id_bit_size: u32) -> Self {
        for list in &mut adj {
            list.sort_unstable();
        }
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        Self {
            ids,
            adj,
            max_degree,
            id_bit_size,
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Bit size of the identifier space. Preserved by [`Graph::induced`], so a
    /// residual graph still reports the size of the original id space.
    pub fn id_bit_size(&self) -> u32 {
        self.id_bit_size
    }

    /// Node ids in ascending order; position in this slice is the node index.
    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> NodeId {
        self.ids[index]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index_of(id).is_some()
    }

    /// Neighbor indices of `index`, ascending.
    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adj[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adj[index].len()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges as index pairs `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Subgraph induced by the nodes for which `keep` holds.
    pub fn induced(&self, keep: impl Fn(usize) -> bool) -> Graph {
        let mut remap = vec![usize::MAX; self.ids.len()];
        let mut ids = Vec::new();
        for i in 0..self.ids.len() {
            if keep(i) {
                remap[i] = ids.len();
                ids.push(self.ids[i]);
            }
        }
        let adj = (0..self.ids.len())
            .filter(|&i| remap[i] != usize::MAX)
            .map(|i| {
                self.adj[i]
                    .iter()
                    .filter_map(|&j| (remap[j] != usize::MAX).then_some(remap[j]))
                    .collect()
            })
            .collect();
        Graph::from_parts(ids, adj, self.id_bit_size)
    }
}

/// One (deg+1)-list-coloring problem: a graph plus a sorted color list per
/// node with `|L_v| >= deg(v) + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringInstance {
    graph: Graph,
    lists: Vec<Vec<Color>>,
}

impl ColoringInstance {
    /// `lists[i]` belongs to the node with index `i`. Lists are sorted here.
    pub fn new(graph: Graph, mut lists: Vec<Vec<Color>>) -> Result<Self, InstanceError> {
        assert_eq!(graph.node_count(), lists.len(), "one list per node");
        for (i, list) in lists.iter_mut().enumerate() {
            let id = graph.id(i);
            list.sort_unstable();
            if list.first() == Some(&Color(0)) {
                return Err(InstanceError::ZeroColor(id));
            }
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(InstanceError::DuplicateColor(id));
            }
            let degree = graph.degree(i);
            if list.len() < degree + 1 {
                return Err(InstanceError::ListTooShort {
                    node: id,
                    len: list.len(),
                    degree,
                });
            }
        }
        Ok(Self { graph, lists })
    }

    /// The (deg+1)-coloring special case: `L_v = {1, ..., deg(v)+1}`.
    pub fn with_default_lists(graph: Graph) -> Self {
        let lists = (0..graph.node_count())
            .map(|i| (1..=graph.degree(i) as u32 + 1).map(Color).collect())
            .collect();
        Self { graph, lists }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn list(&self, index: usize) -> &[Color] {
        &self.lists[index]
    }

    pub fn lists(&self) -> &[Vec<Color>] {
        &self.lists
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Restriction to the nodes for which `keep` holds, with replacement
    /// lists taken from `list_of` (indexed in this instance's numbering).
    pub(crate) fn restrict(
        &self,
        keep: impl Fn(usize) -> bool,
        mut list_of: impl FnMut(usize) -> Vec<Color>,
    ) -> Result<Self, InstanceError> {
        let kept: Vec<usize> = (0..self.node_count()).filter(|&i| keep(i)).collect();
        let graph = self.graph.induced(|i| kept.binary_search(&i).is_ok());
        let lists = kept.iter().map(|&i| list_of(i)).collect();
        Self::new(graph, lists)
    }
}

/// Convenience wrapper around [`ColoringInstance::with_default_lists`].
pub fn make_default_instance(graph: Graph) -> ColoringInstance {
    ColoringInstance::with_default_lists(graph)
}

/// Convenience wrapper around [`Graph::build`] taking plain integers.
pub fn build_graph(edges: &[(u64, u64)], node_ids: &[u64]) -> Result<Graph, InstanceError> {
    let ids: Vec<NodeId> = node_ids.iter().copied().map(NodeId).collect();
    let edges: Vec<(NodeId, NodeId)> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
    Graph::build(&ids, &edges)
}

/// A possibly partial assignment of colors to nodes. Missing nodes are
/// uncolored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Coloring {
    colors: BTreeMap<NodeId, Color>,
}

impl Coloring {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, node: NodeId, color: Color) {
        self.colors.insert(node, color);
    }

    pub fn get(&self, node: NodeId) -> Option<Color> {
        self.colors.get(&node).copied()
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, Color)> + '_ {
        self.colors.iter().map(|(&v, &c)| (v, c))
    }

    pub fn extend(&mut self, other: &Coloring) {
        self.colors.extend(other.colors.iter().map(|(&v, &c)| (v, c)));
    }

    /// Checks properness, list membership and totality against `instance`.
    pub fn verdict(&self, instance: &ColoringInstance) -> Validity {
        let graph = instance.graph();
        if self.colors.keys().any(|&v| !graph.contains(v)) {
            return Validity::Invalid;
        }
        let color_at = |i: usize| self.get(graph.id(i));
        for i in 0..graph.node_count() {
            if let Some(c) = color_at(i) {
                if instance.list(i).binary_search(&c).is_err() {
                    return Validity::Invalid;
                }
            }
        }
        for (u, v) in graph.edges() {
            if let (Some(a), Some(b)) = (color_at(u), color_at(v)) {
                if a == b {
                    return Validity::Invalid;
                }
            }
        }
        if self.colors.len() == graph.node_count() {
            Validity::ProperTotal
        } else {
            Validity::ProperPartial
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    ProperTotal,
    ProperPartial,
    Invalid,
}

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, NodeId};
use crate::error::InstanceError;

/// Graph families for experiments. Generated nodes have ids `0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Path,
    Cycle,
    Clique,
    /// Uniform-ish random `d`-regular graph (configuration model with
    /// rejection of loops and multi-edges).
    RandomRegular(usize),
    /// Erdős–Rényi `G(n, p)`.
    Gnp(f64),
    /// Node 0 joined to every other node.
    Star,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Path => "path",
            Family::Cycle => "cycle",
            Family::Clique => "clique",
            Family::RandomRegular(_) => "regular",
            Family::Gnp(_) => "gnp",
            Family::Star => "star",
        }
    }

    /// The numeric parameter, if the family has one.
    pub fn param(&self) -> Option<f64> {
        match *self {
            Family::RandomRegular(d) => Some(d as f64),
            Family::Gnp(p) => Some(p),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const REGULAR_ATTEMPTS: usize = 1000;

/// Generates a graph of the given family on `n` nodes. Output depends only on
/// `(family, n, seed)`.
pub fn generate(family: Family, n: usize, seed: u64) -> Result<Graph, InstanceError> {
    if n == 0 {
        return Err(InstanceError::Infeasible("n must be positive".into()));
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    match family {
        Family::Path => edges.extend((1..n).map(|i| (i - 1, i))),
        Family::Cycle => {
            if n < 3 {
                return Err(InstanceError::Infeasible(format!("cycle needs n >= 3, got {n}")));
            }
            edges.extend((1..n).map(|i| (i - 1, i)));
            edges.push((n - 1, 0));
        }
        Family::Clique => {
            for u in 0..n {
                edges.extend((u + 1..n).map(|v| (u, v)));
            }
        }
        Family::Star => edges.extend((1..n).map(|i| (0, i))),
        Family::Gnp(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(InstanceError::Infeasible(format!("gnp needs 0 <= p <= 1, got {p}")));
            }
            gnp_edges(n, p, &mut ChaCha8Rng::seed_from_u64(seed), &mut edges);
        }
        Family::RandomRegular(d) => {
            if d >= n || (n * d) % 2 == 1 {
                return Err(InstanceError::Infeasible(format!(
                    "regular needs d < n and n*d even, got n={n}, d={d}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let found = (0..REGULAR_ATTEMPTS).find_map(|_| regular_attempt(n, d, &mut rng));
            match found {
                Some(e) => edges = e,
                None => {
                    return Err(InstanceError::Infeasible(format!(
                        "no simple {d}-regular pairing found on {n} nodes"
                    )))
                }
            }
        }
    }
    let ids: Vec<NodeId> = (0..n as u64).map(NodeId).collect();
    let edges: Vec<(NodeId, NodeId)> = edges
        .into_iter()
        .map(|(u, v)| (NodeId(u as u64), NodeId(v as u64)))
        .collect();
    Graph::build(&ids, &edges)
}

/// Batagelj–Brandes geometric skipping over the lower triangle, O(n + m).
fn gnp_edges(n: usize, p: f64, rng: &mut impl Rng, edges: &mut Vec<(usize, usize)>) {
    if p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for u in 0..n {
            edges.extend((u + 1..n).map(|v| (u, v)));
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let r: f64 = rng.gen();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
}

fn regular_attempt(n: usize, d: usize, rng: &mut impl Rng) -> Option<Vec<(usize, usize)>> {
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut seen = HashSet::with_capacity(n * d / 2);
    let mut edges = Vec::with_capacity(n * d / 2);
    points.shuffle(rng);
    while let Some(u) = points.pop() {
        let valid = |v: usize| v != u && !seen.contains(&(u.min(v), u.max(v)));
        // Random probing first; the exhaustive scan only runs near dead ends.
        let probed = (0..32)
            .map(|_| rng.gen_range(0..points.len().max(1)))
            .find(|&i| i < points.len() && valid(points[i]));
        let i = match probed {
            Some(i) => i,
            None => {
                let candidates: Vec<usize> = (0..points.len()).filter(|&i| valid(points[i])).collect();
                *candidates.get(rng.gen_range(0..candidates.len().max(1)))?
            }
        };
        let v = points.swap_remove(i);
        seen.insert((u.min(v), u.max(v)));
        edges.push((u, v));
    }
    Some(edges)
}

//! Exact single-iteration analysis of the color trial by enumerating every
//! joint draw of every node.
//!
//! Node `v` draws "no color" with weight `|L_v|` and each list color with
//! weight 1, over a per-node denominator of `2|L_v|`. Counting over the
//! common denominator `∏ 2|L_v|` keeps every sum an exact integer.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::graph::{build_graph, Color, ColoringInstance, NodeId};

/// Largest joint outcome space that will be enumerated.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

fn ratio(numer: u128, denom: u128) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Outcome distribution of one node's draw: `None` is "no color".
pub fn choice_space(list: &[Color]) -> Vec<(Option<Color>, BigRational)> {
    let l = list.len() as u128;
    std::iter::once((None, ratio(l, 2 * l)))
        .chain(list.iter().map(|&c| (Some(c), ratio(1, 2 * l))))
        .collect()
}

fn combinations(instance: &ColoringInstance) -> u128 {
    instance
        .lists()
        .iter()
        .fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128 + 1))
}

/// Exact probability that each node keeps its draw in one iteration.
pub fn exact_adoption_probabilities(instance: &ColoringInstance) -> Result<BTreeMap<NodeId, BigRational>> {
    let total = combinations(instance);
    if total > ENUMERATION_LIMIT {
        return Err(Error::TooLargeForOracle {
            combinations: total,
            limit: ENUMERATION_LIMIT,
        });
    }
    let graph = instance.graph();
    let n = graph.node_count();
    let lists = instance.lists();
    let denom: u128 = lists.iter().map(|l| 2 * l.len() as u128).product();
    let mut hits = vec![0u128; n];
    // Mixed-radix counter: digit 0 is "no color", digit k is lists[v][k-1].
    let mut digits = vec![0usize; n];
    loop {
        let weight: u128 = digits
            .iter()
            .zip(lists)
            .map(|(&d, l)| if d == 0 { l.len() as u128 } else { 1 })
            .product();
        let draw = |v: usize| (digits[v] > 0).then(|| lists[v][digits[v] - 1]);
        for v in 0..n {
            if let Some(c) = draw(v) {
                if graph.neighbors(v).iter().all(|&u| draw(u) != Some(c)) {
                    hits[v] += weight;
                }
            }
        }
        let mut v = 0;
        loop {
            if v == n {
                return Ok(graph
                    .ids()
                    .iter()
                    .zip(hits)
                    .map(|(&id, h)| (id, ratio(h, denom)))
                    .collect());
            }
            digits[v] += 1;
            if digits[v] <= lists[v].len() {
                break;
            }
            digits[v] = 0;
            v += 1;
        }
    }
}

/// Exact expected number of nodes left uncolored by one iteration.
pub fn exact_expected_uncolored_after_one_iteration(instance: &ColoringInstance) -> Result<BigRational> {
    let probs = exact_adoption_probabilities(instance)?;
    let one = BigRational::from_integer(BigInt::from(1));
    Ok(probs
        .values()
        .fold(BigRational::from_integer(BigInt::from(0)), |acc, p| acc + (&one - p)))
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub instance: ColoringInstance,
}

/// Edge sets of all graphs on `k` nodes up to isomorphism, as lists of
/// index pairs.
fn nonisomorphic_graphs(k: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let perms = permutations(k);
    let canonical = |mask: u32| -> u32 {
        perms
            .iter()
            .map(|p| {
                pairs.iter().enumerate().filter(|&(e, _)| mask >> e & 1 == 1).fold(0u32, |acc, (_, &(a, b))| {
                    let (x, y) = (p[a].min(p[b]), p[a].max(p[b]));
                    acc | 1 << pairs.iter().position(|&q| q == (x, y)).expect("pair")
                })
            })
            .min()
            .expect("at least one permutation")
    };
    let classes: BTreeSet<u32> = (0..1u32 << pairs.len()).map(canonical).collect();
    classes
        .into_iter()
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|&(e, _)| mask >> e & 1 == 1)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Every graph on one to four nodes up to isomorphism, each with three list
/// assignments: `{1..deg+1}`, the same shifted by the node index, and lists
/// of up to four colors with alternating offsets.
pub fn tiny_catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    for k in 1..=4usize {
        for (g, edges) in nonisomorphic_graphs(k).into_iter().enumerate() {
            let ids: Vec<u64> = (0..k as u64).collect();
            let e: Vec<(u64, u64)> = edges.iter().map(|&(a, b)| (a as u64, b as u64)).collect();
            let graph = build_graph(&e, &ids).expect("catalog graph");
            let deg: Vec<u32> = (0..k).map(|i| graph.degree(i) as u32).collect();
            let assignments: [(&str, Vec<Vec<Color>>); 3] = [
                ("minimal", deg.iter().map(|&d| (1..=d + 1).map(Color).collect()).collect()),
                (
                    "shifted",
                    deg.iter()
                        .enumerate()
                        .map(|(i, &d)| (1..=d + 1).map(|c| Color(c + i as u32)).collect())
                        .collect(),
                ),
                (
                    "asymmetric",
                    deg.iter()
                        .enumerate()
                        .map(|(i, &d)| {
                            let size = (d + 1 + (i as u32 % 2)).min(4);
                            let start = 1 + (i as u32 % 2);
                            (start..start + size).map(Color).collect()
                        })
                        .collect(),
                ),
            ];
            for (kind, lists) in assignments {
                out.push(CatalogEntry {
                    name: format!("n{k}-g{g}-{kind}"),
                    instance: ColoringInstance::new(graph.clone(), lists).expect("admissible catalog lists"),
                });
            }
        }
    }
    out
}

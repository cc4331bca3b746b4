use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::NodeId;

/// Per-node random stream. Derived from `(global seed, node id)` only: the
/// seed keys ChaCha and the id selects the stream, so streams of different
/// nodes never overlap and never depend on scheduling order.
#[derive(Debug, Clone)]
pub struct NodeRng(ChaCha8Rng);

impl NodeRng {
    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.0.gen_bool(0.5)
    }

    /// Uniform integer in `[0, k)`. `k` must be positive.
    pub fn below(&mut self, k: usize) -> usize {
        self.0.gen_range(0..k)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.gen()
    }
}

pub fn node_rng(global_seed: u64, id: NodeId) -> NodeRng {
    let mut rng = ChaCha8Rng::seed_from_u64(global_seed);
    rng.set_stream(id.0);
    NodeRng(rng)
}

/// SplitMix64 finalizer, used to derive independent per-phase seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_id_same_stream() {
        let mut a = node_rng(11, NodeId(4));
        let mut b = node_rng(11, NodeId(4));
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_ids_distinct_streams() {
        let mut a = node_rng(11, NodeId(1));
        let mut b = node_rng(11, NodeId(2));
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert!(same < 64);
        let mut a = node_rng(11, NodeId(1));
        let mut b = node_rng(11, NodeId(2));
        let coins = (0..64).filter(|_| a.coin() == b.coin()).count();
        assert!(coins < 64);
    }

    #[test]
    fn coin_is_fair() {
        let mut r = node_rng(2024, NodeId(0));
        let n = 1_000_000;
        let heads = (0..n).filter(|_| r.coin()).count();
        let mean = heads as f64 / n as f64;
        assert!((0.497..=0.503).contains(&mean), "{mean}");
    }

    #[test]
    fn below_covers_range() {
        let mut r = node_rng(5, NodeId(9));
        let mut hits = [0usize; 5];
        for _ in 0..50_000 {
            hits[r.below(5)] += 1;
        }
        assert!(hits.iter().all(|&h| (9_000..11_000).contains(&h)), "{hits:?}");
    }
}

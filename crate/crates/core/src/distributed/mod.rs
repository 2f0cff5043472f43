//! State vectors split evenly over `2^k` ranks.
//!
//! Rank `r` owns the contiguous global indices `[r 2^(n-k), (r+1) 2^(n-k))`,
//! so the low `n-k` qubits are local and the top `k` qubits are the bits of
//! the rank id. A gate on qubit `t >= n-k` pairs amplitudes living on ranks
//! that differ only in rank bit `t-(n-k)`, i.e. rank `r` and `r ^ 2^(t-(n-k))`.

mod engine;
mod memory;
mod strategy;
mod transport;

use std::sync::Arc;

pub use engine::{resolve_circuit, Cluster, CommStats, DistOp, NoHooks, RankState, RunHooks};
pub use memory::{MemoryModel, DEFAULT_OVERHEAD_BYTES};
pub use strategy::{ExchangeStrategy, FullClone, HalfExchange, PerAmplitude, StrategyRegistry};
pub use transport::{InProcessTransport, Transport};

use crate::error::{Error, Result};
use crate::state::Precision;

#[derive(Debug, Clone)]
pub struct PartitionPlan {
    num_qubits: usize,
    rank_count_log2: usize,
    strategy: Arc<dyn ExchangeStrategy>,
}

/// Splits an `num_qubits`-qubit vector over `2^rank_count_log2` ranks.
pub fn partition(
    num_qubits: usize,
    rank_count_log2: usize,
    strategy: Arc<dyn ExchangeStrategy>,
) -> Result<PartitionPlan> {
    if num_qubits == 0 || num_qubits >= usize::BITS as usize {
        return Err(Error::domain(format!("cannot partition {num_qubits} qubits")));
    }
    if rank_count_log2 > num_qubits {
        return Err(Error::domain(format!(
            "2^{rank_count_log2} ranks exceed the 2^{num_qubits} amplitudes"
        )));
    }
    Ok(PartitionPlan {
        num_qubits,
        rank_count_log2,
        strategy,
    })
}

impl PartitionPlan {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn rank_count_log2(&self) -> usize {
        self.rank_count_log2
    }

    pub fn ranks(&self) -> usize {
        1 << self.rank_count_log2
    }

    /// Qubits addressed within a partition, `n - k`.
    pub fn local_qubits(&self) -> usize {
        self.num_qubits - self.rank_count_log2
    }

    pub fn local_len(&self) -> usize {
        1 << self.local_qubits()
    }

    pub fn strategy(&self) -> &Arc<dyn ExchangeStrategy> {
        &self.strategy
    }

    pub fn buffer_len(&self) -> usize {
        self.strategy.buffer_len(self.local_len())
    }

    /// Global indices owned by `rank`.
    pub fn owned_range(&self, rank: usize) -> std::ops::Range<usize> {
        let len = self.local_len();
        rank * len..(rank + 1) * len
    }

    pub fn needs_communication(&self, target: usize) -> bool {
        target >= self.local_qubits()
    }

    /// The rank holding the other half of `rank`'s pairs for `target`.
    pub fn pair_rank(&self, rank: usize, target: usize) -> Result<usize> {
        if target >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: target,
                num_qubits: self.num_qubits,
            });
        }
        if !self.needs_communication(target) {
            return Err(Error::domain(format!(
                "qubit {target} is local to every rank (n-k = {})",
                self.local_qubits()
            )));
        }
        if rank >= self.ranks() {
            return Err(Error::domain(format!("rank {rank} out of range")));
        }
        Ok(rank ^ (1 << (target - self.local_qubits())))
    }

    /// Modelled bytes per rank: partition plus exchange buffer.
    pub fn rank_bytes(&self, precision: Precision) -> u64 {
        (self.local_len() + self.buffer_len()) as u64 * precision.amplitude_bytes()
    }

    /// Bytes for the partition alone.
    pub fn partition_bytes(&self, precision: Precision) -> u64 {
        self.local_len() as u64 * precision.amplitude_bytes()
    }
}

pub fn needs_communication(plan: &PartitionPlan, target: usize) -> bool {
    plan.needs_communication(target)
}

pub fn pair_rank(plan: &PartitionPlan, rank: usize, target: usize) -> Result<usize> {
    plan.pair_rank(rank, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plan(n: usize, k: usize) -> PartitionPlan {
        partition(n, k, Arc::new(FullClone)).unwrap()
    }

    #[test]
    fn equal_contiguous_split() {
        let p = plan(3, 1);
        assert_eq!(p.owned_range(0), 0..4);
        assert_eq!(p.owned_range(1), 4..8);
        let p = plan(3, 0);
        assert_eq!(p.ranks(), 1);
        assert_eq!(p.owned_range(0), 0..8);
        let p = plan(3, 3);
        assert_eq!(p.ranks(), 8);
        assert_eq!(p.local_len(), 1);
        assert!(partition(3, 4, Arc::new(FullClone)).is_err());
    }

    #[test]
    fn communication_threshold() {
        let p = plan(34, 4);
        assert!(!p.needs_communication(29));
        assert!(p.needs_communication(30));
        let p = plan(3, 0);
        assert!((0..3).all(|t| !p.needs_communication(t)));
    }

    #[test]
    fn pairing() {
        assert_eq!(plan(3, 1).pair_rank(0, 2).unwrap(), 1);
        assert_eq!(plan(4, 2).pair_rank(1, 3).unwrap(), 3);
        assert!(plan(4, 2).pair_rank(1, 1).is_err());
        assert!(plan(4, 2).pair_rank(4, 3).is_err());
    }

    proptest! {
        #[test]
        fn pair_rank_is_a_fixed_point_free_involution(n in 1usize..20, k_frac in 0.0f64..=1.0, t_pick in 0usize..64, r_pick in 0usize..1 << 20) {
            let k = ((n as f64) * k_frac) as usize;
            prop_assume!(k >= 1);
            let p = plan(n, k);
            let t = n - k + t_pick % k;
            let r = r_pick % p.ranks();
            let q = p.pair_rank(r, t).unwrap();
            prop_assert_ne!(q, r);
            prop_assert!(q < p.ranks());
            prop_assert_eq!(p.pair_rank(q, t).unwrap(), r);
            // global partner of each owned index lives on the paired rank
            let j = p.owned_range(r).start;
            let partner = j ^ (1 << t);
            prop_assert!(p.owned_range(q).contains(&partner));
        }
    }
}

use std::sync::Arc;

use super::strategy::ExchangeStrategy;
use crate::state::Precision;

/// Per-node bookkeeping overhead assumed by default.
pub const DEFAULT_OVERHEAD_BYTES: u64 = 50 << 20;

/// How many qubits fit on a set of identical nodes.
#[derive(Debug, Clone)]
pub struct MemoryModel {
    pub node_bytes: u64,
    pub overhead_bytes: u64,
    pub strategy: Arc<dyn ExchangeStrategy>,
    pub precision: Precision,
}

impl MemoryModel {
    pub fn new(node_bytes: u64, strategy: Arc<dyn ExchangeStrategy>, precision: Precision) -> Self {
        MemoryModel {
            node_bytes,
            overhead_bytes: DEFAULT_OVERHEAD_BYTES,
            strategy,
            precision,
        }
    }

    pub fn with_overhead(mut self, overhead_bytes: u64) -> Self {
        self.overhead_bytes = overhead_bytes;
        self
    }

    /// Bytes one node needs for partition plus buffer, or `None` if `k > n`.
    pub fn node_requirement(&self, num_qubits: usize, rank_count_log2: usize) -> Option<u128> {
        let local_qubits = num_qubits.checked_sub(rank_count_log2)?;
        if local_qubits >= 100 {
            return None;
        }
        let local = 1u128 << local_qubits;
        let buffer = if local_qubits >= usize::BITS as usize {
            local
        } else {
            self.strategy.buffer_len(local as usize) as u128
        };
        Some((local + buffer) * self.precision.amplitude_bytes() as u128)
    }

    pub fn fits(&self, num_qubits: usize, rank_count_log2: usize) -> bool {
        let Some(avail) = self.node_bytes.checked_sub(self.overhead_bytes) else {
            return false;
        };
        self.node_requirement(num_qubits, rank_count_log2)
            .is_some_and(|need| need <= avail as u128)
    }

    /// Largest `n` that fits on `2^k` nodes, 0 if nothing does.
    pub fn max_qubits(&self, rank_count_log2: usize) -> usize {
        let mut best = 0;
        let mut n = rank_count_log2.max(1);
        while n < 100 && self.fits(n, rank_count_log2) {
            best = n;
            n += 1;
        }
        best
    }

    /// Smallest `k` such that `num_qubits` fits on `2^k` nodes.
    pub fn min_ranks_log2(&self, num_qubits: usize) -> Option<usize> {
        (0..=num_qubits).find(|&k| self.fits(num_qubits, k))
    }
}

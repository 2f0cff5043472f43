//! Pair-exchange strategies, registered by name.
//!
//! Every strategy moves a rank's whole partition to its paired rank when a
//! gate targets a rank-index qubit; they differ in how the partition is cut
//! into messages, which fixes the receive buffer each rank must hold.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub trait ExchangeStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Amplitudes per message for a partition of `local_len` amplitudes.
    /// Always a power of two dividing `local_len`.
    fn message_len(&self, local_len: usize) -> usize;

    /// Receive buffer a rank keeps next to its partition.
    fn buffer_len(&self, local_len: usize) -> usize {
        self.message_len(local_len)
    }

    /// Message rounds per communicated gate.
    fn rounds(&self, local_len: usize) -> usize {
        local_len / self.message_len(local_len)
    }

    /// `(partition + buffer) / partition`.
    fn memory_factor(&self, local_len: usize) -> f64 {
        (local_len + self.buffer_len(local_len)) as f64 / local_len as f64
    }
}

impl fmt::Debug for dyn ExchangeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Clone the entire partition: one message per gate, 2x memory.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullClone;

impl ExchangeStrategy for FullClone {
    fn name(&self) -> &'static str {
        "full_clone"
    }

    fn message_len(&self, local_len: usize) -> usize {
        local_len
    }
}

/// Two half-partition exchanges per gate, 1.5x memory. A one-amplitude
/// partition cannot be halved and goes in a single message.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfExchange;

impl ExchangeStrategy for HalfExchange {
    fn name(&self) -> &'static str {
        "half_exchange"
    }

    fn message_len(&self, local_len: usize) -> usize {
        (local_len / 2).max(1)
    }
}

/// Send amplitudes in blocks of `block` (1 by default): negligible buffer,
/// `local_len / block` messages per gate.
#[derive(Debug, Clone, Copy)]
pub struct PerAmplitude {
    block: usize,
}

impl PerAmplitude {
    pub fn new(block: usize) -> Result<Self> {
        if !block.is_power_of_two() {
            return Err(Error::domain(format!(
                "per-amplitude block size must be a power of two, got {block}"
            )));
        }
        Ok(PerAmplitude { block })
    }

    pub fn block(&self) -> usize {
        self.block
    }
}

impl Default for PerAmplitude {
    fn default() -> Self {
        PerAmplitude { block: 1 }
    }
}

impl ExchangeStrategy for PerAmplitude {
    fn name(&self) -> &'static str {
        "per_amplitude"
    }

    fn message_len(&self, local_len: usize) -> usize {
        self.block.min(local_len)
    }
}

/// Name-indexed set of strategies.
#[derive(Clone, Default)]
pub struct StrategyRegistry {
    entries: BTreeMap<&'static str, Arc<dyn ExchangeStrategy>>,
}

impl StrategyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `full_clone`, `half_exchange` and `per_amplitude`.
    pub fn with_defaults() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(FullClone));
        r.register(Arc::new(HalfExchange));
        r.register(Arc::new(PerAmplitude::default()));
        r
    }

    /// Adds a strategy, replacing any previous one with the same name.
    pub fn register(&mut self, strategy: Arc<dyn ExchangeStrategy>) {
        self.entries.insert(strategy.name(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ExchangeStrategy>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl fmt::Debug for StrategyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_registry() {
        let r = StrategyRegistry::with_defaults();
        assert_eq!(r.names(), vec!["full_clone", "half_exchange", "per_amplitude"]);
        assert_eq!(r.get("half_exchange").unwrap().name(), "half_exchange");
        let err = r.get("quarter").unwrap_err();
        assert!(err.to_string().contains("full_clone"));
    }

    #[test]
    fn message_geometry() {
        let local = 1 << 10;
        assert_eq!(FullClone.rounds(local), 1);
        assert_eq!(FullClone.memory_factor(local), 2.0);
        assert_eq!(HalfExchange.rounds(local), 2);
        assert_eq!(HalfExchange.memory_factor(local), 1.5);
        let pa = PerAmplitude::default();
        assert_eq!(pa.rounds(local), local);
        assert_eq!(pa.buffer_len(local), 1);
        assert!((pa.memory_factor(local) - 1.0) < 1e-3);
        assert_eq!(HalfExchange.message_len(1), 1);
        assert_eq!(PerAmplitude::new(8).unwrap().message_len(4), 4);
        assert!(PerAmplitude::new(3).is_err());
    }

    #[test]
    fn custom_strategies_can_be_registered() {
        #[derive(Debug)]
        struct Quarter;
        impl ExchangeStrategy for Quarter {
            fn name(&self) -> &'static str {
                "quarter"
            }
            fn message_len(&self, local_len: usize) -> usize {
                (local_len / 4).max(1)
            }
        }
        let mut r = StrategyRegistry::with_defaults();
        r.register(Arc::new(Quarter));
        assert_eq!(r.get("quarter").unwrap().memory_factor(16), 1.25);
    }
}

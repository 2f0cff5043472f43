//! Pseudo-random benchmark circuits on a linear nearest-neighbour topology.
//!
//! Layer 0 puts `H` on every qubit. Layer `d >= 1` places `CZ(a, a+1)` for
//! every `a = 3j + (d mod 3)` with `a + 1 < n`; every qubit not touched by a
//! `CZ` in that layer receives one single-qubit gate from `{T, SqrtX, SqrtY}`:
//! `T` if the qubit has had nothing but its initial `H`, otherwise one of the
//! two gates different from the qubit's previous single-qubit gate.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`. For each
//! layer, qubits are visited in ascending order; each free qubit that needs a
//! random choice draws one `next_u64()` and takes candidate `x % 2`, where the
//! candidates are `[T, SqrtX, SqrtY]` in that order minus the previous gate.
//! The CZ layers depend only on `(n, depth)`, never on the seed.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::gates::NamedGate;

pub const CZ_PATTERN_PERIOD: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Topology {
    #[default]
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomCircuitSpec {
    pub num_qubits: usize,
    pub depth: usize,
    pub seed: u64,
    pub topology: Topology,
}

impl RandomCircuitSpec {
    pub fn new(num_qubits: usize, depth: usize, seed: u64) -> Self {
        RandomCircuitSpec {
            num_qubits,
            depth,
            seed,
            topology: Topology::Linear,
        }
    }
}

const SINGLES: [NamedGate; 3] = [NamedGate::T, NamedGate::SqrtX, NamedGate::SqrtY];

pub fn generate_random_circuit(spec: &RandomCircuitSpec) -> Result<Circuit> {
    let n = spec.num_qubits;
    if n < 2 {
        return Err(Error::domain(format!(
            "random circuits need at least 2 qubits, got {n}"
        )));
    }
    if spec.depth == 0 {
        return Err(Error::domain("random circuit depth must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut circuit = Circuit::new(n, spec.depth)?;
    let mut last: Vec<NamedGate> = vec![NamedGate::H; n];

    for q in 0..n {
        circuit.ops.push(GateOp::single(NamedGate::H, q));
    }

    for layer in 1..spec.depth {
        let offset = layer % CZ_PATTERN_PERIOD;
        let mut q = 0;
        while q < n {
            let starts_pair = q >= offset && (q - offset) % CZ_PATTERN_PERIOD == 0 && q + 1 < n;
            if starts_pair {
                circuit.ops.push(GateOp::cz(q, q + 1));
                q += 2;
                continue;
            }
            let gate = if last[q] == NamedGate::H {
                NamedGate::T
            } else {
                let candidates: Vec<NamedGate> =
                    SINGLES.iter().copied().filter(|g| *g != last[q]).collect();
                candidates[(rng.next_u64() % candidates.len() as u64) as usize]
            };
            last[q] = gate;
            circuit.ops.push(GateOp::single(gate, q));
            q += 1;
        }
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::gate_counts;

    #[test]
    fn rejects_tiny_specs() {
        assert!(generate_random_circuit(&RandomCircuitSpec::new(1, 5, 0)).is_err());
        assert!(generate_random_circuit(&RandomCircuitSpec::new(4, 0, 0)).is_err());
    }

    #[test]
    fn deterministic_in_seed() {
        let spec = RandomCircuitSpec::new(5, 10, 42);
        assert_eq!(
            generate_random_circuit(&spec).unwrap(),
            generate_random_circuit(&spec).unwrap()
        );
        let other = RandomCircuitSpec::new(5, 10, 43);
        assert_ne!(
            generate_random_circuit(&spec).unwrap(),
            generate_random_circuit(&other).unwrap()
        );
    }

    #[test]
    fn five_qubit_depth_ten_structure() {
        let c = generate_random_circuit(&RandomCircuitSpec::new(5, 10, 7)).unwrap();
        assert!(c.ops()[..5]
            .iter()
            .enumerate()
            .all(|(q, op)| op.gate == NamedGate::H && op.target == q));
        for op in &c.ops()[5..] {
            match op.gate {
                NamedGate::CZ => assert_eq!(op.controls, vec![op.target + 1]),
                g => assert!(SINGLES.contains(&g), "{g}"),
            }
        }
        // Pattern 0: (0,1),(3,4); 1: (1,2); 2: (2,3). Layers 1..=9 hit 1,2,0,1,2,0,1,2,0.
        assert_eq!(gate_counts(&c).controlled, 3 * 2 + 3 + 3);
    }

    #[test]
    fn every_qubit_is_busy_in_every_layer() {
        let n = 7;
        let depth = 12;
        let c = generate_random_circuit(&RandomCircuitSpec::new(n, depth, 1)).unwrap();
        let touched: usize = c.ops().iter().map(|op| 1 + op.controls.len()).sum();
        assert_eq!(touched, n * depth);
    }
}

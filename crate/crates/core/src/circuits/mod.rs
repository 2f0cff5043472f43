//! Circuit representation, random benchmark circuits and the text format.

mod random;
mod text;

pub use random::{generate_random_circuit, RandomCircuitSpec, Topology, CZ_PATTERN_PERIOD};
pub use text::{parse, serialize};

use crate::error::{Error, Result};
use crate::gates::{GateMatrix, NamedGate};
use crate::kernels::{self, control_mask};
use crate::state::Register;

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub gate: NamedGate,
    pub target: usize,
    pub controls: Vec<usize>,
}

impl GateOp {
    pub fn single(gate: NamedGate, target: usize) -> Self {
        GateOp {
            gate,
            target,
            controls: Vec::new(),
        }
    }

    pub fn controlled(gate: NamedGate, controls: Vec<usize>, target: usize) -> Self {
        GateOp {
            gate,
            target,
            controls,
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::controlled(NamedGate::CZ, vec![b], a)
    }

    pub fn matrix(&self) -> GateMatrix {
        self.gate.matrix()
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        control_mask(num_qubits, &self.controls, self.target)?;
        if self.gate == NamedGate::CZ && self.controls.is_empty() {
            return Err(Error::domain("CZ needs a control qubit"));
        }
        Ok(())
    }
}

/// An ordered gate sequence on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    depth: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize, depth: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::domain("a circuit needs at least one qubit"));
        }
        Ok(Circuit {
            num_qubits,
            depth,
            ops: Vec::new(),
        })
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.num_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of generator layers; informational for hand-built circuits.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateCounts {
    pub single: usize,
    pub controlled: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.single + self.controlled
    }
}

pub fn gate_counts(circuit: &Circuit) -> GateCounts {
    circuit
        .ops
        .iter()
        .fold(GateCounts::default(), |mut acc, op| {
            if op.controls.is_empty() {
                acc.single += 1;
            } else {
                acc.controlled += 1;
            }
            acc
        })
}

/// Applies every op in order, as state-vector gates or density-matrix
/// conjugations depending on the register kind.
pub fn run_circuit(circuit: &Circuit, reg: &mut Register) -> Result<()> {
    if circuit.num_qubits != reg.num_qubits() {
        return Err(Error::domain(format!(
            "circuit has {} qubits but the register has {}",
            circuit.num_qubits,
            reg.num_qubits()
        )));
    }
    for op in &circuit.ops {
        kernels::apply_named_gate(reg, op.gate, &op.controls, op.target)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn single_hadamard_circuit() {
        let mut c = Circuit::new(1, 1).unwrap();
        c.push(GateOp::single(NamedGate::H, 0)).unwrap();
        let mut r = Register::state_vector(1).unwrap();
        run_circuit(&c, &mut r).unwrap();
        assert_eq!(
            r.to_vec(),
            vec![Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)]
        );
    }

    #[test]
    fn qubit_count_mismatch() {
        let c = Circuit::new(2, 1).unwrap();
        let mut r = Register::state_vector(3).unwrap();
        assert!(matches!(run_circuit(&c, &mut r), Err(Error::Domain(_))));
    }

    #[test]
    fn push_validates_ops() {
        let mut c = Circuit::new(2, 1).unwrap();
        assert!(c.push(GateOp::single(NamedGate::H, 2)).is_err());
        assert!(c.push(GateOp::cz(1, 1)).is_err());
        assert!(c.push(GateOp::single(NamedGate::CZ, 0)).is_err());
        assert!(c.push(GateOp::cz(0, 1)).is_ok());
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn counts() {
        let empty = Circuit::new(3, 0).unwrap();
        assert_eq!(gate_counts(&empty), GateCounts::default());
        let mut c = Circuit::new(3, 2).unwrap();
        c.push(GateOp::single(NamedGate::H, 0)).unwrap();
        c.push(GateOp::cz(0, 1)).unwrap();
        c.push(GateOp::controlled(NamedGate::X, vec![1, 2], 0)).unwrap();
        assert_eq!(gate_counts(&c), GateCounts { single: 1, controlled: 2 });
        assert_eq!(gate_counts(&c).total(), 3);
    }
}

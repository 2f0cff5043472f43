//! Amplitude-pair gate kernels for state vectors.
//!
//! A single-qubit gate `G` on qubit `q` mixes the pairs `(a[lo], a[lo + 2^q])`
//! where `lo` has bit `q` clear. With `i` ranging over `[0, 2^(N-1))` the
//! lower index is `lo_i = floor(i / 2^q) * 2^(q+1) + (i mod 2^q)`. Pairs are
//! disjoint, so any split of the `i` range over workers writes disjoint
//! amplitudes and gives bitwise identical results.

use std::cell::Cell;

use num_complex::Complex;
use rayon::prelude::*;

use crate::density;
use crate::error::{Error, Result};
use crate::gates::{GateMatrix, NamedGate};
use crate::state::{Amplitudes, Register, RegisterKind, Scalar, PARALLEL_THRESHOLD};

pub(crate) type Mat2<T> = [[Complex<T>; 2]; 2];

/// Amplitudes handled by one parallel task.
const GRAIN: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairIndex {
    pub lo: usize,
    pub hi: usize,
}

/// Lower index of the `i`-th pair for target qubit `target`.
#[inline]
pub fn pair_lo(i: usize, target: usize) -> usize {
    let half = 1usize << target;
    (i >> target) * (half << 1) + (i & (half - 1))
}

pub fn enumerate_pairs(num_qubits: usize, target: usize) -> Result<Vec<PairIndex>> {
    if target >= num_qubits {
        return Err(Error::QubitOutOfRange {
            qubit: target,
            num_qubits,
        });
    }
    let offset = 1usize << target;
    Ok((0..1usize << (num_qubits - 1))
        .map(|i| {
            let lo = pair_lo(i, target);
            PairIndex { lo, hi: lo + offset }
        })
        .collect())
}

/// Checks controls and target against the register width and returns the
/// bit mask of the controls.
pub fn control_mask(num_qubits: usize, controls: &[usize], target: usize) -> Result<usize> {
    let check = |q: usize| {
        if q >= num_qubits {
            Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits,
            })
        } else {
            Ok(())
        }
    };
    check(target)?;
    let mut mask = 0usize;
    for &c in controls {
        check(c)?;
        if c == target || mask & (1 << c) != 0 {
            return Err(Error::OverlappingQubits(c));
        }
        mask |= 1 << c;
    }
    Ok(mask)
}

#[inline(always)]
pub(crate) fn mix_lo<T: Scalar>(g: &Mat2<T>, lo: Complex<T>, hi: Complex<T>) -> Complex<T> {
    g[0][0] * lo + g[0][1] * hi
}

#[inline(always)]
pub(crate) fn mix_hi<T: Scalar>(g: &Mat2<T>, lo: Complex<T>, hi: Complex<T>) -> Complex<T> {
    g[1][0] * lo + g[1][1] * hi
}

/// Counters recorded by every kernel invocation on the calling thread.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelProbe {
    pub calls: u64,
    pub pair_updates: u64,
    pub last_target: Option<usize>,
    pub last_control_mask: usize,
}

thread_local! {
    static PROBE: Cell<KernelProbe> = const {
        Cell::new(KernelProbe { calls: 0, pair_updates: 0, last_target: None, last_control_mask: 0 })
    };
}

pub mod probe {
    use super::{KernelProbe, PROBE};

    pub fn snapshot() -> KernelProbe {
        PROBE.with(|p| p.get())
    }

    pub fn reset() {
        PROBE.with(|p| p.set(KernelProbe::default()));
    }
}

fn record(len: usize, target: usize, ctrl_mask: usize) {
    PROBE.with(|p| {
        let mut s = p.get();
        s.calls += 1;
        s.pair_updates += ((len / 2) >> ctrl_mask.count_ones()) as u64;
        s.last_target = Some(target);
        s.last_control_mask = ctrl_mask;
        p.set(s);
    });
}

/// Applies `g` to every amplitude pair of `target` whose lower index has all
/// bits of `ctrl_mask` set. `amps.len()` must be a power of two above `2^target`.
pub fn apply_pairs<T: Scalar>(amps: &mut [Complex<T>], target: usize, ctrl_mask: usize, g: &Mat2<T>) {
    let half = 1usize << target;
    let block = half << 1;
    debug_assert!(amps.len().is_power_of_two() && amps.len() >= block);
    debug_assert_eq!(ctrl_mask & half, 0);
    record(amps.len(), target, ctrl_mask);

    let update = |base: usize, lo: &mut [Complex<T>], hi: &mut [Complex<T>]| {
        if ctrl_mask == 0 {
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = mix_lo(g, x, y);
                *b = mix_hi(g, x, y);
            }
        } else {
            for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                if (base + j) & ctrl_mask == ctrl_mask {
                    let (x, y) = (*a, *b);
                    *a = mix_lo(g, x, y);
                    *b = mix_hi(g, x, y);
                }
            }
        }
    };

    if amps.len() < PARALLEL_THRESHOLD {
        for (b, chunk) in amps.chunks_mut(block).enumerate() {
            let (lo, hi) = chunk.split_at_mut(half);
            update(b * block, lo, hi);
        }
    } else if block <= GRAIN {
        amps.par_chunks_mut(GRAIN).enumerate().for_each(|(c, span)| {
            for (b, chunk) in span.chunks_mut(block).enumerate() {
                let (lo, hi) = chunk.split_at_mut(half);
                update(c * GRAIN + b * block, lo, hi);
            }
        });
    } else {
        let sub = GRAIN / 2;
        amps.par_chunks_mut(block).enumerate().for_each(|(b, chunk)| {
            let (lo, hi) = chunk.split_at_mut(half);
            lo.par_chunks_mut(sub)
                .zip(hi.par_chunks_mut(sub))
                .enumerate()
                .for_each(|(c, (l, h))| update(b * block + c * sub, l, h));
        });
    }
}

pub(crate) fn apply_matrix<T: Scalar>(
    amps: &mut [Complex<T>],
    target: usize,
    ctrl_mask: usize,
    g: &GateMatrix,
) {
    apply_pairs(amps, target, ctrl_mask, &g.cast::<T>());
}

pub(crate) fn apply_to_amplitudes(amps: &mut Amplitudes, target: usize, ctrl_mask: usize, g: &GateMatrix) {
    match amps {
        Amplitudes::Single(v) => apply_matrix(v, target, ctrl_mask, g),
        Amplitudes::Double(v) => apply_matrix(v, target, ctrl_mask, g),
    }
}

fn require_state_vector(reg: &Register) -> Result<()> {
    match reg.kind() {
        RegisterKind::StateVector => Ok(()),
        RegisterKind::DensityMatrix => Err(Error::WrongKind {
            expected: "state-vector",
        }),
    }
}

pub fn apply_single_qubit_gate(reg: &mut Register, target: usize, g: &GateMatrix) -> Result<()> {
    apply_controlled_gate(reg, &[], target, g)
}

/// Applies `g` to `target` on the subspace where every control qubit is 1.
pub fn apply_controlled_gate(
    reg: &mut Register,
    controls: &[usize],
    target: usize,
    g: &GateMatrix,
) -> Result<()> {
    require_state_vector(reg)?;
    let mask = control_mask(reg.num_qubits(), controls, target)?;
    apply_to_amplitudes(reg.amplitudes_mut(), target, mask, g);
    Ok(())
}

/// Applies a named gate; density matrices are routed through
/// [`density::apply_gate_to_density`].
pub fn apply_named_gate(
    reg: &mut Register,
    gate: NamedGate,
    controls: &[usize],
    target: usize,
) -> Result<()> {
    let g = gate.matrix();
    match reg.kind() {
        RegisterKind::StateVector => apply_controlled_gate(reg, controls, target, &g),
        RegisterKind::DensityMatrix => density::apply_gate_to_density(reg, controls, target, &g),
    }
}

pub fn apply_single_qubit_rotation(
    reg: &mut Register,
    target: usize,
    axis: [f64; 3],
    angle: f64,
) -> Result<()> {
    let g = GateMatrix::rotation(axis, angle)?;
    apply_single_qubit_gate(reg, target, &g)
}

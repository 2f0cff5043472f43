//! Density matrices evolved as flattened `2N`-qubit vectors.
//!
//! `G rho G^dagger` is two state-vector kernel calls: `G` on flat qubit `q`
//! (the ket index) followed by `conj(G)` on flat qubit `q + N` (the bra
//! index), with controls shifted the same way.

use num_complex::{Complex, Complex64};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::GateMatrix;
use crate::kernels::{self, control_mask};
use crate::state::{to_c64, Amplitudes, Register, RegisterKind, Scalar, PARALLEL_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// `rho -> (1-p) rho + p Z rho Z`, `p` in `[0, 1/2]`.
    Dephasing,
    /// `rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)`, `p` in `[0, 3/4]`.
    Depolarising,
}

impl ChannelKind {
    pub fn max_prob(self) -> f64 {
        match self {
            ChannelKind::Dephasing => 0.5,
            ChannelKind::Depolarising => 0.75,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::Depolarising => "depolarising",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    kind: ChannelKind,
    target: usize,
    prob: f64,
}

impl Channel {
    pub fn new(kind: ChannelKind, target: usize, prob: f64) -> Result<Self> {
        let max = kind.max_prob();
        if !(0.0..=max).contains(&prob) {
            return Err(Error::ProbabilityOutOfRange {
                channel: kind.name(),
                prob,
                max,
            });
        }
        Ok(Channel { kind, target, prob })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn prob(&self) -> f64 {
        self.prob
    }

    /// Weights `(keep, swap, off)`: on the target's 2x2 block,
    /// `rho00' = keep rho00 + swap rho11` (and symmetrically) and the
    /// off-diagonal entries are scaled by `off`.
    fn weights(&self) -> (f64, f64, f64) {
        let p = self.prob;
        match self.kind {
            ChannelKind::Dephasing => (1.0, 0.0, 1.0 - 2.0 * p),
            ChannelKind::Depolarising => {
                (1.0 - 2.0 * p / 3.0, 2.0 * p / 3.0, 1.0 - 4.0 * p / 3.0)
            }
        }
    }
}

fn require_density(reg: &Register) -> Result<()> {
    match reg.kind() {
        RegisterKind::DensityMatrix => Ok(()),
        RegisterKind::StateVector => Err(Error::WrongKind {
            expected: "density-matrix",
        }),
    }
}

/// `rho -> G rho G^dagger` with `G` acting on `target` under `controls`.
pub fn apply_gate_to_density(
    reg: &mut Register,
    controls: &[usize],
    target: usize,
    g: &GateMatrix,
) -> Result<()> {
    require_density(reg)?;
    let n = reg.num_qubits();
    let mask = control_mask(n, controls, target)?;
    let amps = reg.amplitudes_mut();
    kernels::apply_to_amplitudes(amps, target, mask, g);
    kernels::apply_to_amplitudes(amps, target + n, mask << n, &g.conj());
    Ok(())
}

fn mix_block<T: Scalar>(
    a: &mut [Complex<T>],
    b: &mut [Complex<T>],
    small: usize,
    (keep, swap, off): (T, T, T),
    mix_diag: bool,
) {
    // a: bra bit 0, b: bra bit 1; each split by ket bit.
    let (a0, a1) = a.split_at_mut(small);
    let (b0, b1) = b.split_at_mut(small);
    if mix_diag {
        for (x, y) in a0.iter_mut().zip(b1.iter_mut()) {
            let (u, v) = (*x, *y);
            *x = u * keep + v * swap;
            *y = v * keep + u * swap;
        }
    }
    for z in a1.iter_mut().chain(b0.iter_mut()) {
        *z = *z * off;
    }
}

fn apply_channel_slice<T: Scalar>(amps: &mut [Complex<T>], n: usize, t: usize, w: (f64, f64, f64)) {
    let mix_diag = w.1 != 0.0;
    let w = (T::from_f64(w.0), T::from_f64(w.1), T::from_f64(w.2));
    let small = 1usize << t;
    let pair_block = small << 1;
    let bra_half = 1usize << (t + n);
    let outer = bra_half << 1;

    if amps.len() < PARALLEL_THRESHOLD {
        for chunk in amps.chunks_mut(outer) {
            let (a, b) = chunk.split_at_mut(bra_half);
            for (ca, cb) in a.chunks_mut(pair_block).zip(b.chunks_mut(pair_block)) {
                mix_block(ca, cb, small, w, mix_diag);
            }
        }
    } else {
        let min_len = (4096 / pair_block).max(1);
        amps.par_chunks_mut(outer).for_each(|chunk| {
            let (a, b) = chunk.split_at_mut(bra_half);
            a.par_chunks_mut(pair_block)
                .zip(b.par_chunks_mut(pair_block))
                .with_min_len(min_len)
                .for_each(|(ca, cb)| mix_block(ca, cb, small, w, mix_diag));
        });
    }
}

pub fn apply_channel(reg: &mut Register, channel: &Channel) -> Result<()> {
    require_density(reg)?;
    let n = reg.num_qubits();
    if channel.target >= n {
        return Err(Error::QubitOutOfRange {
            qubit: channel.target,
            num_qubits: n,
        });
    }
    let w = channel.weights();
    match reg.amplitudes_mut() {
        Amplitudes::Single(v) => apply_channel_slice(v, n, channel.target, w),
        Amplitudes::Double(v) => apply_channel_slice(v, n, channel.target, w),
    }
    Ok(())
}

pub fn apply_dephasing(reg: &mut Register, target: usize, prob: f64) -> Result<()> {
    apply_channel(reg, &Channel::new(ChannelKind::Dephasing, target, prob)?)
}

pub fn apply_depolarising(reg: &mut Register, target: usize, prob: f64) -> Result<()> {
    apply_channel(reg, &Channel::new(ChannelKind::Depolarising, target, prob)?)
}

/// `rho_{jk}`, stored at flat index `j + 2^N k`.
pub fn element(reg: &Register, row: usize, col: usize) -> Result<Complex64> {
    require_density(reg)?;
    let dim = 1usize << reg.num_qubits();
    if row >= dim || col >= dim {
        return Err(Error::IndexOutOfRange {
            index: row.max(col),
            len: dim,
        });
    }
    reg.amplitude(row + dim * col)
}

pub fn trace(reg: &Register) -> Result<Complex64> {
    require_density(reg)?;
    let dim = 1usize << reg.num_qubits();
    let stride = dim + 1;
    fn diag_sum<T: Scalar>(v: &[Complex<T>], dim: usize, stride: usize) -> Complex64 {
        (0..dim).map(|j| to_c64(v[j * stride])).sum()
    }
    Ok(match reg.amplitudes() {
        Amplitudes::Single(v) => diag_sum(v, dim, stride),
        Amplitudes::Double(v) => diag_sum(v, dim, stride),
    })
}

/// `Tr(rho^2) = sum |rho_jk|^2` for Hermitian `rho`.
pub fn purity(reg: &Register) -> Result<f64> {
    require_density(reg)?;
    Ok(reg.norm_squared())
}

/// `max_{j,k} |rho_jk - conj(rho_kj)|`.
pub fn hermiticity_error(reg: &Register) -> Result<f64> {
    require_density(reg)?;
    let dim = 1usize << reg.num_qubits();
    let v = reg.to_vec();
    let mut worst = 0.0f64;
    for j in 0..dim {
        for k in j..dim {
            worst = worst.max((v[j + dim * k] - v[k + dim * j].conj()).norm());
        }
    }
    Ok(worst)
}

/// `|psi><psi|` for a double-precision state vector.
pub fn from_pure_state(psi: &Register) -> Result<Register> {
    if psi.kind() != RegisterKind::StateVector {
        return Err(Error::WrongKind {
            expected: "state-vector",
        });
    }
    let amps = psi.to_vec();
    let dim = amps.len();
    let mut flat = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        flat.extend(amps.iter().map(|a| *a * amps[k].conj()));
    }
    Register::from_amplitudes(psi.num_qubits(), RegisterKind::DensityMatrix, flat)
}

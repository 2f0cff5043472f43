//! Register storage and amplitude indexing.
//!
//! Qubit `q` contributes `2^q` to a basis index, so qubit 0 is the least
//! significant bit. A density matrix over `N` qubits is stored as a flat
//! vector of `2^(2N)` amplitudes with `<j|rho|k>` at index `j + 2^N * k`:
//! the row (ket) index occupies flat qubits `0..N` and the column (bra)
//! index occupies flat qubits `N..2N`.

use std::fmt::Debug;

use num_complex::{Complex, Complex32, Complex64};
use num_traits::{Float, FloatConst};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Below this many amplitudes, passes over a register run on the calling thread.
pub(crate) const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Floating point type usable for amplitude storage.
pub trait Scalar: Float + FloatConst + Default + Debug + Send + Sync + 'static {
    const PRECISION: Precision;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    const PRECISION: Precision = Precision::Single;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    const PRECISION: Precision = Precision::Double;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

#[inline]
pub(crate) fn to_scalar<T: Scalar>(z: Complex64) -> Complex<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}

#[inline]
pub(crate) fn to_c64<T: Scalar>(z: Complex<T>) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Single,
    #[default]
    Double,
}

impl Precision {
    /// Bytes used by one complex amplitude.
    pub const fn amplitude_bytes(self) -> u64 {
        match self {
            Precision::Single => 8,
            Precision::Double => 16,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Single => "single",
            Precision::Double => "double",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterKind {
    #[default]
    StateVector,
    DensityMatrix,
}

impl RegisterKind {
    /// Number of qubits of the flat amplitude vector backing an `num_qubits` register.
    pub const fn vector_qubits(self, num_qubits: usize) -> usize {
        match self {
            RegisterKind::StateVector => num_qubits,
            RegisterKind::DensityMatrix => 2 * num_qubits,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegisterKind::StateVector => "statevector",
            RegisterKind::DensityMatrix => "density",
        }
    }
}

/// Bytes needed to store the amplitudes of a register, with no other overhead.
pub fn memory_bytes(num_qubits: usize, kind: RegisterKind, precision: Precision) -> Result<u64> {
    if num_qubits == 0 {
        return Err(Error::domain("a register needs at least one qubit"));
    }
    let vq = kind.vector_qubits(num_qubits);
    1u64.checked_shl(vq as u32)
        .filter(|_| vq < 64)
        .and_then(|len| len.checked_mul(precision.amplitude_bytes()))
        .ok_or_else(|| Error::domain(format!("byte count for {num_qubits} qubits overflows")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Amplitudes {
    Single(Vec<Complex32>),
    Double(Vec<Complex64>),
}

impl Amplitudes {
    pub fn len(&self) -> usize {
        match self {
            Amplitudes::Single(v) => v.len(),
            Amplitudes::Double(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn precision(&self) -> Precision {
        match self {
            Amplitudes::Single(_) => Precision::Single,
            Amplitudes::Double(_) => Precision::Double,
        }
    }
}

pub(crate) fn alloc_zeroed<T: Scalar>(len: usize, num_qubits: usize) -> Result<Vec<Complex<T>>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| Error::Allocation {
        num_qubits,
        bytes: len as u128 * std::mem::size_of::<Complex<T>>() as u128,
    })?;
    v.resize(len, Complex::new(T::zero(), T::zero()));
    Ok(v)
}

pub(crate) fn fill_zero_state<T: Scalar>(amps: &mut [Complex<T>]) {
    let zero = Complex::new(T::zero(), T::zero());
    if amps.len() >= PARALLEL_THRESHOLD {
        amps.par_iter_mut().for_each(|a| *a = zero);
    } else {
        amps.fill(zero);
    }
    amps[0] = Complex::new(T::one(), T::zero());
}

/// Sum of `|a|^2` accumulated in f64. Chunks are summed independently and then
/// combined in order, so the result does not depend on the worker count.
pub(crate) fn sum_norm_sqr<T: Scalar>(amps: &[Complex<T>]) -> f64 {
    const CHUNK: usize = 4096;
    let chunk_sum = |c: &[Complex<T>]| c.iter().map(|a| to_c64(*a).norm_sqr()).sum::<f64>();
    if amps.len() >= PARALLEL_THRESHOLD {
        let partial: Vec<f64> = amps.par_chunks(CHUNK).map(chunk_sum).collect();
        partial.iter().sum()
    } else {
        amps.chunks(CHUNK).map(chunk_sum).sum()
    }
}

/// An N-qubit pure state or density matrix held as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    num_qubits: usize,
    kind: RegisterKind,
    amps: Amplitudes,
}

impl Register {
    /// Allocates a register in the all-zero basis state.
    pub fn new(num_qubits: usize, kind: RegisterKind, precision: Precision) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::domain("a register needs at least one qubit"));
        }
        let vq = kind.vector_qubits(num_qubits);
        if vq >= usize::BITS as usize {
            return Err(Error::Allocation {
                num_qubits,
                bytes: 1u128
                    .checked_shl(vq as u32)
                    .map_or(u128::MAX, |len| len.saturating_mul(precision.amplitude_bytes() as u128)),
            });
        }
        let len = 1usize << vq;
        let mut amps = match precision {
            Precision::Single => Amplitudes::Single(alloc_zeroed(len, num_qubits)?),
            Precision::Double => Amplitudes::Double(alloc_zeroed(len, num_qubits)?),
        };
        match &mut amps {
            Amplitudes::Single(v) => v[0] = Complex32::new(1.0, 0.0),
            Amplitudes::Double(v) => v[0] = Complex64::new(1.0, 0.0),
        }
        Ok(Register {
            num_qubits,
            kind,
            amps,
        })
    }

    pub fn state_vector(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, RegisterKind::StateVector, Precision::Double)
    }

    pub fn density_matrix(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, RegisterKind::DensityMatrix, Precision::Double)
    }

    /// Builds a double-precision register from explicit flat amplitudes.
    pub fn from_amplitudes(
        num_qubits: usize,
        kind: RegisterKind,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::domain("a register needs at least one qubit"));
        }
        let expected = 1usize
            .checked_shl(kind.vector_qubits(num_qubits) as u32)
            .ok_or_else(|| Error::domain("register too large"))?;
        if amps.len() != expected {
            return Err(Error::domain(format!(
                "expected {expected} amplitudes for a {num_qubits}-qubit {}, got {}",
                kind.as_str(),
                amps.len()
            )));
        }
        if let Some(a) = amps.iter().find(|a| !a.is_finite()) {
            return Err(Error::NonFinite { re: a.re, im: a.im });
        }
        Ok(Register {
            num_qubits,
            kind,
            amps: Amplitudes::Double(amps),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Qubits of the flat vector: `N` for a state vector, `2N` for a density matrix.
    pub fn vector_qubits(&self) -> usize {
        self.kind.vector_qubits(self.num_qubits)
    }

    pub fn kind(&self) -> RegisterKind {
        self.kind
    }

    pub fn precision(&self) -> Precision {
        self.amps.precision()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &Amplitudes {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut Amplitudes {
        &mut self.amps
    }

    pub fn init_zero_state(&mut self) {
        match &mut self.amps {
            Amplitudes::Single(v) => fill_zero_state(v),
            Amplitudes::Double(v) => fill_zero_state(v),
        }
    }

    pub fn amplitude(&self, index: usize) -> Result<Amplitude> {
        let len = self.len();
        let oob = || Error::IndexOutOfRange { index, len };
        match &self.amps {
            Amplitudes::Single(v) => v.get(index).map(|a| to_c64(*a)).ok_or_else(oob),
            Amplitudes::Double(v) => v.get(index).copied().ok_or_else(oob),
        }
    }

    /// Overwrites one amplitude. Normalisation is the caller's business.
    pub fn set_amplitude(&mut self, index: usize, value: Amplitude) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                re: value.re,
                im: value.im,
            });
        }
        let len = self.len();
        let slot_err = Error::IndexOutOfRange { index, len };
        match &mut self.amps {
            Amplitudes::Single(v) => *v.get_mut(index).ok_or(slot_err)? = to_scalar(value),
            Amplitudes::Double(v) => *v.get_mut(index).ok_or(slot_err)? = value,
        }
        Ok(())
    }

    /// `sum |a_n|^2` over the whole flat vector. For a density matrix this is
    /// the purity `Tr(rho^2)`, not the trace.
    pub fn norm_squared(&self) -> f64 {
        match &self.amps {
            Amplitudes::Single(v) => sum_norm_sqr(v),
            Amplitudes::Double(v) => sum_norm_sqr(v),
        }
    }

    /// Copy of the flat amplitudes widened to double precision.
    pub fn to_vec(&self) -> Vec<Complex64> {
        match &self.amps {
            Amplitudes::Single(v) => v.iter().map(|a| to_c64(*a)).collect(),
            Amplitudes::Double(v) => v.clone(),
        }
    }

    pub fn memory_bytes(&self) -> u64 {
        self.len() as u64 * self.precision().amplitude_bytes()
    }
}

//! 2x2 gate matrices and the named gate set.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::state::{to_scalar, Scalar};

/// Entrywise tolerance for the `G^dagger G = I` check.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A single-qubit operator, row-major: `[[m00, m01], [m10, m11]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateMatrix {
    pub m: [[Complex64; 2]; 2],
}

impl GateMatrix {
    /// Any 2x2 matrix, unitary or not.
    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        GateMatrix {
            m: [[m00, m01], [m10, m11]],
        }
    }

    /// A matrix checked to be unitary within [`UNITARY_TOLERANCE`].
    pub fn unitary(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Result<Self> {
        let g = Self::new(m00, m01, m10, m11);
        if g.is_unitary(UNITARY_TOLERANCE) {
            Ok(g)
        } else {
            Err(Error::domain(format!("matrix {g:?} is not unitary")))
        }
    }

    pub const fn identity() -> Self {
        Self::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
    }

    pub const fn pauli_x() -> Self {
        Self::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
    }

    pub const fn pauli_y() -> Self {
        Self::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
    }

    pub const fn pauli_z() -> Self {
        Self::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
    }

    pub const fn hadamard() -> Self {
        Self::new(
            c(FRAC_1_SQRT_2, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
            c(-FRAC_1_SQRT_2, 0.0),
        )
    }

    /// The pi/8 gate `diag(1, e^{i pi/4})`.
    pub fn t() -> Self {
        Self::new(
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, FRAC_PI_4),
        )
    }

    /// `X^{1/2} = ((1+i) I + (1-i) X) / 2`.
    pub const fn sqrt_x() -> Self {
        Self::new(c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5))
    }

    /// `Y^{1/2} = (1+i)/2 [[1, -1], [1, 1]]`.
    pub const fn sqrt_y() -> Self {
        Self::new(c(0.5, 0.5), c(-0.5, -0.5), c(0.5, 0.5), c(0.5, 0.5))
    }

    /// `cos(angle/2) I - i sin(angle/2) (axis . sigma)` for a unit `axis`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Result<Self> {
        let len = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !len.is_finite() || (len - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "rotation axis {axis:?} is not a unit vector (|axis| = {len})"
            )));
        }
        if !angle.is_finite() {
            return Err(Error::domain(format!("rotation angle {angle} is not finite")));
        }
        let [nx, ny, nz] = axis;
        let (s, co) = (angle / 2.0).sin_cos();
        Ok(Self::new(
            c(co, -s * nz),
            c(-s * ny, -s * nx),
            c(s * ny, -s * nx),
            c(co, s * nz),
        ))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    /// Elementwise complex conjugate (not transposed).
    pub fn conj(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[0][1].conj(), m[1][0].conj(), m[1][1].conj())
    }

    pub fn mul(&self, rhs: &GateMatrix) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint().mul(self).max_abs_diff(&Self::identity()) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.is_finite())
    }

    pub(crate) fn cast<T: Scalar>(&self) -> [[Complex<T>; 2]; 2] {
        self.m.map(|row| row.map(to_scalar))
    }
}

/// Gates addressable by name in circuits and on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedGate {
    H,
    T,
    /// Controlled phase; applied as `Z` on the target under its controls.
    CZ,
    SqrtX,
    SqrtY,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    X,
    Y,
    Z,
}

impl NamedGate {
    pub fn matrix(&self) -> GateMatrix {
        match *self {
            NamedGate::H => GateMatrix::hadamard(),
            NamedGate::T => GateMatrix::t(),
            NamedGate::CZ | NamedGate::Z => GateMatrix::pauli_z(),
            NamedGate::SqrtX => GateMatrix::sqrt_x(),
            NamedGate::SqrtY => GateMatrix::sqrt_y(),
            NamedGate::X => GateMatrix::pauli_x(),
            NamedGate::Y => GateMatrix::pauli_y(),
            NamedGate::Rx(a) => rotation_unchecked([1.0, 0.0, 0.0], a),
            NamedGate::Ry(a) => rotation_unchecked([0.0, 1.0, 0.0], a),
            NamedGate::Rz(a) => rotation_unchecked([0.0, 0.0, 1.0], a),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NamedGate::H => "H",
            NamedGate::T => "T",
            NamedGate::CZ => "CZ",
            NamedGate::SqrtX => "SqrtX",
            NamedGate::SqrtY => "SqrtY",
            NamedGate::Rx(_) => "Rx",
            NamedGate::Ry(_) => "Ry",
            NamedGate::Rz(_) => "Rz",
            NamedGate::X => "X",
            NamedGate::Y => "Y",
            NamedGate::Z => "Z",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            NamedGate::Rx(a) | NamedGate::Ry(a) | NamedGate::Rz(a) => Some(a),
            _ => None,
        }
    }

    /// Builds a gate from its name and, for rotations, an angle.
    pub fn from_parts(name: &str, angle: Option<f64>) -> Result<Self> {
        let plain = |g: NamedGate| match angle {
            None => Ok(g),
            Some(_) => Err(Error::domain(format!("gate {name} takes no angle"))),
        };
        let rot = |f: fn(f64) -> NamedGate| {
            angle
                .map(f)
                .ok_or_else(|| Error::domain(format!("gate {name} needs an angle")))
        };
        match name {
            "H" => plain(NamedGate::H),
            "T" => plain(NamedGate::T),
            "CZ" => plain(NamedGate::CZ),
            "SqrtX" => plain(NamedGate::SqrtX),
            "SqrtY" => plain(NamedGate::SqrtY),
            "X" => plain(NamedGate::X),
            "Y" => plain(NamedGate::Y),
            "Z" => plain(NamedGate::Z),
            "Rx" => rot(NamedGate::Rx),
            "Ry" => rot(NamedGate::Ry),
            "Rz" => rot(NamedGate::Rz),
            _ => Err(Error::domain(format!("unknown gate `{name}`"))),
        }
    }
}

impl fmt::Display for NamedGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.angle() {
            Some(a) => write!(f, "{}({a})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for NamedGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_parts(s, None)
    }
}

fn rotation_unchecked(axis: [f64; 3], angle: f64) -> GateMatrix {
    GateMatrix::rotation(axis, angle).unwrap_or_else(|_| {
        // Non-finite angle: propagate NaNs rather than panicking mid-circuit.
        GateMatrix::new(
            c(f64::NAN, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(f64::NAN, 0.0),
        )
    })
}

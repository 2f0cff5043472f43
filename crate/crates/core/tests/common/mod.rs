#![allow(dead_code)]

use ampsim::{GateMatrix, NamedGate};
use ndarray::linalg::kron;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub type CMat = Array2<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn to_array(g: &GateMatrix) -> CMat {
    Array2::from_shape_fn((2, 2), |(r, col)| g.m[r][col])
}

fn eye2() -> CMat {
    Array2::from_shape_fn((2, 2), |(r, col)| if r == col { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

fn proj1() -> CMat {
    Array2::from_shape_fn((2, 2), |(r, col)| if r == 1 && col == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// Tensor product with qubit `n-1` leftmost, so qubit 0 is the least
/// significant bit of the row index.
pub fn tensor(n: usize, factor: impl Fn(usize) -> CMat) -> CMat {
    let mut acc = Array2::from_elem((1, 1), c(1.0, 0.0));
    for q in (0..n).rev() {
        acc = kron(&acc, &factor(q));
    }
    acc
}

/// Full `2^n x 2^n` operator of `g` on `target` conditioned on `controls`:
/// `I - P + P (G_target)` with `P` the projector onto all controls set.
pub fn controlled_operator(n: usize, controls: &[usize], target: usize, g: &GateMatrix) -> CMat {
    let ident = tensor(n, |_| eye2());
    let p = tensor(n, |q| if controls.contains(&q) { proj1() } else { eye2() });
    let pg = tensor(n, |q| {
        if controls.contains(&q) {
            proj1()
        } else if q == target {
            to_array(g)
        } else {
            eye2()
        }
    });
    ident - p + pg
}

pub fn embed(n: usize, target: usize, g: &CMat) -> CMat {
    tensor(n, |q| if q == target { g.clone() } else { eye2() })
}

pub fn apply_operator(u: &CMat, psi: &[Complex64]) -> Vec<Complex64> {
    u.dot(&Array1::from(psi.to_vec())).to_vec()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn random_state(rng: &mut StdRng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1usize << n)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn random_unitary(rng: &mut StdRng) -> GateMatrix {
    let (theta, phi) = (rng.random::<f64>() * std::f64::consts::PI, rng.random::<f64>() * std::f64::consts::TAU);
    let axis = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let angle = (rng.random::<f64>() - 0.5) * 4.0 * std::f64::consts::PI;
    let g = GateMatrix::rotation(axis, angle).unwrap();
    // a global phase keeps the test sensitive to dropped phases
    let ph = Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
    GateMatrix::new(g.m[0][0] * ph, g.m[0][1] * ph, g.m[1][0] * ph, g.m[1][1] * ph)
}

pub fn random_named(rng: &mut StdRng) -> NamedGate {
    let a = (rng.random::<f64>() - 0.5) * 8.0;
    let all = [
        NamedGate::H,
        NamedGate::T,
        NamedGate::CZ,
        NamedGate::SqrtX,
        NamedGate::SqrtY,
        NamedGate::X,
        NamedGate::Y,
        NamedGate::Z,
        NamedGate::Rx(a),
        NamedGate::Ry(a),
        NamedGate::Rz(a),
    ];
    all[rng.random_range(0..all.len())]
}

/// A target and up to `n-1` distinct controls.
pub fn random_qubits(rng: &mut StdRng, n: usize) -> (usize, Vec<usize>) {
    let mut qs: Vec<usize> = (0..n).collect();
    qs.shuffle(rng);
    let k = rng.random_range(0..n);
    (qs[0], qs[1..=k].to_vec())
}

/// Random circuit of arbitrary named gates with random controls.
pub fn random_gate_circuit(rng: &mut StdRng, n: usize, len: usize) -> ampsim::Circuit {
    let mut circ = ampsim::Circuit::new(n, len).unwrap();
    for _ in 0..len {
        let (t, ctrls) = random_qubits(rng, n);
        let mut g = random_named(rng);
        if g == NamedGate::CZ && ctrls.is_empty() {
            g = NamedGate::Z;
        }
        circ.push(ampsim::GateOp::controlled(g, ctrls, t)).unwrap();
    }
    circ
}

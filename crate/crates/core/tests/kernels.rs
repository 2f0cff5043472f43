mod common;

use ampsim::kernels::{apply_controlled_gate, apply_named_gate, enumerate_pairs, pair_lo};
use ampsim::{circuits, Env, GateMatrix, Precision, Register, RegisterKind};
use common::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn register(n: usize, amps: &[num_complex::Complex64]) -> Register {
    Register::from_amplitudes(n, RegisterKind::StateVector, amps.to_vec()).unwrap()
}

#[test]
fn named_gates_match_kronecker_operator() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..200 {
        let n = 1 + (rand::Rng::random_range(&mut rng, 0..5));
        let psi = random_state(&mut rng, n);
        let (t, ctrls) = random_qubits(&mut rng, n);
        let gate = random_named(&mut rng);
        let mut reg = register(n, &psi);
        apply_named_gate(&mut reg, gate, &ctrls, t).unwrap();
        let expect = apply_operator(&controlled_operator(n, &ctrls, t, &gate.matrix()), &psi);
        assert!(max_diff(&reg.to_vec(), &expect) <= 1e-12, "{gate} t={t} c={ctrls:?}");
    }
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = StdRng::seed_from_u64(5);
    let n = 6;
    let mut single = Register::new(n, RegisterKind::StateVector, Precision::Single).unwrap();
    let mut double = Register::state_vector(n).unwrap();
    for _ in 0..40 {
        let (t, ctrls) = random_qubits(&mut rng, n);
        let g = random_unitary(&mut rng);
        apply_controlled_gate(&mut single, &ctrls, t, &g).unwrap();
        apply_controlled_gate(&mut double, &ctrls, t, &g).unwrap();
    }
    assert!(max_diff(&single.to_vec(), &double.to_vec()) < 1e-5);
    assert!((single.norm_squared() - 1.0).abs() < 1e-5);
}

#[test]
fn worker_count_does_not_change_bits() {
    let circ = circuits::generate_random_circuit(&circuits::RandomCircuitSpec::new(17, 8, 3)).unwrap();
    let run = |workers: usize| {
        let env = Env::new(workers).unwrap();
        env.install(|| {
            let mut reg = Register::state_vector(17).unwrap();
            circuits::run_circuit(&circ, &mut reg).unwrap();
            reg.to_vec()
        })
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(4));
}

#[test]
fn pairs_tile_the_index_space() {
    for n in 1..=10 {
        for t in 0..n {
            let mut seen = vec![0u8; 1 << n];
            for p in enumerate_pairs(n, t).unwrap() {
                assert_eq!(p.lo >> t & 1, 0);
                assert_eq!(p.hi, p.lo | 1 << t);
                seen[p.lo] += 1;
                seen[p.hi] += 1;
            }
            assert!(seen.iter().all(|&s| s == 1));
        }
    }
}

proptest! {
    #[test]
    fn unitaries_preserve_norm(seed in any::<u64>(), n in 1usize..=8, gates in 1usize..30) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut reg = register(n, &random_state(&mut rng, n));
        for _ in 0..gates {
            let (t, ctrls) = random_qubits(&mut rng, n);
            apply_controlled_gate(&mut reg, &ctrls, t, &random_unitary(&mut rng)).unwrap();
        }
        prop_assert!((reg.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_then_adjoint_is_identity(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let psi = random_state(&mut rng, n);
        let mut reg = register(n, &psi);
        let (t, ctrls) = random_qubits(&mut rng, n);
        let g = random_unitary(&mut rng);
        apply_controlled_gate(&mut reg, &ctrls, t, &g).unwrap();
        apply_controlled_gate(&mut reg, &ctrls, t, &g.adjoint()).unwrap();
        prop_assert!(max_diff(&reg.to_vec(), &psi) < 1e-13);
    }

    #[test]
    fn pair_formula_inverts_bit_removal(i in 0usize..1 << 20, t in 0usize..21) {
        let lo = pair_lo(i, t);
        prop_assert_eq!(lo >> t & 1, 0);
        let removed = (lo >> (t + 1) << t) | (lo & ((1 << t) - 1));
        prop_assert_eq!(removed, i);
    }

    #[test]
    fn controls_commute_with_target_order(seed in any::<u64>()) {
        // CZ is symmetric in its two qubits
        let mut rng = StdRng::seed_from_u64(seed);
        let n = 4;
        let psi = random_state(&mut rng, n);
        let (t, ctrls) = random_qubits(&mut rng, n);
        prop_assume!(ctrls.len() == 1);
        let z = GateMatrix::pauli_z();
        let mut a = register(n, &psi);
        let mut b = register(n, &psi);
        apply_controlled_gate(&mut a, &ctrls, t, &z).unwrap();
        apply_controlled_gate(&mut b, &[t], ctrls[0], &z).unwrap();
        prop_assert_eq!(a.to_vec(), b.to_vec());
    }
}

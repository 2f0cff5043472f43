//! Bulk-synchronous execution of gates over a partitioned state.
//!
//! Every rank runs on its own thread and owns its [`RankState`]. After each
//! gate all ranks meet at a barrier, so between gates the concatenation of
//! the local slices is exactly the global state.

use num_complex::{Complex, Complex64};
use rayon::prelude::*;

use super::transport::{Transport, ABORTED};
use super::PartitionPlan;
use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::gates::GateMatrix;
use crate::kernels::{self, control_mask, mix_hi, mix_lo, Mat2};
use crate::parallel::Env;
use crate::state::{alloc_zeroed, fill_zero_state, to_c64, to_scalar, RegisterKind, Scalar, PARALLEL_THRESHOLD};

/// One rank's slice of the global vector and its receive buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct RankState<T: Scalar> {
    pub rank: usize,
    pub local: Vec<Complex<T>>,
    pub buffer: Vec<Complex<T>>,
}

/// Exact communication counters. `messages_sent` and `bytes_sent` are per
/// rank, `exchange_rounds` holds one entry per executed gate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommStats {
    pub messages_sent: Vec<u64>,
    pub bytes_sent: Vec<u64>,
    pub exchange_rounds: Vec<u64>,
}

impl CommStats {
    pub fn new(ranks: usize) -> Self {
        CommStats {
            messages_sent: vec![0; ranks],
            bytes_sent: vec![0; ranks],
            exchange_rounds: Vec::new(),
        }
    }

    pub fn total_messages(&self) -> u64 {
        self.messages_sent.iter().sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.bytes_sent.iter().sum()
    }

    /// Gates that needed at least one exchange.
    pub fn communicated_gates(&self) -> usize {
        self.exchange_rounds.iter().filter(|&&r| r > 0).count()
    }

    pub fn merge(&mut self, other: &CommStats) {
        if self.messages_sent.len() < other.messages_sent.len() {
            self.messages_sent.resize(other.messages_sent.len(), 0);
            self.bytes_sent.resize(other.bytes_sent.len(), 0);
        }
        for (a, b) in self.messages_sent.iter_mut().zip(&other.messages_sent) {
            *a += b;
        }
        for (a, b) in self.bytes_sent.iter_mut().zip(&other.bytes_sent) {
            *a += b;
        }
        self.exchange_rounds.extend_from_slice(&other.exchange_rounds);
    }
}

/// A gate resolved against the flat vector: target, control mask and matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistOp {
    pub target: usize,
    pub ctrl_mask: usize,
    pub matrix: GateMatrix,
}

/// Lowers a circuit to flat-vector operations. A density-matrix register
/// doubles every gate: `G` on the ket qubit, `conj(G)` on the bra qubit.
pub fn resolve_circuit(circuit: &Circuit, kind: RegisterKind) -> Result<Vec<DistOp>> {
    let n = circuit.num_qubits();
    let mut ops = Vec::with_capacity(circuit.len() * 2);
    for op in circuit.ops() {
        let mask = control_mask(n, &op.controls, op.target)?;
        let g = op.matrix();
        ops.push(DistOp {
            target: op.target,
            ctrl_mask: mask,
            matrix: g,
        });
        if kind == RegisterKind::DensityMatrix {
            ops.push(DistOp {
                target: op.target + n,
                ctrl_mask: mask << n,
                matrix: g.conj(),
            });
        }
    }
    Ok(ops)
}

/// Callbacks made by rank 0 at the edges of a run.
pub trait RunHooks: Sync {
    /// All ranks have passed the start barrier and no gate has run yet.
    fn started(&self) {}
    /// Every rank has passed the barrier after the last gate.
    fn finished(&self) {}
}

pub struct NoHooks;

impl RunHooks for NoHooks {}

/// All ranks of a partitioned register, owned by one process.
#[derive(Debug, Clone)]
pub struct Cluster<T: Scalar> {
    plan: PartitionPlan,
    ranks: Vec<RankState<T>>,
}

struct RankOutcome {
    messages: u64,
    bytes: u64,
    rounds: Vec<u64>,
}

impl<T: Scalar> Cluster<T> {
    /// Allocates every rank's slice and buffer, zero-filled.
    pub fn new(plan: PartitionPlan) -> Result<Self> {
        let local_len = plan.local_len();
        let buffer_len = plan.buffer_len();
        let n = plan.num_qubits();
        let ranks = (0..plan.ranks())
            .map(|rank| {
                Ok(RankState {
                    rank,
                    local: alloc_zeroed(local_len, n)?,
                    buffer: alloc_zeroed(buffer_len, n)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Cluster { plan, ranks })
    }

    /// Scatters a global vector over the ranks.
    pub fn from_global(plan: PartitionPlan, amps: &[Complex64]) -> Result<Self> {
        if amps.len() != 1 << plan.num_qubits() {
            return Err(Error::domain(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1usize << plan.num_qubits(),
                plan.num_qubits(),
                amps.len()
            )));
        }
        let mut c = Self::new(plan)?;
        let len = c.plan.local_len();
        for (r, chunk) in c.ranks.iter_mut().zip(amps.chunks(len)) {
            for (dst, src) in r.local.iter_mut().zip(chunk) {
                *dst = to_scalar(*src);
            }
        }
        Ok(c)
    }

    pub fn plan(&self) -> &PartitionPlan {
        &self.plan
    }

    pub fn ranks(&self) -> &[RankState<T>] {
        &self.ranks
    }

    /// Modelled bytes held by all ranks: slices plus receive buffers.
    pub fn modeled_bytes(&self) -> u64 {
        self.plan.rank_bytes(T::PRECISION) * self.plan.ranks() as u64
    }

    /// Global `|0...0>`: amplitude 1 on rank 0, index 0.
    pub fn init_zero_state(&mut self) {
        let zero = Complex::new(T::zero(), T::zero());
        for r in &mut self.ranks {
            if r.rank == 0 {
                fill_zero_state(&mut r.local);
            } else {
                r.local.fill(zero);
            }
        }
    }

    /// Concatenates the local slices in rank order.
    pub fn gather(&self) -> Vec<Complex64> {
        self.ranks
            .iter()
            .flat_map(|r| r.local.iter().map(|a| to_c64(*a)))
            .collect()
    }

    pub fn apply_gate(
        &mut self,
        controls: &[usize],
        target: usize,
        g: &GateMatrix,
        transport: &dyn Transport<T>,
    ) -> Result<CommStats> {
        let op = DistOp {
            target,
            ctrl_mask: control_mask(self.plan.num_qubits(), controls, target)?,
            matrix: *g,
        };
        self.run(&[op], transport, &NoHooks, None)
    }

    /// Runs a circuit on a register of `kind`; the plan must cover
    /// `kind.vector_qubits(circuit.num_qubits())` qubits.
    pub fn run_circuit(
        &mut self,
        circuit: &Circuit,
        kind: RegisterKind,
        transport: &dyn Transport<T>,
        env: Option<&Env>,
    ) -> Result<CommStats> {
        let vq = kind.vector_qubits(circuit.num_qubits());
        if vq != self.plan.num_qubits() {
            return Err(Error::domain(format!(
                "circuit needs a {vq}-qubit vector, plan has {}",
                self.plan.num_qubits()
            )));
        }
        let ops = resolve_circuit(circuit, kind)?;
        self.run(&ops, transport, &NoHooks, env)
    }

    /// Executes `ops` with one thread per rank, a barrier before the first
    /// gate and after every gate. Local kernels run on `env` when given.
    pub fn run(
        &mut self,
        ops: &[DistOp],
        transport: &dyn Transport<T>,
        hooks: &dyn RunHooks,
        env: Option<&Env>,
    ) -> Result<CommStats> {
        let n = self.plan.num_qubits();
        if transport.ranks() != self.plan.ranks() {
            return Err(Error::domain(format!(
                "transport connects {} ranks, plan has {}",
                transport.ranks(),
                self.plan.ranks()
            )));
        }
        for op in ops {
            if op.target >= n || op.ctrl_mask >> n != 0 || op.ctrl_mask & (1 << op.target) != 0 {
                return Err(Error::domain(format!(
                    "operation on qubit {} with control mask {:#x} does not fit {n} qubits",
                    op.target, op.ctrl_mask
                )));
            }
        }
        let mats: Vec<Mat2<T>> = ops.iter().map(|op| op.matrix.cast::<T>()).collect();
        let plan = &self.plan;

        let results: Vec<Result<RankOutcome>> = std::thread::scope(|s| {
            let handles: Vec<_> = self
                .ranks
                .iter_mut()
                .map(|state| {
                    let mats = &mats;
                    s.spawn(move || {
                        let out = run_rank(plan, state, ops, mats, transport, hooks, env);
                        if out.is_err() {
                            transport.abort();
                        }
                        out
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::domain("rank thread panicked"))))
                .collect()
        });

        let mut stats = CommStats::new(plan.ranks());
        stats.exchange_rounds = vec![0; ops.len()];
        let mut errors = Vec::new();
        for (rank, res) in results.into_iter().enumerate() {
            match res {
                Ok(o) => {
                    stats.messages_sent[rank] = o.messages;
                    stats.bytes_sent[rank] = o.bytes;
                    for (acc, r) in stats.exchange_rounds.iter_mut().zip(o.rounds) {
                        *acc = (*acc).max(r);
                    }
                }
                Err(e) => errors.push(e),
            }
        }
        if errors.is_empty() {
            return Ok(stats);
        }
        let secondary = |e: &Error| matches!(e, Error::Communication { reason, .. } if reason == ABORTED);
        let first = errors.iter().position(|e| !secondary(e)).unwrap_or(0);
        Err(errors.swap_remove(first))
    }
}

/// Rank threads wait on each other in barriers, so only the data-parallel
/// compute steps run on the shared pool, never a whole rank.
fn on_pool<R: Send>(env: Option<&Env>, f: impl FnOnce() -> R + Send) -> R {
    match env {
        Some(env) => env.install(f),
        None => f(),
    }
}

fn run_rank<T: Scalar>(
    plan: &PartitionPlan,
    state: &mut RankState<T>,
    ops: &[DistOp],
    mats: &[Mat2<T>],
    transport: &dyn Transport<T>,
    hooks: &dyn RunHooks,
    env: Option<&Env>,
) -> Result<RankOutcome> {
    let rank = state.rank;
    let mut out = RankOutcome {
        messages: 0,
        bytes: 0,
        rounds: Vec::with_capacity(ops.len()),
    };
    transport.barrier(rank)?;
    if rank == 0 {
        hooks.started();
    }
    transport.barrier(rank)?;

    let local_qubits = plan.local_qubits();
    let local_mask_bits = plan.local_len() - 1;
    for (op, g) in ops.iter().zip(mats) {
        let local_mask = op.ctrl_mask & local_mask_bits;
        let rank_mask = op.ctrl_mask >> local_qubits;
        let mut rounds = 0;
        if rank & rank_mask == rank_mask {
            if op.target < local_qubits {
                on_pool(env, || kernels::apply_pairs(&mut state.local, op.target, local_mask, g));
            } else {
                let (m, b) = exchange_and_mix(plan, state, op.target, local_mask, g, transport, env)?;
                rounds = m;
                out.messages += m;
                out.bytes += b;
            }
        }
        out.rounds.push(rounds);
        transport.barrier(rank)?;
    }
    if rank == 0 {
        hooks.finished();
    }
    Ok(out)
}

/// Swaps the partition with the paired rank in strategy-sized messages and
/// recomputes the amplitudes this rank owns. Returns `(messages, bytes)`.
fn exchange_and_mix<T: Scalar>(
    plan: &PartitionPlan,
    state: &mut RankState<T>,
    target: usize,
    local_mask: usize,
    g: &Mat2<T>,
    transport: &dyn Transport<T>,
    env: Option<&Env>,
) -> Result<(u64, u64)> {
    let peer = plan.pair_rank(state.rank, target)?;
    let holds_lo = state.rank & (1 << (target - plan.local_qubits())) == 0;
    let msg = plan.strategy().message_len(plan.local_len());
    let amp_bytes = std::mem::size_of::<Complex<T>>() as u64;
    let buf = &mut state.buffer[..msg];
    let mut messages = 0;
    for (c, part) in state.local.chunks_mut(msg).enumerate() {
        transport.exchange(state.rank, peer, part, buf)?;
        messages += 1;
        let base = c * msg;
        let mix = |(j, (a, b)): (usize, (&mut Complex<T>, &Complex<T>))| {
            if (base + j) & local_mask == local_mask {
                *a = if holds_lo {
                    mix_lo(g, *a, *b)
                } else {
                    mix_hi(g, *b, *a)
                };
            }
        };
        if msg >= PARALLEL_THRESHOLD {
            on_pool(env, || part.par_iter_mut().zip(buf.par_iter()).enumerate().for_each(mix));
        } else {
            part.iter_mut().zip(buf.iter()).enumerate().for_each(mix);
        }
    }
    Ok((messages, messages * msg as u64 * amp_bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributed::{partition, FullClone, HalfExchange, InProcessTransport, PerAmplitude};
    use crate::gates::NamedGate;
    use crate::kernels::apply_controlled_gate;
    use crate::state::Register;
    use std::sync::Arc;

    fn zero_cluster(n: usize, k: usize) -> Cluster<f64> {
        let mut c = Cluster::new(partition(n, k, Arc::new(FullClone)).unwrap()).unwrap();
        c.init_zero_state();
        c
    }

    fn oracle(n: usize, controls: &[usize], target: usize, g: &GateMatrix) -> Vec<Complex64> {
        let mut r = Register::state_vector(n).unwrap();
        apply_controlled_gate(&mut r, controls, target, g).unwrap();
        r.to_vec()
    }

    #[test]
    fn hadamard_on_rank_qubit() {
        let mut c = zero_cluster(3, 1);
        let t = InProcessTransport::new(2);
        let h = GateMatrix::hadamard();
        let stats = c.apply_gate(&[], 2, &h, &t).unwrap();
        assert_eq!(c.gather(), oracle(3, &[], 2, &h));
        assert_eq!(stats.messages_sent, vec![1, 1]);
        assert_eq!(stats.bytes_sent, vec![64, 64]);
        assert_eq!(stats.exchange_rounds, vec![1]);
        assert_eq!(t.delivered(0), (1, 64));
    }

    #[test]
    fn local_gate_sends_nothing() {
        let mut c = zero_cluster(3, 1);
        let t = InProcessTransport::new(2);
        let h = GateMatrix::hadamard();
        let stats = c.apply_gate(&[], 0, &h, &t).unwrap();
        assert_eq!(c.gather(), oracle(3, &[], 0, &h));
        assert_eq!(stats.total_messages(), 0);
        assert_eq!(stats.exchange_rounds, vec![0]);
    }

    #[test]
    fn rank_controls_resolved_locally() {
        let n = 4;
        let mut amps = vec![Complex64::new(0.25, 0.0); 1 << n];
        amps[5] = Complex64::new(0.0, 0.5);
        let z = NamedGate::CZ.matrix();
        let mut reg = Register::from_amplitudes(n, RegisterKind::StateVector, amps.clone()).unwrap();
        apply_controlled_gate(&mut reg, &[3], 2, &z).unwrap();

        let plan = partition(n, 2, Arc::new(FullClone)).unwrap();
        let mut c = Cluster::<f64>::from_global(plan, &amps).unwrap();
        let t = InProcessTransport::new(4);
        let stats = c.apply_gate(&[3], 2, &z, &t).unwrap();
        assert_eq!(c.gather(), reg.to_vec());
        // ranks 0 and 1 have qubit 3 clear and skip the exchange
        assert_eq!(stats.messages_sent, vec![0, 0, 1, 1]);
    }

    #[test]
    fn strategies_agree_bitwise() {
        let n = 6;
        let amps: Vec<Complex64> = (0..1 << n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()) / 6.0)
            .collect();
        let g = GateMatrix::rotation([0.0, 0.6, 0.8], 0.7).unwrap();
        let mut reg = Register::from_amplitudes(n, RegisterKind::StateVector, amps.clone()).unwrap();
        apply_controlled_gate(&mut reg, &[1], 5, &g).unwrap();
        let expect = reg.to_vec();
        for strategy in [
            Arc::new(FullClone) as Arc<dyn super::super::ExchangeStrategy>,
            Arc::new(HalfExchange),
            Arc::new(PerAmplitude::default()),
            Arc::new(PerAmplitude::new(4).unwrap()),
        ] {
            let plan = partition(n, 2, strategy).unwrap();
            let msg = plan.strategy().message_len(plan.local_len()) as u64;
            let mut c = Cluster::<f64>::from_global(plan, &amps).unwrap();
            let t = InProcessTransport::new(4);
            let stats = c.apply_gate(&[1], 5, &g, &t).unwrap();
            assert_eq!(c.gather(), expect);
            assert_eq!(stats.messages_sent, vec![16 / msg; 4]);
            assert_eq!(stats.bytes_sent, vec![16 * 16; 4]);
        }
    }

    #[test]
    fn hooks_fire_once_around_gates() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        struct Count(AtomicUsize, AtomicUsize);
        impl RunHooks for Count {
            fn started(&self) {
                assert_eq!(self.1.load(Ordering::SeqCst), 0);
                self.0.fetch_add(1, Ordering::SeqCst);
            }
            fn finished(&self) {
                self.1.fetch_add(1, Ordering::SeqCst);
            }
        }
        let mut c = zero_cluster(4, 2);
        let t = InProcessTransport::new(4);
        let hooks = Count(AtomicUsize::new(0), AtomicUsize::new(0));
        let op = DistOp {
            target: 3,
            ctrl_mask: 0,
            matrix: GateMatrix::hadamard(),
        };
        c.run(&[op, op], &t, &hooks, None).unwrap();
        assert_eq!(hooks.0.load(Ordering::SeqCst), 1);
        assert_eq!(hooks.1.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let mut c = zero_cluster(3, 1);
        let t = InProcessTransport::new(4);
        assert!(c.apply_gate(&[], 2, &GateMatrix::hadamard(), &t).is_err());
        let t = InProcessTransport::new(2);
        assert!(c.apply_gate(&[], 3, &GateMatrix::hadamard(), &t).is_err());
        let plan = partition(3, 1, Arc::new(FullClone)).unwrap();
        assert!(Cluster::<f64>::from_global(plan, &[Complex64::default(); 4]).is_err());
    }
}

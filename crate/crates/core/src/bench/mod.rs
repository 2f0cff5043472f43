//! Benchmark harness.
//!
//! A timed run is: allocate once, then per repetition initialise `|0...0>`,
//! pass a barrier of all ranks, start the clock, apply every gate, pass a
//! barrier of all ranks, stop the clock. Allocation and initialisation are
//! never inside the timed region.

mod record;
mod sysmem;

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use record::{write_csv, write_json_lines, write_rows, BenchRecord, OutputFormat};
pub use sysmem::{peak_process_bytes, total_memory_bytes};

use crate::circuits::{generate_random_circuit, Circuit, RandomCircuitSpec};
use crate::distributed::{
    partition, resolve_circuit, Cluster, CommStats, DistOp, ExchangeStrategy, FullClone, InProcessTransport,
    MemoryModel, RunHooks, Transport, DEFAULT_OVERHEAD_BYTES,
};
use crate::error::{Error, Result};
use crate::gates::GateMatrix;
use crate::parallel::Env;
use crate::state::{memory_bytes, Precision, RegisterKind, Scalar};

pub const DEFAULT_WARMUPS: usize = 3;
pub const DEFAULT_REPETITIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolEvent {
    Allocated,
    Initialized { repetition: usize },
    StartBarrierPassed { repetition: usize },
    ClockStarted { repetition: usize },
    EndBarrierPassed { repetition: usize },
    ClockStopped { repetition: usize },
}

/// Receives every protocol step, in order, for timed repetitions.
pub trait ProtocolObserver: Sync {
    fn event(&self, event: ProtocolEvent);
}

pub struct NoObserver;

impl ProtocolObserver for NoObserver {
    fn event(&self, _: ProtocolEvent) {}
}

/// Collects events for later inspection.
#[derive(Debug, Default)]
pub struct EventLog(pub Mutex<Vec<ProtocolEvent>>);

impl EventLog {
    pub fn events(&self) -> Vec<ProtocolEvent> {
        self.0.lock().unwrap().clone()
    }
}

impl ProtocolObserver for EventLog {
    fn event(&self, event: ProtocolEvent) {
        self.0.lock().unwrap().push(event);
    }
}

struct Clock<'a> {
    repetition: usize,
    observer: &'a dyn ProtocolObserver,
    start: Mutex<Option<Instant>>,
    stop: Mutex<Option<Instant>>,
}

impl RunHooks for Clock<'_> {
    fn started(&self) {
        let rep = self.repetition;
        self.observer.event(ProtocolEvent::StartBarrierPassed { repetition: rep });
        self.observer.event(ProtocolEvent::ClockStarted { repetition: rep });
        *self.start.lock().unwrap() = Some(Instant::now());
    }

    fn finished(&self) {
        let now = Instant::now();
        let rep = self.repetition;
        *self.stop.lock().unwrap() = Some(now);
        self.observer.event(ProtocolEvent::EndBarrierPassed { repetition: rep });
        self.observer.event(ProtocolEvent::ClockStopped { repetition: rep });
    }
}

/// Initialises `cluster` and times `ops` between the start and end barriers.
pub fn timed_run<T: Scalar>(
    cluster: &mut Cluster<T>,
    ops: &[DistOp],
    transport: &dyn Transport<T>,
    env: &Env,
    repetition: usize,
    observer: &dyn ProtocolObserver,
) -> Result<(Duration, CommStats)> {
    cluster.init_zero_state();
    observer.event(ProtocolEvent::Initialized { repetition });
    let clock = Clock {
        repetition,
        observer,
        start: Mutex::new(None),
        stop: Mutex::new(None),
    };
    let stats = cluster.run(ops, transport, &clock, Some(env))?;
    let start = clock.start.into_inner().unwrap();
    let stop = clock.stop.into_inner().unwrap();
    match (start, stop) {
        (Some(a), Some(b)) => Ok((b - a, stats)),
        _ => Err(Error::domain("run finished without passing both barriers")),
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub num_qubits: usize,
    pub depth: usize,
    pub seed: u64,
    pub workers: usize,
    pub ranks_log2: usize,
    pub strategy: Arc<dyn ExchangeStrategy>,
    pub kind: RegisterKind,
    pub precision: Precision,
    pub warmups: usize,
    pub repetitions: usize,
    /// Replaces the random circuit when set.
    pub circuit: Option<Circuit>,
    /// Memory available to all ranks together; detected when `None`.
    pub memory_bytes: Option<u64>,
    pub overhead_bytes: u64,
}

impl BenchConfig {
    pub fn new(num_qubits: usize, depth: usize, seed: u64) -> Self {
        BenchConfig {
            num_qubits,
            depth,
            seed,
            workers: 1,
            ranks_log2: 0,
            strategy: Arc::new(FullClone),
            kind: RegisterKind::StateVector,
            precision: Precision::Double,
            warmups: DEFAULT_WARMUPS,
            repetitions: DEFAULT_REPETITIONS,
            circuit: None,
            memory_bytes: None,
            overhead_bytes: DEFAULT_OVERHEAD_BYTES,
        }
    }
}

/// Refuses problems that the memory model says cannot fit. All ranks share
/// this machine, so each gets an equal share of its memory.
fn check_feasible(
    num_qubits: usize,
    kind: RegisterKind,
    ranks_log2: usize,
    strategy: &Arc<dyn ExchangeStrategy>,
    precision: Precision,
    memory: Option<u64>,
    overhead: u64,
) -> Result<()> {
    let vq = kind.vector_qubits(num_qubits);
    let infeasible = |max_vector_qubits: usize| Error::Infeasible {
        num_qubits,
        ranks_log2,
        max_qubits: match kind {
            RegisterKind::StateVector => max_vector_qubits,
            RegisterKind::DensityMatrix => max_vector_qubits / 2,
        },
    };
    if ranks_log2 > vq || vq >= usize::BITS as usize - 1 {
        return Err(infeasible(0));
    }
    let Some(total) = memory.or_else(total_memory_bytes) else {
        return Ok(());
    };
    let model = MemoryModel::new(total >> ranks_log2, strategy.clone(), precision).with_overhead(overhead >> ranks_log2);
    if model.fits(vq, ranks_log2) {
        Ok(())
    } else {
        Err(infeasible(model.max_qubits(ranks_log2)))
    }
}

fn build_cluster<T: Scalar>(
    num_qubits: usize,
    kind: RegisterKind,
    ranks_log2: usize,
    strategy: &Arc<dyn ExchangeStrategy>,
) -> Result<Cluster<T>> {
    let plan = partition(kind.vector_qubits(num_qubits), ranks_log2, strategy.clone())?;
    Cluster::new(plan)
}

/// Times a random (or supplied) circuit under the harness protocol.
pub fn bench_random_circuit(cfg: &BenchConfig, observer: &dyn ProtocolObserver) -> Result<Vec<BenchRecord>> {
    let circuit = match &cfg.circuit {
        Some(c) => c.clone(),
        None => generate_random_circuit(&RandomCircuitSpec::new(cfg.num_qubits, cfg.depth, cfg.seed))?,
    };
    check_feasible(
        circuit.num_qubits(),
        cfg.kind,
        cfg.ranks_log2,
        &cfg.strategy,
        cfg.precision,
        cfg.memory_bytes,
        cfg.overhead_bytes,
    )?;
    match cfg.precision {
        Precision::Single => bench_circuit::<f32>(cfg, &circuit, observer),
        Precision::Double => bench_circuit::<f64>(cfg, &circuit, observer),
    }
}

fn bench_circuit<T: Scalar>(
    cfg: &BenchConfig,
    circuit: &Circuit,
    observer: &dyn ProtocolObserver,
) -> Result<Vec<BenchRecord>> {
    let env = Env::new(cfg.workers)?;
    let ops = resolve_circuit(circuit, cfg.kind)?;
    let mut cluster = build_cluster::<T>(circuit.num_qubits(), cfg.kind, cfg.ranks_log2, &cfg.strategy)?;
    let transport = InProcessTransport::<T>::new(cluster.plan().ranks());
    observer.event(ProtocolEvent::Allocated);

    for _ in 0..cfg.warmups {
        timed_run(&mut cluster, &ops, &transport, &env, usize::MAX, &NoObserver)?;
    }
    let gate_count = circuit.len();
    let mut records = Vec::with_capacity(cfg.repetitions);
    for rep in 0..cfg.repetitions {
        let (wall, stats) = timed_run(&mut cluster, &ops, &transport, &env, rep, observer)?;
        let wall = wall.as_secs_f64();
        records.push(BenchRecord {
            benchmark: "random_circuit".into(),
            num_qubits: circuit.num_qubits(),
            depth: circuit.depth(),
            seed: cfg.seed,
            workers: cfg.workers,
            ranks_log2: cfg.ranks_log2,
            strategy: cfg.strategy.name().into(),
            kind: cfg.kind.as_str().into(),
            precision: cfg.precision.as_str().into(),
            target: None,
            repetition: rep,
            gate_count,
            wall_time_seconds: wall,
            time_per_gate_seconds: if gate_count == 0 { 0.0 } else { wall / gate_count as f64 },
            peak_modeled_bytes: cluster.modeled_bytes(),
            measured_process_bytes: peak_process_bytes(),
            comm_bytes: stats.total_bytes(),
            comm_messages: stats.total_messages(),
            slowdown_ratio: None,
        });
    }
    Ok(records)
}

#[derive(Debug, Clone)]
pub struct RotationConfig {
    pub num_qubits: usize,
    pub ranks_log2: usize,
    pub workers: usize,
    pub strategy: Arc<dyn ExchangeStrategy>,
    pub precision: Precision,
    pub axis: [f64; 3],
    pub angle: f64,
    /// Qubits to rotate; all qubits when empty.
    pub targets: Vec<usize>,
    /// Rotations applied inside each timed region.
    pub rotations: usize,
    pub warmups: usize,
    pub repetitions: usize,
    pub memory_bytes: Option<u64>,
    pub overhead_bytes: u64,
}

impl RotationConfig {
    pub fn new(num_qubits: usize, ranks_log2: usize) -> Self {
        RotationConfig {
            num_qubits,
            ranks_log2,
            workers: 1,
            strategy: Arc::new(FullClone),
            precision: Precision::Double,
            axis: [1.0, 0.0, 0.0],
            angle: 0.5,
            targets: Vec::new(),
            rotations: 1,
            warmups: 1,
            repetitions: DEFAULT_REPETITIONS,
            memory_bytes: None,
            overhead_bytes: DEFAULT_OVERHEAD_BYTES,
        }
    }
}

/// Times a single-qubit rotation on each target qubit and fills in the ratio
/// of mean communicated to mean local time per gate.
pub fn bench_rotation_sweep(cfg: &RotationConfig, observer: &dyn ProtocolObserver) -> Result<Vec<BenchRecord>> {
    check_feasible(
        cfg.num_qubits,
        RegisterKind::StateVector,
        cfg.ranks_log2,
        &cfg.strategy,
        cfg.precision,
        cfg.memory_bytes,
        cfg.overhead_bytes,
    )?;
    match cfg.precision {
        Precision::Single => rotation_sweep::<f32>(cfg, observer),
        Precision::Double => rotation_sweep::<f64>(cfg, observer),
    }
}

fn rotation_sweep<T: Scalar>(cfg: &RotationConfig, observer: &dyn ProtocolObserver) -> Result<Vec<BenchRecord>> {
    let g = GateMatrix::rotation(cfg.axis, cfg.angle)?;
    let targets: Vec<usize> = if cfg.targets.is_empty() {
        (0..cfg.num_qubits).collect()
    } else {
        cfg.targets.clone()
    };
    if cfg.rotations == 0 {
        return Err(Error::domain("at least one rotation per repetition is needed"));
    }
    let env = Env::new(cfg.workers)?;
    let mut cluster = build_cluster::<T>(cfg.num_qubits, RegisterKind::StateVector, cfg.ranks_log2, &cfg.strategy)?;
    let transport = InProcessTransport::<T>::new(cluster.plan().ranks());
    observer.event(ProtocolEvent::Allocated);

    let mut records = Vec::new();
    let mut rep_index = 0;
    for &target in &targets {
        if target >= cfg.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: target,
                num_qubits: cfg.num_qubits,
            });
        }
        let ops = vec![
            DistOp {
                target,
                ctrl_mask: 0,
                matrix: g,
            };
            cfg.rotations
        ];
        for _ in 0..cfg.warmups {
            timed_run(&mut cluster, &ops, &transport, &env, usize::MAX, &NoObserver)?;
        }
        for rep in 0..cfg.repetitions {
            let (wall, stats) = timed_run(&mut cluster, &ops, &transport, &env, rep_index, observer)?;
            rep_index += 1;
            let wall = wall.as_secs_f64();
            records.push(BenchRecord {
                benchmark: "rotation".into(),
                num_qubits: cfg.num_qubits,
                depth: 0,
                seed: 0,
                workers: cfg.workers,
                ranks_log2: cfg.ranks_log2,
                strategy: cfg.strategy.name().into(),
                kind: RegisterKind::StateVector.as_str().into(),
                precision: cfg.precision.as_str().into(),
                target: Some(target),
                repetition: rep,
                gate_count: cfg.rotations,
                wall_time_seconds: wall,
                time_per_gate_seconds: wall / cfg.rotations as f64,
                peak_modeled_bytes: cluster.modeled_bytes(),
                measured_process_bytes: peak_process_bytes(),
                comm_bytes: stats.total_bytes(),
                comm_messages: stats.total_messages(),
                slowdown_ratio: None,
            });
        }
    }
    let ratio = slowdown_ratio(&records);
    for r in &mut records {
        r.slowdown_ratio = ratio;
    }
    Ok(records)
}

/// Mean time per gate of records that communicated over that of records
/// that did not; `None` unless both groups are present.
pub fn slowdown_ratio(records: &[BenchRecord]) -> Option<f64> {
    let mean = |comm: bool| {
        let times: Vec<f64> = records
            .iter()
            .filter(|r| (r.comm_messages > 0) == comm)
            .map(|r| r.time_per_gate_seconds)
            .collect();
        (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
    };
    match (mean(true), mean(false)) {
        (Some(c), Some(l)) if l > 0.0 => Some(c / l),
        _ => None,
    }
}

/// One row of the memory table, for `2^ranks_log2` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryRow {
    pub num_qubits: usize,
    pub kind: String,
    pub precision: String,
    pub strategy: String,
    pub ranks_log2: usize,
    /// Amplitudes only.
    pub state_bytes: u64,
    /// Amplitudes plus exchange buffers over all nodes; empty if `2^k` exceeds the amplitude count.
    pub modeled_bytes: Option<u64>,
    pub ratio: Option<f64>,
    pub node_bytes: u64,
    pub overhead_bytes: u64,
    /// Whether `num_qubits` fits on `2^ranks_log2` nodes.
    pub fits: bool,
    /// Largest register of this kind fitting on `2^ranks_log2` nodes.
    pub max_qubits: usize,
}

pub const MEMORY_TABLE_MAX_RANKS_LOG2: usize = 16;

pub fn report_memory(
    num_qubits: usize,
    kind: RegisterKind,
    precision: Precision,
    strategy: Arc<dyn ExchangeStrategy>,
    node_bytes: u64,
    overhead_bytes: u64,
) -> Result<Vec<MemoryRow>> {
    let state_bytes = memory_bytes(num_qubits, kind, precision)?;
    let vq = kind.vector_qubits(num_qubits);
    let model = MemoryModel::new(node_bytes, strategy.clone(), precision).with_overhead(overhead_bytes);
    Ok((0..=MEMORY_TABLE_MAX_RANKS_LOG2)
        .map(|k| {
            let modeled = model
                .node_requirement(vq, k)
                .and_then(|per_node| u64::try_from(per_node << k).ok());
            let max_vq = model.max_qubits(k);
            MemoryRow {
                num_qubits,
                kind: kind.as_str().into(),
                precision: precision.as_str().into(),
                strategy: strategy.name().into(),
                ranks_log2: k,
                state_bytes,
                modeled_bytes: modeled,
                ratio: modeled.map(|m| m as f64 / state_bytes as f64),
                node_bytes,
                overhead_bytes,
                fits: model.fits(vq, k),
                max_qubits: match kind {
                    RegisterKind::StateVector => max_vq,
                    RegisterKind::DensityMatrix => max_vq / 2,
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributed::HalfExchange;

    const GIB: u64 = 1 << 30;

    fn quick(n: usize, depth: usize) -> BenchConfig {
        let mut c = BenchConfig::new(n, depth, 7);
        c.warmups = 1;
        c.repetitions = 2;
        c
    }

    #[test]
    fn single_rank_has_no_traffic() {
        let recs = bench_random_circuit(&quick(5, 10), &NoObserver).unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            assert!(r.time_per_gate_seconds > 0.0);
            assert_eq!(r.comm_bytes, 0);
            assert_eq!(r.peak_modeled_bytes, 2 * 16 * 32);
        }
    }

    #[test]
    fn protocol_order_per_repetition() {
        let log = EventLog::default();
        bench_random_circuit(&quick(4, 3), &log).unwrap();
        let mut expect = vec![ProtocolEvent::Allocated];
        for repetition in 0..2 {
            expect.extend([
                ProtocolEvent::Initialized { repetition },
                ProtocolEvent::StartBarrierPassed { repetition },
                ProtocolEvent::ClockStarted { repetition },
                ProtocolEvent::EndBarrierPassed { repetition },
                ProtocolEvent::ClockStopped { repetition },
            ]);
        }
        assert_eq!(log.events(), expect);
    }

    #[test]
    fn infeasible_sizes_are_refused() {
        let mut c = quick(20, 2);
        c.memory_bytes = Some(GIB);
        c.overhead_bytes = 0;
        // 2 * 16 * 2^20 B = 32 MiB fits
        bench_random_circuit(&c, &NoObserver).unwrap();
        c.num_qubits = 26;
        let err = bench_random_circuit(&c, &NoObserver).unwrap_err();
        assert_eq!(
            err,
            Error::Infeasible {
                num_qubits: 26,
                ranks_log2: 0,
                max_qubits: 25
            }
        );
        assert!(err.is_resource());
    }

    #[test]
    fn memory_table() {
        let rows = report_memory(30, RegisterKind::StateVector, Precision::Double, Arc::new(FullClone), 64 * GIB, DEFAULT_OVERHEAD_BYTES).unwrap();
        assert_eq!(rows.len(), 17);
        for (k, r) in rows.iter().enumerate() {
            assert_eq!(r.state_bytes, 16 * GIB);
            assert_eq!(r.max_qubits, 30 + k);
            assert_eq!(r.ratio, Some(2.0));
        }
        assert!(rows[0].fits);
        let half = report_memory(31, RegisterKind::StateVector, Precision::Double, Arc::new(HalfExchange), 64 * GIB, DEFAULT_OVERHEAD_BYTES).unwrap();
        assert_eq!(half[0].ratio, Some(1.5));
        assert!(half[0].fits);
        let dm = report_memory(15, RegisterKind::DensityMatrix, Precision::Double, Arc::new(FullClone), 64 * GIB, DEFAULT_OVERHEAD_BYTES).unwrap();
        assert_eq!(dm[0].state_bytes, 16 * GIB);
        assert_eq!(dm[0].max_qubits, 15);
        let tiny = report_memory(2, RegisterKind::StateVector, Precision::Double, Arc::new(FullClone), GIB, 0).unwrap();
        assert_eq!(tiny[2].modeled_bytes, Some(128));
        assert_eq!(tiny[3].modeled_bytes, None);
    }

    #[test]
    fn ratio_needs_both_groups() {
        let mut cfg = RotationConfig::new(6, 1);
        cfg.repetitions = 2;
        let recs = bench_rotation_sweep(&cfg, &NoObserver).unwrap();
        assert_eq!(recs.len(), 12);
        assert!(recs.iter().all(|r| r.slowdown_ratio.is_some()));
        assert_eq!(slowdown_ratio(&recs[..2]), None);
    }
}

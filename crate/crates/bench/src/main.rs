use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use ampsim::bench::{
    bench_random_circuit, bench_rotation_sweep, report_memory, write_rows, BenchConfig, NoObserver, OutputFormat,
    RotationConfig, DEFAULT_REPETITIONS, DEFAULT_WARMUPS,
};
use ampsim::circuits;
use ampsim::distributed::{ExchangeStrategy, PerAmplitude, StrategyRegistry, DEFAULT_OVERHEAD_BYTES};
use ampsim::{Precision, RegisterKind};
use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Times random circuits and single-qubit rotations, and tabulates memory needs.
#[derive(Parser, Debug)]
#[command(name = "ampsim-bench", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: CircuitArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time a rotation on each target qubit.
    Rotation(RotationArgs),
    /// Print modelled memory and the largest register per node count.
    Memory(MemoryArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long = "ranks-log2", default_value_t = 0)]
    ranks_log2: usize,
    #[arg(long, default_value = "full_clone")]
    strategy: String,
    /// Message size in amplitudes for per_amplitude.
    #[arg(long, default_value_t = 1)]
    block: usize,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Double)]
    precision: PrecisionArg,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_WARMUPS)]
    warmups: usize,
    /// Memory shared by all ranks; read from the OS when omitted.
    #[arg(long = "memory-bytes")]
    memory_bytes: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CircuitArgs {
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = KindArg::Statevector)]
    kind: KindArg,
    /// Run this circuit file instead of a random circuit.
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct RotationArgs {
    #[arg(long)]
    qubits: usize,
    /// Comma-separated qubits; every qubit when omitted.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<usize>,
    /// Rotation axis as `x,y,z`, normalised before use.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0, 0.0], allow_negative_numbers = true)]
    axis: Vec<f64>,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    angle: f64,
    /// Rotations inside each timed region.
    #[arg(long, default_value_t = 1)]
    rotations: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MemoryArgs {
    #[arg(long)]
    qubits: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Statevector)]
    kind: KindArg,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Double)]
    precision: PrecisionArg,
    #[arg(long, default_value = "full_clone")]
    strategy: String,
    #[arg(long, default_value_t = 1)]
    block: usize,
    /// Memory per node in GiB.
    #[arg(long = "node-gib", default_value_t = 64)]
    node_gib: u64,
    #[arg(long = "overhead-bytes", default_value_t = DEFAULT_OVERHEAD_BYTES)]
    overhead_bytes: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum KindArg {
    Statevector,
    Density,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PrecisionArg {
    Single,
    Double,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FormatArg {
    Csv,
    Json,
}

impl From<KindArg> for RegisterKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Statevector => RegisterKind::StateVector,
            KindArg::Density => RegisterKind::DensityMatrix,
        }
    }
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Single => Precision::Single,
            PrecisionArg::Double => Precision::Double,
        }
    }
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::JsonLines,
        }
    }
}

fn strategy(name: &str, block: usize) -> anyhow::Result<Arc<dyn ExchangeStrategy>> {
    let mut registry = StrategyRegistry::with_defaults();
    registry.register(Arc::new(PerAmplitude::new(block)?));
    Ok(registry.get(name)?)
}

fn emit<R: Serialize>(rows: &[R], out: &OutputArgs) -> anyhow::Result<()> {
    let format = out.format.into();
    match &out.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            write_rows(BufWriter::new(f), rows, format)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_rows(&mut lock, rows, format)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn run_circuit(args: &CircuitArgs) -> anyhow::Result<()> {
    let c = &args.common;
    let circuit = match &args.circuit {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            Some(circuits::parse(&text).with_context(|| format!("in {}", path.display()))?)
        }
        None => None,
    };
    let num_qubits = match (&circuit, args.qubits) {
        (Some(circ), _) => circ.num_qubits(),
        (None, Some(n)) => n,
        (None, None) => return Err(anyhow!("--qubits is required unless --circuit is given")),
    };
    let mut cfg = BenchConfig::new(num_qubits, args.depth, args.seed);
    cfg.workers = c.workers;
    cfg.ranks_log2 = c.ranks_log2;
    cfg.strategy = strategy(&c.strategy, c.block)?;
    cfg.kind = args.kind.into();
    cfg.precision = c.precision.into();
    cfg.warmups = c.warmups;
    cfg.repetitions = c.reps;
    cfg.circuit = circuit;
    cfg.memory_bytes = c.memory_bytes;
    let records = bench_random_circuit(&cfg, &NoObserver)?;
    emit(&records, &c.output)
}

fn run_rotation(args: &RotationArgs) -> anyhow::Result<()> {
    let c = &args.common;
    let mut cfg = RotationConfig::new(args.qubits, c.ranks_log2);
    cfg.workers = c.workers;
    cfg.strategy = strategy(&c.strategy, c.block)?;
    cfg.precision = c.precision.into();
    if args.axis.len() != 3 {
        return Err(anyhow!("--axis takes three components, got {}", args.axis.len()));
    }
    let norm = args.axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(anyhow!("rotation axis must be a non-zero finite vector"));
    }
    cfg.axis = [args.axis[0] / norm, args.axis[1] / norm, args.axis[2] / norm];
    cfg.angle = args.angle;
    cfg.targets = args.targets.clone();
    cfg.rotations = args.rotations;
    cfg.warmups = c.warmups;
    cfg.repetitions = c.reps;
    cfg.memory_bytes = c.memory_bytes;
    let records = bench_rotation_sweep(&cfg, &NoObserver)?;
    emit(&records, &c.output)
}

fn run_memory(args: &MemoryArgs) -> anyhow::Result<()> {
    let node_bytes = args
        .node_gib
        .checked_mul(1 << 30)
        .ok_or_else(|| anyhow!("--node-gib {} is too large", args.node_gib))?;
    let rows = report_memory(
        args.qubits,
        args.kind.into(),
        args.precision.into(),
        strategy(&args.strategy, args.block)?,
        node_bytes,
        args.overhead_bytes,
    )?;
    emit(&rows, &args.output)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<ampsim::Error>() {
        Some(e) if e.is_resource() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Some(Command::Rotation(a)) => run_rotation(a),
        Some(Command::Memory(a)) => run_memory(a),
        None => run_circuit(&cli.run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

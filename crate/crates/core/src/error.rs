use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit {qubit} is out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("amplitude index {index} is out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("qubit {0} appears more than once among the controls and target")]
    OverlappingQubits(usize),

    #[error("amplitude {re}+{im}i is not finite")]
    NonFinite { re: f64, im: f64 },

    #[error("{channel} probability {prob} outside [0, {max}]")]
    ProbabilityOutOfRange {
        channel: &'static str,
        prob: f64,
        max: f64,
    },

    #[error("expected a {expected} register")]
    WrongKind { expected: &'static str },

    #[error("register of {num_qubits} qubits needs {bytes} bytes, allocation failed")]
    Allocation { num_qubits: usize, bytes: u128 },

    #[error("{num_qubits} qubits does not fit: at most {max_qubits} qubits on 2^{ranks_log2} ranks")]
    Infeasible {
        num_qubits: usize,
        ranks_log2: usize,
        max_qubits: usize,
    },

    #[error("communication between rank {rank} and rank {peer} failed: {reason}")]
    Communication {
        rank: usize,
        peer: usize,
        reason: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown exchange strategy `{name}` (available: {available})")]
    UnknownStrategy { name: String, available: String },

    #[error("{0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Errors caused by the problem not fitting in the available memory.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Allocation { .. } | Error::Infeasible { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

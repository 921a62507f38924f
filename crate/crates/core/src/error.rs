use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state vector must have 2 or 4 amplitudes, got {0}")]
    StateLength(usize),
    #[error("state vector is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("expected a {expected}-qubit state, got {actual} qubits")]
    QubitCount { expected: usize, actual: usize },
    #[error("basis vectors are not orthonormal")]
    NotOrthonormal,
    #[error("invalid density matrix: {0}")]
    InvalidDensity(&'static str),
    #[error("states are identical; there is nothing to discriminate")]
    DegenerateDiscrimination,

    #[error("bit strings must be non-empty and contain only 0/1")]
    InvalidBits,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("generator rows are linearly dependent (rank {rank} < k = {k})")]
    RankDeficient { rank: usize, k: usize },
    #[error("code size out of range: {0}")]
    CodeSize(String),
    #[error("code has no string r that splits its codewords")]
    DegenerateCode,
    #[error("r = {0} leaves one side of the partition empty")]
    InvalidR(String),
    #[error("empty set")]
    EmptySet,
    #[error("unknown code '{0}'")]
    UnknownCode(String),
    #[error("malformed generator file: {0}")]
    GeneratorFormat(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("protocol state error: {0}")]
    State(&'static str),
    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
    #[error("metric '{metric}' is not defined for strategy '{strategy}'")]
    MetricNotApplicable { metric: String, strategy: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

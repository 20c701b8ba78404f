use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("resource count must be between 1 and {max}, got {got}")]
    ResourceCount { got: usize, max: usize },
    #[error("node {node}: empty personality list")]
    EmptyPersonalities { node: usize },
    #[error("node {node}: personality {personality} has {got} weights, expected {expected}")]
    ResourceMismatch {
        node: usize,
        personality: usize,
        got: usize,
        expected: usize,
    },
    #[error("node {node}: personality {personality} has zero weight in every resource")]
    ZeroWeightPersonality { node: usize, personality: usize },
    #[error("node {node}: negative weight in personality {personality}")]
    NegativeWeight { node: usize, personality: usize },
    #[error("node {node}: duplicate personality {personality}")]
    DuplicatePersonality { node: usize, personality: usize },
    #[error("edge {edge}: weight must be positive")]
    NonPositiveEdgeWeight { edge: usize },
    #[error("edge {edge}: needs at least two pins")]
    TooFewPins { edge: usize },
    #[error("edge {edge}: pin {pin} out of range")]
    PinOutOfRange { edge: usize, pin: usize },
    #[error("edge {edge}: duplicate pin {pin}")]
    DuplicatePin { edge: usize, pin: usize },

    #[error("node {node} is already on side {side}")]
    AlreadyOnSide { node: usize, side: u8 },
    #[error("node {node} is locked; only personality 0 is legal")]
    LockedPersonality { node: usize },
    #[error("node {node}: personality {personality} out of range")]
    PersonalityOutOfRange { node: usize, personality: usize },
    #[error("invalid side {side} for node {node}")]
    InvalidSide { node: usize, side: u8 },
    #[error("state has {got} entries, graph has {expected} nodes")]
    StateLength { got: usize, expected: usize },

    #[error("weightless graph: no resource has non-zero total weight")]
    WeightlessGraph,
    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),
    #[error("basis entry {entry} missing for coarse node {node}")]
    BasisEntryLost { node: usize, entry: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unexpected end of file: expected {0}")]
    Truncated(String),
    #[error("io: {0}")]
    Io(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("graph too large for oracle: {combinations} combinations exceed {limit}")]
    TooLargeForOracle { combinations: f64, limit: f64 },
    #[error("missing SM baseline for benchmark {0}")]
    MissingBaseline(String),
    #[error("{0}")]
    Usage(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

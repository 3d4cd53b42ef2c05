use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    #[error("no updates to aggregate")]
    Empty,
    #[error("update dimension must be at least 1")]
    ZeroDimension,
    #[error("client {client} sent an update of dimension {found}, expected {expected}")]
    DimensionMismatch {
        client: usize,
        expected: usize,
        found: usize,
    },
    #[error("client {client} sent a non-finite value at coordinate {coordinate}")]
    NonFinite { client: usize, coordinate: usize },
    #[error("constraint 2 + 2f < n violated: f = {f}, n = {n}")]
    ConstraintViolation { f: usize, n: usize },
    #[error("{rule} needs at least {required} clients, got {n}")]
    TooFewClients {
        rule: &'static str,
        required: usize,
        n: usize,
    },
    #[error("client index {index} out of range for {n} clients")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("neighbor count {m} out of range 1..={n}")]
    NeighborCountOutOfRange { m: usize, n: usize },
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },
    #[error("{path}: expected {expected} bytes from header, file has {actual}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },
    #[error("image file holds {images} items but label file holds {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("{path}: line {line}: {message}")]
    Csv {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: file contains no data rows")]
    EmptyFile { path: PathBuf },
    #[error("label {label} is outside the alphabet 0..{classes}")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("cannot split {samples} samples across {clients} clients")]
    TooManyClients { samples: usize, clients: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainingError {
    #[error("layout needs at least two layers, got {0}")]
    LayoutTooShort(usize),
    #[error("layer sizes must be nonzero")]
    ZeroWidthLayer,
    #[error("input has {found} features, model expects {expected}")]
    InputDimension { expected: usize, found: usize },
    #[error("flat vector has {found} values, layout needs {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("label {label} out of range for {classes} outputs")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("empty dataset")]
    EmptyData,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("`known_f` violates 2 + 2*known_f < n_clients: known_f = {known_f}, n_clients = {n_clients}")]
    KrumConstraint { known_f: usize, n_clients: usize },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Training(#[from] TrainingError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Metrics { path: PathBuf, message: String },
}

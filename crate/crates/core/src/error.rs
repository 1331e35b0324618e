use std::path::PathBuf;

use crate::granularity::TimeGranularity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what}: feature dimension mismatch (expected {expected}, found {found} at event {index})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
        index: usize,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{0} out of range: {1}")]
    OutOfRange(&'static str, String),

    #[error("granularity {0} is event-ordered and excluded from time operations")]
    ExcludedGranularity(TimeGranularity),

    #[error("granularity {coarse} is finer than native granularity {native}")]
    GranularityOrder {
        native: TimeGranularity,
        coarse: TimeGranularity,
    },

    #[error("reduction {0} requires features but the {1} events carry none")]
    ReductionRequiresFeatures(&'static str, &'static str),

    #[error("timestamp {t} precedes anchor {anchor}")]
    NegativeOffset { t: i64, anchor: i64 },

    // hook engine
    #[error("activation key must be non-empty")]
    EmptyKey,

    #[error("hook `{name}` already registered under key `{key}`")]
    DuplicateHook { key: String, name: String },

    #[error("hook `{name}` both requires and produces {attrs:?}")]
    OverlappingContract { name: String, attrs: Vec<String> },

    #[error("hook `{hook}` requires attribute `{attr}` which nothing produces")]
    MissingAttribute { hook: String, attr: String },

    #[error("hook recipe is cyclic: {}", .0.join(" -> "))]
    CyclicRecipe(Vec<String>),

    #[error("hook `{hook}` violated its contract: declared {declared:?}, produced {produced:?}")]
    ContractViolation {
        hook: String,
        declared: Vec<String>,
        produced: Vec<String>,
    },

    #[error("hook `{hook}` failed: {source}")]
    Hook {
        hook: String,
        #[source]
        source: Box<Error>,
    },

    #[error("batch attribute `{0}` missing or of the wrong kind")]
    Attribute(String),

    // sampling
    #[error("stream order violated: timestamp {t} precedes already inserted {max_t}")]
    StreamOrder { t: i64, max_t: i64 },

    #[error("requested {want} neighbors but buffer capacity is {capacity}")]
    Capacity { want: usize, capacity: usize },

    // eval
    #[error("cannot draw {q} negatives from a universe of {universe} nodes")]
    Exhaustion { q: usize, universe: usize },

    // io
    #[error("{path}: missing column `{column}`")]
    Schema { path: PathBuf, column: String },

    #[error("{path}:{line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

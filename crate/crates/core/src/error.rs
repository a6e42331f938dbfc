use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("subsystem dimension must be at least 1 (subsystem {0})")]
    ZeroDimension(usize),

    #[error("index {index} out of range for subsystem {subsystem} (dim {dim})")]
    IndexOutOfRange {
        subsystem: usize,
        index: usize,
        dim: usize,
    },

    #[error("multi-index has {found} entries but the shape has {expected} subsystems")]
    RankMismatch { expected: usize, found: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("{found} amplitudes supplied for a space of dimension {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("kron needs at least one operand")]
    EmptyKron,

    #[error("state is not normalized: norm is {norm}")]
    NotNormalized { norm: f64 },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("edge ({src}, {dst}, {label}) out of range for {n_vertices} vertices and {n_labels} labels")]
    EdgeOutOfRange {
        src: usize,
        dst: usize,
        label: usize,
        n_vertices: usize,
        n_labels: usize,
    },

    #[error("duplicate edge ({src}, {dst}, {label})")]
    DuplicateEdge { src: usize, dst: usize, label: usize },

    #[error("graph has colliding (vertex, label) slots: out {out:?}, in {incoming:?}")]
    Collisions {
        out: Vec<(usize, usize)>,
        incoming: Vec<(usize, usize)>,
    },

    #[error("invalid walk step: {0}")]
    InvalidStep(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("unknown builtin {0:?}")]
    UnknownBuiltin(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

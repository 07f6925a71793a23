use thiserror::Error;

/// Crate-wide error type. CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{module}: resource limit exceeded: {what} = {actual} > cap {cap}")]
    ResourceLimit {
        module: &'static str,
        what: &'static str,
        actual: usize,
        cap: usize,
    },

    #[error("{module}: unknown vertex id {id}")]
    UnknownId { module: &'static str, id: usize },

    #[error("homology: K is not a subcomplex of L ({detail})")]
    NotSubcomplex { detail: String },

    #[error("complex: dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("{module}: {0}", .detail)]
    InvalidInput { module: &'static str, detail: String },

    #[error("perm: {0} is not a subgroup of {1}", .small, .big)]
    NotSubgroup { small: String, big: String },

    #[error("perm: {name} is not normal in the ambient group")]
    NotNormal { name: String },

    #[error("inference: syntax error at line {line}: {detail}")]
    Syntax { line: usize, detail: String },

    #[error("scan: empty grid (need at least two (r,d) steps)")]
    EmptyGrid,

    #[error("{module}: invariant violated: {detail}")]
    Invariant { module: &'static str, detail: String },
}

impl Error {
    pub fn invalid(module: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidInput {
            module,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

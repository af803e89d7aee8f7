use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: String,
        got: String,
        context: &'static str,
    },

    #[error("matrix entries must be finite (found NaN or infinity)")]
    NonFiniteEntry,

    #[error("entry count {len} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },

    #[error("matrix is not Hermitian (asymmetry {residual:.3e} exceeds tolerance)")]
    NotHermitian { residual: f64 },

    #[error("span of an empty or all-zero generator list")]
    EmptySpan,

    #[error("trace preservation violated: |sum K^dag K - I| = {deviation:.3e}")]
    TracePreservation { deviation: f64 },

    #[error("Kraus operator {index} has shape {got_rows}x{got_cols}, expected {rows}x{cols}")]
    KrausShape {
        index: usize,
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },

    #[error("empty Kraus family")]
    EmptyKraus,

    #[error(
        "operator space violates the graph conditions (contains identity: {has_identity}, closed under adjoint: {adjoint_closed})"
    )]
    GraphCondition {
        has_identity: bool,
        adjoint_closed: bool,
    },

    #[error("basis size {count} exceeds environment capacity {env_dim}^2")]
    EnvironmentTooSmall { count: usize, env_dim: usize },

    #[error("rank-one projectors of the state vectors are linearly dependent (rank {rank}, need {need})")]
    DependentProjectors { rank: usize, need: usize },

    #[error("positive operator validation failed: {reason}")]
    NotPositive { reason: String },

    #[error("effects do not resolve the identity: |sum M - I| = {deviation:.3e}")]
    NotResolution { deviation: f64 },

    #[error("vector is not unit-norm (|norm - 1| = {deviation:.3e})")]
    NotUnitVector { deviation: f64 },

    #[error("code vectors are not orthonormal (Gram residual {residual:.3e})")]
    CodeNotOrthonormal { residual: f64 },

    #[error("code is not certified for this channel (max residual {residual:.3e})")]
    CodeNotCertified { residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the crate.
///
/// Each variant maps onto one of the CLI exit categories through
/// [`Error::category`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("vertex {vertex} out of range for a digraph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop at vertex {0} is not allowed")]
    SelfLoop(usize),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("matrix is not Metzler: entry ({row}, {col}) = {value}")]
    NotMetzler { row: usize, col: usize, value: f64 },

    #[error("matrix is reducible ({classes} classes)")]
    Reducible { classes: usize },

    #[error("eigensolver did not converge")]
    EigenNoConvergence,

    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,

    #[error("Perron vector has a nonpositive entry {0:e}")]
    NonpositivePerronVector(f64),

    #[error("Perron residual {0:e} exceeds tolerance")]
    PerronResidual(f64),

    #[error("{lambda} is not an eigenvalue (relative smallest singular value {sigma:e})")]
    NotAnEigenvalue { lambda: f64, sigma: f64 },

    #[error("rank sequence did not reach a plateau by k = {0}")]
    RankPlateau(usize),

    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),

    #[error("{0} has no Levy exponent in the supported catalog")]
    UnsupportedLevy(&'static str),

    #[error("z = {0} lies outside the strip of convergence")]
    OutsideStrip(Complex64),

    #[error("sampler role mismatch: {0}")]
    SamplerRole(&'static str),

    #[error("polynomial entries are limited to degree 4, got degree {0}")]
    PolynomialDegree(usize),

    #[error("spectral abscissa at the origin is {0}, expected a negative value")]
    NonnegativeZetaAtOrigin(f64),

    #[error("root search did not converge: residual {residual:e} at {value}")]
    RootNotConverged { value: f64, residual: f64 },

    #[error("|zeta(A(root))| = {0:e} exceeds the root tolerance")]
    NotARoot(f64),

    #[error("no class is basic at the root (tolerance misconfigured)")]
    NoBasicClass,

    #[error("pole-order conditions violated: {0}")]
    ConditionViolated(String),

    #[error("Laurent probe slopes are unstable across radii: {0:?}")]
    UnstableSlope(Vec<f64>),

    #[error("estimated pole order {order} exceeds the cap {cap}")]
    OrderExceedsCap { order: i64, cap: i64 },

    #[error("y^T A'(root) x = {0:e} is numerically zero")]
    DegenerateDerivative(f64),

    #[error("A(z) is not in the convergence region: zeta(A(Re z)) = {0}")]
    OutsideConvergence(f64),

    #[error("linear solve failed: matrix is singular")]
    Singular,

    #[error("model is invalid: {0}")]
    InvalidModel(String),

    #[error("state {0} has zero total event rate before stopping")]
    ZeroEventRate(usize),

    #[error("no reset observed within {0} steps")]
    NoReset(u64),

    #[error("survival table did not decay within {0} steps")]
    SurvivalTableOverflow(usize),

    #[error("evaluation point {s} outside the guard band ({lo}, {hi})")]
    OutsideGuard { s: f64, lo: f64, hi: f64 },

    #[error("insufficient tail mass: {0}")]
    InsufficientTailMass(String),

    #[error("fitted tail rate {0} is not positive")]
    NegativeTailRate(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported format version {0}")]
    FormatVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// The input is well formed but fails a domain condition.
    Domain,
    /// The input could not be read or parsed.
    Input,
    /// A numerical routine failed or a tolerance was not met.
    Numeric,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Domain => 1,
            ErrorCategory::Input => 2,
            ErrorCategory::Numeric => 3,
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            NotSquare { .. }
            | Dimension(_)
            | VertexOutOfRange { .. }
            | SelfLoop(_)
            | InvalidChain(_)
            | InvalidDistribution(_)
            | UnsupportedLevy(_)
            | PolynomialDegree(_)
            | Parse(_)
            | FormatVersion(_)
            | Io(_)
            | Json(_) => ErrorCategory::Input,
            NotMetzler { .. }
            | Reducible { .. }
            | NonnegativeZetaAtOrigin(_)
            | ConditionViolated(_)
            | InvalidModel(_)
            | ZeroEventRate(_)
            | NoReset(_)
            | OutsideGuard { .. }
            | OutsideStrip(_)
            | OutsideConvergence(_)
            | SamplerRole(_)
            | NotAnEigenvalue { .. }
            | NotARoot(_) => ErrorCategory::Domain,
            _ => ErrorCategory::Numeric,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

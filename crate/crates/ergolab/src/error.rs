//! Error surface shared by every module of the crate.
//!
//! Errors split into three families, which the command-line front end maps
//! to distinct exit codes:
//!
//! - configuration problems (bad input files, malformed flags),
//! - hypothesis violations (an operation was asked to run on a system that
//!   does not satisfy the structural assumptions it needs),
//! - numerical failures (an iteration did not converge, or a residual check
//!   that should pass by construction did not).

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input matrix was expected to be normal (commuting with its adjoint).
    #[error("matrix is not normal: commutator residual {residual:.3e} exceeds {tol:.3e}")]
    NotNormal { residual: f64, tol: f64 },

    /// An iterative kernel exceeded its sweep budget.
    #[error("{what} did not converge within {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        sweeps: usize,
        residual: f64,
    },

    /// A value expected on the unit circle was too far from it.
    #[error("value {value} has modulus {modulus:.12} outside the unit-circle band")]
    NotUnimodular { value: String, modulus: f64 },

    /// Cluster boundaries sit too close to the tolerance to be trustworthy.
    #[error("clustering is ambiguous: nearest inter-cluster distance {gap:.3e} is within 10% of tolerance {tol:.3e}")]
    AmbiguousClustering { gap: f64, tol: f64 },

    /// A span-closure grew past the dimension of the ambient operator space.
    #[error("span closure exceeded ambient dimension {ambient}")]
    DimensionOverflow { ambient: usize },

    /// The reference vector does not generate the whole space under the algebra.
    #[error("vector is not cyclic: orbit span misses {defect} dimension(s)")]
    NotCyclic { defect: usize },

    /// The reference vector does not separate the algebra.
    #[error("vector is not separating: algebra kernel has dimension at least {defect}")]
    NotSeparating { defect: usize },

    /// A structural assumption of the requested operation fails for this system.
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    /// No operator in the algebra intertwines the dynamics with the given phase.
    #[error("no eigenoperator for eigenvalue {value} within the given algebra")]
    NoEigenoperator { value: String },

    /// The exponent pair is degenerate (k1 = 0, k2 = 0, or k1 = k2); those
    /// cases reduce to plain mean ergodic averages and are handled there.
    #[error("exponent pair ({k1}, {k2}) is degenerate; use the mean-ergodic path")]
    TrivialPair { k1: i64, k2: i64 },

    /// The requested operator lies outside the admissible span.
    #[error("operator is not in the admissible span: residual {residual:.3e} exceeds {tol:.3e}")]
    NotInSpan { residual: f64, tol: f64 },

    /// The fixed-point commutant is not abelian, so no joint diagonalization exists.
    #[error("fixed-point commutant is not abelian: commutator residual {residual:.3e}")]
    NotAbelian { residual: f64 },

    /// The fixed-point commutant is not contained in the centre of the algebra.
    #[error("fixed-point commutant is not central: containment residual {residual:.3e}")]
    NotCentral { residual: f64 },

    /// A direct-sum block fails the per-block ergodicity requirement.
    #[error("block {index} is not ergodic: fixed space has dimension {fixed_dim}")]
    BlockNotErgodic { index: usize, fixed_dim: usize },

    /// A sequence or truncation window is too short for the requested check.
    #[error("input too short: need at least {needed}, got {got}")]
    TooShort { needed: usize, got: usize },

    /// A requested lag or index runs past the safe truncation window.
    #[error("requested window {requested} exceeds safe bound {bound}")]
    WindowExceeded { requested: usize, bound: usize },

    /// Malformed configuration, file contents, or command-line input.
    #[error("configuration error: {0}")]
    ConfigError(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code family for the command-line front end.
    ///
    /// 2 = configuration, 3 = hypothesis violation, 4 = numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigError(_) => 2,
            Error::NotNormal { .. }
            | Error::NoConvergence { .. }
            | Error::NotUnimodular { .. }
            | Error::AmbiguousClustering { .. }
            | Error::DimensionOverflow { .. } => 4,
            _ => 3,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m†| = {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("tangent is not traceless (trace = {0:e})")]
    NotTraceless(f64),

    #[error("tangent has weight {0:e} outside the support of the state")]
    UnsupportedTangent(f64),

    #[error("second argument of the relative entropy is singular (min eigenvalue {0:e})")]
    SingularSecondArgument(f64),

    #[error("unknown family '{0}'")]
    UnknownFamily(String),

    #[error("parameter '{name}' = {value} is outside its domain")]
    ParamOutOfDomain { name: String, value: f64 },

    #[error("invalid family parameters: {0}")]
    InvalidParams(String),

    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },

    #[error("eigenvalues {j} and {k} are too close (gap {gap:e}) to resolve their coupling")]
    DegeneracyUnresolved { j: usize, k: usize, gap: f64 },

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("segment through the base point leaves the family domain")]
    DomainExit,

    #[error("state is rank deficient (eigenvalue {0:e}) but the metric needs full rank")]
    RankDeficient(f64),

    #[error("family has no spectral presentation (no gauge to evaluate)")]
    MissingGauge,

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("outcome {outcome} has vanishing probability but nonzero derivative")]
    VanishingProbabilityWithFlow { outcome: usize },

    #[error("eigenvalue {index} vanishes while its derivative does not")]
    SingularClassicalTerm { index: usize },

    #[error("Kraus operators are not trace preserving (residual {0:e})")]
    NotTracePreserving(f64),

    #[error("Gram matrix is not positive semidefinite (min eigenvalue {0:e})")]
    GramNotPsd(f64),

    #[error("number of canonical Kraus operators changed across the difference stencil")]
    CanonicalKrausJump,

    #[error("diagonal overlap has real part {0:e}; eigenvectors are not orthonormal")]
    NonImaginaryOverlap(f64),

    #[error("likelihood is flat over the search interval")]
    FlatLikelihood,

    #[error("unknown metric '{0}'")]
    UnknownMetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence
                | Error::UnsupportedTangent(_)
                | Error::SingularSecondArgument(_)
                | Error::DegeneracyUnresolved { .. }
                | Error::RankDeficient(_)
                | Error::VanishingProbabilityWithFlow { .. }
                | Error::SingularClassicalTerm { .. }
                | Error::GramNotPsd(_)
                | Error::CanonicalKrausJump
                | Error::NonImaginaryOverlap(_)
                | Error::FlatLikelihood
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

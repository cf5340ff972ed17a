use thiserror::Error;

/// Errors produced by cone construction and the operations on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cycle detected in order relation involving `{0}`")]
    CycleDetected(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown label `{0}` in relation")]
    UnknownLabelInRelation(String),

    #[error("missing structure constant for chain {0}")]
    MissingStructureConstant(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("involution for pair {0} is not self-inverse")]
    InvalidInvolution(String),
    #[error("elements belong to different algebras")]
    AlgebraMismatch,

    #[error("singular diagonal entry at `{0}`")]
    SingularDiagonal(String),
    #[error("element is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("element is not in the cone (pivot {pivot:.6e} at `{label}`)")]
    NotInCone { label: String, pivot: f64 },
    #[error("element is not in the dual cone (pivot {pivot:.6e} at `{label}`)")]
    NotInDualCone { label: String, pivot: f64 },
    #[error("element is not in the closure of the cone (pivot {pivot:.6e} at `{label}`)")]
    NotInClosure { label: String, pivot: f64 },

    #[error("multiplier is nonzero at `{0}` where the signature vanishes")]
    MultiplierOutsideXpsi(String),
    #[error("multiplier violates support condition at `{0}`")]
    SupportViolation(String),
    #[error("gamma integral diverges: lambda at `{label}` must exceed {bound}")]
    Divergent { label: String, bound: f64 },
    #[error("multiplier is not in the Gindikin set")]
    NotInXi,
    #[error("multiplier is not a valid orbit component at anchor `{0}`")]
    NotInXiComponent(String),
    #[error("measure is not absolutely continuous (lambda at `{label}` must exceed {bound})")]
    NotAbsolutelyContinuous { label: String, bound: f64 },
    #[error("multiplier does not generate an exponential family: lambda is zero at `{0}`")]
    ZeroLambda(String),
    #[error("empty sample")]
    EmptySample,

    #[error("cone spec error: {0}")]
    SpecError(String),
    #[error("{failed} of {total} checks failed")]
    CheckFailed { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

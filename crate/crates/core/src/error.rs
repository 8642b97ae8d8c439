use thiserror::Error;

/// Everything that can go wrong in `covcd-core`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("state does not have unit trace (trace {trace})")]
    NotUnitTrace { trace: f64 },
    #[error("effect eigenvalue {eigenvalue} outside [0, 1]")]
    EffectOutOfRange { eigenvalue: f64 },
    #[error("effects do not sum to identity (max deviation {deviation:e})")]
    NotComplete { deviation: f64 },
    #[error("a measurement needs at least two outcomes, got {0}")]
    TooFewOutcomes(usize),
    #[error("{effects} effects but {labels} outcome labels")]
    LabelCountMismatch { effects: usize, labels: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("outcome label sets differ")]
    LabelMismatch,
    #[error("distribution not normalized (sum {sum})")]
    NotNormalized { sum: f64 },
    #[error("operation needs a two-outcome measurement labelled +1/-1")]
    NotDichotomic,
    #[error("invalid qubit measurement: |b0| + |b| = {0} > 1")]
    InvalidMeasurement(f64),
    #[error("bias {bias} exceeds 1 - gamma = {limit}")]
    InvalidBias { bias: f64, limit: f64 },
    #[error("measurement strength {0} outside [0, 1]")]
    InvalidGamma(f64),
    #[error("Bloch vector has zero length")]
    ZeroBloch,
    #[error("probe measurement must be sharp (gamma = 1), got {0}")]
    ProbeNotSharp(f64),
    #[error("invalid dimension {0}")]
    InvalidDim(usize),
    #[error("invalid detector noise (eta {eta}, nu {nu})")]
    InvalidNoise { eta: f64, nu: f64 },
    #[error("Fock cutoff must be at least 1")]
    InvalidCutoff,
    #[error("inputs outside the domain of any valid parameters: {0}")]
    OutOfDomain(&'static str),
    #[error("shot count must be positive")]
    InvalidShots,
    #[error("shot record has no counts")]
    EmptyRecord,
    #[error("operation is only defined for qubits, got dimension {0}")]
    NonQubit(usize),
    #[error("outcome index {index} out of range for {outcomes} outcomes")]
    InvalidOutcome { index: usize, outcomes: usize },
    #[error("need at least {needed} points, got {found}")]
    InsufficientPoints { needed: usize, found: usize },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("fitted conic is not an ellipse")]
    NotAnEllipse,
    #[error("eigensolver did not converge")]
    NotConverged,
}

pub type Result<T> = core::result::Result<T, Error>;

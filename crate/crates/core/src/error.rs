use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a positive power of two")]
    NotPowerOfTwo(usize),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("not a density operator: {0}")]
    NotDensityOperator(String),

    #[error("invalid projector set: {0}")]
    InvalidProjectorSet(String),

    /// Every outcome of a measurement has probability below the floor.
    #[error("measurement undefined: total outcome probability {0:e} is below the floor")]
    MeasurementUndefined(f64),

    #[error("undefined conditional: conditioning event has probability {0:e}")]
    UndefinedConditional(f64),

    #[error("direction is not a unit vector (|n| = {0})")]
    NonUnitDirection(f64),

    #[error("direction does not lie in the {0} plane")]
    OutOfPlane(&'static str),

    #[error("invalid qubit index set: {0}")]
    InvalidQubitSet(String),

    #[error("expectation value has imaginary part {0:e}")]
    ComplexExpectation(f64),

    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("illegal measurement sequence: {0}")]
    IllegalSequence(String),

    #[error("basis {basis} is not available to {agent}")]
    IllegalBasis { agent: String, basis: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

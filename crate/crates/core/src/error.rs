use thiserror::Error;

/// Errors produced by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("invalid edge ({a}, {b}): {reason}")]
    InvalidEdge { a: usize, b: usize, reason: &'static str },

    #[error("interaction graph on {n} qubits is not connected")]
    DisconnectedGraph { n: usize },

    #[error("{context}: expected dimension {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{n} qubits exceeds the dense-representation cap of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("matrix dimension {dim} is not a power of two")]
    NotPowerOfTwo { dim: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("step {step} exceeds the stability bound {bound} (requires step * {stiffness} <= {limit})")]
    StepTooLarge {
        step: f64,
        bound: f64,
        stiffness: f64,
        limit: f64,
    },

    #[error("state became non-finite at t = {t}")]
    Divergence { t: f64 },

    #[error("density matrix failed validation: {0}")]
    InvalidDensity(String),

    #[error("{context}: expected {expected} values, got {actual}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("tail window holds {got} samples, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

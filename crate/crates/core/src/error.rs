use thiserror::Error;

/// Errors raised by validation in the core crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("family parameters not normalized: |alpha{pair}|^2 + |beta{pair}|^2 = {norm_sq}")]
    FamilyNotNormalized { pair: u8, norm_sq: f64 },

    #[error("angle {name} = {value} outside [0, pi/2]")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("matrix is not unitary: max |U†U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("unsupported mode count {dim} (supported {min}..={max})")]
    UnsupportedDim { dim: usize, min: usize, max: usize },

    #[error("mode {mode} out of range 1..={dim}")]
    ModeOutOfRange { mode: usize, dim: usize },

    #[error("beam splitter needs two distinct modes, got {0} twice")]
    SameMode(usize),

    #[error("transmissivity {0} outside [0, 1]")]
    EtaOutOfRange(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("cannot compose an empty list of unitaries")]
    EmptyComposition,

    #[error("priors must be non-negative and sum to 1 (sum = {sum})")]
    InvalidPriors { sum: f64 },

    #[error("epsilon {0} outside (0, 0.1]")]
    EpsilonOutOfRange(f64),

    #[error("concurrence {name} = {value} outside [0, 1]")]
    ConcurrenceOutOfRange { name: &'static str, value: f64 },

    #[error("state index {0} outside 0..4")]
    StateIndexOutOfRange(usize),

    #[error("invalid entry count {got} for a {dim}x{dim} matrix")]
    EntryCount { got: usize, dim: usize },

    #[error("restarts must be at least 1")]
    NoRestarts,

    #[error("empty grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;

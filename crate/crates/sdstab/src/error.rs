//! Error type shared across the library.

use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by construction, operator evaluation, and scans.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coefficient length {got} does not match truncation {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("time argument must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("eigenvalues at slots {first} and {second} coincide; simple eigenvalues required")]
    DuplicateEigenvalue { first: usize, second: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "evaluation point {z} is within {distance:.3e} of the spectrum{}",
        match index { Some(i) => format!(" (slot {i})"), None => " (tail cluster point)".to_string() }
    )]
    SpectrumTooClose {
        z: Complex64,
        distance: f64,
        index: Option<usize>,
    },

    #[error("rank-one denominator |1 - F R(z,T)S| = {denominator_abs:.3e} at z = {z}; z is near the closed-loop spectrum")]
    SmwSingular { z: Complex64, denominator_abs: f64 },

    #[error("sampling period must lie in (0, 1), got {0}")]
    InvalidTau(f64),

    #[error("lower-bound scan inconclusive: net margin {value:.3e} <= 0 at {at}")]
    NegativeMargin { value: f64, at: Complex64 },

    #[error("no sampling period on the grid satisfies the acceptance test")]
    NoAdmissibleTau,

    #[error("eigenvalue at slot {index} has |Re| = {re_abs:.3e}, too close to the imaginary axis to split")]
    AmbiguousSplit { index: usize, re_abs: f64 },

    #[error("mode at slot {index} has zero input coefficient; uncontrollable")]
    UncontrollableMode { index: usize },

    #[error("pole placement verification failed: achieved eigenvalue {achieved} is {distance:.3e} from target {target}")]
    PlacementOutOfTolerance {
        achieved: Complex64,
        target: Complex64,
        distance: f64,
    },

    #[error("closed-loop head block is not Hurwitz: eigenvalue {0} has nonnegative real part")]
    HeadNotStabilized(Complex64),

    #[error("cannot restore the feedthrough margin: {0}")]
    NudgeImpossible(String),

    #[error("requested series {0:?} is not present in the report")]
    MissingSeries(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

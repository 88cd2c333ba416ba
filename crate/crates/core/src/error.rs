use thiserror::Error;

use crate::algebra::AlgebraSpec;

/// Errors raised by the algebra, map, fixed-point and stabilizer routines.
///
/// Hypothesis violations found by the verifier are *not* errors; they are
/// reported as data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("algebra mismatch: {left} vs {right}")]
    SpecMismatch {
        left: AlgebraSpec,
        right: AlgebraSpec,
    },

    #[error("invalid algebra spec: {0}")]
    InvalidSpec(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("power iteration did not reach tolerance within {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("Gaussian direction draw was zero {attempts} times in a row")]
    DegenerateDirection { attempts: usize },

    #[error("involution {kind} is not defined on {spec}")]
    KindSpecMismatch {
        kind: &'static str,
        spec: AlgebraSpec,
    },

    #[error("candidate map must send 0 to 0")]
    NonZeroAtOrigin,

    #[error("invalid twist element: {0}")]
    InvalidTwist(String),

    #[error(
        "no contracting direction: L = {lipschitz_up} for q = 2 and {lipschitz_down} for q = 1/2"
    )]
    NoContraction {
        lipschitz_up: f64,
        lipschitz_down: f64,
    },

    #[error("stabilizer overflow at step {step}: norm {norm:e} exceeds 1e300")]
    Overflow { step: usize, norm: f64 },

    #[error("stabilizer differences stopped decreasing at step {step} (8 consecutive increases)")]
    NonCauchy { step: usize },

    #[error("orbit is not contractive at step {step}: ratio {ratio} exceeds L = {lipschitz}")]
    NotContractive {
        step: usize,
        ratio: f64,
        lipschitz: f64,
    },

    #[error("orbit distances finite but tolerance unmet after {iterations} iterations")]
    Exhausted { iterations: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

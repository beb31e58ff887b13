use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mass m{index} = {value} is not positive")]
    NonPositiveMass { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid of {points} points is too coarse for {harmonics} odd harmonics (need at least {required})")]
    GridTooCoarse {
        points: usize,
        harmonics: usize,
        required: usize,
    },

    #[error("loop passes within {separation:e} of primary {primary} at t = {time}")]
    CollisionOnPath {
        primary: usize,
        time: f64,
        separation: f64,
    },

    #[error("quadrature did not reach tolerance {tol:e} after {points} points (last change {last_change:e})")]
    NoConvergence {
        tol: f64,
        points: usize,
        last_change: f64,
    },

    #[error("point lies on the curve (distance {distance:e})")]
    PointOnCurve { distance: f64 },

    #[error("curve undersampled: angular step {max_step} rad with {points} samples")]
    Undersampled { max_step: f64, points: usize },

    #[error("position within {separation:e} of primary {primary} at t = {time}")]
    CollisionSingularity {
        primary: usize,
        time: f64,
        separation: f64,
    },

    #[error("trajectory approached primary {primary} to {separation:e} at t = {time}")]
    SingularityApproach {
        primary: usize,
        time: f64,
        separation: f64,
    },

    #[error("integrator step {step:e} fell below the minimum allowed step")]
    StepTooSmall { step: f64 },

    #[error("loop violates the half-period antisymmetry: {0}")]
    SymmetryViolation(String),

    #[error("malformed loop data: {0}")]
    Format(String),
}

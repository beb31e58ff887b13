//! Variational periodic orbits of a small body moving in the field of three
//! primaries that rotate rigidly in an equilateral (Lagrange) configuration.
//!
//! Units follow the usual gravitational convention with `G = 1`: masses,
//! lengths and times are dimensionless and only their ratios matter. The
//! primaries move on circular orbits of period `T` about their common
//! center of mass, and the small body is described by a planar loop `q(t)`
//! satisfying `q(t + T/2) = -q(t)`.
//!
//! The crate provides
//!
//! * construction of the primary configuration ([`config`]),
//! * analytic test loops and an odd-harmonic Fourier loop space ([`loops`]),
//! * evaluation of the Lagrangian action by several independent routes
//!   ([`action`]),
//! * the Gordon / Long–Zhang Kepler bounds and the collision threshold `d1`
//!   ([`bounds`]),
//! * winding numbers of closed curves ([`winding`]),
//! * the equation of motion, an RK4 integrator and residual diagnostics
//!   ([`dynamics`]),
//! * a Newton / gradient descent minimizer over Fourier loops
//!   ([`minimize`]) and a certificate bundling every check ([`certify`]),
//! * the published reference tables of test loops ([`tables`]).

pub mod action;
pub mod bounds;
pub mod certify;
pub mod config;
pub mod dynamics;
mod error;
pub mod field;
pub mod loops;
pub mod minimize;
pub mod quadrature;
pub mod tables;
pub mod winding;

pub use error::{Error, Result};

/// Planar vector used for positions, velocities and accelerations.
pub type Vec2 = nalgebra::Vector2<f64>;

pub use action::{
    action_d2, action_d2_with, action_d3, action_decomposed, action_direct,
    primary_kinetic_closed_form, primary_kinetic_term, ActionBreakdown, ThirdBodyPhase,
};
pub use bounds::{
    certify_noncollision, collision_constant, collision_lower_bound_d1, gordon_bound,
    long_zhang_bound, BoundReport, NonCollisionCertificate,
};
pub use certify::{certify_minimizer, verify_loop, CertificationReport, Thresholds};
pub use config::{lagrange_orbits, side_length, Masses, PrimaryConfig};
pub use dynamics::{el_residual, integrate, periodicity_error, rhs, ResidualReport, State};
pub use field::{Body, Field, FixedCenter, Primaries};
pub use loops::{
    min_separation, project_to_fourier, CircularLoop, CircularLoopParams, EllipticLoop,
    EllipticLoopParams, FourierLoop, Loop, SampledLoop,
};
pub use minimize::{
    action_gradient, minimize_action, minimize_with_refinement, MinimizeOptions, MinimizeResult,
    Termination,
};
pub use quadrature::QuadratureSettings;
pub use winding::{winding_number, winding_number_of_samples, WindingResult};

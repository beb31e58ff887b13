//! Gravitational sources acting on the small body.
//!
//! Most of the crate works with the three rotating primaries, but the
//! reduced Kepler problem (a single fixed center) is useful as an analytic
//! check, so action, gradient and dynamics code is written against the
//! [`Field`] trait.

use crate::config::{lagrange_orbits, Masses, PrimaryConfig};
use crate::{Result, Vec2};

/// A point mass at some instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub mass: f64,
    pub position: Vec2,
    pub velocity: Vec2,
}

impl Body {
    const NONE: Body = Body {
        mass: 0.0,
        position: Vec2::new(0.0, 0.0),
        velocity: Vec2::new(0.0, 0.0),
    };
}

/// A T-periodic set of at most three attracting point masses. Bodies with
/// zero mass are ignored by every consumer.
pub trait Field: Sync {
    fn period(&self) -> f64;

    /// Reference length used for collision thresholds and residual scaling.
    fn length_scale(&self) -> f64;

    fn bodies(&self, t: f64) -> [Body; 3];

    /// Potential energy `Σ m_i / |q - q_i|` (positive convention) at `q`.
    fn potential(&self, t: f64, q: Vec2) -> f64 {
        self.bodies(t)
            .iter()
            .filter(|b| b.mass != 0.0)
            .map(|b| b.mass / (q - b.position).norm())
            .sum()
    }

    /// Acceleration `Σ m_i (q_i - q) / |q_i - q|³`.
    fn acceleration(&self, t: f64, q: Vec2) -> Vec2 {
        let mut acc = Vec2::zeros();
        for b in self.bodies(t).iter().filter(|b| b.mass != 0.0) {
            let d = b.position - q;
            let r = d.norm();
            acc += d * (b.mass / (r * r * r));
        }
        acc
    }
}

/// The three primaries on their Lagrange orbits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primaries {
    pub masses: Masses,
    pub config: PrimaryConfig,
}

impl Primaries {
    pub fn new(masses: Masses, period: f64) -> Result<Self> {
        Ok(Self {
            masses,
            config: lagrange_orbits(&masses, period)?,
        })
    }

    pub fn from_parts(masses: Masses, config: PrimaryConfig) -> Self {
        Self { masses, config }
    }
}

impl Field for Primaries {
    fn period(&self) -> f64 {
        self.config.period()
    }

    fn length_scale(&self) -> f64 {
        self.config.side()
    }

    fn bodies(&self, t: f64) -> [Body; 3] {
        std::array::from_fn(|i| Body {
            mass: self.masses.get(i),
            position: self.config.position(i, t),
            velocity: self.config.velocity(i, t),
        })
    }
}

/// A single stationary attracting center, for reduced Kepler checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedCenter {
    pub strength: f64,
    pub center: Vec2,
    pub period: f64,
    pub length_scale: f64,
}

impl FixedCenter {
    /// Center of strength `strength` at the origin. The length scale defaults
    /// to the radius of the circular orbit with the given period.
    pub fn at_origin(strength: f64, period: f64) -> Self {
        let w = std::f64::consts::TAU / period;
        Self {
            strength,
            center: Vec2::zeros(),
            period,
            length_scale: (strength / (w * w)).cbrt(),
        }
    }
}

impl Field for FixedCenter {
    fn period(&self) -> f64 {
        self.period
    }

    fn length_scale(&self) -> f64 {
        self.length_scale
    }

    fn bodies(&self, _t: f64) -> [Body; 3] {
        [
            Body {
                mass: self.strength,
                position: self.center,
                velocity: Vec2::zeros(),
            },
            Body::NONE,
            Body::NONE,
        ]
    }
}

/// No attracting bodies at all; the small body moves freely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmptyField {
    pub period: f64,
    pub length_scale: f64,
}

impl Field for EmptyField {
    fn period(&self) -> f64 {
        self.period
    }

    fn length_scale(&self) -> f64 {
        self.length_scale
    }

    fn bodies(&self, _t: f64) -> [Body; 3] {
        [Body::NONE; 3]
    }
}

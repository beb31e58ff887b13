//! Rigidly rotating equilateral configuration of the three primaries.
//!
//! With the gravitational constant set to one, three masses at the vertices
//! of an equilateral triangle of side `l` rotate uniformly about their center
//! of mass with period `T` provided `l³ = M T² / 4π²`. Each primary then moves
//! on a circle `q_i(t) = r_i (cos(2πt/T + θ_i), sin(2πt/T + θ_i))`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// The three primary masses. The total mass is always recomputed from the
/// parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Masses {
    m: [f64; 3],
}

impl Masses {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        Self::from_array([m1, m2, m3])
    }

    pub fn from_array(m: [f64; 3]) -> Result<Self> {
        for (i, &v) in m.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("mass m{} = {v} is not finite", i + 1)));
            }
            if v <= 0.0 {
                return Err(Error::NonPositiveMass { index: i + 1, value: v });
            }
        }
        Ok(Self { m })
    }

    /// Mass of primary `i` (zero based).
    pub fn get(&self, i: usize) -> f64 {
        self.m[i]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.m
    }

    pub fn total(&self) -> f64 {
        self.m[0] + self.m[1] + self.m[2]
    }

    /// `m1 m2 + m1 m3 + m2 m3`.
    pub fn pair_sum(&self) -> f64 {
        let [a, b, c] = self.m;
        a * b + a * c + b * c
    }
}

impl TryFrom<[f64; 3]> for Masses {
    type Error = Error;

    fn try_from(m: [f64; 3]) -> Result<Self> {
        Self::from_array(m)
    }
}

impl From<Masses> for [f64; 3] {
    fn from(m: Masses) -> Self {
        m.m
    }
}

/// Side of the equilateral triangle for total mass `M` and period `T`:
/// `l = (M T² / 4π²)^{1/3}`.
pub fn side_length(masses: &Masses, period: f64) -> f64 {
    debug_assert!(period > 0.0);
    (masses.total() * period * period / (4.0 * PI * PI)).cbrt()
}

/// Circular orbits of the primaries: period, side, radii and initial phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryConfig {
    period: f64,
    side: f64,
    radius: [f64; 3],
    phase: [f64; 3],
}

/// Builds the rotating Lagrange configuration with primary 1 initially on the
/// positive x-axis side of the triangle's center and the center of mass at
/// the origin.
pub fn lagrange_orbits(masses: &Masses, period: f64) -> Result<PrimaryConfig> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidParameter(format!("period {period} must be positive")));
    }
    let [m1, m2, m3] = masses.as_array();
    let total = masses.total();
    let side = side_length(masses, period);
    let s3 = 3f64.sqrt();

    let n1 = (m2 * m2 + m2 * m3 + m3 * m3).sqrt();
    let n2 = (m1 * m1 + m1 * m3 + m3 * m3).sqrt();
    let n3 = (m1 * m1 + m1 * m2 + m2 * m2).sqrt();

    // (sin θ_i, cos θ_i) of the initial positions after moving the center of
    // mass of the triangle to the origin.
    let sin_cos = [
        ((m3 - m2) / (2.0 * n1), s3 * (m2 + m3) / (2.0 * n1)),
        ((m1 + 2.0 * m3) / (2.0 * n2), -s3 * m1 / (2.0 * n2)),
        (-(m1 + 2.0 * m2) / (2.0 * n3), -s3 * m1 / (2.0 * n3)),
    ];
    let phase = sin_cos.map(|(s, c)| s.atan2(c).rem_euclid(TAU));
    let radius = [n1, n2, n3].map(|n| n * side / total);

    Ok(PrimaryConfig {
        period,
        side,
        radius,
        phase,
    })
}

impl PrimaryConfig {
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Side `l` of the equilateral triangle.
    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radius[i]
    }

    pub fn radii(&self) -> [f64; 3] {
        self.radius
    }

    /// Initial phase `θ_i` in `[0, 2π)`.
    pub fn phase(&self, i: usize) -> f64 {
        self.phase[i]
    }

    pub fn phases(&self) -> [f64; 3] {
        self.phase
    }

    /// Angular frequency `2π / T`.
    pub fn omega(&self) -> f64 {
        TAU / self.period
    }

    /// Same configuration rotated rigidly by `angle` radians.
    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            phase: self.phase.map(|p| (p + angle).rem_euclid(TAU)),
            ..*self
        }
    }

    /// Position of primary `i` (zero based) at time `t`.
    pub fn position(&self, i: usize, t: f64) -> Vec2 {
        let (s, c) = (self.omega() * t + self.phase[i]).sin_cos();
        Vec2::new(c, s) * self.radius[i]
    }

    /// Velocity of primary `i` (zero based) at time `t`.
    pub fn velocity(&self, i: usize, t: f64) -> Vec2 {
        let w = self.omega();
        let (s, c) = (w * t + self.phase[i]).sin_cos();
        Vec2::new(-s, c) * (w * self.radius[i])
    }

    /// Acceleration of primary `i` (zero based) at time `t`.
    pub fn acceleration(&self, i: usize, t: f64) -> Vec2 {
        let w = self.omega();
        -self.position(i, t) * (w * w)
    }
}

/// Free-function form of [`PrimaryConfig::position`].
pub fn primary_position(cfg: &PrimaryConfig, i: usize, t: f64) -> Vec2 {
    cfg.position(i, t)
}

/// Free-function form of [`PrimaryConfig::velocity`].
pub fn primary_velocity(cfg: &PrimaryConfig, i: usize, t: f64) -> Vec2 {
    cfg.velocity(i, t)
}

//! The Lagrangian action `f(q) = ∫_0^T [½|q̇|² + Σ m_i / |q - q_i|] dt`.
//!
//! Three independent evaluation routes are provided:
//!
//! * [`action_direct`] integrates the defining integrand,
//! * [`action_decomposed`] integrates the per-primary two-body split
//!   `(1/M) Σ m_i [½|q̇ - q̇_i|² + M / |q - q_i|] - (1/2M) Σ m_i |q̇_i|²`,
//! * [`action_d2`] and [`action_d3`] evaluate the reduced expressions for
//!   the elliptic and circular test loops, where every kinetic integral is
//!   done by hand and only the potential terms remain as quadratures.
//!
//! All quadratures use the periodic trapezoid rule of [`crate::quadrature`].

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::field::{Field, Primaries};
use crate::loops::{min_separation_detail, CircularLoop, CircularLoopParams, EllipticLoop, EllipticLoopParams, Loop};
use crate::quadrature::{integrate_periodic, QuadratureSettings};
use crate::{Error, Result};

/// Loops closer than this fraction of the length scale count as collisions.
pub const COLLISION_FRACTION: f64 = 1e-12;

/// Grid used for the collision pre-check.
const SEPARATION_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionBreakdown {
    pub kinetic: f64,
    /// `∫ m_i / |q - q_i| dt` for each primary.
    pub potential: [f64; 3],
    pub total: f64,
}

/// Fails with [`Error::CollisionOnPath`] when the loop comes within
/// `1e-12 · l` of an attracting body.
pub fn check_collision<L: Loop + ?Sized, F: Field + ?Sized>(lp: &L, field: &F) -> Result<()> {
    let threshold = COLLISION_FRACTION * field.length_scale();
    for (i, (sep, t)) in min_separation_detail(lp, field, SEPARATION_GRID).into_iter().enumerate() {
        if sep < threshold {
            return Err(Error::CollisionOnPath {
                primary: i + 1,
                time: t,
                separation: sep,
            });
        }
    }
    Ok(())
}

fn distance_or_collision(d: f64, primary: usize, t: f64, threshold: f64) -> Result<f64> {
    if d < threshold || !d.is_finite() {
        Err(Error::CollisionOnPath {
            primary: primary + 1,
            time: t,
            separation: d,
        })
    } else {
        Ok(d)
    }
}

/// Action by direct quadrature of the defining integrand.
pub fn action_direct<L: Loop + ?Sized, F: Field + ?Sized>(
    lp: &L,
    field: &F,
    qs: &QuadratureSettings,
) -> Result<ActionBreakdown> {
    check_collision(lp, field)?;
    let threshold = COLLISION_FRACTION * field.length_scale();
    let integral = integrate_periodic(
        |t| {
            let q = lp.position(t);
            let v = lp.velocity(t);
            let mut out = [0.5 * v.norm_squared(), 0.0, 0.0, 0.0];
            for (i, b) in field.bodies(t).iter().enumerate() {
                if b.mass != 0.0 {
                    let d = distance_or_collision((q - b.position).norm(), i, t, threshold)?;
                    out[i + 1] = b.mass / d;
                }
            }
            Ok(out)
        },
        lp.period(),
        qs,
    )?;
    let [kinetic, p1, p2, p3] = integral.value;
    Ok(ActionBreakdown {
        kinetic,
        potential: [p1, p2, p3],
        total: kinetic + p1 + p2 + p3,
    })
}

/// Action through the per-primary decomposition of the kinetic energy,
/// which relies on `Σ m_i q̇_i = 0`.
pub fn action_decomposed<L: Loop + ?Sized>(lp: &L, primaries: &Primaries, qs: &QuadratureSettings) -> Result<f64> {
    check_collision(lp, primaries)?;
    let total_mass = primaries.masses.total();
    let threshold = COLLISION_FRACTION * primaries.length_scale();
    let integral = integrate_periodic(
        |t| {
            let q = lp.position(t);
            let v = lp.velocity(t);
            let mut pairs = 0.0;
            let mut own = 0.0;
            for (i, b) in primaries.bodies(t).iter().enumerate() {
                let d = distance_or_collision((q - b.position).norm(), i, t, threshold)?;
                pairs += b.mass * (0.5 * (v - b.velocity).norm_squared() + total_mass / d);
                own += b.mass * b.velocity.norm_squared();
            }
            Ok([pairs / total_mass - own / (2.0 * total_mass)])
        },
        lp.period(),
        qs,
    )?;
    Ok(integral.value[0])
}

/// `-(1/2M) ∫ Σ m_i |q̇_i|² dt` by quadrature.
pub fn primary_kinetic_term(primaries: &Primaries, qs: &QuadratureSettings) -> Result<f64> {
    let total_mass = primaries.masses.total();
    let integral = integrate_periodic(
        |t| {
            let s: f64 = primaries.bodies(t).iter().map(|b| b.mass * b.velocity.norm_squared()).sum();
            Ok([-s / (2.0 * total_mass)])
        },
        primaries.config.period(),
        qs,
    )?;
    Ok(integral.value[0])
}

/// Closed form `-½ (2π)^{2/3} (m1 m2 + m1 m3 + m2 m3) M^{-4/3} T^{1/3}` of
/// [`primary_kinetic_term`].
pub fn primary_kinetic_closed_form(primaries: &Primaries) -> f64 {
    let m = &primaries.masses;
    -0.5 * TAU.powf(2.0 / 3.0) * m.pair_sum() * m.total().powf(-4.0 / 3.0) * primaries.config.period().cbrt()
}

/// Which phase difference appears in the constant term of `|q̃ - q_3|²`.
///
/// The derivation gives `cos(θ3 - θ1)`. The published formula prints
/// `cos(θ2 - θ1)`; that variant is kept so the two can be compared against
/// reference values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThirdBodyPhase {
    Corrected,
    AsPrinted,
}

/// Reduced action `d2(a, b, θ)` of the elliptic test loop.
pub fn action_d2(p: &EllipticLoopParams, primaries: &Primaries, qs: &QuadratureSettings) -> Result<f64> {
    action_d2_with(p, primaries, qs, ThirdBodyPhase::Corrected)
}

pub fn action_d2_with(
    p: &EllipticLoopParams,
    primaries: &Primaries,
    qs: &QuadratureSettings,
    reading: ThirdBodyPhase,
) -> Result<f64> {
    let cfg = &primaries.config;
    check_collision(&EllipticLoop::new(*p, cfg)?, primaries)?;

    let [m1, m2, m3] = primaries.masses.as_array();
    let total = primaries.masses.total();
    let period = cfg.period();
    let [r1, r2, r3] = cfg.radii();
    let [t1, t2, t3] = cfg.phases();
    let EllipticLoopParams { a, b, theta } = *p;
    let (mean, half_diff) = ((a * a + b * b) / 2.0, (a * a - b * b) / 2.0);

    let prefactor = 2.0 * PI * PI / period
        * (mean + (m2 + m3 - m1) / total * r1 * r1
            - (2.0 * m2 * r2 * (t2 - t1).cos() + 2.0 * m3 * r3 * (t3 - t1).cos()) / total * r1
            + m2 * (a - b) / total * (r1 * (t1 + theta).cos() - r2 * (t2 + theta).cos())
            + m3 * (a - b) / total * (r1 * (t1 + theta).cos() - r3 * (t3 + theta).cos()));

    let third_phase = match reading {
        ThirdBodyPhase::Corrected => t3 - t1,
        ThirdBodyPhase::AsPrinted => t2 - t1,
    };
    // Time-independent parts of |q̃ - q_i|² for i = 2, 3.
    let constant = |ri: f64, ti: f64, pair_phase: f64| {
        r1 * r1 + ri * ri - 2.0 * r1 * ri * pair_phase.cos() + (a - b) * (r1 * (t1 + theta).cos() - ri * (ti + theta).cos())
    };
    let c2 = constant(r2, t2, t2 - t1);
    let c3 = constant(r3, t3, third_phase);
    let threshold = COLLISION_FRACTION * cfg.side();
    let sq_dist = move |value: f64, primary: usize, t: f64| -> Result<f64> {
        distance_or_collision(value.max(0.0).sqrt(), primary, t, threshold)
    };

    let w2 = 2.0 * TAU / period;
    let integral = integrate_periodic(
        |t| {
            let base = mean + half_diff * (w2 * t - 2.0 * theta).cos();
            let d1 = sq_dist(base, 0, t)?;
            let d2 = sq_dist(base + c2 + (a + b) * (r1 * (w2 * t + t1 - theta).cos() - r2 * (w2 * t + t2 - theta).cos()), 1, t)?;
            let d3 = sq_dist(base + c3 + (a + b) * (r1 * (w2 * t + t1 - theta).cos() - r3 * (w2 * t + t3 - theta).cos()), 2, t)?;
            Ok([m1 / d1 + m2 / d2 + m3 / d3])
        },
        period,
        qs,
    )?;
    Ok(prefactor + integral.value[0])
}

/// Reduced action `d3(a, θ)` of the circular test loop.
pub fn action_d3(p: &CircularLoopParams, primaries: &Primaries, qs: &QuadratureSettings) -> Result<f64> {
    let cfg = &primaries.config;
    check_collision(&CircularLoop::new(*p, cfg)?, primaries)?;

    let [m1, m2, m3] = primaries.masses.as_array();
    let total = primaries.masses.total();
    let period = cfg.period();
    let [r1, r2, r3] = cfg.radii();
    let [t1, t2, t3] = cfg.phases();
    let CircularLoopParams { a, theta } = *p;

    let prefactor = 2.0 * PI * PI / period
        * (a * a + (m2 + m3 - m1) / total * r1 * r1
            - (2.0 * m2 * r2 * (t2 - t1).cos() + 2.0 * m3 * r3 * (t3 - t1).cos()) / total * r1
            + 2.0 * (m2 + m3) / total * a * r1 * (t1 - theta).cos()
            - (2.0 * m2 * r2 * (t2 - theta).cos() + 2.0 * m3 * r3 * (t3 - theta).cos()) / total * a);

    let sq = |ri: f64, ti: f64| {
        a * a + r1 * r1 + ri * ri - 2.0 * r1 * ri * (ti - t1).cos() + 2.0 * a * r1 * (t1 - theta).cos()
            - 2.0 * a * ri * (ti - theta).cos()
    };
    let threshold = COLLISION_FRACTION * cfg.side();
    let (s2, s3) = (sq(r2, t2), sq(r3, t3));
    // The remaining integrands are constant in time; they still go through
    // the quadrature so every route shares one integration rule.
    let integral = integrate_periodic(
        |t| {
            let d2 = distance_or_collision(s2.max(0.0).sqrt(), 1, t, threshold)?;
            let d3 = distance_or_collision(s3.max(0.0).sqrt(), 2, t, threshold)?;
            Ok([m2 / d2 + m3 / d3])
        },
        period,
        qs,
    )?;
    Ok(prefactor + m1 * period / a + integral.value[0])
}

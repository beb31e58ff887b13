//! Periodic trapezoid rule with grid doubling.
//!
//! For smooth `T`-periodic integrands the equally weighted rule converges
//! geometrically, so comparing successive doublings is a reliable error
//! estimate.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSettings {
    /// Absolute tolerance on the change between two successive doublings.
    pub abs_tol: f64,
    pub max_doublings: u32,
    /// Initial grid size, a power of two no smaller than 16.
    pub initial_points: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_doublings: 20,
            initial_points: 64,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature abs_tol {} must be positive",
                self.abs_tol
            )));
        }
        if self.initial_points < 16 || !self.initial_points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "initial_points {} must be a power of two >= 16",
                self.initial_points
            )));
        }
        Ok(())
    }

    pub fn with_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }
}

/// Converged value of a vector-valued periodic integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const D: usize> {
    pub value: [f64; D],
    /// Grid size of the accepted estimate.
    pub points: usize,
    /// Largest component change at the final doubling.
    pub change: f64,
}

/// Integrates `f` over one period `[0, T)`. Every component must settle to
/// within `abs_tol` between two successive grids.
pub fn integrate_periodic<const D: usize, F>(
    f: F,
    period: f64,
    settings: &QuadratureSettings,
) -> Result<Integral<D>>
where
    F: Fn(f64) -> Result<[f64; D]>,
{
    settings.validate()?;
    let mut n = settings.initial_points;
    let mut estimate = trapezoid_sum(&f, period, n, 0.0)?.map(|s| s * period / n as f64);
    let mut change = f64::INFINITY;
    for _ in 0..settings.max_doublings {
        // Midpoints of the current grid.
        let mid = trapezoid_sum(&f, period, n, 0.5)?;
        let h = period / n as f64;
        let refined: [f64; D] = std::array::from_fn(|k| 0.5 * (estimate[k] + h * mid[k]));
        change = refined
            .iter()
            .zip(estimate.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        estimate = refined;
        n *= 2;
        if change <= settings.abs_tol {
            return Ok(Integral {
                value: estimate,
                points: n,
                change,
            });
        }
    }
    Err(Error::NoConvergence {
        tol: settings.abs_tol,
        points: n,
        last_change: change,
    })
}

/// `Σ_{j<n} f((j + offset) T / n)` in index order.
fn trapezoid_sum<const D: usize, F>(f: &F, period: f64, n: usize, offset: f64) -> Result<[f64; D]>
where
    F: Fn(f64) -> Result<[f64; D]>,
{
    let h = period / n as f64;
    let mut acc = [0.0; D];
    for j in 0..n {
        let v = f((j as f64 + offset) * h)?;
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    Ok(acc)
}

/// Fixed-grid periodic trapezoid `(T/N) Σ f(jT/N)`.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    (0..n).map(|j| f(j as f64 * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn smooth_periodic_integrand() {
        // ∫_0^{2π} 1/(2 + cos t) dt = 2π/√3
        let r = integrate_periodic(|t| Ok([1.0 / (2.0 + t.cos())]), TAU, &QuadratureSettings::default()).unwrap();
        assert!((r.value[0] - TAU / 3f64.sqrt()).abs() < 1e-12);
        assert!(r.points <= 256);
    }

    #[test]
    fn exhausted_budget_reports_no_convergence() {
        let s = QuadratureSettings {
            abs_tol: 1e-300,
            max_doublings: 2,
            initial_points: 16,
        };
        let err = integrate_periodic(|t| Ok([(t * 7.3).sin().abs()]), 1.0, &s).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn rejects_bad_settings() {
        let s = QuadratureSettings {
            initial_points: 48,
            ..Default::default()
        };
        assert!(s.validate().is_err());
        assert!(QuadratureSettings::default().with_tol(0.0).validate().is_err());
    }

    #[test]
    fn halving_tolerance_stays_within_previous_tolerance() {
        let f = |t: f64| Ok([1.0 / (1.05 - (2.0 * PI * t).cos())]);
        let mut tol = 1e-4;
        let mut prev = integrate_periodic(f, 1.0, &QuadratureSettings::default().with_tol(tol)).unwrap().value[0];
        for _ in 0..12 {
            let next = integrate_periodic(f, 1.0, &QuadratureSettings::default().with_tol(tol / 2.0)).unwrap().value[0];
            assert!((next - prev).abs() <= tol);
            prev = next;
            tol /= 2.0;
        }
    }
}

//! Winding number of a closed planar curve about a point.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::loops::Loop;
use crate::{Error, Result, Vec2};

/// Angular steps at or above this size trigger resampling.
const MAX_STEP: f64 = FRAC_PI_2;

const MAX_POINTS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingResult {
    pub degree: i64,
    /// Largest single-step angular increment observed, in radians.
    pub min_angular_margin: f64,
    pub points: usize,
}

/// Winding number of the closed polygon through `samples` about `p`. The
/// curve is closed implicitly from the last sample back to the first.
pub fn winding_number_of_samples(samples: &[Vec2], p: Vec2) -> Result<WindingResult> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 samples, got {}", samples.len())));
    }
    let diameter = diameter(samples);
    let nearest = samples.iter().map(|x| (x - p).norm()).fold(f64::INFINITY, f64::min);
    if nearest <= 1e-12 * diameter || nearest == 0.0 {
        return Err(Error::PointOnCurve { distance: nearest });
    }
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for (k, a) in samples.iter().enumerate() {
        let b = &samples[(k + 1) % samples.len()];
        let (u, v) = (a - p, b - p);
        let step = (u.x * v.y - u.y * v.x).atan2(u.dot(&v));
        max_step = max_step.max(step.abs());
        total += step;
    }
    if max_step >= MAX_STEP {
        return Err(Error::Undersampled {
            max_step,
            points: samples.len(),
        });
    }
    let turns = total / TAU;
    let degree = turns.round();
    debug_assert!((turns - degree).abs() < 1e-6 && max_step < PI);
    Ok(WindingResult {
        degree: degree as i64,
        min_angular_margin: max_step,
        points: samples.len(),
    })
}

fn diameter(samples: &[Vec2]) -> f64 {
    let (mut lo, mut hi) = (samples[0], samples[0]);
    for s in samples {
        lo = lo.inf(s);
        hi = hi.sup(s);
    }
    (hi - lo).norm()
}

/// Winding number of a `T`-periodic curve about `p`, starting from `points`
/// samples and doubling the sampling whenever a step is too coarse.
pub fn winding_number<C: Fn(f64) -> Vec2>(curve: C, period: f64, points: usize, p: Vec2) -> Result<WindingResult> {
    let mut n = points.max(64);
    loop {
        let samples: Vec<Vec2> = (0..n).map(|k| curve(period * k as f64 / n as f64)).collect();
        match winding_number_of_samples(&samples, p) {
            Err(Error::Undersampled { .. }) if n < MAX_POINTS => n *= 2,
            other => return other,
        }
    }
}

/// Degree of `q(t) - q_1(t)` about the origin for a loop and a moving
/// reference body.
pub fn relative_degree<L: Loop + ?Sized, R: Fn(f64) -> Vec2>(lp: &L, reference: R, points: usize) -> Result<WindingResult> {
    winding_number(|t| lp.position(t) - reference(t), lp.period(), points, Vec2::zeros())
}

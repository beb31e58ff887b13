//! Loops of the small body.
//!
//! Three kinds are supported: the elliptic and circular test loops, which
//! are first-harmonic perturbations of the first primary's orbit, and general
//! loops stored as odd-harmonic Fourier series. Odd harmonics make the
//! half-period antisymmetry `q(t + T/2) = -q(t)` hold by construction.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::PrimaryConfig;
use crate::field::Field;
use crate::{Error, Result, Vec2};

/// A closed `T`-periodic planar curve with an analytic velocity.
pub trait Loop: Sync {
    fn period(&self) -> f64;
    fn position(&self, t: f64) -> Vec2;
    fn velocity(&self, t: f64) -> Vec2;
}

/// Parameters of the elliptic test loop
/// `q - q1 = (a cos(-2πt/T + θ), b sin(-2πt/T + θ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticLoopParams {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

/// Parameters of the circular test loop `q - q1 = a e^{i(2πt/T + θ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularLoopParams {
    pub a: f64,
    pub theta: f64,
}

impl EllipticLoopParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "elliptic loop needs a, b > 0 (got a = {}, b = {}, theta = {})",
                self.a, self.b, self.theta
            )));
        }
        Ok(())
    }
}

impl CircularLoopParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "circular loop needs a > 0 (got a = {}, theta = {})",
                self.a, self.theta
            )));
        }
        Ok(())
    }
}

/// Elliptic test loop around the first primary. Its motion relative to the
/// primary is clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticLoop {
    pub params: EllipticLoopParams,
    pub config: PrimaryConfig,
}

impl EllipticLoop {
    pub fn new(params: EllipticLoopParams, config: &PrimaryConfig) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            config: *config,
        })
    }

    /// Position relative to the first primary.
    pub fn relative_position(&self, t: f64) -> Vec2 {
        let (s, c) = (self.params.theta - self.config.omega() * t).sin_cos();
        Vec2::new(self.params.a * c, self.params.b * s)
    }

    pub fn relative_velocity(&self, t: f64) -> Vec2 {
        let w = self.config.omega();
        let (s, c) = (self.params.theta - w * t).sin_cos();
        Vec2::new(self.params.a * w * s, -self.params.b * w * c)
    }
}

impl Loop for EllipticLoop {
    fn period(&self) -> f64 {
        self.config.period()
    }

    fn position(&self, t: f64) -> Vec2 {
        self.config.position(0, t) + self.relative_position(t)
    }

    fn velocity(&self, t: f64) -> Vec2 {
        self.config.velocity(0, t) + self.relative_velocity(t)
    }
}

/// Circular test loop around the first primary, counterclockwise relative
/// to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularLoop {
    pub params: CircularLoopParams,
    pub config: PrimaryConfig,
}

impl CircularLoop {
    pub fn new(params: CircularLoopParams, config: &PrimaryConfig) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            config: *config,
        })
    }

    pub fn relative_position(&self, t: f64) -> Vec2 {
        let (s, c) = (self.config.omega() * t + self.params.theta).sin_cos();
        Vec2::new(c, s) * self.params.a
    }

    pub fn relative_velocity(&self, t: f64) -> Vec2 {
        let w = self.config.omega();
        let (s, c) = (w * t + self.params.theta).sin_cos();
        Vec2::new(-s, c) * (self.params.a * w)
    }
}

impl Loop for CircularLoop {
    fn period(&self) -> f64 {
        self.config.period()
    }

    fn position(&self, t: f64) -> Vec2 {
        self.config.position(0, t) + self.relative_position(t)
    }

    fn velocity(&self, t: f64) -> Vec2 {
        self.config.velocity(0, t) + self.relative_velocity(t)
    }
}

/// Odd-harmonic Fourier loop
/// `q(t) = Σ_j cos_j cos(k_j ω t) + sin_j sin(k_j ω t)` with `k_j = 2j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLoop {
    period: f64,
    cos: Vec<Vec2>,
    sin: Vec<Vec2>,
}

/// Harmonic number of coefficient slot `j`.
#[inline]
pub fn harmonic(j: usize) -> usize {
    2 * j + 1
}

impl FourierLoop {
    pub fn new(period: f64, cos: Vec<Vec2>, sin: Vec<Vec2>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter(format!("period {period} must be positive")));
        }
        if cos.is_empty() || cos.len() != sin.len() {
            return Err(Error::Format(format!(
                "need equally many cosine and sine coefficients (got {} and {})",
                cos.len(),
                sin.len()
            )));
        }
        if cos.iter().chain(sin.iter()).any(|c| !c.iter().all(|x| x.is_finite())) {
            return Err(Error::Format("non-finite coefficient".into()));
        }
        Ok(Self { period, cos, sin })
    }

    pub fn zero(period: f64, harmonics: usize) -> Self {
        Self {
            period,
            cos: vec![Vec2::zeros(); harmonics.max(1)],
            sin: vec![Vec2::zeros(); harmonics.max(1)],
        }
    }

    /// Number `K` of retained odd harmonics (`1, 3, …, 2K - 1`).
    pub fn harmonics(&self) -> usize {
        self.cos.len()
    }

    pub fn cos_coefficients(&self) -> &[Vec2] {
        &self.cos
    }

    pub fn sin_coefficients(&self) -> &[Vec2] {
        &self.sin
    }

    pub fn omega(&self) -> f64 {
        TAU / self.period
    }

    /// Flat coefficient vector, four entries per harmonic:
    /// `[cos.x, cos.y, sin.x, sin.y]`.
    pub fn to_vector(&self) -> Vec<f64> {
        self.cos
            .iter()
            .zip(&self.sin)
            .flat_map(|(c, s)| [c.x, c.y, s.x, s.y])
            .collect()
    }

    pub fn from_vector(period: f64, v: &[f64]) -> Result<Self> {
        if v.is_empty() || v.len() % 4 != 0 {
            return Err(Error::Format(format!("coefficient vector length {} is not a multiple of 4", v.len())));
        }
        let cos = v.chunks(4).map(|c| Vec2::new(c[0], c[1])).collect();
        let sin = v.chunks(4).map(|c| Vec2::new(c[2], c[3])).collect();
        Self::new(period, cos, sin)
    }

    /// Same loop with `k` harmonics, truncating or zero padding.
    pub fn with_harmonics(&self, k: usize) -> Self {
        let k = k.max(1);
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        cos.resize(k, Vec2::zeros());
        sin.resize(k, Vec2::zeros());
        Self {
            period: self.period,
            cos,
            sin,
        }
    }

    /// Loop rotated rigidly by `angle` about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let rot = nalgebra::Rotation2::new(angle);
        Self {
            period: self.period,
            cos: self.cos.iter().map(|c| rot * c).collect(),
            sin: self.sin.iter().map(|s| rot * s).collect(),
        }
    }

    /// Fills `out[j] = (cos(k_j ω t), sin(k_j ω t))` using the angle
    /// addition recurrence.
    pub(crate) fn basis_at(&self, t: f64, out: &mut [(f64, f64)]) {
        let (s1, c1) = (self.omega() * t).sin_cos();
        // Step between consecutive odd harmonics is e^{2iωt}.
        let (s2, c2) = (2.0 * s1 * c1, c1 * c1 - s1 * s1);
        let (mut c, mut s) = (c1, s1);
        for slot in out.iter_mut() {
            *slot = (c, s);
            let nc = c * c2 - s * s2;
            let ns = s * c2 + c * s2;
            c = nc;
            s = ns;
        }
    }

    fn evaluate(&self, t: f64, order: u32) -> Vec2 {
        let w = self.omega();
        let (s1, c1) = (w * t).sin_cos();
        let (s2, c2) = (2.0 * s1 * c1, c1 * c1 - s1 * s1);
        let (mut c, mut s) = (c1, s1);
        let mut acc = Vec2::zeros();
        for (j, (cc, sc)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kw = harmonic(j) as f64 * w;
            acc += match order {
                0 => cc * c + sc * s,
                1 => (sc * c - cc * s) * kw,
                _ => -(cc * c + sc * s) * (kw * kw),
            };
            let nc = c * c2 - s * s2;
            s = s * c2 + c * s2;
            c = nc;
        }
        acc
    }

    /// Second derivative, term by term.
    pub fn acceleration(&self, t: f64) -> Vec2 {
        self.evaluate(t, 2)
    }

    /// `∫_0^T |q|² dt`, exact from the coefficients.
    pub fn mean_square_integral(&self) -> f64 {
        0.5 * self.period * self.cos.iter().zip(&self.sin).map(|(c, s)| c.norm_squared() + s.norm_squared()).sum::<f64>()
    }

    /// `∫_0^T |q̇|² dt`, exact from the coefficients.
    pub fn velocity_square_integral(&self) -> f64 {
        let w = self.omega();
        0.5 * self.period
            * self
                .cos
                .iter()
                .zip(&self.sin)
                .enumerate()
                .map(|(j, (c, s))| {
                    let kw = harmonic(j) as f64 * w;
                    kw * kw * (c.norm_squared() + s.norm_squared())
                })
                .sum::<f64>()
    }

    /// Kinetic action `½ ∫ |q̇|² dt`.
    pub fn kinetic_action(&self) -> f64 {
        0.5 * self.velocity_square_integral()
    }

    /// Largest coefficient magnitude, a convenient amplitude scale.
    pub fn amplitude(&self) -> f64 {
        self.cos.iter().chain(&self.sin).map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Loop for FourierLoop {
    fn period(&self) -> f64 {
        self.period
    }

    fn position(&self, t: f64) -> Vec2 {
        self.evaluate(t, 0)
    }

    fn velocity(&self, t: f64) -> Vec2 {
        self.evaluate(t, 1)
    }
}

#[derive(Serialize, Deserialize)]
struct FourierLoopFile {
    #[serde(rename = "T")]
    period: f64,
    #[serde(rename = "K")]
    harmonics: usize,
    cos: Vec<[f64; 2]>,
    sin: Vec<[f64; 2]>,
    /// Optional explicit list of harmonic numbers; must be `1, 3, …, 2K-1`.
    #[serde(rename = "harmonics", default, skip_serializing_if = "Option::is_none")]
    harmonic_numbers: Option<Vec<i64>>,
}

impl FourierLoop {
    /// JSON object `{T, K, cos: [[cx, cy], …], sin: [[sx, sy], …]}` with
    /// harmonics in ascending odd order.
    pub fn to_json(&self) -> String {
        let file = FourierLoopFile {
            period: self.period,
            harmonics: self.harmonics(),
            cos: self.cos.iter().map(|c| [c.x, c.y]).collect(),
            sin: self.sin.iter().map(|s| [s.x, s.y]).collect(),
            harmonic_numbers: None,
        };
        serde_json::to_string_pretty(&file).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FourierLoopFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if let Some(ks) = &file.harmonic_numbers {
            if let Some(even) = ks.iter().find(|k| *k % 2 == 0) {
                return Err(Error::SymmetryViolation(format!(
                    "even harmonic {even} breaks q(t + T/2) = -q(t)"
                )));
            }
            let expected: Vec<i64> = (0..file.harmonics).map(|j| harmonic(j) as i64).collect();
            if *ks != expected {
                return Err(Error::Format(format!(
                    "harmonics must be the ascending odd numbers 1..{}",
                    2 * file.harmonics - 1
                )));
            }
        }
        if file.harmonics == 0 || file.cos.len() != file.harmonics || file.sin.len() != file.harmonics {
            return Err(Error::Format(format!(
                "K = {} but {} cosine and {} sine coefficients given",
                file.harmonics,
                file.cos.len(),
                file.sin.len()
            )));
        }
        Self::new(
            file.period,
            file.cos.iter().map(|c| Vec2::new(c[0], c[1])).collect(),
            file.sin.iter().map(|s| Vec2::new(s[0], s[1])).collect(),
        )
    }
}

/// Discrete Fourier projection of `source` onto the first `harmonics` odd
/// harmonics using `points` uniform samples. Requires `points >= 4 K` so the
/// highest retained harmonic is below the Nyquist limit.
pub fn project_to_fourier<L: Loop + ?Sized>(source: &L, harmonics: usize, points: usize) -> Result<FourierLoop> {
    if harmonics == 0 {
        return Err(Error::InvalidParameter("need at least one harmonic".into()));
    }
    if points < 4 * harmonics {
        return Err(Error::GridTooCoarse {
            points,
            harmonics,
            required: 4 * harmonics,
        });
    }
    let period = source.period();
    let mut cos = vec![Vec2::zeros(); harmonics];
    let mut sin = vec![Vec2::zeros(); harmonics];
    let proto = FourierLoop::zero(period, harmonics);
    let mut basis = vec![(0.0, 0.0); harmonics];
    for n in 0..points {
        let t = period * n as f64 / points as f64;
        let q = source.position(t);
        proto.basis_at(t, &mut basis);
        for (j, &(c, s)) in basis.iter().enumerate() {
            cos[j] += q * c;
            sin[j] += q * s;
        }
    }
    let scale = 2.0 / points as f64;
    for c in cos.iter_mut().chain(sin.iter_mut()) {
        *c *= scale;
    }
    FourierLoop::new(period, cos, sin)
}

/// Loop sampled on the uniform grid `t_n = n T / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLoop {
    pub period: f64,
    pub times: Vec<f64>,
    pub positions: Vec<Vec2>,
}

impl SampledLoop {
    pub fn from_loop<L: Loop + ?Sized>(source: &L, points: usize) -> Result<Self> {
        if points < 8 {
            return Err(Error::InvalidParameter(format!("need at least 8 samples, got {points}")));
        }
        let period = source.period();
        let times: Vec<f64> = (0..points).map(|n| period * n as f64 / points as f64).collect();
        let positions = times.iter().map(|&t| source.position(t)).collect();
        Ok(Self {
            period,
            times,
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,x,y`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x,y")?;
        for (t, p) in self.times.iter().zip(&self.positions) {
            writeln!(out, "{t},{},{}", p.x, p.y)?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`SampledLoop::write_csv`]. The period is
    /// inferred from the uniform spacing.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty CSV".into()))?
            .map_err(|e| Error::Format(e.to_string()))?;
        if header.trim() != "t,x,y" {
            return Err(Error::Format(format!("expected header t,x,y, found {header:?}")));
        }
        let mut times = Vec::new();
        let mut positions = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))?;
            if fields.len() != 3 {
                return Err(Error::Format(format!("line {}: expected 3 fields", lineno + 2)));
            }
            times.push(fields[0]);
            positions.push(Vec2::new(fields[1], fields[2]));
        }
        if times.len() < 8 {
            return Err(Error::Format(format!("need at least 8 samples, got {}", times.len())));
        }
        let h = times[1] - times[0];
        for w in times.windows(2) {
            if !(w[1] > w[0]) || ((w[1] - w[0]) - h).abs() > 1e-9 * h {
                return Err(Error::Format("sample times must be uniformly spaced and increasing".into()));
            }
        }
        Ok(Self {
            period: h * times.len() as f64,
            times,
            positions,
        })
    }
}

/// Closest approach to each body of `field`, located on an `points`-point
/// grid and refined by golden-section search around every grid-local
/// minimum. Bodies with zero mass report `+∞`.
pub fn min_separation<L: Loop + ?Sized, F: Field + ?Sized>(lp: &L, field: &F, points: usize) -> [f64; 3] {
    min_separation_detail(lp, field, points).map(|(d, _)| d)
}

/// Like [`min_separation`] but also returns the time of closest approach.
pub fn min_separation_detail<L: Loop + ?Sized, F: Field + ?Sized>(
    lp: &L,
    field: &F,
    points: usize,
) -> [(f64, f64); 3] {
    let points = points.max(64);
    let period = lp.period();
    let h = period / points as f64;
    let masses: [f64; 3] = field.bodies(0.0).map(|b| b.mass);
    let mut dist = vec![[0.0; 3]; points];
    for (n, row) in dist.iter_mut().enumerate() {
        let t = n as f64 * h;
        let q = lp.position(t);
        for (i, b) in field.bodies(t).iter().enumerate() {
            row[i] = (q - b.position).norm();
        }
    }
    std::array::from_fn(|i| {
        if masses[i] == 0.0 {
            return (f64::INFINITY, 0.0);
        }
        let sep = |t: f64| (lp.position(t) - field.bodies(t)[i].position).norm();
        let mut best = (f64::INFINITY, 0.0);
        for n in 0..points {
            let prev = dist[(n + points - 1) % points][i];
            let next = dist[(n + 1) % points][i];
            let here = dist[n][i];
            if here <= prev && here <= next {
                let t = n as f64 * h;
                let refined = golden_section(&sep, t - h, t + h, 1e-13 * period);
                let cand = if refined.1 < here { (refined.1, refined.0) } else { (here, t) };
                if cand.0 < best.0 {
                    best = cand;
                }
            }
        }
        (best.0, best.1.rem_euclid(period))
    })
}

/// Minimizes `f` on `[lo, hi]`; returns `(argmin, min)`.
fn golden_section<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{lagrange_orbits, Masses};
    use crate::field::Primaries;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn equal_cfg() -> PrimaryConfig {
        lagrange_orbits(&Masses::new(1.0, 1.0, 1.0).unwrap(), 1.0).unwrap()
    }

    fn table1_primaries() -> Primaries {
        Primaries::new(Masses::new(0.29, 0.42, 0.29).unwrap(), 1.0).unwrap()
    }

    fn random_fourier(rng: &mut ChaCha8Rng, k: usize, period: f64) -> FourierLoop {
        let cos = (0..k)
            .map(|j| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / harmonic(j).pow(2) as f64)
            .collect();
        let sin = (0..k)
            .map(|j| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / harmonic(j).pow(2) as f64)
            .collect();
        FourierLoop::new(period, cos, sin).unwrap()
    }

    #[test]
    fn elliptic_phase_zero() {
        let cfg = equal_cfg();
        let e = EllipticLoop::new(EllipticLoopParams { a: 0.1, b: 0.1, theta: 0.0 }, &cfg).unwrap();
        let d = e.position(0.0) - cfg.position(0, 0.0);
        assert_relative_eq!(d.x, 0.1, max_relative = 1e-15);
        assert!(d.y.abs() < 1e-17);
    }

    #[test]
    fn elliptic_distance_and_speed_match_closed_forms() {
        let cfg = table1_primaries().config;
        let (a, b, th) = (0.13, 0.49, PI / 20.0);
        let e = EllipticLoop::new(EllipticLoopParams { a, b, theta: th }, &cfg).unwrap();
        let w = cfg.omega();
        for n in 0..64 {
            let t = n as f64 / 64.0 + 0.003;
            let ph = 4.0 * PI * t - 2.0 * th;
            let dist = ((a * a + b * b) / 2.0 + (a * a - b * b) / 2.0 * ph.cos()).sqrt();
            let speed2 = w * w * ((a * a + b * b) / 2.0 - (a * a - b * b) / 2.0 * ph.cos());
            assert_relative_eq!((e.position(t) - cfg.position(0, t)).norm(), dist, max_relative = 1e-13);
            assert_relative_eq!((e.velocity(t) - cfg.velocity(0, t)).norm_squared(), speed2, max_relative = 1e-12);
            assert!((e.position(t + 0.5) + e.position(t)).norm() < 1e-14);
        }
    }

    #[test]
    fn circular_loop_examples() {
        let cfg = equal_cfg();
        let c = CircularLoop::new(CircularLoopParams { a: 0.17, theta: PI / 2.0 }, &cfg).unwrap();
        let w = cfg.omega();
        for n in 0..64 {
            let t = n as f64 / 64.0;
            assert_relative_eq!((c.position(t) - cfg.position(0, t)).norm(), 0.17, max_relative = 1e-14);
            assert_relative_eq!(
                (c.velocity(t) - cfg.velocity(0, t)).norm_squared(),
                w * w * 0.17 * 0.17,
                max_relative = 1e-13
            );
            assert!((c.position(t + 0.5) + c.position(t)).norm() < 1e-14);
        }
        let cancel = CircularLoop::new(CircularLoopParams { a: cfg.radius(0), theta: cfg.phase(0) + PI }, &cfg).unwrap();
        for n in 0..16 {
            assert!(cancel.position(n as f64 / 16.0).norm() < 1e-15);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let cfg = equal_cfg();
        assert!(EllipticLoop::new(EllipticLoopParams { a: 0.0, b: 0.1, theta: 0.0 }, &cfg).is_err());
        assert!(CircularLoop::new(CircularLoopParams { a: -1.0, theta: 0.0 }, &cfg).is_err());
    }

    #[test]
    fn velocities_match_finite_differences() {
        let cfg = table1_primaries().config;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = EllipticLoop::new(EllipticLoopParams { a: 0.13, b: 0.49, theta: PI / 20.0 }, &cfg).unwrap();
        let c = CircularLoop::new(CircularLoopParams { a: 0.17, theta: 1.0 }, &cfg).unwrap();
        let f = random_fourier(&mut rng, 8, 1.0);
        let loops: [&dyn Loop; 3] = [&e, &c, &f];
        for lp in loops {
            for _ in 0..32 {
                let t = rng.gen_range(0.0..1.0);
                let h = 1e-6;
                let fd = (lp.position(t + h) - lp.position(t - h)) / (2.0 * h);
                let v = lp.velocity(t);
                assert!((fd - v).norm() <= 1e-6 * v.norm().max(1e-3), "{fd} vs {v}");
            }
        }
    }

    #[test]
    fn fourier_derivative_scales_by_harmonic() {
        let mut cos = vec![Vec2::zeros(); 4];
        cos[2] = Vec2::new(1.0, 0.0);
        let f = FourierLoop::new(2.0, cos, vec![Vec2::zeros(); 4]).unwrap();
        let k = 5.0 * PI;
        let t = 0.123;
        assert_relative_eq!(f.velocity(t).x, -k * (k * t).sin(), max_relative = 1e-12);
        assert_relative_eq!(f.acceleration(t).x, -k * k * (k * t).cos(), max_relative = 1e-12);
    }

    #[test]
    fn projection_reconstructs_band_limited_loops() {
        let cfg = table1_primaries().config;
        let e = EllipticLoop::new(EllipticLoopParams { a: 0.13, b: 0.49, theta: PI / 20.0 }, &cfg).unwrap();
        for k in [1, 4, 16] {
            let f = project_to_fourier(&e, k, 4 * k.max(8)).unwrap();
            for n in 0..97 {
                let t = n as f64 / 97.0;
                assert!((f.position(t) - e.position(t)).norm() <= 1e-12);
            }
        }
        let z = project_to_fourier(&FourierLoop::zero(1.0, 3), 3, 16).unwrap();
        assert!(z.to_vector().iter().all(|&x| x == 0.0));
        assert!(matches!(
            project_to_fourier(&e, 16, 63),
            Err(Error::GridTooCoarse { required: 64, .. })
        ));
    }

    struct EvenHarmonic;
    impl Loop for EvenHarmonic {
        fn period(&self) -> f64 {
            1.0
        }
        fn position(&self, t: f64) -> Vec2 {
            Vec2::new((2.0 * TAU * t).cos() + 0.3, (TAU * t).sin())
        }
        fn velocity(&self, _t: f64) -> Vec2 {
            unimplemented!()
        }
    }

    #[test]
    fn projection_is_antisymmetric_for_any_source() {
        let f = project_to_fourier(&EvenHarmonic, 4, 64).unwrap();
        for n in 0..50 {
            let t = n as f64 / 50.0;
            assert!((f.position(t + 0.5) + f.position(t)).norm() < 1e-15);
        }
        // only the odd part survives
        assert_relative_eq!(f.sin_coefficients()[0].y, 1.0, max_relative = 1e-13);
        assert!(f.cos_coefficients()[0].x.abs() < 1e-15);
    }

    #[test]
    fn separations() {
        let p = table1_primaries();
        let c = CircularLoop::new(CircularLoopParams { a: 0.17, theta: PI / 2.0 }, &p.config).unwrap();
        assert!((min_separation(&c, &p, 256)[0] - 0.17).abs() < 1e-10);
        let e = EllipticLoop::new(EllipticLoopParams { a: 0.13, b: 0.49, theta: PI / 20.0 }, &p.config).unwrap();
        assert!((min_separation(&e, &p, 256)[0] - 0.13).abs() < 1e-10);

        // A loop through q1(t*) with t* off the grid.
        let t_star = 0.123_456;
        let target = p.config.position(0, t_star);
        let base = project_to_fourier(&e, 4, 64).unwrap();
        let shift = target - base.position(t_star);
        let (s, c) = (TAU * t_star).sin_cos();
        let mut cos = base.cos_coefficients().to_vec();
        let mut sin = base.sin_coefficients().to_vec();
        cos[0] += shift * c;
        sin[0] += shift * s;
        let hit = FourierLoop::new(1.0, cos, sin).unwrap();
        assert!(hit.position(t_star).metric_distance(&target) < 1e-15);
        assert!(min_separation(&hit, &p, 64)[0] < 1e-9);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_fourier(&mut rng, 5, 1.0);
        let back = FourierLoop::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);

        let bad_even = r#"{"T": 1.0, "K": 2, "harmonics": [1, 2], "cos": [[0,0],[0,0]], "sin": [[0,0],[0,0]]}"#;
        assert!(matches!(FourierLoop::from_json(bad_even), Err(Error::SymmetryViolation(_))));
        let bad_len = r#"{"T": 1.0, "K": 2, "cos": [[0,0]], "sin": [[0,0],[0,0]]}"#;
        assert!(matches!(FourierLoop::from_json(bad_len), Err(Error::Format(_))));
        let ok = r#"{"T": 1.0, "K": 2, "harmonics": [1, 3], "cos": [[1,0],[0,0]], "sin": [[0,1],[0,0]]}"#;
        assert!(FourierLoop::from_json(ok).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let cfg = equal_cfg();
        let c = CircularLoop::new(CircularLoopParams { a: 0.2, theta: 0.3 }, &cfg).unwrap();
        let s = SampledLoop::from_loop(&c, 32).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t,x,y\n"));
        let back = SampledLoop::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.positions, s.positions);
        assert_relative_eq!(back.period, 1.0, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn poincare_wirtinger(seed in 0u64..1_000_000, k in 1usize..12, period in 0.2f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_fourier(&mut rng, k, period);
            let lhs = f.mean_square_integral();
            let rhs = period * period / (4.0 * PI * PI) * f.velocity_square_integral();
            prop_assert!(lhs <= rhs * (1.0 + 1e-14));
        }

        #[test]
        fn fourier_antisymmetry_and_json(seed in 0u64..1_000_000, k in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_fourier(&mut rng, k, 1.0);
            for n in 0..256 {
                let t = n as f64 / 256.0;
                prop_assert!((f.position(t + 0.5) + f.position(t)).norm() <= 1e-12 * f.amplitude());
            }
            let back = FourierLoop::from_json(&f.to_json()).unwrap();
            for (a, b) in back.to_vector().iter().zip(f.to_vector()) {
                prop_assert!((a - b).abs() <= 1e-15 * b.abs());
            }
            let p = project_to_fourier(&f, k, 4 * k + 4).unwrap();
            for (a, b) in p.to_vector().iter().zip(f.to_vector()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}

//! Equation of motion of the small body, `q̈ = Σ m_i (q_i - q) / |q_i - q|³`,
//! a fixed-step RK4 integrator and residual diagnostics for loops.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::action::{check_collision, COLLISION_FRACTION};
use crate::field::Field;
use crate::loops::{FourierLoop, Loop};
use crate::{Error, Result, Vec2};

/// Integration aborts once the body is closer than this fraction of the
/// length scale to an attracting body.
pub const SINGULARITY_FRACTION: f64 = 1e-6;

/// Smallest admissible step as a fraction of the period.
const MIN_STEP_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub position: Vec2,
    pub velocity: Vec2,
    pub time: f64,
}

impl State {
    pub fn new(position: Vec2, velocity: Vec2, time: f64) -> Self {
        Self {
            position,
            velocity,
            time,
        }
    }

    /// State of a loop at time `t`.
    pub fn on_loop<L: Loop + ?Sized>(lp: &L, t: f64) -> Self {
        Self::new(lp.position(t), lp.velocity(t), t)
    }
}

/// Acceleration of the small body.
pub fn rhs<F: Field + ?Sized>(field: &F, t: f64, state: &State) -> Result<Vec2> {
    acceleration_guarded(field, t, state.position, COLLISION_FRACTION * field.length_scale(), false)
}

fn acceleration_guarded<F: Field + ?Sized>(field: &F, t: f64, q: Vec2, floor: f64, approach: bool) -> Result<Vec2> {
    let mut acc = Vec2::zeros();
    for (i, b) in field.bodies(t).iter().enumerate() {
        if b.mass == 0.0 {
            continue;
        }
        let d = b.position - q;
        let r = d.norm();
        // Allow for rounding in q when it was formed next to q_i.
        if r <= floor + 4.0 * f64::EPSILON * b.position.norm() {
            let (primary, time, separation) = (i + 1, t, r);
            return Err(if approach {
                Error::SingularityApproach {
                    primary,
                    time,
                    separation,
                }
            } else {
                Error::CollisionSingularity {
                    primary,
                    time,
                    separation,
                }
            });
        }
        acc += d * (b.mass / (r * r * r));
    }
    Ok(acc)
}

fn rk4_run<F: Field + ?Sized>(field: &F, s0: &State, t_end: f64, steps: usize, keep: bool) -> Result<Vec<State>> {
    let floor = SINGULARITY_FRACTION * field.length_scale();
    let h = (t_end - s0.time) / steps as f64;
    let acc = |t: f64, q: Vec2| acceleration_guarded(field, t, q, floor, true);
    let mut out = Vec::with_capacity(if keep { steps + 1 } else { 2 });
    out.push(*s0);
    let (mut q, mut v) = (s0.position, s0.velocity);
    for n in 0..steps {
        let t = s0.time + n as f64 * h;
        let k1q = v;
        let k1v = acc(t, q)?;
        let k2q = v + k1v * (0.5 * h);
        let k2v = acc(t + 0.5 * h, q + k1q * (0.5 * h))?;
        let k3q = v + k2v * (0.5 * h);
        let k3v = acc(t + 0.5 * h, q + k2q * (0.5 * h))?;
        let k4q = v + k3v * h;
        let k4v = acc(t + h, q + k3q * h)?;
        q += (k1q + (k2q + k3q) * 2.0 + k4q) * (h / 6.0);
        v += (k1v + (k2v + k3v) * 2.0 + k4v) * (h / 6.0);
        let s = State::new(q, v, s0.time + (n + 1) as f64 * h);
        if keep || n + 1 == steps {
            out.push(s);
        }
    }
    acc(t_end, q)?;
    Ok(out)
}

/// Distance between two states in length units, velocities scaled by the
/// field's angular frequency.
fn state_distance<F: Field + ?Sized>(field: &F, a: &State, b: &State) -> f64 {
    let w = std::f64::consts::TAU / field.period();
    (a.position - b.position).norm().max((a.velocity - b.velocity).norm() / w)
}

/// Result of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    /// Number of RK4 steps of the accepted run.
    pub steps: usize,
    /// Endpoint change against the run with twice the step.
    pub endpoint_change: f64,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// CSV with header `t,x,y,vx,vy`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x,y,vx,vy")?;
        for s in &self.states {
            writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?}",
                s.time, s.position.x, s.position.y, s.velocity.x, s.velocity.y
            )?;
        }
        Ok(())
    }
}

/// Integrates from `s0` to `t_end` with fixed-step RK4, halving the step
/// until the endpoint moves by at most `step_tol` (positions in length
/// units, velocities divided by `2π/T`).
pub fn integrate<F: Field + ?Sized>(field: &F, s0: &State, t_end: f64, step_tol: f64) -> Result<Trajectory> {
    if !(step_tol > 0.0) || !(t_end > s0.time) {
        return Err(Error::InvalidParameter(format!(
            "need step_tol > 0 and t_end > t0 (got {step_tol}, {t_end} vs {})",
            s0.time
        )));
    }
    rhs(field, s0.time, s0)?;
    let span = t_end - s0.time;
    let min_step = MIN_STEP_FRACTION * field.period();
    let mut steps = 64usize;
    let mut coarse = rk4_run(field, s0, t_end, steps, false)?;
    loop {
        let fine_steps = steps * 2;
        if span / (fine_steps as f64) < min_step {
            return Err(Error::StepTooSmall {
                step: span / fine_steps as f64,
            });
        }
        let fine = rk4_run(field, s0, t_end, fine_steps, false)?;
        let change = state_distance(field, coarse.last().unwrap(), fine.last().unwrap());
        if change <= step_tol {
            let states = rk4_run(field, s0, t_end, fine_steps, true)?;
            return Ok(Trajectory {
                states,
                steps: fine_steps,
                endpoint_change: change,
            });
        }
        steps = fine_steps;
        coarse = fine;
    }
}

/// Rotating-frame energy `½|v|² - Σ m_i/|q - q_i| - ω (q × v)`, conserved
/// for rigidly rotating fields.
pub fn jacobi_constant<F: Field + ?Sized>(field: &F, state: &State) -> f64 {
    let w = std::f64::consts::TAU / field.period();
    let (q, v) = (state.position, state.velocity);
    0.5 * v.norm_squared() - field.potential(state.time, q) - w * (q.x * v.y - q.y * v.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `sqrt((1/T)∫|r|²)` divided by `ω² l`.
    pub l2_residual: f64,
    /// `max |r|` divided by `ω² l`.
    pub max_residual: f64,
    /// Filled in by callers that also integrate the loop in time.
    pub periodicity_error: Option<f64>,
}

/// Residual `q̈ - rhs` of a Fourier loop on `points` uniform samples, with
/// `q̈` taken from the coefficients.
pub fn el_residual<F: Field + ?Sized>(lp: &FourierLoop, field: &F, points: usize) -> Result<ResidualReport> {
    if points < 8 {
        return Err(Error::InvalidParameter(format!("residual grid of {points} points is too small")));
    }
    check_collision(lp, field)?;
    let period = lp.period();
    let w = lp.omega();
    let scale = w * w * field.length_scale();
    let (mut sum_sq, mut max) = (0.0f64, 0.0f64);
    for n in 0..points {
        let t = period * n as f64 / points as f64;
        let state = State::on_loop(lp, t);
        let r = (lp.acceleration(t) - rhs(field, t, &state).map_err(|e| on_path(e))?).norm();
        sum_sq += r * r;
        max = max.max(r);
    }
    Ok(ResidualReport {
        l2_residual: (sum_sq / points as f64).sqrt() / scale,
        max_residual: max / scale,
        periodicity_error: None,
    })
}

fn on_path(e: Error) -> Error {
    match e {
        Error::CollisionSingularity {
            primary,
            time,
            separation,
        } => Error::CollisionOnPath {
            primary,
            time,
            separation,
        },
        other => other,
    }
}

/// Integrates the equation of motion from the loop's state at `t = 0` over
/// one period and returns `max(|Δq| / l, |Δv| T / (2π l))`.
pub fn periodicity_error<L: Loop + ?Sized, F: Field + ?Sized>(lp: &L, field: &F, step_tol: f64) -> Result<f64> {
    check_collision(lp, field)?;
    let s0 = State::on_loop(lp, 0.0);
    let traj = integrate(field, &s0, lp.period(), step_tol)?;
    Ok(state_distance(field, &s0, traj.last()) / field.length_scale())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Masses;
    use crate::field::{EmptyField, FixedCenter, Primaries};
    use crate::loops::{EllipticLoop, EllipticLoopParams};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn kepler_circle(mu: f64, period: f64) -> (FixedCenter, FourierLoop) {
        let field = FixedCenter::at_origin(mu, period);
        let r = field.length_scale;
        let lp = FourierLoop::new(period, vec![Vec2::new(r, 0.0)], vec![Vec2::new(0.0, r)]).unwrap();
        (field, lp)
    }

    #[test]
    fn symmetric_point_has_zero_acceleration() {
        let p = Primaries::new(Masses::new(1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let a = rhs(&p, 0.0, &State::new(Vec2::zeros(), Vec2::zeros(), 0.0)).unwrap();
        assert!(a.norm() < 1e-12);
    }

    #[test]
    fn monopole_limit() {
        let p = Primaries::new(Masses::new(0.29, 0.42, 0.29).unwrap(), 1.0).unwrap();
        let q = Vec2::new(0.6, 0.8) * (1e3 * p.config.side());
        let a = rhs(&p, 0.3, &State::new(q, Vec2::zeros(), 0.3)).unwrap();
        let mono = -q * (p.masses.total() / q.norm().powi(3));
        assert!((a - mono).norm() <= 0.01 * mono.norm());
    }

    #[test]
    fn collision_guard() {
        let p = Primaries::new(Masses::new(1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let l = p.config.side();
        let q = p.config.position(0, 0.0) + Vec2::new(1e-12 * l, 0.0);
        let err = rhs(&p, 0.0, &State::new(q, Vec2::zeros(), 0.0)).unwrap_err();
        assert!(matches!(err, Error::CollisionSingularity { primary: 1, .. }));
    }

    #[test]
    fn free_motion_is_exact() {
        let f = EmptyField {
            period: 1.0,
            length_scale: 1.0,
        };
        let s0 = State::new(Vec2::new(0.3, -0.2), Vec2::new(1.5, 0.7), 0.0);
        let tr = integrate(&f, &s0, 1.0, 1e-12).unwrap();
        let end = tr.last();
        assert!((end.position - Vec2::new(1.8, 0.5)).norm() <= 1e-13);
        assert!((end.velocity - s0.velocity).norm() <= 1e-13);
    }

    #[test]
    fn kepler_circle_residual_and_periodicity() {
        let (field, lp) = kepler_circle(2.0, 1.0);
        let r = el_residual(&lp, &field, 256).unwrap();
        assert!(r.l2_residual <= 1e-10 && r.max_residual <= 1e-10, "{r:?}");
        let p = periodicity_error(&lp, &field, 1e-11).unwrap();
        assert!(p <= 1e-9, "periodicity {p}");
    }

    #[test]
    fn rk4_is_fourth_order() {
        let (field, lp) = kepler_circle(1.0, 1.0);
        let s0 = State::on_loop(&lp, 0.0);
        let err = |steps| {
            let end = *rk4_run(&field, &s0, 1.0, steps, false).unwrap().last().unwrap();
            (end.position - lp.position(1.0)).norm()
        };
        let ratio = err(64) / err(128);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn jacobi_drift() {
        let p = Primaries::new(Masses::new(1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let cfg = p.config;
        let e = EllipticLoop::new(EllipticLoopParams { a: 0.19, b: 0.69, theta: PI / 20.0 }, &cfg).unwrap();
        let s0 = State::on_loop(&e, 0.0);
        let tr = integrate(&p, &s0, 1.0, 1e-10).unwrap();
        let j0 = jacobi_constant(&p, &s0);
        let drift = tr.states.iter().map(|s| (jacobi_constant(&p, s) - j0).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-8, "drift {drift}");
    }

    #[test]
    fn trajectory_csv() {
        let (field, lp) = kepler_circle(1.0, 1.0);
        let tr = integrate(&field, &State::on_loop(&lp, 0.0), 0.5, 1e-8).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,y,vx,vy\n"));
        assert_eq!(text.lines().count(), tr.steps + 2);
    }

    #[test]
    fn raw_test_loop_is_not_a_solution() {
        let p = Primaries::new(Masses::new(0.29, 0.42, 0.29).unwrap(), 1.0).unwrap();
        let e = EllipticLoop::new(EllipticLoopParams { a: 0.13, b: 0.49, theta: PI / 20.0 }, &p.config).unwrap();
        let f = crate::loops::project_to_fourier(&e, 4, 64).unwrap();
        let r = el_residual(&f, &p, 512).unwrap();
        assert!(r.l2_residual > 1e-2);
    }

    proptest! {
        #[test]
        fn rhs_is_minus_potential_gradient(x in -1.0f64..1.0, y in -1.0f64..1.0, t in 0.0f64..1.0) {
            let p = Primaries::new(Masses::new(0.29, 0.42, 0.29).unwrap(), 1.0).unwrap();
            let q = Vec2::new(x, y);
            prop_assume!(p.bodies(t).iter().all(|b| (b.position - q).norm() > 0.02));
            let a = rhs(&p, t, &State::new(q, Vec2::zeros(), t)).unwrap();
            let h = 1e-6;
            let gx = (p.potential(t, q + Vec2::new(h, 0.0)) - p.potential(t, q - Vec2::new(h, 0.0))) / (2.0 * h);
            let gy = (p.potential(t, q + Vec2::new(0.0, h)) - p.potential(t, q - Vec2::new(0.0, h))) / (2.0 * h);
            // Potential is taken with a positive sign, so the force is its gradient.
            let fd = Vec2::new(gx, gy);
            prop_assert!((a - fd).norm() <= 1e-6 * a.norm().max(1.0));
        }

        #[test]
        fn spectral_second_derivative(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..16).map(|j| rng.gen_range(-1.0..1.0) / (2 * (j / 4) + 1usize).pow(3) as f64).collect();
            let lp = FourierLoop::from_vector(1.0, &v).unwrap();
            let t: f64 = rng.gen_range(0.0..1.0);
            let h = 1e-4;
            let fd = (lp.position(t + h) - lp.position(t) * 2.0 + lp.position(t - h)) / (h * h);
            let exact = lp.acceleration(t);
            prop_assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(TAU * TAU));
        }
    }
}

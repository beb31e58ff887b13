//! Minimization of the action over odd-harmonic Fourier loops.
//!
//! The action is discretized on a fixed uniform grid of `N` points: the
//! kinetic part is exact in the coefficients and the potential part is the
//! periodic trapezoid sum. Gradient and Hessian are exact derivatives of
//! this discrete functional. Steps are regularized Newton steps, falling
//! back to diagonally preconditioned Barzilai–Borwein steps when the
//! Hessian is not positive definite, and every step passes an Armijo
//! backtracking test. Once the gradient is small the grid is checked
//! against its own doubling and refined if needed.

use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::action::{action_direct, COLLISION_FRACTION};
use crate::field::{Body, Field};
use crate::loops::{harmonic, min_separation, FourierLoop, Loop};
use crate::quadrature::QuadratureSettings;
use crate::{Error, Result};

const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;
const MAX_GRID: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeOptions {
    /// Number of retained odd harmonics.
    #[serde(rename = "K")]
    pub harmonics: usize,
    /// Tolerance on the max-norm of the coefficient gradient.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Smallest admissible separation from a primary, as a fraction of `l`.
    pub collision_floor: f64,
    pub quadrature: QuadratureSettings,
    /// Upper limit for automatic harmonic doubling.
    #[serde(rename = "K_max")]
    pub max_harmonics: usize,
    /// Doubling stops once the action changes by less than this.
    pub refine_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            harmonics: 16,
            grad_tol: 1e-8,
            max_iters: 10_000,
            collision_floor: 1e-4,
            quadrature: QuadratureSettings::default(),
            max_harmonics: 64,
            refine_tol: 1e-8,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.harmonics == 0 {
            return bad("K must be positive");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.collision_floor > 0.0 && self.collision_floor < 1.0) {
            return bad("collision_floor must lie in (0, 1) as a fraction of l");
        }
        if !(self.refine_tol > 0.0) {
            return bad("refine_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    /// A step would have brought the loop below the collision floor; the
    /// last safe iterate is returned.
    CollisionApproach,
    /// The line search failed at a nonzero gradient.
    NotDescending,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Discrete action on the current grid.
    pub action: f64,
    pub grad_norm: f64,
    pub min_separations: [f64; 3],
    /// Accepted step length along the search direction (0 for the
    /// initial record).
    pub step: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub orbit: FourierLoop,
    /// Action of the final loop by adaptive quadrature.
    pub action: f64,
    /// Action of the initial loop by adaptive quadrature.
    pub initial_action: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub min_separations: [f64; 3],
    pub converged: bool,
    pub status: Termination,
    /// Grid size of the discrete action at termination.
    pub points: usize,
    pub log: Vec<IterationRecord>,
    /// `(K, action)` for every harmonic level visited by
    /// [`minimize_with_refinement`].
    pub refinement: Vec<(usize, f64)>,
}

impl MinimizeResult {
    /// Iteration log as CSV `iter,action,grad_norm,min_sep1,min_sep2,min_sep3,step`.
    pub fn write_log_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,action,grad_norm,min_sep1,min_sep2,min_sep3,step")?;
        for r in &self.log {
            let [s1, s2, s3] = r.min_separations;
            writeln!(
                out,
                "{},{:?},{:?},{:?},{:?},{:?},{:?}",
                r.iter, r.action, r.grad_norm, s1, s2, s3, r.step
            )?;
        }
        Ok(())
    }
}

/// The action restricted to `K` odd harmonics and discretized on `N`
/// uniform points. Coefficients use the layout of
/// [`FourierLoop::to_vector`], so index `2m + α` holds component `α` of
/// basis function `m`, where basis `2j` is `cos(k_j ω t)` and `2j + 1`
/// is `sin(k_j ω t)`.
pub struct DiscreteAction {
    period: f64,
    harmonics: usize,
    points: usize,
    basis: DMatrix<f64>,
    bodies: Vec<[Body; 3]>,
    kinetic: DVector<f64>,
    threshold: f64,
}

struct Samples {
    x: DVector<f64>,
    y: DVector<f64>,
}

impl DiscreteAction {
    pub fn new<F: Field + ?Sized>(field: &F, harmonics: usize, points: usize) -> Result<Self> {
        if harmonics == 0 || points < 4 * harmonics {
            return Err(Error::GridTooCoarse {
                points,
                harmonics,
                required: 4 * harmonics.max(1),
            });
        }
        let period = field.period();
        let w = TAU / period;
        let basis = DMatrix::from_fn(points, 2 * harmonics, |n, m| {
            let arg = harmonic(m / 2) as f64 * w * (period * n as f64 / points as f64);
            if m % 2 == 0 {
                arg.cos()
            } else {
                arg.sin()
            }
        });
        let bodies = (0..points).map(|n| field.bodies(period * n as f64 / points as f64)).collect();
        let kinetic = DVector::from_fn(4 * harmonics, |i, _| {
            let kw = harmonic(i / 4) as f64 * w;
            0.5 * period * kw * kw
        });
        Ok(Self {
            period,
            harmonics,
            points,
            basis,
            bodies,
            kinetic,
            threshold: COLLISION_FRACTION * field.length_scale(),
        })
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn points(&self) -> usize {
        self.points
    }

    fn check_len(&self, c: &[f64]) {
        assert_eq!(c.len(), 4 * self.harmonics, "coefficient vector does not match K = {}", self.harmonics);
    }

    fn samples(&self, c: &[f64]) -> Samples {
        self.check_len(c);
        let cx = DVector::from_fn(2 * self.harmonics, |m, _| c[2 * m]);
        let cy = DVector::from_fn(2 * self.harmonics, |m, _| c[2 * m + 1]);
        Samples {
            x: &self.basis * cx,
            y: &self.basis * cy,
        }
    }

    /// Displacements `q - q_i` at grid point `n`, skipping massless bodies.
    fn offsets(&self, s: &Samples, n: usize) -> Result<[(f64, f64, f64, f64); 3]> {
        let mut out = [(0.0, 0.0, 0.0, f64::INFINITY); 3];
        for (i, b) in self.bodies[n].iter().enumerate() {
            if b.mass == 0.0 {
                continue;
            }
            let dx = s.x[n] - b.position.x;
            let dy = s.y[n] - b.position.y;
            let r = dx.hypot(dy);
            if !(r >= self.threshold) {
                return Err(Error::CollisionOnPath {
                    primary: i + 1,
                    time: self.period * n as f64 / self.points as f64,
                    separation: r,
                });
            }
            out[i] = (b.mass, dx, dy, r);
        }
        Ok(out)
    }

    fn kinetic_value(&self, c: &[f64]) -> f64 {
        0.5 * c.iter().zip(self.kinetic.iter()).map(|(x, k)| k * x * x).sum::<f64>()
    }

    pub fn value(&self, c: &[f64]) -> Result<f64> {
        let s = self.samples(c);
        let mut pot = 0.0;
        for n in 0..self.points {
            for (m, _, _, r) in self.offsets(&s, n)? {
                pot += m / r;
            }
        }
        Ok(self.kinetic_value(c) + pot * self.period / self.points as f64)
    }

    /// `value(new) - value(old)`, accumulated term by term so that small
    /// differences are not lost against the size of the action.
    pub fn difference(&self, old: &[f64], new: &[f64]) -> Result<f64> {
        let (so, sn) = (self.samples(old), self.samples(new));
        let mut pot = 0.0;
        for n in 0..self.points {
            let (a, b) = (self.offsets(&so, n)?, self.offsets(&sn, n)?);
            for i in 0..3 {
                let (m, _, _, ro) = a[i];
                let rn = b[i].3;
                if m != 0.0 {
                    pot += m * (ro - rn) / (ro * rn);
                }
            }
        }
        let kin = 0.5
            * old
                .iter()
                .zip(new)
                .zip(self.kinetic.iter())
                .map(|((o, n), k)| k * (n - o) * (n + o))
                .sum::<f64>();
        Ok(kin + pot * self.period / self.points as f64)
    }

    pub fn gradient(&self, c: &[f64]) -> Result<Vec<f64>> {
        let s = self.samples(c);
        let mut ax = DVector::zeros(self.points);
        let mut ay = DVector::zeros(self.points);
        for n in 0..self.points {
            for (m, dx, dy, r) in self.offsets(&s, n)? {
                if m != 0.0 {
                    let f = m / (r * r * r);
                    ax[n] -= f * dx;
                    ay[n] -= f * dy;
                }
            }
        }
        let h = self.period / self.points as f64;
        let gx = self.basis.tr_mul(&ax) * h;
        let gy = self.basis.tr_mul(&ay) * h;
        Ok((0..4 * self.harmonics)
            .map(|i| {
                let pot = if i % 2 == 0 { gx[i / 2] } else { gy[i / 2] };
                self.kinetic[i] * c[i] + pot
            })
            .collect())
    }

    pub fn hessian(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        let s = self.samples(c);
        let mut hxx = DVector::zeros(self.points);
        let mut hxy = DVector::zeros(self.points);
        let mut hyy = DVector::zeros(self.points);
        for n in 0..self.points {
            for (m, dx, dy, r) in self.offsets(&s, n)? {
                if m != 0.0 {
                    let r2 = r * r;
                    let f = m / (r2 * r2 * r);
                    hxx[n] += f * (3.0 * dx * dx - r2);
                    hxy[n] += f * 3.0 * dx * dy;
                    hyy[n] += f * (3.0 * dy * dy - r2);
                }
            }
        }
        let h = self.period / self.points as f64;
        let weighted = |w: &DVector<f64>| {
            let mut scaled = self.basis.clone();
            for (mut row, wn) in scaled.row_iter_mut().zip(w.iter()) {
                row *= *wn;
            }
            self.basis.tr_mul(&scaled) * h
        };
        let (wxx, wxy, wyy) = (weighted(&hxx), weighted(&hxy), weighted(&hyy));
        let dim = 4 * self.harmonics;
        Ok(DMatrix::from_fn(dim, dim, |a, b| {
            let (m, p) = (a / 2, b / 2);
            let pot = match (a % 2, b % 2) {
                (0, 0) => wxx[(m, p)],
                (1, 1) => wyy[(m, p)],
                _ => wxy[(m, p)],
            };
            if a == b {
                pot + self.kinetic[a]
            } else {
                pot
            }
        }))
    }

    /// Smallest distance to each primary over the grid points.
    pub fn grid_separations(&self, c: &[f64]) -> [f64; 3] {
        let s = self.samples(c);
        let mut out = [f64::INFINITY; 3];
        for n in 0..self.points {
            for (i, b) in self.bodies[n].iter().enumerate() {
                if b.mass != 0.0 {
                    out[i] = out[i].min((s.x[n] - b.position.x).hypot(s.y[n] - b.position.y));
                }
            }
        }
        out
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Smallest power-of-two grid on which the discrete action of `c` agrees
/// with its own doubling to within `tol`.
fn adequate_grid<F: Field + ?Sized>(field: &F, harmonics: usize, start: usize, c: &[f64], tol: f64) -> Result<usize> {
    let mut n = start.max(8 * harmonics).next_power_of_two();
    let mut value = DiscreteAction::new(field, harmonics, n)?.value(c)?;
    while n < MAX_GRID {
        let finer = DiscreteAction::new(field, harmonics, 2 * n)?.value(c)?;
        if (finer - value).abs() <= tol {
            return Ok(n);
        }
        n *= 2;
        value = finer;
    }
    Err(Error::NoConvergence {
        tol,
        points: n,
        last_change: f64::NAN,
    })
}

/// Gradient of the discrete action with respect to the flat coefficient
/// vector, on a grid adequate for `qs.abs_tol`.
pub fn action_gradient<F: Field + ?Sized>(lp: &FourierLoop, field: &F, qs: &QuadratureSettings) -> Result<Vec<f64>> {
    qs.validate()?;
    let c = lp.to_vector();
    let n = adequate_grid(field, lp.harmonics(), qs.initial_points, &c, qs.abs_tol)?;
    DiscreteAction::new(field, lp.harmonics(), n)?.gradient(&c)
}

/// Search direction: regularized Newton when the Hessian admits a
/// Cholesky factorization, otherwise preconditioned steepest descent.
fn newton_direction(hess: DMatrix<f64>, grad: &[f64], kinetic: &DVector<f64>) -> Option<Vec<f64>> {
    let g = DVector::from_column_slice(grad);
    let mut mu = 1e-9;
    while mu <= 1e3 {
        let mut h = hess.clone();
        for i in 0..h.nrows() {
            h[(i, i)] += mu * kinetic[i];
        }
        if let Some(chol) = h.cholesky() {
            let p = -chol.solve(&g);
            if p.iter().all(|x| x.is_finite()) && p.dot(&g) < 0.0 {
                return Some(p.as_slice().to_vec());
            }
        }
        mu *= 100.0;
    }
    None
}

/// Minimizes the action from `init` at fixed `K = opts.harmonics`.
pub fn minimize_action<F: Field + ?Sized>(init: &FourierLoop, field: &F, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    opts.validate()?;
    if (init.period() - field.period()).abs() > 1e-12 * field.period() {
        return Err(Error::InvalidParameter(format!(
            "loop period {} differs from field period {}",
            init.period(),
            field.period()
        )));
    }
    let k = opts.harmonics;
    let floor = opts.collision_floor * field.length_scale();
    let start = init.with_harmonics(k);
    let initial_action = action_direct(&start, field, &opts.quadrature)?.total;
    let init_seps = min_separation(&start, field, 256);
    if init_seps.iter().any(|&s| s <= floor) {
        return Err(Error::InvalidParameter(format!(
            "initial loop is within the collision floor {floor:e} of a primary (separations {init_seps:?})"
        )));
    }

    let tol = opts.quadrature.abs_tol;
    let mut c = start.to_vector();
    let mut points = adequate_grid(field, k, opts.quadrature.initial_points, &c, tol)?;
    let mut disc = DiscreteAction::new(field, k, points)?;
    let mut f = disc.value(&c)?;
    let mut g = disc.gradient(&c)?;
    let mut gnorm = max_norm(&g);
    let mut log = vec![IterationRecord {
        iter: 0,
        action: f,
        grad_norm: gnorm,
        min_separations: disc.grid_separations(&c),
        step: 0.0,
        points,
    }];
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut status = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        if gnorm <= opts.grad_tol {
            let finer = adequate_grid(field, k, points, &c, tol)?;
            if finer == points {
                status = Termination::Converged;
                break;
            }
            points = finer;
            disc = DiscreteAction::new(field, k, points)?;
            f = disc.value(&c)?;
            g = disc.gradient(&c)?;
            gnorm = max_norm(&g);
            prev = None;
            continue;
        }

        let dir = match newton_direction(disc.hessian(&c)?, &g, &disc.kinetic) {
            Some(p) => p,
            None => {
                // Barzilai–Borwein length in the kinetic metric.
                let alpha = prev
                    .as_ref()
                    .map(|(dc, dg)| {
                        let sy: f64 = dc.iter().zip(dg).map(|(a, b)| a * b).sum();
                        let yy: f64 = dg.iter().zip(disc.kinetic.iter()).map(|(b, k)| b * b / k).sum();
                        if sy > 0.0 && yy > 0.0 {
                            sy / yy
                        } else {
                            1.0
                        }
                    })
                    .unwrap_or(1.0);
                g.iter().zip(disc.kinetic.iter()).map(|(gi, ki)| -alpha * gi / ki).collect()
            }
        };
        let slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();

        let mut step = 1.0;
        let mut accepted = None;
        let mut blocked_by_floor = false;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = c.iter().zip(&dir).map(|(ci, di)| ci + step * di).collect();
            if disc.grid_separations(&trial).iter().any(|&s| s <= floor) {
                blocked_by_floor = true;
                step *= BACKTRACK;
                continue;
            }
            match disc.difference(&c, &trial) {
                Ok(df) if df <= ARMIJO * step * slope => {
                    accepted = Some((trial, df));
                    break;
                }
                Ok(_) | Err(Error::CollisionOnPath { .. }) => step *= BACKTRACK,
                Err(e) => return Err(e),
            }
        }
        let Some((next, df)) = accepted else {
            status = if blocked_by_floor {
                Termination::CollisionApproach
            } else {
                Termination::NotDescending
            };
            break;
        };
        debug_assert!(df <= 0.0);
        let next_g = disc.gradient(&next)?;
        prev = Some((
            next.iter().zip(&c).map(|(a, b)| a - b).collect(),
            next_g.iter().zip(&g).map(|(a, b)| a - b).collect(),
        ));
        c = next;
        f += df;
        g = next_g;
        gnorm = max_norm(&g);
        iterations += 1;
        log.push(IterationRecord {
            iter: iterations,
            action: f,
            grad_norm: gnorm,
            min_separations: disc.grid_separations(&c),
            step,
            points,
        });
    }
    if status == Termination::MaxIterations && gnorm <= opts.grad_tol {
        status = Termination::Converged;
    }

    let orbit = FourierLoop::from_vector(init.period(), &c)?;
    let min_separations = min_separation(&orbit, field, 256);
    let action = action_direct(&orbit, field, &opts.quadrature)?.total;
    let converged = status == Termination::Converged && min_separations.iter().all(|&s| s > floor);
    Ok(MinimizeResult {
        orbit,
        action,
        initial_action,
        grad_norm: gnorm,
        iterations,
        min_separations,
        converged,
        status,
        points,
        log,
        refinement: vec![(k, action)],
    })
}

/// Runs [`minimize_action`] and keeps doubling `K` from the previous
/// minimizer while the action changes by `refine_tol` or more, up to
/// `max_harmonics`.
pub fn minimize_with_refinement<F: Field + ?Sized>(
    init: &FourierLoop,
    field: &F,
    opts: &MinimizeOptions,
) -> Result<MinimizeResult> {
    let mut result = minimize_action(init, field, opts)?;
    let mut history = result.refinement.clone();
    let mut k = opts.harmonics;
    while result.converged && 2 * k <= opts.max_harmonics {
        k *= 2;
        let next_opts = MinimizeOptions { harmonics: k, ..*opts };
        let mut next = minimize_action(&result.orbit, field, &next_opts)?;
        let change = (next.action - result.action).abs();
        history.push((k, next.action));
        next.initial_action = result.initial_action;
        result = next;
        if change < opts.refine_tol {
            break;
        }
    }
    result.refinement = history;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Masses;
    use crate::field::{EmptyField, Primaries};
    use crate::loops::{project_to_fourier, EllipticLoop, EllipticLoopParams};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random_loop(seed: u64, k: usize, scale: f64) -> FourierLoop {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..4 * k)
            .map(|i| scale * rng.gen_range(-1.0..1.0) / harmonic(i / 4).pow(2) as f64)
            .collect();
        FourierLoop::from_vector(1.0, &v).unwrap()
    }

    #[test]
    fn kinetic_gradient_is_diagonal() {
        let f = EmptyField {
            period: 1.0,
            length_scale: 1.0,
        };
        let lp = random_loop(3, 5, 1.0);
        let g = action_gradient(&lp, &f, &QuadratureSettings::default()).unwrap();
        for (i, (gi, ci)) in g.iter().zip(lp.to_vector()).enumerate() {
            let kw = harmonic(i / 4) as f64 * TAU;
            assert!((gi - kw * kw * 0.5 * ci).abs() <= 1e-12 * kw * kw);
        }
    }

    #[test]
    fn gradient_and_hessian_match_differences() {
        let p = Primaries::new(Masses::new(0.29, 0.42, 0.29).unwrap(), 1.0).unwrap();
        let lp = random_loop(11, 4, 0.6);
        let disc = DiscreteAction::new(&p, 4, 256).unwrap();
        let c = lp.to_vector();
        let g = disc.gradient(&c).unwrap();
        let h = disc.hessian(&c).unwrap();
        let eps = 1e-6;
        for i in 0..c.len() {
            let (mut up, mut dn) = (c.clone(), c.clone());
            up[i] += eps;
            dn[i] -= eps;
            let fd = disc.difference(&dn, &up).unwrap() / (2.0 * eps);
            assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "slot {i}: {fd} vs {}", g[i]);
            let (gu, gd) = (disc.gradient(&up).unwrap(), disc.gradient(&dn).unwrap());
            for j in 0..c.len() {
                let fd = (gu[j] - gd[j]) / (2.0 * eps);
                assert!((fd - h[(j, i)]).abs() <= 1e-5 * h[(j, j)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn difference_matches_values() {
        let p = Primaries::new(Masses::new(1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let disc = DiscreteAction::new(&p, 3, 128).unwrap();
        let a = random_loop(1, 3, 0.5).to_vector();
        let b = random_loop(2, 3, 0.5).to_vector();
        let d = disc.difference(&a, &b).unwrap();
        assert!((d - (disc.value(&b).unwrap() - disc.value(&a).unwrap())).abs() < 1e-11);
    }

    #[test]
    fn coarse_grid_rejected() {
        let p = Primaries::new(Masses::new(1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        assert!(matches!(DiscreteAction::new(&p, 8, 16), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn truncated_run_and_fixed_point() {
        let p = Primaries::new(Masses::new(1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let e = EllipticLoop::new(EllipticLoopParams { a: 0.19, b: 0.69, theta: PI / 20.0 }, &p.config).unwrap();
        let init = project_to_fourier(&e, 8, 64).unwrap();
        let opts = MinimizeOptions {
            harmonics: 8,
            max_iters: 1,
            ..Default::default()
        };
        let one = minimize_action(&init, &p, &opts).unwrap();
        assert!(!one.converged);
        assert_eq!(one.status, Termination::MaxIterations);
        assert!(one.action < one.initial_action);

        let full = minimize_action(&init, &p, &MinimizeOptions { harmonics: 8, ..Default::default() }).unwrap();
        assert!(full.converged, "{:?}", full.status);
        for w in full.log.windows(2) {
            if w[0].points == w[1].points {
                assert!(w[1].action <= w[0].action);
            }
        }
        let again = minimize_action(&full.orbit, &p, &MinimizeOptions { harmonics: 8, ..Default::default() }).unwrap();
        assert!(again.iterations <= 2);
        assert!((again.action - full.action).abs() <= 1e-12 * full.action.max(1.0) + 1e-12);

        let mut buf = Vec::new();
        full.write_log_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,action,grad_norm,min_sep1,min_sep2,min_sep3,step\n"));
        assert_eq!(text.lines().count(), full.log.len() + 1);
    }

    #[test]
    fn options_validation() {
        assert!(MinimizeOptions::default().validate().is_ok());
        assert!(MinimizeOptions { collision_floor: 1.5, ..Default::default() }.validate().is_err());
        assert!(MinimizeOptions { grad_tol: 0.0, ..Default::default() }.validate().is_err());
        let o: MinimizeOptions = serde_json::from_str(r#"{"K": 8, "grad_tol": 1e-9}"#).unwrap();
        assert_eq!(o.harmonics, 8);
        assert_eq!(o.max_iters, 10_000);
    }
}

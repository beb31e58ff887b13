//! Certification of a loop as a collision-free periodic solution.

use serde::{Deserialize, Serialize};

use crate::action::action_direct;
use crate::bounds::{certify_noncollision, collision_lower_bound_d1};
use crate::dynamics::{el_residual, periodicity_error};
use crate::field::{Field, Primaries};
use crate::loops::{min_separation, FourierLoop};
use crate::minimize::MinimizeResult;
use crate::quadrature::QuadratureSettings;
use crate::winding::relative_degree;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Largest accepted normalized L² Euler–Lagrange residual.
    pub el_l2: f64,
    /// Largest accepted periodicity error after one period of integration.
    pub periodicity: f64,
    /// Smallest accepted separation from a primary, as a fraction of `l`.
    pub collision_floor: f64,
    pub residual_points: usize,
    /// Endpoint tolerance for the RK4 step-halving control.
    pub step_tol: f64,
    pub quadrature: QuadratureSettings,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            el_l2: 1e-4,
            periodicity: 1e-3,
            collision_floor: 1e-4,
            residual_points: 1024,
            step_tol: 1e-10,
            quadrature: QuadratureSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    /// Winding number of `q - q_1` about the origin, if defined.
    pub degree: Option<i64>,
    pub expected_degree: Option<i64>,
    pub action: f64,
    pub d1: f64,
    /// `d1 - action`.
    pub margin: f64,
    pub min_separations: [f64; 3],
    /// Absolute collision floor used.
    pub collision_floor: f64,
    pub el_l2_residual: f64,
    pub el_max_residual: f64,
    pub periodicity_error: f64,
    pub grad_norm: Option<f64>,
    pub converged: Option<bool>,
    pub thresholds: Thresholds,
    /// One line per failed check; empty iff `passes`.
    pub failures: Vec<String>,
    pub passes: bool,
}

/// Runs every check on a loop. With `expected_degree` set the winding
/// number must equal it, otherwise it must be `±1`.
pub fn verify_loop(
    lp: &FourierLoop,
    primaries: &Primaries,
    expected_degree: Option<i64>,
    thresholds: &Thresholds,
) -> Result<CertificationReport> {
    let mut failures = Vec::new();
    let l = primaries.length_scale();
    let action = action_direct(lp, primaries, &thresholds.quadrature)?.total;
    let bound = collision_lower_bound_d1(&primaries.masses, primaries.period());
    let cert = certify_noncollision(action, &bound);
    if !cert.passes {
        failures.push(format!("action {action:.9} is not below d1 = {:.9}", bound.d1));
    }

    let degree = match relative_degree(lp, |t| primaries.config.position(0, t), 1024) {
        Ok(w) => Some(w.degree),
        Err(e) => {
            failures.push(format!("winding number undefined: {e}"));
            None
        }
    };
    if let Some(d) = degree {
        match expected_degree {
            Some(want) if want != d => failures.push(format!("degree {d} differs from expected {want}")),
            None if d.abs() != 1 => failures.push(format!("degree {d} is not +1 or -1")),
            _ => {}
        }
    }

    let floor = thresholds.collision_floor * l;
    let min_separations = min_separation(lp, primaries, 1024);
    for (i, s) in min_separations.iter().enumerate() {
        if !(*s > floor) {
            failures.push(format!("separation {s:e} from primary {} is not above the floor {floor:e}", i + 1));
        }
    }

    let residual = el_residual(lp, primaries, thresholds.residual_points.max(16 * lp.harmonics()))?;
    if !(residual.l2_residual <= thresholds.el_l2) {
        failures.push(format!(
            "Euler-Lagrange residual {:e} exceeds {:e}",
            residual.l2_residual, thresholds.el_l2
        ));
    }
    let periodicity = match periodicity_error(lp, primaries, thresholds.step_tol) {
        Ok(p) => p,
        Err(e) => {
            failures.push(format!("time integration failed: {e}"));
            f64::INFINITY
        }
    };
    if !(periodicity <= thresholds.periodicity) {
        failures.push(format!(
            "periodicity error {periodicity:e} exceeds {:e}",
            thresholds.periodicity
        ));
    }

    Ok(CertificationReport {
        degree,
        expected_degree,
        action,
        d1: bound.d1,
        margin: cert.margin,
        min_separations,
        collision_floor: floor,
        el_l2_residual: residual.l2_residual,
        el_max_residual: residual.max_residual,
        periodicity_error: periodicity,
        grad_norm: None,
        converged: None,
        thresholds: *thresholds,
        passes: failures.is_empty(),
        failures,
    })
}

/// Certifies a minimizer, additionally requiring that the run converged
/// and that the degree matches the initial loop's.
pub fn certify_minimizer(
    result: &MinimizeResult,
    primaries: &Primaries,
    expected_degree: i64,
    thresholds: &Thresholds,
) -> Result<CertificationReport> {
    let mut report = verify_loop(&result.orbit, primaries, Some(expected_degree), thresholds)?;
    report.grad_norm = Some(result.grad_norm);
    report.converged = Some(result.converged);
    if !result.converged {
        report.failures.insert(
            0,
            format!(
                "minimizer did not converge ({:?}, gradient norm {:e})",
                result.status, result.grad_norm
            ),
        );
        report.passes = false;
    }
    Ok(report)
}

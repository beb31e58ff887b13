//! Kepler-type lower bounds and the collision threshold `d1`.
//!
//! Any anti-symmetric loop that hits a primary has action at least
//! `d1 = (3/2)(2π)^{2/3} C M^{-1/3} T^{1/3}`, where `C` is the smallest of the
//! three per-primary constants `2^{2/3} m_i + (M - m_i) - (m1 m2 + m1 m3 + m2 m3)/(3M)`.
//! A collision-free test loop with action below `d1` therefore certifies that
//! the minimizer avoids collisions.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::config::Masses;

/// `(3/2)(2π)^{2/3}`.
fn kepler_constant() -> f64 {
    1.5 * TAU.powf(2.0 / 3.0)
}

/// Gordon's bound for an arc pinned at the singularity on `[t1, t2]`:
/// `(3/2)(2π)^{2/3} a^{2/3} (t2 - t1)^{1/3}`.
pub fn gordon_bound(a: f64, t1: f64, t2: f64) -> f64 {
    debug_assert!(a > 0.0 && t2 > t1);
    kepler_constant() * a.powf(2.0 / 3.0) * (t2 - t1).cbrt()
}

/// Long–Zhang bound for mean-zero `T`-periodic loops around a center of
/// strength `a`.
pub fn long_zhang_bound(a: f64, period: f64) -> f64 {
    debug_assert!(a > 0.0 && period > 0.0);
    kepler_constant() * a.powf(2.0 / 3.0) * period.cbrt()
}

/// The constant `C` together with its three candidate expressions and the
/// (zero based, lowest on ties) index attaining the minimum.
pub fn collision_constant(masses: &Masses) -> (f64, [f64; 3], usize) {
    let total = masses.total();
    let shared = masses.pair_sum() / (3.0 * total);
    let two_thirds = 2f64.powf(2.0 / 3.0);
    let terms: [f64; 3] = std::array::from_fn(|i| {
        let m = masses.get(i);
        two_thirds * m + (total - m) - shared
    });
    let mut arg = 0;
    for i in 1..3 {
        if terms[i] < terms[arg] {
            arg = i;
        }
    }
    (terms[arg], terms, arg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "C")]
    pub c: f64,
    pub d1: f64,
    pub per_body_terms: [f64; 3],
    /// Zero-based index of the smallest term.
    pub argmin: usize,
}

/// Collision threshold `d1` for the given masses and period.
pub fn collision_lower_bound_d1(masses: &Masses, period: f64) -> BoundReport {
    let (c, per_body_terms, argmin) = collision_constant(masses);
    let d1 = kepler_constant() * c * masses.total().powf(-1.0 / 3.0) * period.cbrt();
    BoundReport {
        c,
        d1,
        per_body_terms,
        argmin,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonCollisionCertificate {
    pub passes: bool,
    /// `d1 - action`; positive when the certificate passes.
    pub margin: f64,
}

/// A loop certifies the minimizer collision-free iff its action is strictly
/// below `d1`.
pub fn certify_noncollision(test_action: f64, report: &BoundReport) -> NonCollisionCertificate {
    NonCollisionCertificate {
        passes: test_action < report.d1,
        margin: report.d1 - test_action,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn kepler_bounds() {
        // (3/2)(2π)^{2/3} from mpmath
        assert_relative_eq!(gordon_bound(1.0, 0.0, 1.0), 5.107_532_882_215_132, max_relative = 1e-14);
        assert_relative_eq!(gordon_bound(1.0, 2.0, 10.0), 2.0 * gordon_bound(1.0, 0.0, 1.0), max_relative = 1e-14);
        assert_relative_eq!(gordon_bound(8.0, 0.0, 1.0), 4.0 * gordon_bound(1.0, 0.0, 1.0), max_relative = 1e-14);
        assert_eq!(long_zhang_bound(2.5, 0.7), gordon_bound(2.5, 0.0, 0.7));
    }

    #[test]
    fn constant_values() {
        let (c, _, _) = collision_constant(&Masses::new(1.0, 1.0, 1.0).unwrap());
        assert_relative_eq!(c, 3.254_067_718_634_866, max_relative = 1e-14);
        let (c, terms, arg) = collision_constant(&Masses::new(0.29, 0.42, 0.29).unwrap());
        assert_relative_eq!(c, 1.061_112_971_737_444_5, max_relative = 1e-14);
        assert_eq!(arg, 0);
        assert_eq!(terms[0], terms[2]);
    }

    #[test]
    fn d1_values() {
        let cases = [([1.0, 1.0, 1.0], 11.523843), ([0.29, 0.42, 0.29], 5.419669), ([0.10, 0.75, 0.15], 5.062791)];
        for (m, d1) in cases {
            let r = collision_lower_bound_d1(&Masses::from_array(m).unwrap(), 1.0);
            assert!((r.d1 - d1).abs() <= 1e-6, "{m:?}: {} vs {d1}", r.d1);
        }
    }

    #[test]
    fn certification_examples() {
        let r = collision_lower_bound_d1(&Masses::new(0.29, 0.42, 0.29).unwrap(), 1.0);
        let c = certify_noncollision(5.417862, &r);
        assert!(c.passes);
        assert!((c.margin - 0.001807).abs() < 2e-6);
        let eq = BoundReport { d1: 11.523843, ..r };
        assert!(!certify_noncollision(11.523843, &eq).passes);
        let c = certify_noncollision(10.483477, &eq);
        assert!(c.passes && (c.margin - 1.040366).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn report_invariants(a in 0.01f64..3.0, b in 0.01f64..3.0, c in 0.01f64..3.0, period in 0.1f64..10.0) {
            let m = Masses::new(a, b, c).unwrap();
            let r = collision_lower_bound_d1(&m, period);
            prop_assert_eq!(r.c, r.per_body_terms.iter().cloned().fold(f64::INFINITY, f64::min));
            let expect = 1.5 * TAU.powf(2.0 / 3.0) * r.c * m.total().powf(-1.0 / 3.0) * period.cbrt();
            prop_assert!((r.d1 - expect).abs() <= 1e-14 * expect);

            let perm = Masses::new(c, a, b).unwrap();
            let rp = collision_lower_bound_d1(&perm, period);
            prop_assert!((rp.per_body_terms[0] - r.per_body_terms[2]).abs() <= 1e-14 * r.c);
            prop_assert!((rp.per_body_terms[1] - r.per_body_terms[0]).abs() <= 1e-14 * r.c);
            prop_assert!((rp.c - r.c).abs() <= 1e-14 * r.c);
        }
    }
}

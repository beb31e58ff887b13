//! JSON run configuration for `minimize`.
//!
//! Relative paths inside the file are resolved against the directory that
//! contains it.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use restricted_orbits::certify::Thresholds;
use restricted_orbits::field::Primaries;
use restricted_orbits::loops::{
    project_to_fourier, CircularLoop, CircularLoopParams, EllipticLoop, EllipticLoopParams, FourierLoop,
};
use restricted_orbits::minimize::MinimizeOptions;

use crate::{io_failure, Failure};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub masses: [f64; 3],
    #[serde(rename = "T", default = "unit_period")]
    pub period: f64,
    #[serde(rename = "loop")]
    pub initial: InitialLoop,
    #[serde(default)]
    pub options: MinimizeOptions,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Double `K` until the action settles.
    #[serde(default)]
    pub refine: bool,
    #[serde(default)]
    pub output: OutputPaths,
}

fn unit_period() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialLoop {
    Elliptic { a: f64, b: f64, theta: Angle },
    Circular { a: f64, theta: Angle },
    Fourier { path: PathBuf },
}

/// Radians, or a string such as `"pi/20"`, `"3pi/4"` or `"pi"`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Radians(f64),
    Symbolic(String),
}

impl Angle {
    pub fn radians(&self) -> Result<f64, Failure> {
        match self {
            Angle::Radians(x) => Ok(*x),
            Angle::Symbolic(s) => parse_pi_fraction(s)
                .ok_or_else(|| Failure::Usage(format!("cannot read angle {s:?}; use a number or a form like \"pi/20\""))),
        }
    }
}

fn parse_pi_fraction(s: &str) -> Option<f64> {
    let s = s.trim().replace(' ', "");
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().ok()?),
        None => (s.clone(), 1.0),
    };
    let coef = numer.strip_suffix("pi")?.trim_end_matches('*');
    let coef = match coef {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    (denom != 0.0).then(|| coef * std::f64::consts::PI / denom)
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    /// Summary JSON; printed to standard output when absent.
    pub report: Option<PathBuf>,
    pub loop_json: Option<PathBuf>,
    pub loop_csv: Option<PathBuf>,
    pub log_csv: Option<PathBuf>,
    /// Samples per period in `loop_csv`.
    pub loop_points: usize,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            report: None,
            loop_json: None,
            loop_csv: None,
            log_csv: None,
            loop_points: 1024,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let out = &mut cfg.output;
        for p in [&mut out.report, &mut out.loop_json, &mut out.loop_csv, &mut out.log_csv]
            .into_iter()
            .flatten()
        {
            *p = base.join(&*p);
        }
        if let InitialLoop::Fourier { path } = &mut cfg.initial {
            *path = base.join(&*path);
        }
        Ok(cfg)
    }

    pub fn initial_loop(&self, primaries: &Primaries) -> Result<FourierLoop, Failure> {
        let k = self.options.harmonics;
        let lp = match &self.initial {
            InitialLoop::Elliptic { a, b, theta } => {
                let params = EllipticLoopParams {
                    a: *a,
                    b: *b,
                    theta: theta.radians()?,
                };
                project_to_fourier(&EllipticLoop::new(params, &primaries.config)?, k, 8 * k)?
            }
            InitialLoop::Circular { a, theta } => {
                let params = CircularLoopParams {
                    a: *a,
                    theta: theta.radians()?,
                };
                project_to_fourier(&CircularLoop::new(params, &primaries.config)?, k, 8 * k)?
            }
            InitialLoop::Fourier { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
                FourierLoop::from_json(&text)?
            }
        };
        Ok(lp)
    }
}

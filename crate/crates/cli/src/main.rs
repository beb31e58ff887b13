//! `restricted-orbits` command-line tool.
//!
//! Exit codes: 0 when every check passes, 1 when a numerical check fails,
//! 2 on usage, configuration or input-format errors.

mod run_config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use restricted_orbits::bounds::collision_lower_bound_d1;
use restricted_orbits::certify::{certify_minimizer, verify_loop, CertificationReport, Thresholds};
use restricted_orbits::config::Masses;
use restricted_orbits::field::Primaries;
use restricted_orbits::loops::{FourierLoop, Loop, SampledLoop};
use restricted_orbits::minimize::{minimize_action, minimize_with_refinement, MinimizeOptions};
use restricted_orbits::tables::{evaluate_row, RowEvaluation, TABLE_ROWS};
use restricted_orbits::winding::relative_degree;
use restricted_orbits::Error;

use run_config::RunConfig;

const THREADS_VAR: &str = "RESTRICTED_ORBITS_THREADS";

#[derive(Parser)]
#[command(name = "restricted-orbits", version, about = "Periodic orbits of a small body around three primaries in Lagrange configuration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the reference tables and compare with the printed values.
    Tables {
        /// Table to evaluate (1-4); repeat for several. Defaults to all.
        #[arg(long = "table", value_parser = clap::value_parser!(u8).range(1..=4))]
        tables: Vec<u8>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append the as-printed reading and the better reading for elliptic rows.
        #[arg(long)]
        readings: bool,
    },
    /// Minimize the action from a test loop and certify the result.
    Minimize {
        #[arg(long)]
        config: PathBuf,
    },
    /// Certify an existing Fourier loop without minimizing.
    Verify {
        #[arg(long = "loop")]
        loop_file: PathBuf,
        #[arg(long)]
        m1: f64,
        #[arg(long)]
        m2: f64,
        #[arg(long)]
        m3: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        period: f64,
        /// Required winding number of q - q1; otherwise +1 or -1 is accepted.
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<i64>,
    },
    /// Print the collision threshold d1 and its constant C.
    Bounds {
        #[arg(long)]
        m1: f64,
        #[arg(long)]
        m2: f64,
        #[arg(long)]
        m3: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        period: f64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonPositiveMass { .. } | Error::InvalidParameter(_) | Error::SymmetryViolation(_) | Error::Format(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

/// Outcome of a command that produced output: whether its checks passed.
type Verdict = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Tables { tables, out, readings } => run_tables(&tables, out.as_deref(), readings),
        Command::Minimize { config } => run_minimize(&config),
        Command::Verify {
            loop_file,
            m1,
            m2,
            m3,
            period,
            degree,
        } => run_verify(&loop_file, [m1, m2, m3], period, degree),
        Command::Bounds { m1, m2, m3, period } => run_bounds([m1, m2, m3], period),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_failure(p, e))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    std::fs::write(path, text + "\n").map_err(|e| io_failure(path, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn run_tables(tables: &[u8], out: Option<&Path>, readings: bool) -> Verdict {
    let selected: Vec<_> = TABLE_ROWS
        .iter()
        .filter(|r| tables.is_empty() || tables.contains(&r.table))
        .collect();
    let settings = Default::default();
    let evals: Vec<RowEvaluation> = selected.par_iter().map(|r| evaluate_row(r, &settings)).collect();

    let mut w = open_output(out)?;
    let write_err = |e: std::io::Error| Failure::Usage(format!("writing table output: {e}"));
    let mut header = String::from("table,a,b,theta,m1,m2,m3,d1_ref,d1_ours,d1_absdiff,d_ref,d_ours,d_absdiff,certified");
    if readings {
        header.push_str(",d_as_printed,best_reading");
    }
    writeln!(w, "{header}").map_err(write_err)?;
    let mut failing = Vec::new();
    for (i, e) in evals.iter().enumerate() {
        let r = &e.row;
        let mut line = format!(
            "{},{:?},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{}",
            r.table,
            r.a,
            fmt_opt(r.b),
            r.theta,
            r.masses[0],
            r.masses[1],
            r.masses[2],
            r.d1_ref,
            e.d1,
            e.d1_absdiff(),
            r.d_ref,
            fmt_opt(e.d),
            fmt_opt(e.d_absdiff()),
            e.certified()
        );
        if readings {
            let best = e.best_reading.map(|b| format!("{b:?}").to_lowercase()).unwrap_or_default();
            line.push_str(&format!(",{},{best}", fmt_opt(e.d_as_printed)));
        }
        writeln!(w, "{line}").map_err(write_err)?;
        if let Some(err) = &e.error {
            eprintln!("table {} row {}: {err}", r.table, i + 1);
        }
        if !(e.d1_ok() && e.d_ok() && e.certified()) {
            failing.push(i);
        }
    }
    w.flush().map_err(write_err)?;

    let mut distinct = evals.iter().map(|e| e.row).collect::<Vec<_>>();
    distinct.dedup_by(|a, b| a == b);
    eprintln!(
        "{} rows ({} distinct), {} within tolerance, {} outside",
        evals.len(),
        distinct.len(),
        evals.len() - failing.len(),
        failing.len()
    );
    for &i in &failing {
        let e = &evals[i];
        eprintln!(
            "  table {} a={} b={} theta={} m={:?}: |d1 diff| {:.2e}, |d diff| {}, certified {}",
            e.row.table,
            e.row.a,
            fmt_opt(e.row.b),
            e.row.theta,
            e.row.masses,
            e.d1_absdiff(),
            e.best_absdiff().map(|x| format!("{x:.2e}")).unwrap_or_else(|| "n/a".into()),
            e.certified()
        );
    }
    Ok(failing.is_empty())
}

#[derive(Serialize)]
struct MinimizeReport<'a> {
    verdict: &'static str,
    masses: [f64; 3],
    #[serde(rename = "T")]
    period: f64,
    initial_action: f64,
    initial_degree: i64,
    iterations: usize,
    status: restricted_orbits::minimize::Termination,
    refinement: &'a [(usize, f64)],
    #[serde(rename = "K")]
    harmonics: usize,
    certification: &'a CertificationReport,
    options: &'a MinimizeOptions,
}

fn run_minimize(path: &Path) -> Verdict {
    let config = RunConfig::load(path)?;
    let masses = Masses::from_array(config.masses)?;
    let primaries = Primaries::new(masses, config.period)?;
    let init = config.initial_loop(&primaries)?;
    let initial_degree = relative_degree(&init, |t| primaries.config.position(0, t), 1024)?.degree;

    let result = if config.refine {
        minimize_with_refinement(&init, &primaries, &config.options)?
    } else {
        minimize_action(&init, &primaries, &config.options)?
    };
    let report = certify_minimizer(&result, &primaries, initial_degree, &config.thresholds)?;

    let out = &config.output;
    if let Some(p) = &out.loop_json {
        std::fs::write(p, result.orbit.to_json() + "\n").map_err(|e| io_failure(p, e))?;
    }
    if let Some(p) = &out.loop_csv {
        let sampled = SampledLoop::from_loop(&result.orbit, out.loop_points)?;
        let file = File::create(p).map_err(|e| io_failure(p, e))?;
        sampled.write_csv(BufWriter::new(file)).map_err(|e| io_failure(p, e))?;
    }
    if let Some(p) = &out.log_csv {
        let file = File::create(p).map_err(|e| io_failure(p, e))?;
        result.write_log_csv(BufWriter::new(file)).map_err(|e| io_failure(p, e))?;
    }
    let summary = MinimizeReport {
        verdict: if report.passes { "pass" } else { "fail" },
        masses: config.masses,
        period: config.period,
        initial_action: result.initial_action,
        initial_degree,
        iterations: result.iterations,
        status: result.status,
        refinement: &result.refinement,
        harmonics: result.orbit.harmonics(),
        certification: &report,
        options: &config.options,
    };
    match &out.report {
        Some(p) => write_json(p, &summary)?,
        None => println!("{}", serde_json::to_string_pretty(&summary).expect("report serializes")),
    }
    Ok(report.passes)
}

#[derive(Serialize)]
struct VerifyReport {
    verdict: &'static str,
    masses: [f64; 3],
    #[serde(rename = "T")]
    period: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    certification: Option<CertificationReport>,
    /// Reasons the loop could not be certified at all.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    failures: Vec<String>,
}

fn run_verify(path: &Path, masses: [f64; 3], period: f64, degree: Option<i64>) -> Verdict {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let lp = FourierLoop::from_json(&text)?;
    if (lp.period() - period).abs() > 1e-12 * period {
        return Err(Failure::Usage(format!(
            "loop period {} does not match --T {period}",
            lp.period()
        )));
    }
    let primaries = Primaries::new(Masses::from_array(masses)?, period)?;
    let report = match verify_loop(&lp, &primaries, degree, &Thresholds::default()) {
        Ok(r) => VerifyReport {
            verdict: if r.passes { "pass" } else { "fail" },
            masses,
            period,
            failures: Vec::new(),
            certification: Some(r),
        },
        Err(e @ Error::CollisionOnPath { .. }) => VerifyReport {
            verdict: "fail",
            masses,
            period,
            certification: None,
            failures: vec![e.to_string()],
        },
        Err(e) => return Err(e.into()),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(report.verdict == "pass")
}

fn run_bounds(masses: [f64; 3], period: f64) -> Verdict {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Failure::Usage(format!("--T must be positive, got {period}")));
    }
    let m = Masses::from_array(masses)?;
    let report = collision_lower_bound_d1(&m, period);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(true)
}

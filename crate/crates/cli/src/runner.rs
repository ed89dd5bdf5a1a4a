//! Suite execution: fans the master seed out to per-sample tasks, runs them
//! (optionally in parallel), assembles deterministic CSV/JSON reports and
//! serializes the first failing sample for standalone replay.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use nchp_core::boundary::{
    c_block_consistency, estimate_boundary_derivative, estimate_boundary_value, estimate_c,
    julia_inequality_check, re_vanishing_check, ConvergenceStatus, ProbeDescriptor, Schedule,
};
use nchp_core::hermitian::CMatrix;
use nchp_core::ncfunc::NCFunction;
use nchp_core::report::{
    summarize_invariants, summarize_margins, BallRow, BallSummary, InvariantRow, MarginRow,
};
use nchp_core::sampling::derive_seed;
use nchp_core::verify::{
    ball_amplification_row, ball_midpoint_row, ball_row, block_criterion_rows, ncfunction_rows,
    paulsen_rows, realization_demo_rows, schwarz_pick_rows, FamilyKind,
};

use crate::config::{assemble, Cli, RunConfig, SubcommandName};

pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError(s)
    }
}

impl From<nchp_core::Error> for CliError {
    fn from(e: nchp_core::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses arguments, runs the configured suite and returns the violation
/// count. Usage problems surface as `Err`, violations as a positive count.
pub fn run_cli() -> CliResult<usize> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(0);
        }
        Err(e) => return Err(CliError(e.to_string())),
    };
    let config = assemble(&cli)?;
    run(&config)
}

/// Runs one assembled configuration.
pub fn run(config: &RunConfig) -> CliResult<usize> {
    let out = config.out_dir();
    fs::create_dir_all(&out)
        .map_err(|e| CliError(format!("cannot create output dir {}: {e}", out.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError(format!("thread pool: {e}")))?;
    pool.install(|| match config.subcommand {
        SubcommandName::VerifySchwarzPick => run_schwarz_pick(config, &out),
        SubcommandName::VerifyBall => run_ball(config, &out),
        SubcommandName::VerifyNcfunction => run_ncfunction(config, &out),
        SubcommandName::BoundaryReport => run_boundary_report(config, &out),
        SubcommandName::RealizationDemo => run_realization_demo(config, &out),
    })
}

fn families(config: &RunConfig) -> Vec<FamilyKind> {
    match config.family.as_deref() {
        Some("moebius") => vec![FamilyKind::Moebius],
        Some("nevanlinna-pick") => vec![FamilyKind::NevanlinnaPick],
        Some("loewner-realization") => vec![FamilyKind::Loewner],
        _ => FamilyKind::ALL.to_vec(),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError(format!("serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

fn write_csv<R>(path: &Path, header: &str, rows: &[R], line: impl Fn(&R) -> String) -> CliResult<()> {
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(&line(r));
        text.push('\n');
    }
    write_text(path, &text)
}

/// Serialized failing sample: a complete run configuration that replays the
/// one offending sample when fed back through `--config`.
fn write_failing_sample(
    out: &Path,
    base: &RunConfig,
    raw_seed: u64,
    level: usize,
    family: Option<&str>,
    radius: Option<f64>,
) -> CliResult<()> {
    let mut replay = base.clone();
    replay.raw_seed = Some(raw_seed);
    replay.samples = 1;
    replay.levels = vec![level];
    replay.family = family.map(|s| s.to_string());
    replay.radius = radius;
    replay.out = Some(PathBuf::from("replay-reports"));
    write_json(&out.join("failing_sample.json"), &replay)
}

struct Task {
    seed: u64,
    level: usize,
    family: FamilyKind,
}

fn make_tasks(config: &RunConfig) -> Vec<Task> {
    let fams = families(config);
    let levels = &config.levels;
    if let Some(raw) = config.raw_seed {
        return vec![Task {
            seed: raw,
            level: levels[0],
            family: fams[0],
        }];
    }
    (0..config.samples)
        .map(|i| {
            let level = levels[i % levels.len()];
            let family = fams[(i / levels.len()) % fams.len()];
            Task {
                seed: derive_seed(config.seed, i as u64),
                level,
                family,
            }
        })
        .collect()
}

fn run_schwarz_pick(config: &RunConfig, out: &Path) -> CliResult<usize> {
    let tol = config.tol.unwrap_or(1e-8);
    let tasks = make_tasks(config);
    let results: Result<Vec<Vec<MarginRow>>, nchp_core::Error> = tasks
        .par_iter()
        .map(|t| schwarz_pick_rows(t.seed, t.level, t.family))
        .collect();
    let rows: Vec<MarginRow> = results
        .map_err(|e| CliError(format!("sample failed: {e}")))?
        .into_iter()
        .flatten()
        .collect();
    write_csv(&out.join("margins.csv"), MarginRow::CSV_HEADER, &rows, |r| r.csv_line())?;
    let summary = summarize_margins(&rows, tol);
    write_json(&out.join("summary.json"), &summary)?;
    let violations = summary.total_violations;
    if violations > 0 {
        let first = rows
            .iter()
            .find(|r| r.margin < -tol * (1.0 + r.rhs.abs()))
            .expect("violation exists");
        write_failing_sample(out, config, first.seed, first.level, Some(first.family), None)?;
    }
    Ok(violations)
}

fn radii(config: &RunConfig) -> Vec<f64> {
    match config.radius {
        Some(r) => vec![r],
        None => vec![0.25, 1.0, 4.0],
    }
}

fn run_ball(config: &RunConfig, out: &Path) -> CliResult<usize> {
    let rs = radii(config);
    let levels = &config.levels;
    struct BallTask {
        seed: u64,
        level: usize,
        r: f64,
    }
    let tasks: Vec<BallTask> = if let Some(raw) = config.raw_seed {
        vec![BallTask {
            seed: raw,
            level: levels[0],
            r: rs[0],
        }]
    } else {
        (0..config.samples)
            .map(|i| BallTask {
                seed: derive_seed(config.seed, i as u64),
                level: levels[i % levels.len()],
                r: rs[(i / levels.len()) % rs.len()],
            })
            .collect()
    };

    let results: Result<Vec<(BallRow, InvariantRow, InvariantRow)>, nchp_core::Error> = tasks
        .par_iter()
        .map(|t| {
            let row = ball_row(t.seed, t.level, t.r)?;
            let mid = ball_midpoint_row(t.seed ^ 0x5bd1e995, t.level, t.r)?;
            let amp = ball_amplification_row(t.seed ^ 0x9e3779b9, t.level, t.r, 2)?;
            Ok((row, mid, amp))
        })
        .collect();
    let triples = results.map_err(|e| CliError(format!("sample failed: {e}")))?;

    let rows: Vec<BallRow> = triples.iter().map(|t| t.0.clone()).collect();
    let extra: Vec<InvariantRow> = triples
        .iter()
        .flat_map(|t| [t.1.clone(), t.2.clone()])
        .collect();
    write_csv(&out.join("ball.csv"), BallRow::CSV_HEADER, &rows, |r| r.csv_line())?;
    write_csv(
        &out.join("ball_invariants.csv"),
        InvariantRow::CSV_HEADER,
        &extra,
        |r| r.csv_line(),
    )?;

    let bound_failures = rows
        .iter()
        .filter(|r| {
            r.member && !(r.norm_bound_ok && r.im_lower_ok && r.im_band_ok && r.re_band_ok)
        })
        .count();
    let midpoint_failures = extra
        .iter()
        .filter(|r| r.invariant == "midpoint-convexity" && !r.pass)
        .count();
    let amp_failures = extra
        .iter()
        .filter(|r| r.invariant == "amplified-distance" && !r.pass)
        .count();
    let summary = BallSummary {
        rows: rows.len(),
        members: rows.iter().filter(|r| r.member).count(),
        bound_failures,
        midpoint_checks: triples.len(),
        midpoint_failures,
        max_member_distance: rows
            .iter()
            .filter(|r| r.member)
            .map(|r| r.distance)
            .fold(0.0f64, f64::max),
    };
    write_json(&out.join("summary.json"), &summary)?;

    let violations = bound_failures + midpoint_failures + amp_failures;
    if violations > 0 {
        let first = rows
            .iter()
            .find(|r| r.member && !(r.norm_bound_ok && r.im_lower_ok && r.im_band_ok && r.re_band_ok))
            .map(|r| (r.seed, r.level, r.r))
            .or_else(|| {
                extra
                    .iter()
                    .find(|r| !r.pass)
                    .map(|r| (r.seed, r.level, 1.0))
            });
        if let Some((seed, level, r)) = first {
            write_failing_sample(out, config, seed, level, None, Some(r))?;
        }
    }
    Ok(violations)
}

fn run_ncfunction(config: &RunConfig, out: &Path) -> CliResult<usize> {
    let tasks = make_tasks(config);
    let results: Result<Vec<Vec<InvariantRow>>, nchp_core::Error> = tasks
        .par_iter()
        .map(|t| {
            let mut rows = ncfunction_rows(t.seed, t.level, t.family)?;
            rows.extend(block_criterion_rows(t.seed ^ 0xa5a5a5a5, t.level)?);
            rows.extend(paulsen_rows(t.seed ^ 0x3c3c3c3c, t.level)?);
            Ok(rows)
        })
        .collect();
    let rows: Vec<InvariantRow> = results
        .map_err(|e| CliError(format!("sample failed: {e}")))?
        .into_iter()
        .flatten()
        .collect();
    write_csv(
        &out.join("invariants.csv"),
        InvariantRow::CSV_HEADER,
        &rows,
        |r| r.csv_line(),
    )?;
    let summary = summarize_invariants(&rows);
    write_json(&out.join("summary.json"), &summary)?;
    let violations = summary.failures;
    if violations > 0 {
        let first = rows.iter().find(|r| !r.pass).expect("failure exists");
        let family = match first.family {
            "moebius" | "nevanlinna-pick" | "loewner-realization" => Some(first.family),
            _ => None,
        };
        write_failing_sample(out, config, first.seed, first.level, family, None)?;
    }
    Ok(violations)
}

#[derive(Serialize)]
struct BoundaryReportJson {
    probe: ProbeDescriptor,
    density: nchp_core::boundary::ConvergenceReportJson,
    boundary_value: nchp_core::boundary::ConvergenceReportJson,
    boundary_derivative: nchp_core::boundary::ConvergenceReportJson,
    derivative_matches_density: Option<f64>,
    julia_min_vertical_margin: Option<f64>,
    julia_min_cone_margin: Option<f64>,
    julia_vertical: Vec<(f64, f64)>,
    re_vanishing_rows: Vec<(f64, f64)>,
    re_vanishing_rate: Option<f64>,
    c_block_diag_deviation: Option<f64>,
    c_block_off_deviation: Option<f64>,
    status: ConvergenceStatus,
}

fn default_probe() -> ProbeDescriptor {
    ProbeDescriptor {
        function: NCFunction::neg_inverse().to_descriptor(),
        alpha: CMatrix::scalar(nchp_core::hermitian::c64(1.0, 0.0)).to_json_value(),
        direction: CMatrix::scalar(nchp_core::hermitian::c64(1.0, 0.0)).to_json_value(),
        schedule: Schedule::default(),
        cone_slope: 1.0,
    }
}

fn run_boundary_report(config: &RunConfig, out: &Path) -> CliResult<usize> {
    let descriptor = config.probe.clone().unwrap_or_else(default_probe);
    let (f, mut probe) = descriptor.resolve()?;
    if let Some(tol) = config.tol {
        probe.schedule.tol = tol;
    }
    let tol = probe.schedule.tol;

    let density = estimate_c(&f, &probe)?;
    let mut violations = 0usize;

    if density.status == ConvergenceStatus::Converged
        || density.status == ConvergenceStatus::Degenerate
    {
        let value = estimate_boundary_value(&f, &probe)?;
        let w = probe.direction.as_cmatrix().clone();
        let deriv = estimate_boundary_derivative(&f, &probe, &w)?;
        let deriv_dev = (&deriv.limit - &density.limit).fro_norm();
        let julia = julia_inequality_check(&f, &probe, 100, config.seed)?;
        let re_v = re_vanishing_check(&f, &probe).ok();

        if julia.min_vertical_margin < -tol || julia.min_cone_margin < -tol {
            violations += 1;
        }
        if value.status == ConvergenceStatus::Failed || deriv.status == ConvergenceStatus::Failed {
            violations += 1;
        }
        if deriv_dev > 10.0 * tol * (1.0 + density.limit.fro_norm()) {
            violations += 1;
        }

        // level-two consistency for scalar probes, using the half-direction
        let c_block = if probe.level() == 1 {
            let half = probe.direction.scale_re(0.5);
            c_block_consistency(&f, &probe.alpha, &probe.direction, &half, probe.schedule).ok()
        } else {
            None
        };
        if let Some(cb) = &c_block {
            if cb.diag_deviation > 10.0 * tol || cb.off_deviation > 10.0 * tol {
                violations += 1;
            }
        }

        let report = BoundaryReportJson {
            probe: descriptor,
            density: density.to_json_value(),
            boundary_value: value.to_json_value(),
            boundary_derivative: deriv.to_json_value(),
            derivative_matches_density: Some(deriv_dev),
            julia_min_vertical_margin: Some(julia.min_vertical_margin),
            julia_min_cone_margin: Some(julia.min_cone_margin),
            julia_vertical: julia.vertical.clone(),
            re_vanishing_rows: re_v.as_ref().map(|r| r.rows.clone()).unwrap_or_default(),
            re_vanishing_rate: re_v.as_ref().and_then(|r| r.fitted_rate),
            c_block_diag_deviation: c_block.as_ref().map(|c| c.diag_deviation),
            c_block_off_deviation: c_block.as_ref().map(|c| c.off_deviation),
            status: density.status,
        };
        write_json(&out.join("boundary_report.json"), &report)?;
    } else {
        let status = density.status;
        let na = |level: usize| nchp_core::boundary::ConvergenceReport {
            samples: Vec::new(),
            extrapolants: Vec::new(),
            limit: CMatrix::zeros(level),
            fitted_rate: None,
            converged: false,
            residual: f64::MAX,
            status,
            selfadjoint_defect: None,
            diagnostic: None,
        };
        let report = BoundaryReportJson {
            probe: descriptor,
            density: density.to_json_value(),
            boundary_value: na(probe.level()).to_json_value(),
            boundary_derivative: na(probe.level()).to_json_value(),
            derivative_matches_density: None,
            julia_min_vertical_margin: None,
            julia_min_cone_margin: None,
            julia_vertical: Vec::new(),
            re_vanishing_rows: Vec::new(),
            re_vanishing_rate: None,
            c_block_diag_deviation: None,
            c_block_off_deviation: None,
            status,
        };
        write_json(&out.join("boundary_report.json"), &report)?;
        if status == ConvergenceStatus::Failed {
            violations += 1;
        }
    }
    Ok(violations)
}

fn run_realization_demo(config: &RunConfig, out: &Path) -> CliResult<usize> {
    let level = config.levels.first().copied().unwrap_or(2);
    let rows = realization_demo_rows(config.seed, config.samples, level)
        .map_err(|e| CliError(format!("demo failed: {e}")))?;
    write_csv(&out.join("demo.csv"), InvariantRow::CSV_HEADER, &rows, |r| r.csv_line())?;
    #[derive(Serialize)]
    struct DemoJson {
        function: nchp_core::ncfunc::FunctionDescriptor,
        samples: usize,
        level: usize,
        worst_kernel_margin: f64,
        failures: usize,
    }
    let f = NCFunction::Loewner(nchp_core::verify::demo_realization());
    let worst = rows
        .iter()
        .map(|r| -r.deviation)
        .fold(f64::INFINITY, f64::min);
    let failures = rows.iter().filter(|r| !r.pass).count();
    write_json(
        &out.join("demo.json"),
        &DemoJson {
            function: f.to_descriptor(),
            samples: config.samples,
            level,
            worst_kernel_margin: worst,
            failures,
        },
    )?;
    if failures > 0 {
        if let Some(first) = rows.iter().find(|r| !r.pass) {
            write_failing_sample(out, config, first.seed, level, None, None)?;
        }
    }
    Ok(failures)
}

//! Numerical boundary analysis on the matrix upper half-plane.
//!
//! A probe approaches a selfadjoint boundary point along `alpha + i y v`
//! (or along a ray of slope `M` inside the cone `|Re z| <= M Im z`) on a
//! geometric schedule `y_k = y0 * rho^k`. Each limit is estimated with one
//! Richardson step using the rate fitted from successive differences. The
//! estimated quantities are the directional density `c(v)` of the imaginary
//! part, the boundary value and the boundary derivative, together with the
//! growth inequality, the vanishing of the real part, the level-two block
//! consistency of `c` and the boundedness of difference-operator limits.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    c64, extract_block, imag_part, op_norm, real_part, CMatrix, HermMatrix, MatrixJson, C64,
};
use crate::ncfunc::{
    delta_f, derivative, derivative_scalar, eval, eval_scalar, FunctionDescriptor, NCFunction,
};
use crate::sampling;

/// Geometric approach schedule.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Schedule {
    pub y0: f64,
    pub rho: f64,
    pub k_max: usize,
    pub tol: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            y0: 0.1,
            rho: 0.5,
            k_max: 20,
            tol: 1e-6,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.y0 > 0.0) || !(self.rho > 0.0) || !(self.rho < 1.0) || !(self.tol > 0.0) {
            return Err(Error::InvalidParam(format!(
                "schedule needs y0 > 0, 0 < rho < 1, tol > 0: y0={}, rho={}, tol={}",
                self.y0, self.rho, self.tol
            )));
        }
        let floor = self.y0 * self.rho.powi(self.k_max as i32);
        if !(floor > 1e-9) {
            return Err(Error::InvalidParam(format!(
                "schedule bottoms out at {floor:.3e}; must stay above the 1e-9 floating-point floor"
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.k_max).map(move |k| self.y0 * self.rho.powi(k as i32))
    }
}

/// Boundary point, approach direction and schedule.
#[derive(Debug, Clone)]
pub struct BoundaryProbe {
    pub alpha: HermMatrix,
    pub direction: HermMatrix,
    pub schedule: Schedule,
    pub cone_slope: f64,
}

impl BoundaryProbe {
    pub fn new(
        alpha: HermMatrix,
        direction: HermMatrix,
        schedule: Schedule,
        cone_slope: f64,
    ) -> Result<Self> {
        schedule.validate()?;
        if alpha.level() != direction.level() {
            return Err(Error::Dimension(format!(
                "boundary point level {} vs direction level {}",
                alpha.level(),
                direction.level()
            )));
        }
        let dir_min = direction.min_eigenvalue()?;
        if dir_min <= 0.0 {
            return Err(Error::Precondition(format!(
                "direction must be strictly positive: min eigenvalue {dir_min:.6e}"
            )));
        }
        if !(cone_slope >= 0.0) || !cone_slope.is_finite() {
            return Err(Error::InvalidParam(format!("cone slope must be >= 0, got {cone_slope}")));
        }
        Ok(BoundaryProbe {
            alpha,
            direction,
            schedule,
            cone_slope,
        })
    }

    pub fn scalar(alpha: f64, direction: f64, schedule: Schedule, cone_slope: f64) -> Result<Self> {
        BoundaryProbe::new(
            HermMatrix::from_real_diag(&[alpha]),
            HermMatrix::from_real_diag(&[direction]),
            schedule,
            cone_slope,
        )
    }

    pub fn level(&self) -> usize {
        self.alpha.level()
    }

    /// Approach parameter on the ray of the probe's cone slope: `|z| = y`,
    /// `Im z = y / sqrt(1 + M^2)`.
    pub fn ray_point(&self, y: f64) -> C64 {
        let m = self.cone_slope;
        if m == 0.0 {
            c64(0.0, y)
        } else {
            let h = (1.0 + m * m).sqrt();
            c64(y * m / h, y / h)
        }
    }

    /// `alpha + z * direction`.
    pub fn argument(&self, z: C64) -> CMatrix {
        self.alpha.as_cmatrix() + &self.direction.as_cmatrix().scale(z)
    }
}

/// Classification of a limit estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceStatus {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "liminf-infinite")]
    LiminfInfinite,
    #[serde(rename = "degenerate")]
    Degenerate,
    #[serde(rename = "failed")]
    Failed,
}

/// One estimated limit with its per-step samples and extrapolants.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub samples: Vec<(f64, CMatrix)>,
    pub extrapolants: Vec<(f64, CMatrix)>,
    pub limit: CMatrix,
    pub fitted_rate: Option<f64>,
    pub converged: bool,
    pub residual: f64,
    pub status: ConvergenceStatus,
    pub selfadjoint_defect: Option<f64>,
    pub diagnostic: Option<String>,
}

impl ConvergenceReport {
    fn failed(samples: Vec<(f64, CMatrix)>, level: usize, diagnostic: String) -> Self {
        let limit = samples
            .last()
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| CMatrix::zeros(level));
        ConvergenceReport {
            samples,
            extrapolants: Vec::new(),
            limit,
            fitted_rate: None,
            converged: false,
            residual: f64::MAX,
            status: ConvergenceStatus::Failed,
            selfadjoint_defect: None,
            diagnostic: Some(diagnostic),
        }
    }
}

/// Divergence detector: monotone norm growth by more than a factor of 1e6
/// over the schedule signals an infinite liminf along the direction.
fn detect_monotone_blowup(samples: &[(f64, CMatrix)]) -> bool {
    if samples.len() < 3 {
        return false;
    }
    let norms: Vec<f64> = samples.iter().map(|(_, v)| v.fro_norm()).collect();
    let monotone = norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    let first = norms.first().copied().unwrap_or(0.0).max(1e-300);
    let last = norms.last().copied().unwrap_or(0.0);
    monotone && last > 1e6 * first
}

/// One Richardson step on a geometric schedule, with the decay rate fitted
/// from successive differences.
///
/// Successive differences shrink while truncation error dominates and grow
/// again once rounding noise takes over (the samples carry a `1/y`
/// amplification), so the schedule is cut at the difference minimum and the
/// limit is taken there.
fn extrapolate(
    samples: &[(f64, CMatrix)],
    rho: f64,
    tol: f64,
) -> (Vec<(f64, CMatrix)>, CMatrix, f64, bool, Option<f64>) {
    let n = samples.len();
    if n < 2 {
        let limit = samples.last().map(|(_, v)| v.clone()).unwrap_or(CMatrix::zeros(0));
        return (Vec::new(), limit, f64::MAX, false, None);
    }
    let scale = samples
        .iter()
        .map(|(_, v)| v.fro_norm())
        .fold(0.0f64, f64::max);
    let floor = 1e-14 * (1.0 + scale);

    let diffs: Vec<CMatrix> = (1..n).map(|k| &samples[k].1 - &samples[k - 1].1).collect();
    let diff_norms: Vec<f64> = diffs.iter().map(|d| d.fro_norm()).collect();

    // cutoff: last index attaining (within a factor) the smallest difference
    let d_min = diff_norms.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = diff_norms
        .iter()
        .rposition(|&d| d <= d_min.max(floor) * 2.0)
        .unwrap_or(diff_norms.len() - 1);

    // fitted decay order from consecutive difference ratios before the cutoff
    let mut rates = Vec::new();
    for k in 1..=cut {
        if diff_norms[k - 1] > floor && diff_norms[k] > floor {
            let p = (diff_norms[k - 1] / diff_norms[k]).ln() / (1.0 / rho).ln();
            if p.is_finite() {
                rates.push(p);
            }
        }
    }
    let tail: Vec<f64> = rates.iter().rev().take(6).copied().collect();
    let p_hat = if tail.is_empty() {
        None
    } else {
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    };

    let mut extrapolants: Vec<(f64, CMatrix)> = Vec::new();
    match p_hat {
        Some(p) if p > 0.05 => {
            let w = rho.powf(p) / (1.0 - rho.powf(p));
            for k in 0..=cut {
                let e = &samples[k + 1].1 + &diffs[k].scale_re(w);
                extrapolants.push((samples[k + 1].0, e));
            }
        }
        _ => {
            // no usable decay estimate: keep the raw samples up to the cutoff
            for (y, v) in samples.iter().skip(1).take(cut + 1) {
                extrapolants.push((*y, v.clone()));
            }
        }
    }

    let limit = extrapolants
        .last()
        .map(|(_, e)| e.clone())
        .unwrap_or_else(|| samples.last().unwrap().1.clone());
    let residual = if extrapolants.len() >= 2 {
        (&extrapolants[extrapolants.len() - 1].1 - &extrapolants[extrapolants.len() - 2].1)
            .fro_norm()
    } else {
        diff_norms[cut]
    };
    let converged = residual < tol * (1.0 + limit.fro_norm());

    // decay order of the error against the accepted limit, over the clean
    // part of the schedule
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (y, v) in samples.iter().take(cut + 1) {
        let err = (v - &limit).fro_norm();
        if err > 100.0 * floor {
            xs.push(y.ln());
            ys.push(err.ln());
        }
    }
    let fitted_rate = fit_slope(&xs, &ys);

    (extrapolants, limit, residual, converged, fitted_rate)
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 3 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den <= 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Threshold below which a converged limit of `c(v)` is classified as
/// degenerate rather than strictly positive.
pub const DEGENERATE_MIN_EIG: f64 = 1e-8;

/// Estimates `c(v) = lim Im f(alpha + i y v) / y` on the probe's schedule.
pub fn estimate_c(f: &NCFunction, probe: &BoundaryProbe) -> Result<ConvergenceReport> {
    let mut samples = Vec::new();
    for y in probe.schedule.steps() {
        let arg = probe.argument(c64(0.0, y));
        match eval(f, &arg) {
            Ok(v) => {
                let ratio = imag_part(&v).into_cmatrix().scale_re(1.0 / y);
                samples.push((y, ratio));
            }
            Err(e) => {
                let diag = format!("evaluation failed at y = {y:.6e}: {e}");
                return Ok(ConvergenceReport::failed(samples, probe.level(), diag));
            }
        }
    }
    if detect_monotone_blowup(&samples) {
        let level = probe.level();
        let limit = samples.last().map(|(_, v)| v.clone()).unwrap();
        return Ok(ConvergenceReport {
            samples,
            extrapolants: Vec::new(),
            limit,
            fitted_rate: None,
            converged: false,
            residual: f64::MAX,
            status: ConvergenceStatus::LiminfInfinite,
            selfadjoint_defect: None,
            diagnostic: Some(format!(
                "imaginary-part ratio grew monotonically beyond 1e6 at level {level}"
            )),
        });
    }
    let (extrapolants, limit, residual, converged, fitted_rate) =
        extrapolate(&samples, probe.schedule.rho, probe.schedule.tol);
    let min_eig = HermMatrix::new(&limit).min_eigenvalue()?;
    let status = if !converged {
        ConvergenceStatus::Failed
    } else if min_eig <= DEGENERATE_MIN_EIG {
        ConvergenceStatus::Degenerate
    } else {
        ConvergenceStatus::Converged
    };
    Ok(ConvergenceReport {
        samples,
        extrapolants,
        limit,
        fitted_rate,
        converged,
        residual,
        status,
        selfadjoint_defect: None,
        diagnostic: None,
    })
}

/// Estimates the boundary value `f(alpha) = lim f(alpha + z v)` along the
/// probe's ray. Requires the directional density to converge first.
pub fn estimate_boundary_value(f: &NCFunction, probe: &BoundaryProbe) -> Result<ConvergenceReport> {
    let c_report = estimate_c(f, probe)?;
    if c_report.status == ConvergenceStatus::LiminfInfinite {
        return Ok(ConvergenceReport {
            status: ConvergenceStatus::LiminfInfinite,
            diagnostic: Some("directional density diverges; no boundary value".into()),
            ..ConvergenceReport::failed(c_report.samples, probe.level(), String::new())
        });
    }
    if !c_report.converged {
        return Ok(ConvergenceReport::failed(
            c_report.samples,
            probe.level(),
            "directional density did not converge".into(),
        ));
    }
    let mut samples = Vec::new();
    for y in probe.schedule.steps() {
        let z = probe.ray_point(y);
        let arg = probe.argument(z);
        match eval(f, &arg) {
            Ok(v) => samples.push((y, v)),
            Err(e) => {
                let diag = format!("evaluation failed at y = {y:.6e}: {e}");
                return Ok(ConvergenceReport::failed(samples, probe.level(), diag));
            }
        }
    }
    let (extrapolants, limit, residual, converged, fitted_rate) =
        extrapolate(&samples, probe.schedule.rho, probe.schedule.tol);
    let defect = imag_part(&limit).spectral_norm()?;
    let tol = probe.schedule.tol;
    let mut status = if converged {
        ConvergenceStatus::Converged
    } else {
        ConvergenceStatus::Failed
    };
    let mut diagnostic = None;
    if converged && defect > tol * (1.0 + limit.fro_norm()) {
        status = ConvergenceStatus::Failed;
        diagnostic = Some(format!(
            "boundary value limit is not selfadjoint: imaginary defect {defect:.6e}"
        ));
    }
    Ok(ConvergenceReport {
        samples,
        extrapolants,
        limit,
        fitted_rate,
        converged,
        residual,
        status,
        selfadjoint_defect: Some(defect),
        diagnostic,
    })
}

/// Estimates `lim f'(alpha + z v)(w)` along the probe's ray.
pub fn estimate_boundary_derivative(
    f: &NCFunction,
    probe: &BoundaryProbe,
    w: &CMatrix,
) -> Result<ConvergenceReport> {
    if w.level() != probe.level() {
        return Err(Error::Dimension("derivative direction level mismatch".into()));
    }
    let c_report = estimate_c(f, probe)?;
    if !c_report.converged {
        return Ok(ConvergenceReport::failed(
            c_report.samples,
            probe.level(),
            "directional density did not converge".into(),
        ));
    }
    let mut samples = Vec::new();
    for y in probe.schedule.steps() {
        let z = probe.ray_point(y);
        let arg = probe.argument(z);
        match derivative(f, &arg, w) {
            Ok(v) => samples.push((y, v)),
            Err(e) => {
                let diag = format!("derivative failed at y = {y:.6e}: {e}");
                return Ok(ConvergenceReport::failed(samples, probe.level(), diag));
            }
        }
    }
    let (extrapolants, limit, residual, converged, fitted_rate) =
        extrapolate(&samples, probe.schedule.rho, probe.schedule.tol);
    Ok(ConvergenceReport {
        samples,
        extrapolants,
        limit,
        fitted_rate,
        converged,
        residual,
        status: if converged {
            ConvergenceStatus::Converged
        } else {
            ConvergenceStatus::Failed
        },
        selfadjoint_defect: None,
        diagnostic: None,
    })
}

/// Per-step margins of the growth inequality `Im f(alpha + i y v) <= y c(v)`,
/// plus the cone-scalarized variant `Im <f(alpha + z v) xi, xi> / Im z <=
/// (1 + M^2) <c xi, xi>` over random vector states.
#[derive(Debug, Clone, Serialize)]
pub struct JuliaReport {
    pub vertical: Vec<(f64, f64)>,
    pub cone: Vec<(f64, f64)>,
    pub min_vertical_margin: f64,
    pub min_cone_margin: f64,
}

pub fn julia_inequality_check(
    f: &NCFunction,
    probe: &BoundaryProbe,
    states: usize,
    state_seed: u64,
) -> Result<JuliaReport> {
    let c_report = estimate_c(f, probe)?;
    if c_report.status != ConvergenceStatus::Converged
        && c_report.status != ConvergenceStatus::Degenerate
    {
        return Err(Error::Precondition(
            "growth check needs a convergent directional density".into(),
        ));
    }
    let c_limit = HermMatrix::new(&c_report.limit);
    let n = probe.level();
    let m = probe.cone_slope;
    let cone_factor = 1.0 + m * m;

    let mut vertical = Vec::new();
    let mut cone = Vec::new();
    let mut min_vertical = f64::INFINITY;
    let mut min_cone = f64::INFINITY;

    let vectors: Vec<Vec<C64>> = (0..states)
        .map(|i| sampling::unit_vector(&mut sampling::sample_rng(state_seed, i as u64), n))
        .collect();

    for y in probe.schedule.steps() {
        let arg = probe.argument(c64(0.0, y));
        let im_f = imag_part(&eval(f, &arg)?);
        let gap = c_limit.scale_re(y).sub(&im_f);
        let margin = gap.min_eigenvalue()?;
        min_vertical = min_vertical.min(margin);
        vertical.push((y, margin));

        let z = probe.ray_point(y);
        let im_z = z.im;
        let im_f_cone = imag_part(&eval(f, &probe.argument(z))?);
        let mut worst = f64::INFINITY;
        for xi in &vectors {
            let num = quadratic_form(&im_f_cone, xi) / im_z;
            let cap = cone_factor * quadratic_form(&c_limit, xi);
            worst = worst.min(cap - num);
        }
        min_cone = min_cone.min(worst);
        cone.push((y, worst));
    }

    Ok(JuliaReport {
        vertical,
        cone,
        min_vertical_margin: min_vertical,
        min_cone_margin: min_cone,
    })
}

fn quadratic_form(h: &HermMatrix, xi: &[C64]) -> f64 {
    let n = h.level();
    let mut acc = c64(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += xi[i].conj() * h.as_cmatrix().entry(i, j) * xi[j];
        }
    }
    acc.re
}

/// Decay of `||Re f(alpha + i y v) - f(alpha)|| / y` along the schedule.
#[derive(Debug, Clone, Serialize)]
pub struct ReVanishingReport {
    pub rows: Vec<(f64, f64)>,
    pub final_ratio: f64,
    pub fitted_rate: Option<f64>,
    pub passed: bool,
}

pub fn re_vanishing_check(f: &NCFunction, probe: &BoundaryProbe) -> Result<ReVanishingReport> {
    let bv = estimate_boundary_value(f, probe)?;
    if bv.status != ConvergenceStatus::Converged {
        return Err(Error::Precondition(
            "real-part check needs a convergent boundary value".into(),
        ));
    }
    let f_alpha = real_part(&bv.limit);
    let scale = op_norm(&bv.limit).max(1.0);
    let mut rows = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for y in probe.schedule.steps() {
        let arg = probe.argument(c64(0.0, y));
        let re = real_part(&eval(f, &arg)?);
        let dev = re.sub(&f_alpha).spectral_norm()?;
        let ratio = dev / y;
        rows.push((y, ratio));
        // keep fit points above the rounding floor of the numerator
        if dev > 1e-13 * scale {
            xs.push(y.ln());
            ys.push(ratio.max(1e-300).ln());
        }
    }
    let fitted_rate = fit_slope(&xs, &ys);
    let final_ratio = rows.last().map(|r| r.1).unwrap_or(f64::MAX);
    let tail = rows.iter().rev().take(5).map(|r| r.1).collect::<Vec<_>>();
    let decreasing = tail.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-6));
    let passed = final_ratio < probe.schedule.tol * scale && decreasing;
    Ok(ReVanishingReport {
        rows,
        final_ratio,
        fitted_rate,
        passed,
    })
}

/// Level-two consistency of the directional density: the block probe
/// `[[alpha + i y v, i y b], [i y b, alpha + i y v]]` must reproduce the
/// half-sum/half-difference combinations of `c(v + b)` and `c(v - b)`.
#[derive(Debug, Clone)]
pub struct CBlockReport {
    pub c_matrix: CMatrix,
    pub diag_deviation: f64,
    pub off_deviation: f64,
    pub min_eigenvalue: f64,
    pub converged: bool,
}

pub fn c_block_consistency(
    f: &NCFunction,
    alpha: &HermMatrix,
    v: &HermMatrix,
    b: &HermMatrix,
    schedule: Schedule,
) -> Result<CBlockReport> {
    schedule.validate()?;
    let n = alpha.level();
    if v.level() != n || b.level() != n {
        return Err(Error::Dimension("block consistency needs equal levels".into()));
    }
    let b_min = b.min_eigenvalue()?;
    let vb_min = v.sub(b).min_eigenvalue()?;
    if b_min <= 0.0 || vb_min <= 0.0 {
        return Err(Error::Precondition(format!(
            "need 0 < b < v: min eig b = {b_min:.6e}, min eig (v - b) = {vb_min:.6e}"
        )));
    }

    let mut samples = Vec::new();
    for y in schedule.steps() {
        let diag = alpha.as_cmatrix() + &v.as_cmatrix().scale(c64(0.0, y));
        let off = b.as_cmatrix().scale(c64(0.0, y));
        let block = crate::hermitian::assemble_block2(&diag, &off, &off, &diag)?;
        let val = eval(f, &block)?;
        samples.push((y, imag_part(&val).into_cmatrix().scale_re(1.0 / y)));
    }
    let (_, c_mat, _, converged, _) = extrapolate(&samples, schedule.rho, schedule.tol);

    let plus = HermMatrix::new(&(v.as_cmatrix() + b.as_cmatrix()));
    let minus = HermMatrix::new(&(v.as_cmatrix() - b.as_cmatrix()));
    let probe_plus = BoundaryProbe::new(alpha.clone(), plus, schedule, 0.0)?;
    let probe_minus = BoundaryProbe::new(alpha.clone(), minus, schedule, 0.0)?;
    let c_plus = estimate_c(f, &probe_plus)?;
    let c_minus = estimate_c(f, &probe_minus)?;
    let ok = converged && c_plus.converged && c_minus.converged;

    let half_sum = (&c_plus.limit + &c_minus.limit).scale_re(0.5);
    let half_diff = (&c_plus.limit - &c_minus.limit).scale_re(0.5);

    let c11 = extract_block(&c_mat, 0, 0, n, n);
    let c22 = extract_block(&c_mat, n, n, n, n);
    let c12 = extract_block(&c_mat, 0, n, n, n);
    let c21 = extract_block(&c_mat, n, 0, n, n);
    let dev = |blk: &DMatrix<C64>, want: &CMatrix| -> f64 {
        (blk - want.as_dmatrix()).map(|z| z.norm_sqr()).sum().sqrt()
    };
    let diag_deviation = dev(&c11, &half_sum).max(dev(&c22, &half_sum));
    let off_deviation = dev(&c12, &half_diff).max(dev(&c21, &half_diff));
    let min_eigenvalue = HermMatrix::new(&c_mat).min_eigenvalue()?;

    Ok(CBlockReport {
        c_matrix: c_mat,
        diag_deviation,
        off_deviation,
        min_eigenvalue,
        converged: ok,
    })
}

/// Supremum of `||Df(alpha + z v1, alpha + zeta v2)(w)||` over schedule tails
/// of both rays and a sampled unit-sphere net of directions `w`.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaBoundReport {
    pub sup_norm: f64,
    pub worst_y1: f64,
    pub worst_y2: f64,
    pub worst_w: usize,
    pub evaluations: usize,
}

pub fn delta_limit_boundedness(
    f: &NCFunction,
    alpha: &HermMatrix,
    v1: &HermMatrix,
    v2: &HermMatrix,
    w_set: &[CMatrix],
    schedule: Schedule,
    cone_slope: f64,
) -> Result<DeltaBoundReport> {
    schedule.validate()?;
    let probe1 = BoundaryProbe::new(alpha.clone(), v1.clone(), schedule, cone_slope)?;
    let probe2 = BoundaryProbe::new(alpha.clone(), v2.clone(), schedule, cone_slope)?;
    for (probe, name) in [(&probe1, "v1"), (&probe2, "v2")] {
        let c = estimate_c(f, probe)?;
        if !c.converged {
            return Err(Error::Precondition(format!(
                "directional density along {name} did not converge"
            )));
        }
    }
    if w_set.is_empty() {
        return Err(Error::InvalidParam("need at least one direction in the net".into()));
    }

    let tail: Vec<f64> = {
        let all: Vec<f64> = schedule.steps().collect();
        let start = all.len().saturating_sub(6);
        all[start..].to_vec()
    };
    let mut rays = vec![0.0];
    if cone_slope > 0.0 {
        rays.push(cone_slope);
    }

    let mut sup = 0.0f64;
    let mut worst = (0.0, 0.0, 0usize);
    let mut evaluations = 0usize;
    for &m1 in &rays {
        for &m2 in &rays {
            for &y1 in &tail {
                for &y2 in &tail {
                    let z1 = ray(m1, y1);
                    let z2 = ray(m2, y2);
                    let p1 = alpha.as_cmatrix() + &v1.as_cmatrix().scale(z1);
                    let p2 = alpha.as_cmatrix() + &v2.as_cmatrix().scale(z2);
                    for (wi, w) in w_set.iter().enumerate() {
                        let norm_w = op_norm(w);
                        if norm_w < 1e-14 {
                            continue;
                        }
                        let val = delta_f(f, &p1, &p2, &w.scale_re(1.0 / norm_w))?;
                        evaluations += 1;
                        let nv = op_norm(&val);
                        if !nv.is_finite() {
                            return Err(Error::Domain(format!(
                                "difference operator diverged at y1 = {y1:.3e}, y2 = {y2:.3e}, w index {wi}"
                            )));
                        }
                        if nv > sup {
                            sup = nv;
                            worst = (y1, y2, wi);
                        }
                    }
                }
            }
        }
    }
    Ok(DeltaBoundReport {
        sup_norm: sup,
        worst_y1: worst.0,
        worst_y2: worst.1,
        worst_w: worst.2,
        evaluations,
    })
}

fn ray(m: f64, y: f64) -> C64 {
    if m == 0.0 {
        c64(0.0, y)
    } else {
        let h = (1.0 + m * m).sqrt();
        c64(y * m / h, y / h)
    }
}

/// Classical scalar boundary analysis: the three equivalent limits computed
/// independently through scalar arithmetic (no matrix pipeline involved).
#[derive(Debug, Clone, Serialize)]
pub struct ScalarJwcReport {
    pub c: Option<f64>,
    pub f_alpha: Option<f64>,
    pub f_prime: Option<f64>,
    pub status: ConvergenceStatus,
    pub mutual_deviation: Option<f64>,
}

fn scalar_extrapolate(samples: &[(f64, C64)], rho: f64, tol: f64) -> (C64, f64, bool) {
    let n = samples.len();
    if n < 2 {
        return (samples.last().map(|(_, v)| *v).unwrap_or(c64(0.0, 0.0)), f64::MAX, false);
    }
    let scale = samples.iter().map(|(_, v)| v.norm()).fold(0.0f64, f64::max);
    let floor = 1e-14 * (1.0 + scale);
    let diffs: Vec<C64> = (1..n).map(|k| samples[k].1 - samples[k - 1].1).collect();
    let diff_norms: Vec<f64> = diffs.iter().map(|d| d.norm()).collect();
    let d_min = diff_norms.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = diff_norms
        .iter()
        .rposition(|&d| d <= d_min.max(floor) * 2.0)
        .unwrap_or(diff_norms.len() - 1);
    let mut rates = Vec::new();
    for k in 1..=cut {
        let (a, b) = (diff_norms[k - 1], diff_norms[k]);
        if a > floor && b > floor {
            let p = (a / b).ln() / (1.0 / rho).ln();
            if p.is_finite() {
                rates.push(p);
            }
        }
    }
    let tail: Vec<f64> = rates.iter().rev().take(6).copied().collect();
    let mut ext = Vec::new();
    if !tail.is_empty() {
        let p = tail.iter().sum::<f64>() / tail.len() as f64;
        if p > 0.05 {
            let w = rho.powf(p) / (1.0 - rho.powf(p));
            for k in 0..=cut {
                ext.push(samples[k + 1].1 + diffs[k] * w);
            }
        }
    }
    if ext.is_empty() {
        ext = samples.iter().skip(1).take(cut + 1).map(|(_, v)| *v).collect();
    }
    let limit = *ext.last().unwrap();
    let residual = if ext.len() >= 2 {
        (ext[ext.len() - 1] - ext[ext.len() - 2]).norm()
    } else {
        diff_norms[cut]
    };
    (limit, residual, residual < tol * (1.0 + limit.norm()))
}

pub fn scalar_jwc(f: &NCFunction, alpha: f64, schedule: Schedule) -> Result<ScalarJwcReport> {
    schedule.validate()?;
    let tol = schedule.tol;

    // vertical imaginary-part ratio
    let mut ratio_samples = Vec::new();
    for y in schedule.steps() {
        let v = eval_scalar(f, c64(alpha, y))?;
        ratio_samples.push((y, c64(v.im / y, 0.0)));
    }
    let norms: Vec<f64> = ratio_samples.iter().map(|(_, v)| v.norm()).collect();
    let monotone = norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    let first = norms.first().copied().unwrap_or(0.0).max(1e-300);
    let last = norms.last().copied().unwrap_or(0.0);
    if monotone && last > 1e6 * first {
        return Ok(ScalarJwcReport {
            c: None,
            f_alpha: None,
            f_prime: None,
            status: ConvergenceStatus::LiminfInfinite,
            mutual_deviation: None,
        });
    }
    let (c_lim, _, c_ok) = scalar_extrapolate(&ratio_samples, schedule.rho, tol);

    // boundary value
    let mut value_samples = Vec::new();
    for y in schedule.steps() {
        value_samples.push((y, eval_scalar(f, c64(alpha, y))?));
    }
    let (fa_lim, _, fa_ok) = scalar_extrapolate(&value_samples, schedule.rho, tol);

    // difference quotient against the boundary value
    let mut quot_samples = Vec::new();
    for y in schedule.steps() {
        let v = eval_scalar(f, c64(alpha, y))?;
        quot_samples.push((y, (v - c64(fa_lim.re, 0.0)) / c64(0.0, y)));
    }
    let (quot_lim, _, quot_ok) = scalar_extrapolate(&quot_samples, schedule.rho, tol);

    // derivative limit through the closed-form scalar derivative
    let mut deriv_samples = Vec::new();
    for y in schedule.steps() {
        deriv_samples.push((y, derivative_scalar(f, c64(alpha, y))?));
    }
    let (deriv_lim, _, deriv_ok) = scalar_extrapolate(&deriv_samples, schedule.rho, tol);

    let mutual = (c_lim.re - quot_lim.re)
        .abs()
        .max((c_lim.re - deriv_lim.re).abs());
    let selfadj_ok = fa_lim.im.abs() <= tol * (1.0 + fa_lim.norm());
    let all_ok = c_ok && fa_ok && quot_ok && deriv_ok && selfadj_ok && mutual <= 10.0 * tol;

    let status = if !all_ok {
        ConvergenceStatus::Failed
    } else if c_lim.re <= DEGENERATE_MIN_EIG {
        ConvergenceStatus::Degenerate
    } else {
        ConvergenceStatus::Converged
    };
    Ok(ScalarJwcReport {
        c: Some(c_lim.re),
        f_alpha: Some(fa_lim.re),
        f_prime: Some(deriv_lim.re),
        status,
        mutual_deviation: Some(mutual),
    })
}

/// Serialized limit estimate: per-step samples, extrapolants, the limit and
/// its status.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReportJson {
    pub samples: Vec<SampleJson>,
    pub extrapolants: Vec<SampleJson>,
    pub limit: MatrixJson,
    pub fitted_rate: Option<f64>,
    pub converged: bool,
    pub residual: Option<f64>,
    pub status: ConvergenceStatus,
    pub selfadjoint_defect: Option<f64>,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleJson {
    pub y: f64,
    pub value: MatrixJson,
}

impl ConvergenceReport {
    pub fn to_json_value(&self) -> ConvergenceReportJson {
        let pack = |v: &[(f64, CMatrix)]| {
            v.iter()
                .map(|(y, m)| SampleJson {
                    y: *y,
                    value: m.to_json_value(),
                })
                .collect()
        };
        ConvergenceReportJson {
            samples: pack(&self.samples),
            extrapolants: pack(&self.extrapolants),
            limit: self.limit.to_json_value(),
            fitted_rate: self.fitted_rate,
            converged: self.converged,
            residual: if self.residual.is_finite() {
                Some(self.residual)
            } else {
                None
            },
            status: self.status,
            selfadjoint_defect: self.selfadjoint_defect,
            diagnostic: self.diagnostic.clone(),
        }
    }
}

/// Wire format for probe descriptors:
/// `{function, alpha, direction, schedule, cone_slope}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeDescriptor {
    pub function: FunctionDescriptor,
    pub alpha: MatrixJson,
    pub direction: MatrixJson,
    pub schedule: Schedule,
    pub cone_slope: f64,
}

impl ProbeDescriptor {
    pub fn resolve(&self) -> Result<(NCFunction, BoundaryProbe)> {
        let f = NCFunction::from_descriptor(&self.function)?;
        let alpha_m = CMatrix::from_json_value(&self.alpha)?;
        let alpha = HermMatrix::new(&alpha_m);
        if (&alpha_m - alpha.as_cmatrix()).fro_norm() > 1e-12 * alpha_m.fro_norm().max(1.0) {
            return Err(Error::InvalidParam("boundary point must be selfadjoint".into()));
        }
        let dir_m = CMatrix::from_json_value(&self.direction)?;
        let direction = HermMatrix::new(&dir_m);
        let probe = BoundaryProbe::new(alpha, direction, self.schedule, self.cone_slope)?;
        Ok((f, probe))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{herm_inv, is_positive_definite};
    use crate::sampling::{positive_definite, sample_rng};

    fn default_probe_scalar(alpha: f64) -> BoundaryProbe {
        BoundaryProbe::scalar(alpha, 1.0, Schedule::default(), 0.0).unwrap()
    }

    #[test]
    fn identity_direction_density_is_direction() {
        let f = NCFunction::identity();
        let mut rng = sample_rng(300, 0);
        let v = positive_definite(&mut rng, 2);
        let alpha = crate::sampling::gaussian_hermitian(&mut rng, 2);
        let probe = BoundaryProbe::new(alpha, v.clone(), Schedule::default(), 0.0).unwrap();
        let rep = estimate_c(&f, &probe).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Converged);
        assert!((&rep.limit - v.as_cmatrix()).fro_norm() <= 1e-10);
    }

    #[test]
    fn inversion_scalar_density() {
        // f(z) = -1/z at alpha = 1: Im f(1 + iy)/y = 1/(1 + y^2) -> 1
        let f = NCFunction::neg_inverse();
        let rep = estimate_c(&f, &default_probe_scalar(1.0)).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Converged);
        assert!((rep.limit.entry(0, 0).re - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn inversion_matrix_density_is_resolvent_sandwich() {
        let f = NCFunction::neg_inverse();
        let mut rng = sample_rng(301, 0);
        let alpha = positive_definite(&mut rng, 2); // positive => invertible
        let v = positive_definite(&mut rng, 2);
        let probe =
            BoundaryProbe::new(alpha.clone(), v.clone(), Schedule::default(), 0.0).unwrap();
        let rep = estimate_c(&f, &probe).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Converged);
        let ai = herm_inv(&alpha).unwrap();
        let expected = &(ai.as_cmatrix() * v.as_cmatrix()) * ai.as_cmatrix();
        assert!(
            (&rep.limit - &expected).fro_norm() <= 1e-6 * (1.0 + expected.fro_norm()),
            "density limit off by {:.3e}",
            (&rep.limit - &expected).fro_norm()
        );
    }

    #[test]
    fn boundary_value_examples() {
        let f = NCFunction::neg_inverse();
        let rep = estimate_boundary_value(&f, &default_probe_scalar(1.0)).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Converged);
        assert!((rep.limit.entry(0, 0).re - (-1.0)).abs() <= 1e-6);
        assert!(rep.selfadjoint_defect.unwrap() <= 1e-6);

        let id = NCFunction::identity();
        let rep = estimate_boundary_value(&id, &default_probe_scalar(0.25)).unwrap();
        assert!((rep.limit.entry(0, 0).re - 0.25).abs() <= 1e-9);
    }

    #[test]
    fn boundary_value_does_not_depend_on_direction() {
        let f = NCFunction::nevanlinna_pick(0.3, 1.0, vec![2.0, -1.5], vec![0.5, 0.25]).unwrap();
        let alpha = HermMatrix::from_real_diag(&[0.1, -0.2]);
        let v1 = HermMatrix::identity(2);
        let v2 = HermMatrix::from_real_diag(&[1.0, 2.0]);
        let s = Schedule::default();
        let r1 = estimate_boundary_value(&f, &BoundaryProbe::new(alpha.clone(), v1, s, 0.0).unwrap())
            .unwrap();
        let r2 = estimate_boundary_value(&f, &BoundaryProbe::new(alpha, v2, s, 0.0).unwrap())
            .unwrap();
        assert!((&r1.limit - &r2.limit).fro_norm() <= 2e-6 * (1.0 + r1.limit.fro_norm()));
    }

    #[test]
    fn boundary_derivative_examples() {
        let id = NCFunction::identity();
        let probe = default_probe_scalar(0.5);
        let w = CMatrix::scalar(c64(0.7, 0.0));
        let rep = estimate_boundary_derivative(&id, &probe, &w).unwrap();
        assert!((rep.limit.entry(0, 0) - c64(0.7, 0.0)).norm() <= 1e-9);

        let f = NCFunction::neg_inverse();
        let probe = default_probe_scalar(1.0);
        let w = CMatrix::scalar(c64(1.0, 0.0));
        let rep = estimate_boundary_derivative(&f, &probe, &w).unwrap();
        assert!((rep.limit.entry(0, 0).re - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn moebius_matrix_boundary_derivative() {
        // limit is (c alpha + d)^{-1} w (c alpha + d)^{-1}
        let (a, b, cc, d) = (2.0, 1.0, 1.0, 1.0);
        let f = NCFunction::moebius(a, b, cc, d).unwrap();
        let alpha = HermMatrix::from_real_diag(&[0.5, -0.25]);
        let v = HermMatrix::identity(2);
        let probe = BoundaryProbe::new(alpha.clone(), v, Schedule::default(), 0.0).unwrap();
        let mut rng = sample_rng(302, 0);
        let w = crate::sampling::gaussian_matrix(&mut rng, 2);
        let rep = estimate_boundary_derivative(&f, &probe, &w).unwrap();
        let det_root = (a * d - b * cc).sqrt();
        let den = &alpha.as_cmatrix().scale_re(cc / det_root)
            + &CMatrix::identity(2).scale_re(d / det_root);
        let den_inv = crate::hermitian::inv(&den).unwrap();
        let expected = &(&den_inv * &w) * &den_inv;
        assert!((&rep.limit - &expected).fro_norm() <= 1e-6 * (1.0 + expected.fro_norm()));
    }

    #[test]
    fn julia_margins_nonnegative_for_inversion() {
        let f = NCFunction::neg_inverse();
        let probe = default_probe_scalar(1.0);
        let rep = julia_inequality_check(&f, &probe, 25, 99).unwrap();
        assert!(rep.min_vertical_margin >= -1e-8);
        assert!(rep.min_cone_margin >= -1e-8);
        // margin at y is y^3/(1+y^2) for the scalar inversion
        for (y, m) in &rep.vertical {
            let want = y * y * y / (1.0 + y * y);
            assert!((m - want).abs() <= 1e-6 * (1.0 + want));
        }
    }

    #[test]
    fn julia_identity_saturates() {
        let f = NCFunction::identity();
        let probe = default_probe_scalar(0.0);
        let rep = julia_inequality_check(&f, &probe, 10, 7).unwrap();
        for (_, m) in &rep.vertical {
            assert!(m.abs() <= 1e-9);
        }
    }

    #[test]
    fn re_vanishing_examples() {
        let id = NCFunction::identity();
        let rep = re_vanishing_check(&id, &default_probe_scalar(0.3)).unwrap();
        assert!(rep.passed);
        assert!(rep.rows.iter().all(|(_, r)| *r <= 1e-12));

        // |Re f(1+iy) + 1|/y = y/(1+y^2): decay rate one
        let f = NCFunction::neg_inverse();
        let rep = re_vanishing_check(&f, &default_probe_scalar(1.0)).unwrap();
        assert!(rep.passed);
        let rate = rep.fitted_rate.expect("nontrivial decay");
        assert!((rate - 1.0).abs() <= 0.2, "fitted rate {rate}");
    }

    #[test]
    fn c_block_scalar_example() {
        // f = -1/z, alpha = 1, v = 1, b = 1/2: C = [[1, 1/2], [1/2, 1]]
        let f = NCFunction::neg_inverse();
        let rep = c_block_consistency(
            &f,
            &HermMatrix::from_real_diag(&[1.0]),
            &HermMatrix::from_real_diag(&[1.0]),
            &HermMatrix::from_real_diag(&[0.5]),
            Schedule::default(),
        )
        .unwrap();
        assert!(rep.converged);
        assert!(rep.diag_deviation <= 1e-6);
        assert!(rep.off_deviation <= 1e-6);
        assert!((rep.c_matrix.entry(0, 0).re - 1.0).abs() <= 1e-6);
        assert!((rep.c_matrix.entry(0, 1).re - 0.5).abs() <= 1e-6);
        assert!(rep.min_eigenvalue > 0.0);
    }

    #[test]
    fn c_block_identity_function() {
        let f = NCFunction::identity();
        let rep = c_block_consistency(
            &f,
            &HermMatrix::from_real_diag(&[0.0]),
            &HermMatrix::from_real_diag(&[1.0]),
            &HermMatrix::from_real_diag(&[0.25]),
            Schedule::default(),
        )
        .unwrap();
        // C = [[v, b], [b, v]] exactly for the identity
        assert!((rep.c_matrix.entry(0, 0).re - 1.0).abs() <= 1e-10);
        assert!((rep.c_matrix.entry(0, 1).re - 0.25).abs() <= 1e-10);
    }

    #[test]
    fn c_block_rejects_bad_direction() {
        let f = NCFunction::identity();
        let r = c_block_consistency(
            &f,
            &HermMatrix::from_real_diag(&[0.0]),
            &HermMatrix::from_real_diag(&[1.0]),
            &HermMatrix::from_real_diag(&[2.0]),
            Schedule::default(),
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn delta_bound_identity_is_one() {
        let f = NCFunction::identity();
        let alpha = HermMatrix::from_real_diag(&[0.0]);
        let v = HermMatrix::from_real_diag(&[1.0]);
        let w = vec![CMatrix::scalar(c64(1.0, 0.0))];
        let rep = delta_limit_boundedness(&f, &alpha, &v, &v, &w, Schedule::default(), 1.0)
            .unwrap();
        assert!((rep.sup_norm - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn delta_bound_scales_linearly_in_direction() {
        let f = NCFunction::neg_inverse();
        let alpha = HermMatrix::from_real_diag(&[1.0]);
        let v = HermMatrix::from_real_diag(&[1.0]);
        let v2 = HermMatrix::from_real_diag(&[2.0]);
        let w = vec![CMatrix::scalar(c64(1.0, 0.0)), CMatrix::scalar(c64(0.0, 1.0))];
        let r1 = delta_limit_boundedness(&f, &alpha, &v, &v, &w, Schedule::default(), 0.0)
            .unwrap();
        let r2 = delta_limit_boundedness(&f, &alpha, &v2, &v2, &w, Schedule::default(), 0.0)
            .unwrap();
        assert!(r2.sup_norm <= 2.0 * r1.sup_norm * (1.0 + 1e-6) + 1e-9);
    }

    #[test]
    fn scalar_jwc_examples() {
        let s = Schedule::default();
        let id = NCFunction::identity();
        let rep = scalar_jwc(&id, 0.7, s).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Converged);
        assert!((rep.c.unwrap() - 1.0).abs() <= 1e-9);
        assert!((rep.f_alpha.unwrap() - 0.7).abs() <= 1e-9);
        assert!((rep.f_prime.unwrap() - 1.0).abs() <= 1e-9);

        let f = NCFunction::neg_inverse();
        let rep = scalar_jwc(&f, 2.0, s).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Converged);
        assert!((rep.f_alpha.unwrap() - (-0.5)).abs() <= 1e-6);
        assert!((rep.c.unwrap() - 0.25).abs() <= 1e-6);
        assert!((rep.f_prime.unwrap() - 0.25).abs() <= 1e-6);
    }

    #[test]
    fn scalar_jwc_detects_infinite_liminf() {
        // f(z) = z + i: Im f(alpha + iy)/y = (y + 1)/y grows without bound
        let f = NCFunction::affine_shift(c64(0.0, 1.0));
        let mut s = Schedule::default();
        s.k_max = 25;
        let rep = scalar_jwc(&f, 0.0, s).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::LiminfInfinite);
    }

    #[test]
    fn degenerate_density_is_flagged() {
        // tiny weight far from the boundary point: c = w/(r - alpha)^2 = 1e-12
        let f = NCFunction::nevanlinna_pick(0.0, 0.0, vec![10.0], vec![1e-10]).unwrap();
        let rep = estimate_c(&f, &default_probe_scalar(0.0)).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Degenerate);
    }

    #[test]
    fn pole_at_boundary_point_diverges() {
        // f(z) = 1/(-z) at alpha = 0: the ratio is 1/y^2, monotone blowup
        let f = NCFunction::nevanlinna_pick(0.0, 0.0, vec![0.0], vec![1.0]).unwrap();
        let probe = default_probe_scalar(0.0);
        let rep = estimate_c(&f, &probe).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::LiminfInfinite);
    }

    #[test]
    fn partial_report_on_mid_schedule_domain_error() {
        // the resolvent condition number crosses the guard once y is small
        // enough, so late schedule points fail and a partial report returns
        let f = NCFunction::nevanlinna_pick(0.0, 0.0, vec![0.0], vec![1.0]).unwrap();
        let alpha = HermMatrix::from_real_diag(&[0.0, 1e6]);
        let v = HermMatrix::identity(2);
        let probe = BoundaryProbe::new(alpha, v, Schedule::default(), 0.0).unwrap();
        let rep = estimate_c(&f, &probe).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Failed);
        assert!(rep.diagnostic.is_some());
        assert!(!rep.samples.is_empty());
        assert!(rep.samples.len() < probe.schedule.k_max + 1);
    }

    #[test]
    fn probe_descriptor_round_trip() {
        let f = NCFunction::neg_inverse();
        let desc = ProbeDescriptor {
            function: f.to_descriptor(),
            alpha: CMatrix::scalar(c64(1.0, 0.0)).to_json_value(),
            direction: CMatrix::scalar(c64(1.0, 0.0)).to_json_value(),
            schedule: Schedule::default(),
            cone_slope: 1.0,
        };
        let s = serde_json::to_string(&desc).unwrap();
        let back: ProbeDescriptor = serde_json::from_str(&s).unwrap();
        let (f2, probe) = back.resolve().unwrap();
        assert_eq!(f2.family_name(), "moebius");
        assert_eq!(probe.level(), 1);
        assert!((probe.cone_slope - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nontangential_limits_agree_across_slopes() {
        let f = NCFunction::nevanlinna_pick(0.1, 1.0, vec![3.0], vec![0.5]).unwrap();
        let mut limits = Vec::new();
        for m in [0.0, 1.0, 4.0] {
            let probe = BoundaryProbe::scalar(0.5, 1.0, Schedule::default(), m).unwrap();
            let rep = estimate_boundary_value(&f, &probe).unwrap();
            assert_eq!(rep.status, ConvergenceStatus::Converged);
            limits.push(rep.limit.entry(0, 0).re);
        }
        for w in limits.windows(2) {
            assert!((w[0] - w[1]).abs() <= 2e-6 * (1.0 + w[0].abs()));
        }
    }

    #[test]
    fn positivity_of_converged_density() {
        let f = NCFunction::nevanlinna_pick(0.0, 0.5, vec![2.0], vec![1.0]).unwrap();
        let mut rng = sample_rng(303, 5);
        let v = positive_definite(&mut rng, 2);
        let alpha = HermMatrix::from_real_diag(&[0.0, 0.1]);
        let probe = BoundaryProbe::new(alpha, v, Schedule::default(), 0.0).unwrap();
        let rep = estimate_c(&f, &probe).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Converged);
        let cert = is_positive_definite(&HermMatrix::new(&rep.limit), 1e-12).unwrap();
        assert!(cert.is_positive && cert.min_eigenvalue > 1e-8);
    }
}

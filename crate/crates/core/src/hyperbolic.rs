//! The hyperbolic ball in the matrix upper half-plane:
//! `B(c, r) = { a : ||(Im a)^{-1/2} (a - c) (Im c)^{-1/2}|| <= r }`,
//! its membership diagnostics and the norm bounds every member satisfies.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    herm_inv, herm_inv_sqrt, herm_sqrt, imag_part, op_norm, real_part, CMatrix, HalfPlanePoint,
    HermMatrix,
};
use crate::sampling;

/// Center and radius of one ball.
#[derive(Debug, Clone)]
pub struct BallSpec {
    pub center: HalfPlanePoint,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: HalfPlanePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParam(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(BallSpec { center, radius })
    }

    pub fn level(&self) -> usize {
        self.center.level()
    }
}

/// Membership plus the four bounds implied by membership.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BallDiagnostics {
    pub distance: f64,
    pub member: bool,
    pub norm_bound_ok: bool,
    pub im_lower_ok: bool,
    pub im_band_ok: bool,
    pub re_band_ok: bool,
}

/// `theta(r) = (r^2 + 2 + r sqrt(r^2 + 4)) / 2`, the growth factor of the
/// imaginary-part band.
pub fn theta(r: f64) -> f64 {
    (r * r + 2.0 + r * (r * r + 4.0).sqrt()) / 2.0
}

/// Pseudo-distance functional `||(Im a)^{-1/2} (a - c) (Im c)^{-1/2}||`.
pub fn ball_distance(c: &HalfPlanePoint, a: &HalfPlanePoint) -> Result<f64> {
    if c.level() != a.level() {
        return Err(Error::Dimension("ball distance needs equal levels".into()));
    }
    let sa = herm_inv_sqrt(&a.imag())?;
    let sc = herm_inv_sqrt(&c.imag())?;
    let diff = a.value() - c.value();
    Ok(op_norm(&(&(sa.as_cmatrix() * &diff) * sc.as_cmatrix())))
}

/// Evaluates membership and the four member bounds with additive slack
/// `1e-10` on the appropriate scale.
pub fn ball_diagnostics(spec: &BallSpec, a: &HalfPlanePoint) -> Result<BallDiagnostics> {
    if spec.level() != a.level() {
        return Err(Error::Dimension("ball diagnostics needs equal levels".into()));
    }
    let r = spec.radius;
    let c = &spec.center;
    let distance = ball_distance(c, a)?;
    let member = distance <= r;

    let th = theta(r);
    let slack = 1e-10;
    let norm_a = op_norm(a.value());
    let norm_re_c = real_part(c.value()).spectral_norm()?;
    let im_c = c.imag();
    let norm_im_c = im_c.spectral_norm()?;
    let norm_im_a = a.imag().spectral_norm()?;
    let norm_re_a = real_part(a.value()).spectral_norm()?;

    let norm_bound = norm_re_c + norm_im_c * (th + r * th.sqrt());
    let norm_bound_ok = norm_a <= norm_bound + slack * norm_bound.max(1.0);

    let gap = a.imag().sub(&im_c.scale_re(1.0 / (2.0 + r * r)));
    let im_lower_ok = gap.min_eigenvalue()? >= -slack * norm_im_c.max(1.0);

    let lo = norm_im_c * (r * r + 2.0 - r * (r * r + 4.0).sqrt()) / 2.0;
    let hi = norm_im_c * th;
    let band_slack = slack * norm_im_c.max(1.0);
    let im_band_ok = norm_im_a >= lo - band_slack && norm_im_a <= hi + band_slack;

    let re_bound = norm_re_c + r * norm_im_c * th.sqrt();
    let re_band_ok = norm_re_a <= re_bound + slack * re_bound.max(1.0);

    Ok(BallDiagnostics {
        distance,
        member,
        norm_bound_ok,
        im_lower_ok,
        im_band_ok,
        re_band_ok,
    })
}

/// Checks that the midpoint of two members is a member (distance at most
/// `r + 1e-10`). Non-members are rejected.
pub fn midpoint_convexity_check(
    spec: &BallSpec,
    a1: &HalfPlanePoint,
    a2: &HalfPlanePoint,
) -> Result<bool> {
    let d1 = ball_distance(&spec.center, a1)?;
    let d2 = ball_distance(&spec.center, a2)?;
    let admit = spec.radius * (1.0 + 1e-12) + 1e-12;
    if d1 > admit || d2 > admit {
        return Err(Error::Precondition(format!(
            "midpoint check needs two members: distances {d1:.6}, {d2:.6}, radius {}",
            spec.radius
        )));
    }
    let mid = HalfPlanePoint::new((a1.value() + a2.value()).scale_re(0.5))?;
    let dm = ball_distance(&spec.center, &mid)?;
    Ok(dm <= spec.radius + 1e-10)
}

/// The algebraic pieces behind midpoint convexity:
/// `S - L = Q` exactly, where `S` is the half-sum of the two member
/// quadratics, `L` the midpoint quadratic and `Q` the quarter-difference
/// quadratic. Returns the identity defect and the smallest eigenvalue of
/// `(r^2/2) Im(a1 + a2) - S` (nonnegative for members).
pub fn midpoint_residual(
    spec: &BallSpec,
    a1: &HalfPlanePoint,
    a2: &HalfPlanePoint,
) -> Result<(f64, f64)> {
    let c = &spec.center;
    let w = herm_inv(&c.imag())?;
    let quad = |x: &CMatrix| -> CMatrix {
        let d = x - c.value();
        &(&d * w.as_cmatrix()) * &d.adjoint()
    };
    let s = (&quad(a1.value()) + &quad(a2.value())).scale_re(0.5);
    let mid = (a1.value() + a2.value()).scale_re(0.5);
    let l = quad(&mid);
    let diff = a1.value() - a2.value();
    let q = (&(&diff * w.as_cmatrix()) * &diff.adjoint()).scale_re(0.25);
    let defect = (&(&s - &l) - &q).fro_norm();

    let im_sum = imag_part(&(a1.value() + a2.value()));
    let resid = im_sum
        .scale_re(spec.radius * spec.radius / 2.0)
        .sub(&HermMatrix::new(&s));
    Ok((defect, resid.min_eigenvalue()?))
}

/// Rejection sampler for ball members: `a = c + (Im c)^{1/2} g (Im c)^{1/2}`
/// with `g` drawn in a norm ball that shrinks until acceptance. Affine
/// covariant and reaches the boundary shell.
pub fn sample_member(rng: &mut ChaCha8Rng, spec: &BallSpec) -> Result<HalfPlanePoint> {
    let n = spec.level();
    let c = &spec.center;
    let root = herm_sqrt(&c.imag())?;
    let mut scale = 1.5 * spec.radius;
    for attempt in 0..400 {
        let g = sampling::gaussian_matrix(rng, n);
        let g_norm = op_norm(&g);
        if g_norm < 1e-12 {
            continue;
        }
        let u: f64 = rand::Rng::random(rng);
        let t = u * scale / g_norm;
        let bump = &(root.as_cmatrix() * &g.scale_re(t)) * root.as_cmatrix();
        let candidate = c.value() + &bump;
        if let Ok(point) = HalfPlanePoint::new(candidate) {
            if ball_distance(c, &point)? <= spec.radius {
                return Ok(point);
            }
        }
        if attempt % 4 == 3 {
            scale *= 0.8;
        }
    }
    Err(Error::Precondition(
        "member sampler failed to accept after 400 attempts".into(),
    ))
}

/// Constructs a point at prescribed distance from the center along the
/// direction `g`, by bisection on `a(t) = c + t (Im c)^{1/2} g (Im c)^{1/2}`.
pub fn point_at_distance(
    spec: &BallSpec,
    g: &CMatrix,
    target: f64,
) -> Result<HalfPlanePoint> {
    if !(target >= 0.0) || !target.is_finite() {
        return Err(Error::InvalidParam(format!("bad target distance {target}")));
    }
    let c = &spec.center;
    let root = herm_sqrt(&c.imag())?;
    let point_at = |t: f64| -> Option<HalfPlanePoint> {
        let bump = &(root.as_cmatrix() * &g.scale_re(t)) * root.as_cmatrix();
        HalfPlanePoint::new(c.value() + &bump).ok()
    };
    let dist_at = |p: &HalfPlanePoint| ball_distance(c, p);

    if target == 0.0 {
        return point_at(0.0).ok_or_else(|| Error::Precondition("center invalid".into()));
    }

    // grow until the distance exceeds the target or the half-plane is left
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut hi_valid_above = None;
    for _ in 0..200 {
        match point_at(hi) {
            Some(p) => {
                let d = dist_at(&p)?;
                if d >= target {
                    hi_valid_above = Some(hi);
                    break;
                }
                lo = hi;
                hi *= 2.0;
            }
            None => {
                // invalid: the distance blows up before this point; bisect back
                // towards the valid region until the value exceeds the target
                let mut bad = hi;
                let mut found = None;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + bad);
                    match point_at(mid) {
                        Some(p) => {
                            let d = dist_at(&p)?;
                            if d >= target {
                                found = Some(mid);
                                break;
                            }
                            lo = mid;
                        }
                        None => bad = mid,
                    }
                    if bad - lo < 1e-300 {
                        break;
                    }
                }
                hi_valid_above = found;
                break;
            }
        }
    }
    let mut hi = hi_valid_above.ok_or_else(|| {
        Error::Precondition("no point at the requested distance along this direction".into())
    })?;

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = point_at(mid).ok_or_else(|| {
            Error::Precondition("direction left the half-plane during bisection".into())
        })?;
        if dist_at(&p)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    point_at(hi).ok_or_else(|| Error::Precondition("bisection endpoint invalid".into()))
}

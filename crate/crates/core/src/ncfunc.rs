//! Level-graded matrix functions and their block difference-differential
//! operators.
//!
//! Four generator families are provided: Moebius transforms with real
//! `SL_2` coefficients, Nevanlinna-Pick sums with finitely many real poles,
//! operatorial realizations built from projections against a selfadjoint
//! operator, and plain polynomials (testing only; not half-plane self-maps).
//!
//! The first difference operator is extracted from the evaluation of `f` on
//! `[[a, eps*b], [0, c]]`: the off-diagonal block of the value, divided by
//! `eps`, is exact by linearity. `eps` is chosen so the block argument sits
//! strictly inside the half-plane.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    c64, extract_block, herm_inv_sqrt, imag_part, inv, op_norm, upper_block2, CMatrix,
    HermMatrix, MatrixJson, C64,
};

/// Whether a family is a certified half-plane self-map or admitted only to
/// provide closed-form oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    HalfPlaneSelfMap,
    TestOnly,
}

/// Real-coefficient fractional-linear map `z -> (az + b) / (cz + d)`,
/// normalized to determinant one.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl MoebiusParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::InvalidParam(format!(
                "moebius determinant must be positive and finite, got {det}"
            )));
        }
        let s = det.sqrt().recip();
        Ok(MoebiusParams {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        })
    }

    pub fn coefficients(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }
}

/// `f(z) = s + t z + sum_k w_k (r_k - z)^{-1}` with `t >= 0`, `w_k > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NevanlinnaPickParams {
    s: f64,
    t: f64,
    poles: Vec<f64>,
    weights: Vec<f64>,
}

impl NevanlinnaPickParams {
    pub fn new(s: f64, t: f64, poles: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if poles.len() != weights.len() {
            return Err(Error::InvalidParam(format!(
                "poles/weights length mismatch: {} vs {}",
                poles.len(),
                weights.len()
            )));
        }
        if t < 0.0 || !t.is_finite() {
            return Err(Error::InvalidParam(format!(
                "linear coefficient must be nonnegative, got {t}"
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParam("weights must be strictly positive".into()));
        }
        if poles.iter().any(|p| !p.is_finite()) || !s.is_finite() {
            return Err(Error::InvalidParam("parameters must be finite".into()));
        }
        let total = t + weights.iter().sum::<f64>();
        if !(total > 0.0) {
            return Err(Error::InvalidParam(
                "need t + sum of weights > 0 for a nonconstant map".into(),
            ));
        }
        Ok(NevanlinnaPickParams { s, t, poles, weights })
    }

    pub fn shift(&self) -> f64 {
        self.s
    }

    pub fn linear(&self) -> f64 {
        self.t
    }

    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Polynomial with complex coefficients, `coeffs[j]` multiplying `z^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialParams {
    coeffs: Vec<C64>,
}

impl PolynomialParams {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParam("polynomial needs at least one coefficient".into()));
        }
        if coeffs
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidParam("polynomial coefficients must be finite".into()));
        }
        Ok(PolynomialParams { coeffs })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }
}

/// Operatorial realization `h(z) = s + <M(z) v, v>` over `C^{dim_n + dim_m}`,
/// with an orthogonal basis partition in place of dense projections, so the
/// projections are exactly orthogonal by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LoewnerRealization {
    dim_n: usize,
    dim_m: usize,
    a_op: HermMatrix,
    partition: Vec<Vec<usize>>,
    v: Vec<C64>,
    s: f64,
}

impl LoewnerRealization {
    pub fn new(
        dim_n: usize,
        dim_m: usize,
        a_op: HermMatrix,
        partition: Vec<Vec<usize>>,
        v: Vec<C64>,
        s: f64,
    ) -> Result<Self> {
        let total = dim_n + dim_m;
        if total == 0 {
            return Err(Error::InvalidParam("realization space must be nonempty".into()));
        }
        if a_op.level() != dim_m {
            return Err(Error::Dimension(format!(
                "selfadjoint operator must act on the {}-dimensional block, got level {}",
                dim_m,
                a_op.level()
            )));
        }
        if partition.is_empty() {
            return Err(Error::InvalidParam("partition needs at least one group".into()));
        }
        let mut seen = vec![false; total];
        for group in &partition {
            if group.is_empty() {
                return Err(Error::InvalidParam("partition groups must be nonempty".into()));
            }
            for &i in group {
                if i >= total {
                    return Err(Error::InvalidParam(format!(
                        "partition index {i} out of range for dimension {total}"
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidParam(format!(
                        "partition index {i} repeated; projections must be orthogonal"
                    )));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !*s) {
            return Err(Error::InvalidParam(
                "partition must cover the whole space; projections must sum to the identity".into(),
            ));
        }
        if v.len() != total {
            return Err(Error::Dimension(format!(
                "state vector has length {}, expected {total}",
                v.len()
            )));
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-14) {
            return Err(Error::InvalidParam("state vector must be nonzero".into()));
        }
        let v = v.iter().map(|z| z / norm).collect();
        if !s.is_finite() {
            return Err(Error::InvalidParam("shift must be finite".into()));
        }
        Ok(LoewnerRealization {
            dim_n,
            dim_m,
            a_op,
            partition,
            v,
            s,
        })
    }

    pub fn variables(&self) -> usize {
        self.partition.len()
    }

    pub fn space_dim(&self) -> usize {
        self.dim_n + self.dim_m
    }

    /// Group index of each basis vector.
    fn group_of(&self) -> Vec<usize> {
        let mut g = vec![0usize; self.space_dim()];
        for (j, group) in self.partition.iter().enumerate() {
            for &i in group {
                g[i] = j;
            }
        }
        g
    }

    /// `kron(m, I_k)` in the (space-outer, level-inner) index ordering.
    fn kron_space(&self, m: &DMatrix<C64>, k: usize) -> DMatrix<C64> {
        let d = self.space_dim();
        let mut out = DMatrix::from_element(d * k, d * k, c64(0.0, 0.0));
        for r in 0..d {
            for c in 0..d {
                let z = m[(r, c)];
                if z != c64(0.0, 0.0) {
                    for p in 0..k {
                        out[(r * k + p, c * k + p)] = z;
                    }
                }
            }
        }
        out
    }

    fn structure_matrices(&self) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
        let d = self.space_dim();
        let nn = self.dim_n;
        let mut e = DMatrix::from_element(d, d, c64(0.0, 0.0));
        let mut f = DMatrix::from_element(d, d, c64(0.0, 0.0));
        let mut w = DMatrix::from_element(d, d, c64(0.0, 0.0));
        for i in 0..nn {
            e[(i, i)] = c64(1.0, 0.0);
            w[(i, i)] = c64(0.0, -1.0);
        }
        for i in 0..self.dim_m {
            for j in 0..self.dim_m {
                let a_ij = self.a_op.as_cmatrix().entry(i, j);
                e[(nn + i, nn + j)] = a_ij;
                w[(nn + i, nn + j)] = a_ij * c64(0.0, -1.0);
            }
            f[(nn + i, nn + i)] = c64(1.0, 0.0);
            w[(nn + i, nn + i)] += c64(1.0, 0.0);
        }
        // w = diag(-i on the first block, 1 - iA on the second); always invertible.
        let w_inv = w
            .clone()
            .try_inverse()
            .expect("1 - iA is invertible for selfadjoint A");
        (e, f, w, w_inv)
    }

    /// The operator-valued kernel evaluated on a tuple of level-`k` matrices.
    pub fn kernel(&self, components: &[CMatrix]) -> Result<CMatrix> {
        let nvars = self.variables();
        if components.len() != nvars {
            return Err(Error::Dimension(format!(
                "expected {} tuple components, got {}",
                nvars,
                components.len()
            )));
        }
        let k = components[0].level();
        if components.iter().any(|c| c.level() != k) {
            return Err(Error::Dimension("tuple components must share one level".into()));
        }
        let d = self.space_dim();
        let group = self.group_of();
        // sum_j P_j (x) a_j is block diagonal over the space index.
        let mut s_mat = DMatrix::from_element(d * k, d * k, c64(0.0, 0.0));
        for (di, &g) in group.iter().enumerate() {
            let a = components[g].as_dmatrix();
            for p in 0..k {
                for q in 0..k {
                    s_mat[(di * k + p, di * k + q)] = a[(p, q)];
                }
            }
        }
        let (e, f, w, w_inv) = self.structure_matrices();
        let e_big = self.kron_space(&e, k);
        let f_big = self.kron_space(&f, k);
        let w_big = self.kron_space(&w, k);
        let w_inv_big = self.kron_space(&w_inv, k);

        let middle = &e_big - &s_mat * &f_big;
        let middle_inv = inv(&CMatrix::from_dmatrix(middle)).map_err(|err| match err {
            Error::Singular { sv_min } => Error::Domain(format!(
                "singular resolvent factor in realization kernel: smallest singular value {sv_min:.6e}"
            )),
            Error::IllConditioned { cond, .. } => Error::Domain(format!(
                "resolvent factor in realization kernel beyond condition guard: cond {cond:.6e}"
            )),
            other => other,
        })?;
        let right = &s_mat * &e_big + &f_big;
        let m = &w_big * middle_inv.as_dmatrix() * &right * &w_inv_big;
        Ok(CMatrix::from_dmatrix(m))
    }

    /// Compression `s + (phi_v (x) Id_k)(kernel)`.
    fn compress(&self, kernel: &CMatrix, k: usize) -> CMatrix {
        let d = self.space_dim();
        let mut out = DMatrix::from_element(k, k, c64(0.0, 0.0));
        let m = kernel.as_dmatrix();
        for p in 0..k {
            for q in 0..k {
                let mut acc = c64(0.0, 0.0);
                for di in 0..d {
                    for dj in 0..d {
                        acc += self.v[di].conj() * m[(di * k + p, dj * k + q)] * self.v[dj];
                    }
                }
                if p == q {
                    acc += c64(self.s, 0.0);
                }
                out[(p, q)] = acc;
            }
        }
        CMatrix::from_dmatrix(out)
    }
}

/// Tuple of same-level half-plane points, one per realization variable.
#[derive(Debug, Clone)]
pub struct NCPointTuple {
    level: usize,
    components: Vec<CMatrix>,
}

impl NCPointTuple {
    pub fn new(components: Vec<CMatrix>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Dimension("tuple must have at least one component".into()));
        }
        let level = components[0].level();
        for (j, c) in components.iter().enumerate() {
            if c.level() != level {
                return Err(Error::Dimension(format!(
                    "component {j} has level {}, expected {level}",
                    c.level()
                )));
            }
            let min_eig = imag_part(c).min_eigenvalue()?;
            if min_eig <= 0.0 {
                return Err(Error::Domain(format!(
                    "component {j} not in the half-plane: Im min eigenvalue {min_eig:.6e}"
                )));
            }
        }
        Ok(NCPointTuple { level, components })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn components(&self) -> &[CMatrix] {
        &self.components
    }

    /// Componentwise direct sum of two tuples.
    pub fn direct_sum(&self, other: &NCPointTuple) -> Result<NCPointTuple> {
        if self.components.len() != other.components.len() {
            return Err(Error::Dimension("tuples must have the same arity".into()));
        }
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        NCPointTuple::new(comps)
    }
}

/// A matrix function valid at every level, tagged by generator family.
#[derive(Debug, Clone, PartialEq)]
pub enum NCFunction {
    Moebius(MoebiusParams),
    NevanlinnaPick(NevanlinnaPickParams),
    Loewner(LoewnerRealization),
    Polynomial(PolynomialParams),
}

impl NCFunction {
    pub fn identity() -> Self {
        NCFunction::Moebius(MoebiusParams::new(1.0, 0.0, 0.0, 1.0).unwrap())
    }

    /// `z -> -1/z`, the standard involution of the half-plane.
    pub fn neg_inverse() -> Self {
        NCFunction::Moebius(MoebiusParams::new(0.0, -1.0, 1.0, 0.0).unwrap())
    }

    pub fn moebius(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Ok(NCFunction::Moebius(MoebiusParams::new(a, b, c, d)?))
    }

    pub fn nevanlinna_pick(s: f64, t: f64, poles: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Ok(NCFunction::NevanlinnaPick(NevanlinnaPickParams::new(
            s, t, poles, weights,
        )?))
    }

    pub fn polynomial(coeffs: Vec<C64>) -> Result<Self> {
        Ok(NCFunction::Polynomial(PolynomialParams::new(coeffs)?))
    }

    /// `z -> z + shift` with a complex shift; testing family.
    pub fn affine_shift(shift: C64) -> Self {
        NCFunction::Polynomial(PolynomialParams::new(vec![shift, c64(1.0, 0.0)]).unwrap())
    }

    pub fn loewner(r: LoewnerRealization) -> Self {
        NCFunction::Loewner(r)
    }

    pub fn domain_kind(&self) -> DomainKind {
        match self {
            NCFunction::Polynomial(_) => DomainKind::TestOnly,
            _ => DomainKind::HalfPlaneSelfMap,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            NCFunction::Moebius(_) => "moebius",
            NCFunction::NevanlinnaPick(_) => "nevanlinna-pick",
            NCFunction::Loewner(_) => "loewner-realization",
            NCFunction::Polynomial(_) => "polynomial",
        }
    }
}

fn domain_err(context: &str, err: Error) -> Error {
    match err {
        Error::Singular { sv_min } => Error::Domain(format!(
            "{context}: singular, smallest singular value {sv_min:.6e}"
        )),
        Error::IllConditioned { cond, .. } => {
            Error::Domain(format!("{context}: beyond condition guard, cond {cond:.6e}"))
        }
        other => other,
    }
}

/// Evaluates `f` on a square matrix argument.
///
/// The argument is not required to lie in the half-plane: upper-triangular
/// block arguments with half-plane diagonal blocks are the standard extension
/// of the domain, and the families evaluate anywhere their resolvent factors
/// stay away from singular.
pub fn eval(f: &NCFunction, x: &CMatrix) -> Result<CMatrix> {
    let n = x.level();
    match f {
        NCFunction::Moebius(p) => {
            let (a, b, c, d) = (p.a, p.b, p.c, p.d);
            let num = &x.scale_re(a) + &CMatrix::identity(n).scale_re(b);
            let den = &x.scale_re(c) + &CMatrix::identity(n).scale_re(d);
            let den_inv = inv(&den).map_err(|e| domain_err("moebius denominator", e))?;
            Ok(&num * &den_inv)
        }
        NCFunction::NevanlinnaPick(p) => {
            let mut acc = &CMatrix::identity(n).scale_re(p.s) + &x.scale_re(p.t);
            for (rk, wk) in p.poles.iter().zip(&p.weights) {
                let res = &CMatrix::identity(n).scale_re(*rk) - x;
                let res_inv =
                    inv(&res).map_err(|e| domain_err(&format!("resolvent at pole {rk}"), e))?;
                acc = &acc + &res_inv.scale_re(*wk);
            }
            Ok(acc)
        }
        NCFunction::Loewner(r) => {
            let comps: Vec<CMatrix> = (0..r.variables()).map(|_| x.clone()).collect();
            let kernel = r.kernel(&comps)?;
            Ok(r.compress(&kernel, n))
        }
        NCFunction::Polynomial(p) => {
            let mut acc = CMatrix::identity(n).scale(*p.coeffs.last().unwrap());
            for c in p.coeffs.iter().rev().skip(1) {
                acc = &(&acc * x) + &CMatrix::identity(n).scale(*c);
            }
            Ok(acc)
        }
    }
}

/// Evaluates a realization on a tuple, checking that the kernel has strictly
/// positive imaginary part.
pub fn eval_realization(r: &LoewnerRealization, a: &NCPointTuple) -> Result<CMatrix> {
    let kernel = r.kernel(a.components())?;
    let min_eig = imag_part(&kernel).min_eigenvalue()?;
    if min_eig <= 0.0 {
        return Err(Error::Domain(format!(
            "realization kernel lost positivity: Im min eigenvalue {min_eig:.6e}"
        )));
    }
    Ok(r.compress(&kernel, a.level()))
}

/// `|| (Im a)^{-1/2} b (Im c)^{-1/2} ||`; the block `[[a, b], [0, c]]` has
/// strictly positive imaginary part exactly when this is `< 2`.
pub fn block_criterion_norm(a: &CMatrix, c: &CMatrix, b: &DMatrix<C64>) -> Result<f64> {
    let ia = herm_inv_sqrt(&imag_part(a))
        .map_err(|e| domain_err("imaginary part of the first block point", e))?;
    let ic = herm_inv_sqrt(&imag_part(c))
        .map_err(|e| domain_err("imaginary part of the second block point", e))?;
    let m = ia.as_cmatrix().as_dmatrix() * b * ic.as_cmatrix().as_dmatrix();
    Ok(op_norm(&CMatrix::from_dmatrix(m)))
}

fn require_half_plane(x: &CMatrix, what: &str) -> Result<()> {
    let min_eig = imag_part(x).min_eigenvalue()?;
    if min_eig <= 0.0 {
        return Err(Error::Domain(format!(
            "{what} outside the half-plane: Im min eigenvalue {min_eig:.6e}"
        )));
    }
    Ok(())
}

/// Admissible off-diagonal scale for the 2x2 block argument.
fn delta_scale(f: &NCFunction, a: &CMatrix, c: &CMatrix, b: &DMatrix<C64>) -> Result<f64> {
    if f.domain_kind() == DomainKind::TestOnly {
        return Ok(1.0);
    }
    require_half_plane(a, "first argument of the difference operator")?;
    require_half_plane(c, "second argument of the difference operator")?;
    let k = block_criterion_norm(a, c, b)?;
    Ok(1.0 / (1.0 + k))
}

#[doc(hidden)]
pub fn delta_f_rect_with_eps(
    f: &NCFunction,
    a: &CMatrix,
    c: &CMatrix,
    b: &DMatrix<C64>,
    eps: f64,
) -> Result<DMatrix<C64>> {
    let n = a.level();
    let m = c.level();
    let scaled = b.map(|z| z * eps);
    let arg = upper_block2(a, &scaled, c)?;
    let val = eval(f, &arg)?;
    let block = extract_block(&val, 0, n, n, m);
    Ok(block.map(|z| z / eps))
}

/// First difference operator on a rectangular direction.
pub fn delta_f_rect(
    f: &NCFunction,
    a: &CMatrix,
    c: &CMatrix,
    b: &DMatrix<C64>,
) -> Result<DMatrix<C64>> {
    if b.nrows() != a.level() || b.ncols() != c.level() {
        return Err(Error::Dimension(format!(
            "direction must be {}x{}, got {}x{}",
            a.level(),
            c.level(),
            b.nrows(),
            b.ncols()
        )));
    }
    let eps = delta_scale(f, a, c, b)?;
    delta_f_rect_with_eps(f, a, c, b, eps)
}

/// First difference operator at equal levels.
pub fn delta_f(f: &NCFunction, a: &CMatrix, c: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.level() != c.level() {
        return Err(Error::Dimension(format!(
            "difference operator at equal levels only: {} vs {}",
            a.level(),
            c.level()
        )));
    }
    let out = delta_f_rect(f, a, c, b.as_dmatrix())?;
    Ok(CMatrix::from_dmatrix(out))
}

/// Frechet derivative: the difference operator on the diagonal.
pub fn derivative(f: &NCFunction, a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    delta_f(f, a, a, b)
}

#[doc(hidden)]
pub fn delta2_f_with_eps(
    f: &NCFunction,
    a: &CMatrix,
    c: &CMatrix,
    e: &CMatrix,
    b: &DMatrix<C64>,
    d: &DMatrix<C64>,
    eps: f64,
) -> Result<DMatrix<C64>> {
    let (n, m, p) = (a.level(), c.level(), e.level());
    if b.nrows() != n || b.ncols() != m || d.nrows() != m || d.ncols() != p {
        return Err(Error::Dimension("second difference: inconsistent block shapes".into()));
    }
    let total = n + m + p;
    let mut arg = DMatrix::from_element(total, total, c64(0.0, 0.0));
    arg.view_mut((0, 0), (n, n)).copy_from(a.as_dmatrix());
    arg.view_mut((n, n), (m, m)).copy_from(c.as_dmatrix());
    arg.view_mut((n + m, n + m), (p, p)).copy_from(e.as_dmatrix());
    arg.view_mut((0, n), (n, m)).copy_from(&b.map(|z| z * eps));
    arg.view_mut((n, n + m), (m, p)).copy_from(&d.map(|z| z * eps));
    let val = eval(f, &CMatrix::from_dmatrix(arg))?;
    let corner = extract_block(&val, 0, n + m, n, p);
    Ok(corner.map(|z| z / (eps * eps)))
}

/// Second difference operator: corner block of the evaluation on the 3x3
/// upper-triangular argument, divided by `eps^2` (exact by bilinearity).
pub fn delta2_f_rect(
    f: &NCFunction,
    a: &CMatrix,
    c: &CMatrix,
    e: &CMatrix,
    b: &DMatrix<C64>,
    d: &DMatrix<C64>,
) -> Result<DMatrix<C64>> {
    let eps = if f.domain_kind() == DomainKind::TestOnly {
        1.0
    } else {
        require_half_plane(a, "first argument of the second difference")?;
        require_half_plane(c, "middle argument of the second difference")?;
        require_half_plane(e, "last argument of the second difference")?;
        let k1 = block_criterion_norm(a, c, b)?;
        let k2 = block_criterion_norm(c, e, d)?;
        1.0 / (1.0 + k1.hypot(k2))
    };
    delta2_f_with_eps(f, a, c, e, b, d, eps)
}

/// Second difference operator at equal levels.
pub fn delta2_f(
    f: &NCFunction,
    a: &CMatrix,
    c: &CMatrix,
    e: &CMatrix,
    b: &CMatrix,
    d: &CMatrix,
) -> Result<CMatrix> {
    let out = delta2_f_rect(f, a, c, e, b.as_dmatrix(), d.as_dmatrix())?;
    Ok(CMatrix::from_dmatrix(out))
}

/// Scalar (level-one) evaluation, used by the classical boundary oracle.
pub fn eval_scalar(f: &NCFunction, z: C64) -> Result<C64> {
    match f {
        NCFunction::Moebius(p) => {
            let den = z * p.c + p.d;
            if den.norm() < 1e-300 {
                return Err(Error::Domain("moebius denominator vanished".into()));
            }
            Ok((z * p.a + p.b) / den)
        }
        NCFunction::NevanlinnaPick(p) => {
            let mut acc = c64(p.s, 0.0) + z * p.t;
            for (rk, wk) in p.poles.iter().zip(&p.weights) {
                let den = c64(*rk, 0.0) - z;
                if den.norm() < 1e-300 {
                    return Err(Error::Domain(format!("evaluation at the pole {rk}")));
                }
                acc += c64(*wk, 0.0) / den;
            }
            Ok(acc)
        }
        NCFunction::Polynomial(p) => {
            let mut acc = *p.coeffs.last().unwrap();
            for c in p.coeffs.iter().rev().skip(1) {
                acc = acc * z + c;
            }
            Ok(acc)
        }
        NCFunction::Loewner(_) => {
            let v = eval(f, &CMatrix::scalar(z))?;
            Ok(v.entry(0, 0))
        }
    }
}

/// Scalar derivative: closed forms per family, central difference for the
/// realization family.
pub fn derivative_scalar(f: &NCFunction, z: C64) -> Result<C64> {
    match f {
        NCFunction::Moebius(p) => {
            let den = z * p.c + p.d;
            if den.norm() < 1e-300 {
                return Err(Error::Domain("moebius denominator vanished".into()));
            }
            // determinant is one after normalization
            Ok(c64(1.0, 0.0) / (den * den))
        }
        NCFunction::NevanlinnaPick(p) => {
            let mut acc = c64(p.t, 0.0);
            for (rk, wk) in p.poles.iter().zip(&p.weights) {
                let den = c64(*rk, 0.0) - z;
                if den.norm() < 1e-300 {
                    return Err(Error::Domain(format!("evaluation at the pole {rk}")));
                }
                acc += c64(*wk, 0.0) / (den * den);
            }
            Ok(acc)
        }
        NCFunction::Polynomial(p) => {
            let mut acc = c64(0.0, 0.0);
            for (j, c) in p.coeffs.iter().enumerate().skip(1) {
                acc += *c * (j as f64) * z.powu((j - 1) as u32);
            }
            Ok(acc)
        }
        NCFunction::Loewner(_) => {
            let h = 1e-6 * z.norm().max(1.0);
            let fp = eval_scalar(f, z + c64(h, 0.0))?;
            let fm = eval_scalar(f, z - c64(h, 0.0))?;
            Ok((fp - fm) / (2.0 * h))
        }
    }
}

/// Wire format for function descriptors:
/// `{"family": "...", "params": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum FunctionDescriptor {
    Moebius {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    NevanlinnaPick {
        s: f64,
        t: f64,
        poles: Vec<f64>,
        weights: Vec<f64>,
    },
    LoewnerRealization {
        dim_n: usize,
        dim_m: usize,
        a: MatrixJson,
        partition: Vec<Vec<usize>>,
        v: Vec<[f64; 2]>,
        s: f64,
    },
    Polynomial {
        coeffs: Vec<[f64; 2]>,
    },
}

impl NCFunction {
    pub fn to_descriptor(&self) -> FunctionDescriptor {
        match self {
            NCFunction::Moebius(p) => FunctionDescriptor::Moebius {
                a: p.a,
                b: p.b,
                c: p.c,
                d: p.d,
            },
            NCFunction::NevanlinnaPick(p) => FunctionDescriptor::NevanlinnaPick {
                s: p.s,
                t: p.t,
                poles: p.poles.clone(),
                weights: p.weights.clone(),
            },
            NCFunction::Loewner(r) => FunctionDescriptor::LoewnerRealization {
                dim_n: r.dim_n,
                dim_m: r.dim_m,
                a: r.a_op.as_cmatrix().to_json_value(),
                partition: r.partition.clone(),
                v: r.v.iter().map(|z| [z.re, z.im]).collect(),
                s: r.s,
            },
            NCFunction::Polynomial(p) => FunctionDescriptor::Polynomial {
                coeffs: p.coeffs.iter().map(|z| [z.re, z.im]).collect(),
            },
        }
    }

    pub fn from_descriptor(d: &FunctionDescriptor) -> Result<Self> {
        match d {
            FunctionDescriptor::Moebius { a, b, c, d } => NCFunction::moebius(*a, *b, *c, *d),
            FunctionDescriptor::NevanlinnaPick { s, t, poles, weights } => {
                NCFunction::nevanlinna_pick(*s, *t, poles.clone(), weights.clone())
            }
            FunctionDescriptor::LoewnerRealization {
                dim_n,
                dim_m,
                a,
                partition,
                v,
                s,
            } => {
                let a_mat = CMatrix::from_json_value(a)?;
                let herm = HermMatrix::new(&a_mat);
                // reject descriptors whose stored operator is visibly non-selfadjoint
                if (&a_mat - herm.as_cmatrix()).fro_norm()
                    > 1e-12 * a_mat.fro_norm().max(1.0)
                {
                    return Err(Error::InvalidParam(
                        "realization operator must be selfadjoint".into(),
                    ));
                }
                let vv = v.iter().map(|e| c64(e[0], e[1])).collect();
                Ok(NCFunction::Loewner(LoewnerRealization::new(
                    *dim_n,
                    *dim_m,
                    herm,
                    partition.clone(),
                    vv,
                    *s,
                )?))
            }
            FunctionDescriptor::Polynomial { coeffs } => {
                NCFunction::polynomial(coeffs.iter().map(|e| c64(e[0], e[1])).collect())
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_descriptor()).expect("function descriptor serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: FunctionDescriptor = serde_json::from_str(s)?;
        Self::from_descriptor(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::op_norm;
    use crate::sampling;

    fn approx(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).fro_norm() <= tol
    }

    #[test]
    fn identity_function_fixes_everything() {
        let f = NCFunction::identity();
        let x = sampling::gaussian_matrix(&mut sampling::sample_rng(3, 0), 3);
        let y = eval(&f, &x).unwrap();
        assert!(approx(&y, &x, 1e-14));
    }

    #[test]
    fn inversion_fixes_i() {
        let f = NCFunction::neg_inverse();
        let x = CMatrix::scalar(c64(0.0, 1.0));
        let y = eval(&f, &x).unwrap();
        assert!(approx(&y, &x, 1e-14));
    }

    #[test]
    fn pick_function_at_i() {
        // f(z) = z - 1/z, f(i) = 2i
        let f = NCFunction::nevanlinna_pick(0.0, 1.0, vec![0.0], vec![1.0]).unwrap();
        let y = eval(&f, &CMatrix::scalar(c64(0.0, 1.0))).unwrap();
        assert!((y.entry(0, 0) - c64(0.0, 2.0)).norm() <= 1e-14);
    }

    #[test]
    fn scalar_realization_reduces_to_neg_inverse() {
        // dim_n = 0, dim_m = 1, A = 0, s = 0: the kernel is -1/z.
        let r = LoewnerRealization::new(
            0,
            1,
            HermMatrix::from_real_diag(&[0.0]),
            vec![vec![0]],
            vec![c64(1.0, 0.0)],
            0.0,
        )
        .unwrap();
        let f = NCFunction::Loewner(r);
        let y = eval(&f, &CMatrix::scalar(c64(0.0, 1.0))).unwrap();
        // -1/i = i, inside the upper half-plane
        assert!((y.entry(0, 0) - c64(0.0, 1.0)).norm() <= 1e-12);
    }

    #[test]
    fn realization_respects_tuple_direct_sums() {
        let mut rng = sampling::sample_rng(17, 0);
        let r = LoewnerRealization::new(
            1,
            2,
            sampling::gaussian_hermitian(&mut rng, 2),
            vec![vec![0, 2], vec![1]],
            sampling::unit_vector(&mut rng, 3),
            0.3,
        )
        .unwrap();
        let t1 = NCPointTuple::new(vec![
            sampling::half_plane_point(&mut rng, 2).value().clone(),
            sampling::half_plane_point(&mut rng, 2).value().clone(),
        ])
        .unwrap();
        let t2 = NCPointTuple::new(vec![
            sampling::half_plane_point(&mut rng, 1).value().clone(),
            sampling::half_plane_point(&mut rng, 1).value().clone(),
        ])
        .unwrap();
        let v1 = eval_realization(&r, &t1).unwrap();
        let v2 = eval_realization(&r, &t2).unwrap();
        let v12 = eval_realization(&r, &t1.direct_sum(&t2).unwrap()).unwrap();
        let expected = v1.direct_sum(&v2);
        assert!(approx(&v12, &expected, 1e-10 * (1.0 + expected.fro_norm())));
    }

    #[test]
    fn delta_of_identity_is_identity_map() {
        let f = NCFunction::identity();
        let mut rng = sampling::sample_rng(5, 1);
        let a = sampling::half_plane_point(&mut rng, 2).value().clone();
        let c = sampling::half_plane_point(&mut rng, 2).value().clone();
        let b = sampling::gaussian_matrix(&mut rng, 2);
        let d = delta_f(&f, &a, &c, &b).unwrap();
        assert!(approx(&d, &b, 1e-12 * (1.0 + b.fro_norm())));
    }

    #[test]
    fn delta_of_square_polynomial() {
        let f = NCFunction::polynomial(vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]).unwrap();
        let mut rng = sampling::sample_rng(5, 2);
        let a = sampling::gaussian_matrix(&mut rng, 2);
        let c = sampling::gaussian_matrix(&mut rng, 2);
        let b = sampling::gaussian_matrix(&mut rng, 2);
        let d = delta_f(&f, &a, &c, &b).unwrap();
        let expected = &(&a * &b) + &(&b * &c);
        assert!(approx(&d, &expected, 1e-12 * (1.0 + expected.fro_norm())));
    }

    #[test]
    fn delta_of_inversion_is_resolvent_sandwich() {
        let f = NCFunction::neg_inverse();
        let mut rng = sampling::sample_rng(5, 3);
        let a = sampling::half_plane_point(&mut rng, 2).value().clone();
        let c = sampling::half_plane_point(&mut rng, 2).value().clone();
        let b = sampling::gaussian_matrix(&mut rng, 2);
        let d = delta_f(&f, &a, &c, &b).unwrap();
        let expected = &(&inv(&a).unwrap() * &b) * &inv(&c).unwrap();
        assert!(approx(&d, &expected, 1e-10 * (1.0 + expected.fro_norm())));
    }

    #[test]
    fn derivative_closed_forms() {
        let mut rng = sampling::sample_rng(5, 4);
        let a = sampling::half_plane_point(&mut rng, 2).value().clone();
        let b = sampling::gaussian_matrix(&mut rng, 2);

        let id = NCFunction::identity();
        assert!(approx(&derivative(&id, &a, &b).unwrap(), &b, 1e-12));

        let ninv = NCFunction::neg_inverse();
        let ai = inv(&a).unwrap();
        let expected = &(&ai * &b) * &ai;
        assert!(approx(
            &derivative(&ninv, &a, &b).unwrap(),
            &expected,
            1e-10 * (1.0 + expected.fro_norm())
        ));

        let sq = NCFunction::polynomial(vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]).unwrap();
        let expected = &(&a * &b) + &(&b * &a);
        assert!(approx(
            &derivative(&sq, &a, &b).unwrap(),
            &expected,
            1e-12 * (1.0 + expected.fro_norm())
        ));
    }

    #[test]
    fn second_difference_closed_forms() {
        let mut rng = sampling::sample_rng(5, 5);
        let a = sampling::gaussian_matrix(&mut rng, 2);
        let c = sampling::gaussian_matrix(&mut rng, 2);
        let e = sampling::gaussian_matrix(&mut rng, 2);
        let b = sampling::gaussian_matrix(&mut rng, 2);
        let d = sampling::gaussian_matrix(&mut rng, 2);

        let id = NCFunction::polynomial(vec![c64(0.0, 0.0), c64(1.0, 0.0)]).unwrap();
        let z = delta2_f(&id, &a, &c, &e, &b, &d).unwrap();
        assert!(z.fro_norm() <= 1e-13);

        let sq = NCFunction::polynomial(vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]).unwrap();
        let v = delta2_f(&sq, &a, &c, &e, &b, &d).unwrap();
        let expected = &b * &d;
        assert!(approx(&v, &expected, 1e-12 * (1.0 + expected.fro_norm())));

        let cube = NCFunction::polynomial(vec![
            c64(0.0, 0.0),
            c64(0.0, 0.0),
            c64(0.0, 0.0),
            c64(1.0, 0.0),
        ])
        .unwrap();
        let v = delta2_f(&cube, &a, &c, &e, &b, &d).unwrap();
        let expected = &(&(&a * &b) * &d) + &(&(&(&b * &c) * &d) + &(&(&b * &d) * &e));
        assert!(approx(&v, &expected, 1e-11 * (1.0 + expected.fro_norm())));
    }

    #[test]
    fn delta_scale_independence() {
        let f = NCFunction::nevanlinna_pick(0.1, 1.0, vec![2.0, -3.0], vec![0.5, 1.5]).unwrap();
        let mut rng = sampling::sample_rng(5, 6);
        let a = sampling::half_plane_point(&mut rng, 2).value().clone();
        let c = sampling::half_plane_point(&mut rng, 2).value().clone();
        let b = sampling::gaussian_matrix(&mut rng, 2);
        let k = block_criterion_norm(&a, &c, b.as_dmatrix()).unwrap();
        let eps1 = 1.0 / (1.0 + k);
        let eps2 = eps1 / 10.0;
        let d1 = delta_f_rect_with_eps(&f, &a, &c, b.as_dmatrix(), eps1).unwrap();
        let d2 = delta_f_rect_with_eps(&f, &a, &c, b.as_dmatrix(), eps2).unwrap();
        let diff = (&d1 - &d2).map(|z| z.norm_sqr()).sum().sqrt();
        let scale = d1.map(|z| z.norm_sqr()).sum().sqrt();
        assert!(diff <= 1e-10 * (1.0 + scale));
    }

    #[test]
    fn rejects_outside_domain() {
        let f = NCFunction::neg_inverse();
        // lower half-plane point
        let a = CMatrix::scalar(c64(0.0, -1.0));
        let c = CMatrix::scalar(c64(0.0, 1.0));
        let b = CMatrix::scalar(c64(1.0, 0.0));
        assert!(matches!(delta_f(&f, &a, &c, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn moebius_rejects_nonpositive_determinant() {
        assert!(NCFunction::moebius(1.0, 0.0, 0.0, -1.0).is_err());
        assert!(NCFunction::moebius(1.0, 2.0, 0.5, 1.0).is_err()); // determinant zero
        assert!(NCFunction::moebius(2.0, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn descriptor_round_trip() {
        let fs = vec![
            NCFunction::moebius(2.0, 1.0, 1.0, 1.0).unwrap(),
            NCFunction::nevanlinna_pick(0.5, 0.25, vec![1.0, -2.0], vec![0.3, 0.7]).unwrap(),
            NCFunction::polynomial(vec![c64(0.0, 1.0), c64(1.0, 0.0)]).unwrap(),
            NCFunction::Loewner(
                LoewnerRealization::new(
                    1,
                    1,
                    HermMatrix::from_real_diag(&[0.5]),
                    vec![vec![0], vec![1]],
                    vec![c64(0.6, 0.0), c64(0.0, 0.8)],
                    -0.25,
                )
                .unwrap(),
            ),
        ];
        for f in fs {
            let s = f.to_json();
            let back = NCFunction::from_json(&s).unwrap();
            let z = c64(0.3, 0.9);
            let y1 = eval_scalar(&f, z).unwrap();
            let y2 = eval_scalar(&back, z).unwrap();
            assert!((y1 - y2).norm() <= 1e-14);
        }
    }

    #[test]
    fn block_criterion_norm_matches_scalar_case() {
        // a = i, c = i, b = t: criterion norm is exactly t.
        let a = CMatrix::scalar(c64(0.0, 1.0));
        let b = DMatrix::from_element(1, 1, c64(1.9, 0.0));
        let k = block_criterion_norm(&a, &a, &b).unwrap();
        assert!((k - 1.9).abs() <= 1e-14);
    }

    #[test]
    fn evaluation_maps_half_plane_to_half_plane() {
        let fams = vec![
            NCFunction::moebius(1.0, -1.0, 1.0, 2.0).unwrap(),
            NCFunction::nevanlinna_pick(0.0, 0.5, vec![1.5], vec![2.0]).unwrap(),
        ];
        for (i, f) in fams.iter().enumerate() {
            for j in 0..8 {
                let mut rng = sampling::sample_rng(23, (i * 100 + j) as u64);
                let x = sampling::half_plane_point(&mut rng, 3);
                let y = eval(f, x.value()).unwrap();
                let min_eig = imag_part(&y).min_eigenvalue().unwrap();
                assert!(min_eig > -1e-10 * op_norm(&y).max(1.0));
            }
        }
    }
}

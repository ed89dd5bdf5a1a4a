//! Complex square matrices, Hermitian parts, Loewner-order comparisons and
//! 2x2 block positivity criteria.
//!
//! All numerics run on dense `nalgebra` matrices over `Complex<f64>`. Strict
//! operator inequalities are decided with an explicit margin: `x > 0` is
//! tested as `min_eig(x) > tol * max(1, ||x||)`.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Default relative tolerance for strict positivity tests.
pub const DEFAULT_POSDEF_TOL: f64 = 1e-10;

/// Inverses and inverse square roots refuse inputs beyond this condition number.
pub const COND_LIMIT: f64 = 1e12;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Dense complex square matrix at a fixed level `n`.
///
/// Invariants: square, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix(pub(crate) DMatrix<C64>);

impl CMatrix {
    /// Wraps a dense matrix, rejecting non-square or non-finite input.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "expected square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CMatrix(m))
    }

    pub(crate) fn from_dmatrix(m: DMatrix<C64>) -> Self {
        CMatrix(m)
    }

    pub fn from_rows(n: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} entries for level {}, got {}",
                n * n,
                n,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn zeros(n: usize) -> Self {
        CMatrix(DMatrix::from_element(n, n, c64(0.0, 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    /// 1x1 matrix holding a single complex scalar.
    pub fn scalar(z: C64) -> Self {
        CMatrix(DMatrix::from_element(1, 1, z))
    }

    pub fn level(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, z: C64) -> CMatrix {
        CMatrix(self.0.map(|w| w * z))
    }

    pub fn scale_re(&self, t: f64) -> CMatrix {
        CMatrix(self.0.map(|w| w * t))
    }

    /// Frobenius norm; cheap scale estimate used in tolerances.
    pub fn fro_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Direct sum `self (+) other` (block diagonal).
    pub fn direct_sum(&self, other: &CMatrix) -> CMatrix {
        let n = self.level();
        let m = other.level();
        let mut out = DMatrix::from_element(n + m, n + m, c64(0.0, 0.0));
        out.view_mut((0, 0), (n, n)).copy_from(&self.0);
        out.view_mut((n, n), (m, m)).copy_from(&other.0);
        CMatrix(out)
    }

    /// Block-diagonal amplification: `p` copies of `self` along the diagonal.
    pub fn amplify(&self, p: usize) -> CMatrix {
        let n = self.level();
        let mut out = DMatrix::from_element(n * p, n * p, c64(0.0, 0.0));
        for k in 0..p {
            out.view_mut((k * n, k * n), (n, n)).copy_from(&self.0);
        }
        CMatrix(out)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl std::ops::Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl std::ops::Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl std::ops::Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

/// Hermitian matrix. Construction symmetrizes `(x + x*)/2`, so the stored
/// matrix is Hermitian bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix {
    base: CMatrix,
}

impl HermMatrix {
    /// Symmetrizes and wraps. Roundoff in upstream arithmetic breaks exact
    /// symmetry, and the eigensolver requires it.
    pub fn new(m: &CMatrix) -> Self {
        let sym = (&m.0 + m.0.adjoint()).map(|z| z * 0.5);
        HermMatrix { base: CMatrix(sym) }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::from_element(n, n, c64(0.0, 0.0));
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c64(d, 0.0);
        }
        HermMatrix { base: CMatrix(m) }
    }

    pub fn identity(n: usize) -> Self {
        HermMatrix {
            base: CMatrix::identity(n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        HermMatrix {
            base: CMatrix::zeros(n),
        }
    }

    pub fn level(&self) -> usize {
        self.base.level()
    }

    pub fn as_cmatrix(&self) -> &CMatrix {
        &self.base
    }

    pub fn into_cmatrix(self) -> CMatrix {
        self.base
    }

    pub fn scale_re(&self, t: f64) -> HermMatrix {
        HermMatrix {
            base: self.base.scale_re(t),
        }
    }

    pub fn add(&self, other: &HermMatrix) -> HermMatrix {
        HermMatrix {
            base: &self.base + &other.base,
        }
    }

    pub fn sub(&self, other: &HermMatrix) -> HermMatrix {
        HermMatrix {
            base: &self.base - &other.base,
        }
    }

    pub fn amplify(&self, p: usize) -> HermMatrix {
        HermMatrix {
            base: self.base.amplify(p),
        }
    }

    /// Real eigenvalues (ascending) and the corresponding unitary of
    /// eigenvectors.
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<C64>)> {
        let eig = self.base.0.clone().symmetric_eigen();
        if !eig.eigenvalues.iter().all(|v| v.is_finite()) {
            return Err(Error::Eigensolver(format!(
                "non-finite eigenvalues for level-{} matrix (scale {:.3e})",
                self.level(),
                self.base.fro_norm()
            )));
        }
        let mut order: Vec<usize> = (0..self.level()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let n = self.level();
        let mut vectors = DMatrix::from_element(n, n, c64(0.0, 0.0));
        for (k, &i) in order.iter().enumerate() {
            vectors.set_column(k, &eig.eigenvectors.column(i));
        }
        Ok((values, vectors))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let vals = self.eigenvalues()?;
        vals.first().copied().ok_or_else(|| {
            Error::Dimension("empty matrix has no eigenvalues".to_string())
        })
    }

    /// Operator norm of a Hermitian matrix is its spectral radius.
    pub fn spectral_norm(&self) -> Result<f64> {
        let vals = self.eigenvalues()?;
        Ok(vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
    }

    /// Applies a real function to the spectrum: `U f(D) U*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<HermMatrix> {
        let (vals, vecs) = self.eigen()?;
        let n = self.level();
        let mut diag = DMatrix::from_element(n, n, c64(0.0, 0.0));
        for (i, &v) in vals.iter().enumerate() {
            diag[(i, i)] = c64(f(v), 0.0);
        }
        let m = &vecs * diag * vecs.adjoint();
        Ok(HermMatrix::new(&CMatrix(m)))
    }
}

/// Point of the matrix upper half-plane: `Im value` is strictly positive
/// definite, with `im_margin` recording its smallest eigenvalue.
#[derive(Debug, Clone)]
pub struct HalfPlanePoint {
    value: CMatrix,
    im_margin: f64,
}

impl HalfPlanePoint {
    pub fn new(value: CMatrix) -> Result<Self> {
        let im = imag_part(&value);
        let min_eig = im.min_eigenvalue()?;
        if min_eig <= 0.0 {
            return Err(Error::Domain(format!(
                "imaginary part not strictly positive: min eigenvalue {:.6e}",
                min_eig
            )));
        }
        Ok(HalfPlanePoint {
            value,
            im_margin: min_eig,
        })
    }

    /// `re + i*im` with `im` strictly positive definite.
    pub fn from_parts(re: &HermMatrix, im: &HermMatrix) -> Result<Self> {
        let value = &re.as_cmatrix().clone() + &im.as_cmatrix().scale(c64(0.0, 1.0));
        Self::new(value)
    }

    pub fn scalar(z: C64) -> Result<Self> {
        Self::new(CMatrix::scalar(z))
    }

    pub fn level(&self) -> usize {
        self.value.level()
    }

    pub fn value(&self) -> &CMatrix {
        &self.value
    }

    pub fn im_margin(&self) -> f64 {
        self.im_margin
    }

    pub fn imag(&self) -> HermMatrix {
        imag_part(&self.value)
    }

    pub fn real(&self) -> HermMatrix {
        real_part(&self.value)
    }

    pub fn amplify(&self, p: usize) -> HalfPlanePoint {
        HalfPlanePoint {
            value: self.value.amplify(p),
            im_margin: self.im_margin,
        }
    }
}

/// Outcome of a strict-positivity test.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PosdefCertificate {
    pub is_positive: bool,
    pub min_eigenvalue: f64,
    pub tolerance_used: f64,
}

/// `Im b = (b - b*) / 2i`.
pub fn imag_part(b: &CMatrix) -> HermMatrix {
    let m = (&b.0 - b.0.adjoint()).map(|z| z * c64(0.0, -0.5));
    HermMatrix::new(&CMatrix(m))
}

/// `Re b = (b + b*) / 2`.
pub fn real_part(b: &CMatrix) -> HermMatrix {
    let m = (&b.0 + b.0.adjoint()).map(|z| z * 0.5);
    HermMatrix::new(&CMatrix(m))
}

/// Strict positivity via a Hermitian eigensolve. The margin is scaled by
/// `max(1, ||x||)` so the test is meaningful at any magnitude.
pub fn is_positive_definite(x: &HermMatrix, tol: f64) -> Result<PosdefCertificate> {
    if tol < 0.0 {
        return Err(Error::InvalidParam(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    let vals = x.eigenvalues()?;
    let min_eig = vals.first().copied().unwrap_or(0.0);
    let norm = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tolerance_used = tol * norm.max(1.0);
    Ok(PosdefCertificate {
        is_positive: min_eig > tolerance_used,
        min_eigenvalue: min_eig,
        tolerance_used,
    })
}

/// Unique positive square root by spectral calculus.
///
/// Accepts positive semidefinite input up to a small negative margin, which
/// is clamped to zero before taking roots.
pub fn herm_sqrt(x: &HermMatrix) -> Result<HermMatrix> {
    let min_eig = x.min_eigenvalue()?;
    let scale = x.spectral_norm()?.max(1.0);
    if min_eig < -DEFAULT_POSDEF_TOL * scale {
        return Err(Error::NotPositiveDefinite {
            min_eig,
            tol: DEFAULT_POSDEF_TOL * scale,
        });
    }
    x.map_spectrum(|v| v.max(0.0).sqrt())
}

/// Inverse square root; strictly positive input required, with a condition
/// number guard.
pub fn herm_inv_sqrt(x: &HermMatrix) -> Result<HermMatrix> {
    let vals = x.eigenvalues()?;
    let min_eig = vals.first().copied().unwrap_or(0.0);
    let max_eig = vals.last().copied().unwrap_or(0.0);
    if min_eig <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eig,
            tol: 0.0,
        });
    }
    let cond = max_eig / min_eig;
    if cond > COND_LIMIT {
        return Err(Error::IllConditioned {
            cond,
            limit: COND_LIMIT,
        });
    }
    x.map_spectrum(|v| 1.0 / v.sqrt())
}

/// Inverse of a Hermitian positive definite matrix, same guard as
/// [`herm_inv_sqrt`].
pub fn herm_inv(x: &HermMatrix) -> Result<HermMatrix> {
    let vals = x.eigenvalues()?;
    let min_eig = vals.first().copied().unwrap_or(0.0);
    let max_eig = vals.last().copied().unwrap_or(0.0);
    if min_eig <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig, tol: 0.0 });
    }
    let cond = max_eig / min_eig;
    if cond > COND_LIMIT {
        return Err(Error::IllConditioned { cond, limit: COND_LIMIT });
    }
    x.map_spectrum(|v| 1.0 / v)
}

/// Operator norm: the largest singular value.
pub fn op_norm(b: &CMatrix) -> f64 {
    if b.level() == 0 {
        return 0.0;
    }
    let svd = b.0.clone().svd(false, false);
    svd.singular_values.iter().fold(0.0f64, |acc, s| acc.max(*s))
}

/// General inverse with a condition-number guard (largest/smallest singular
/// value).
pub fn inv(b: &CMatrix) -> Result<CMatrix> {
    let svd = b.0.clone().svd(false, false);
    let sv_max = svd.singular_values.iter().fold(0.0f64, |acc, s| acc.max(*s));
    let sv_min = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |acc, s| acc.min(*s));
    if sv_min <= 0.0 || !sv_min.is_finite() {
        return Err(Error::Singular { sv_min });
    }
    let cond = sv_max / sv_min;
    if cond > COND_LIMIT {
        return Err(Error::IllConditioned {
            cond,
            limit: COND_LIMIT,
        });
    }
    b.0.clone()
        .try_inverse()
        .map(CMatrix)
        .ok_or(Error::Singular { sv_min })
}

/// Positivity of the block `[[u, v], [v*, w]]`.
///
/// Preferred route: `u > 0`, `w > 0` and the Schur complement
/// `u - v w^{-1} v* > 0`. When `w` is too close to singular for the Schur
/// route, falls back to an eigensolve of the assembled block.
pub fn block2_is_positive(
    u: &HermMatrix,
    v: &CMatrix,
    w: &HermMatrix,
    tol: f64,
) -> Result<PosdefCertificate> {
    let n = u.level();
    if w.level() != n || v.level() != n {
        return Err(Error::Dimension(format!(
            "block2 levels disagree: u {}, v {}, w {}",
            n,
            v.level(),
            w.level()
        )));
    }
    let cert_u = is_positive_definite(u, tol)?;
    let cert_w = is_positive_definite(w, tol)?;
    if !cert_u.is_positive || !cert_w.is_positive {
        // Not positive regardless of the off-diagonal; report the worse margin.
        let min_eig = cert_u.min_eigenvalue.min(cert_w.min_eigenvalue);
        return Ok(PosdefCertificate {
            is_positive: false,
            min_eigenvalue: min_eig,
            tolerance_used: cert_u.tolerance_used.max(cert_w.tolerance_used),
        });
    }
    match herm_inv(w) {
        Ok(w_inv) => {
            let schur_m =
                u.as_cmatrix().as_dmatrix() - &v.0 * w_inv.as_cmatrix().as_dmatrix() * v.0.adjoint();
            let schur = HermMatrix::new(&CMatrix(schur_m));
            let cert_s = is_positive_definite(&schur, tol)?;
            let min_eig = cert_u
                .min_eigenvalue
                .min(cert_w.min_eigenvalue)
                .min(cert_s.min_eigenvalue);
            Ok(PosdefCertificate {
                is_positive: cert_s.is_positive,
                min_eigenvalue: min_eig,
                tolerance_used: cert_s.tolerance_used,
            })
        }
        Err(_) => block2_is_positive_direct(u, v, w, tol),
    }
}

/// Direct route: eigensolve of the assembled `2n x 2n` block.
pub fn block2_is_positive_direct(
    u: &HermMatrix,
    v: &CMatrix,
    w: &HermMatrix,
    tol: f64,
) -> Result<PosdefCertificate> {
    let block = assemble_block2(
        u.as_cmatrix(),
        v,
        &v.adjoint(),
        w.as_cmatrix(),
    )?;
    is_positive_definite(&HermMatrix::new(&block), tol)
}

/// `[[a11, a12], [a21, a22]]` with consistent block sizes.
pub fn assemble_block2(
    a11: &CMatrix,
    a12: &CMatrix,
    a21: &CMatrix,
    a22: &CMatrix,
) -> Result<CMatrix> {
    let n = a11.level();
    let m = a22.level();
    if a12.0.nrows() != n || a12.0.ncols() != m || a21.0.nrows() != m || a21.0.ncols() != n {
        return Err(Error::Dimension("inconsistent block sizes".to_string()));
    }
    let mut out = DMatrix::from_element(n + m, n + m, c64(0.0, 0.0));
    out.view_mut((0, 0), (n, n)).copy_from(&a11.0);
    out.view_mut((0, n), (n, m)).copy_from(&a12.0);
    out.view_mut((n, 0), (m, n)).copy_from(&a21.0);
    out.view_mut((n, n), (m, m)).copy_from(&a22.0);
    Ok(CMatrix(out))
}

/// Extracts the `(rows x cols)` block at offset `(i0, j0)` as a rectangular
/// dense matrix.
pub fn extract_block(m: &CMatrix, i0: usize, j0: usize, rows: usize, cols: usize) -> DMatrix<C64> {
    m.0.view((i0, j0), (rows, cols)).into_owned()
}

/// Upper-triangular block `[[a, b], [0, c]]`; `b` may be rectangular.
pub fn upper_block2(a: &CMatrix, b: &DMatrix<C64>, c: &CMatrix) -> Result<CMatrix> {
    let n = a.level();
    let m = c.level();
    if b.nrows() != n || b.ncols() != m {
        return Err(Error::Dimension(format!(
            "off-diagonal block must be {}x{}, got {}x{}",
            n,
            m,
            b.nrows(),
            b.ncols()
        )));
    }
    let mut out = DMatrix::from_element(n + m, n + m, c64(0.0, 0.0));
    out.view_mut((0, 0), (n, n)).copy_from(&a.0);
    out.view_mut((0, n), (n, m)).copy_from(b);
    out.view_mut((n, n), (m, m)).copy_from(&c.0);
    Ok(CMatrix(out))
}

/// JSON wire format: `{"n": int, "entries": [[re, im], ...]}` row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
}

impl CMatrix {
    pub fn to_json_value(&self) -> MatrixJson {
        let n = self.level();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.0[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixJson { n, entries }
    }

    pub fn from_json_value(v: &MatrixJson) -> Result<Self> {
        if v.entries.len() != v.n * v.n {
            return Err(Error::Dimension(format!(
                "matrix json: expected {} entries, got {}",
                v.n * v.n,
                v.entries.len()
            )));
        }
        let data: Vec<C64> = v.entries.iter().map(|e| c64(e[0], e[1])).collect();
        CMatrix::from_rows(v.n, &data)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("matrix json serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: MatrixJson = serde_json::from_str(s)?;
        Self::from_json_value(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn imag_part_of_purely_imaginary_scalar() {
        let b = CMatrix::scalar(c64(0.0, 1.0));
        let im = imag_part(&b);
        assert_eq!(im.as_cmatrix().entry(0, 0), c64(1.0, 0.0));
    }

    #[test]
    fn imag_part_of_hermitian_is_zero() {
        let x = HermMatrix::new(
            &CMatrix::from_rows(2, &[c64(1.0, 0.0), c64(0.5, 0.25), c64(0.5, -0.25), c64(2.0, 0.0)])
                .unwrap(),
        );
        let im = imag_part(x.as_cmatrix());
        assert!(im.as_cmatrix().fro_norm() <= 1e-15);
    }

    #[test]
    fn imag_and_real_part_of_generic_matrix() {
        // b = [[2+3i, 1], [0, i]]
        let b = CMatrix::from_rows(2, &[c64(2.0, 3.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0)])
            .unwrap();
        let im = imag_part(&b);
        // Im b = [[3, -i/2], [i/2, 1]]
        assert_eq!(im.as_cmatrix().entry(0, 0), c64(3.0, 0.0));
        assert_eq!(im.as_cmatrix().entry(0, 1), c64(0.0, -0.5));
        assert_eq!(im.as_cmatrix().entry(1, 0), c64(0.0, 0.5));
        assert_eq!(im.as_cmatrix().entry(1, 1), c64(1.0, 0.0));
        let re = real_part(&b);
        // Re b = [[2, 1/2], [1/2, 0]]
        assert_eq!(re.as_cmatrix().entry(0, 0), c64(2.0, 0.0));
        assert_eq!(re.as_cmatrix().entry(0, 1), c64(0.5, 0.0));
        assert_eq!(re.as_cmatrix().entry(1, 0), c64(0.5, 0.0));
        assert_eq!(re.as_cmatrix().entry(1, 1), c64(0.0, 0.0));
    }

    #[test]
    fn recomposition_re_plus_i_im() {
        let b = CMatrix::from_rows(2, &[c64(2.0, 3.0), c64(1.0, -0.5), c64(0.3, 0.0), c64(0.0, 1.0)])
            .unwrap();
        let re = real_part(&b);
        let im = imag_part(&b);
        let back = &re.as_cmatrix().clone() + &im.as_cmatrix().scale(c64(0.0, 1.0));
        assert!((&back - &b).fro_norm() <= 1e-12 * b.fro_norm().max(1.0));
    }

    #[test]
    fn posdef_identity() {
        let cert = is_positive_definite(&HermMatrix::identity(3), 1e-10).unwrap();
        assert!(cert.is_positive);
        assert!(close(cert.min_eigenvalue, 1.0, 1e-12));
    }

    #[test]
    fn posdef_indefinite_2x2() {
        // eigenvalues {-1, 3}
        let x = HermMatrix::new(
            &CMatrix::from_rows(2, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(2.0, 0.0), c64(1.0, 0.0)])
                .unwrap(),
        );
        let cert = is_positive_definite(&x, 1e-10).unwrap();
        assert!(!cert.is_positive);
        assert!(close(cert.min_eigenvalue, -1.0, 1e-12));
        let vals = x.eigenvalues().unwrap();
        assert!(close(vals[0], -1.0, 1e-12) && close(vals[1], 3.0, 1e-12));
    }

    #[test]
    fn posdef_zero_matrix_is_not_positive() {
        let cert = is_positive_definite(&HermMatrix::zeros(2), 1e-10).unwrap();
        assert!(!cert.is_positive);
    }

    #[test]
    fn sqrt_identity_and_diagonal() {
        let s = herm_sqrt(&HermMatrix::identity(2)).unwrap();
        assert!((&s.into_cmatrix() - &CMatrix::identity(2)).fro_norm() <= 1e-14);
        let d = herm_sqrt(&HermMatrix::from_real_diag(&[1.0, 9.0])).unwrap();
        assert!(close(d.as_cmatrix().entry(0, 0).re, 1.0, 1e-12));
        assert!(close(d.as_cmatrix().entry(1, 1).re, 3.0, 1e-12));
    }

    #[test]
    fn sqrt_multiplies_back() {
        let x = HermMatrix::new(
            &CMatrix::from_rows(2, &[c64(2.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)])
                .unwrap(),
        );
        let s = herm_sqrt(&x).unwrap();
        let sq = s.as_cmatrix() * s.as_cmatrix();
        let rel = (&sq - x.as_cmatrix()).fro_norm() / x.as_cmatrix().fro_norm();
        assert!(rel <= 1e-10);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let x = HermMatrix::from_real_diag(&[1.0, -1.0]);
        assert!(matches!(
            herm_sqrt(&x),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn inv_sqrt_consistency() {
        let x = HermMatrix::new(
            &CMatrix::from_rows(
                2,
                &[c64(3.0, 0.0), c64(0.5, 0.5), c64(0.5, -0.5), c64(1.0, 0.0)],
            )
            .unwrap(),
        );
        let is = herm_inv_sqrt(&x).unwrap();
        let prod = &(is.as_cmatrix() * x.as_cmatrix()) * is.as_cmatrix();
        assert!((&prod - &CMatrix::identity(2)).fro_norm() <= 1e-9);
    }

    #[test]
    fn op_norm_examples() {
        assert!(close(op_norm(&CMatrix::identity(3)), 1.0, 1e-12));
        let d = CMatrix::from_rows(2, &[c64(3.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-4.0, 0.0)])
            .unwrap();
        assert!(close(op_norm(&d), 4.0, 1e-12));
        let n = CMatrix::from_rows(2, &[c64(0.0, 0.0), c64(2.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)])
            .unwrap();
        assert!(close(op_norm(&n), 2.0, 1e-12));
    }

    #[test]
    fn op_norm_cstar_identity() {
        let b = CMatrix::from_rows(
            2,
            &[c64(1.0, 2.0), c64(-0.3, 0.7), c64(0.0, 0.1), c64(0.5, -1.0)],
        )
        .unwrap();
        let lhs = op_norm(&(&b.adjoint() * &b));
        let rhs = op_norm(&b).powi(2);
        assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn block2_scalar_examples() {
        let one = HermMatrix::identity(1);
        let half = CMatrix::scalar(c64(0.5, 0.0));
        let cert = block2_is_positive(&one, &half, &one, 1e-10).unwrap();
        assert!(cert.is_positive); // 1 > 0.25

        let v1 = CMatrix::scalar(c64(1.0, 0.0));
        let cert = block2_is_positive(&one, &v1, &one, 1e-10).unwrap();
        assert!(!cert.is_positive); // norm exactly 1: zero in the spectrum

        let v0 = CMatrix::scalar(c64(0.0, 0.0));
        let cert = block2_is_positive(&one, &v0, &one, 1e-10).unwrap();
        assert!(cert.is_positive);
    }

    #[test]
    fn block2_schur_agrees_with_direct() {
        let u = HermMatrix::new(
            &CMatrix::from_rows(2, &[c64(2.0, 0.0), c64(0.2, 0.1), c64(0.2, -0.1), c64(1.5, 0.0)])
                .unwrap(),
        );
        let w = HermMatrix::new(
            &CMatrix::from_rows(2, &[c64(1.0, 0.0), c64(0.1, 0.0), c64(0.1, 0.0), c64(2.0, 0.0)])
                .unwrap(),
        );
        let v = CMatrix::from_rows(2, &[c64(0.4, 0.2), c64(0.0, 0.0), c64(0.1, 0.0), c64(0.3, 0.0)])
            .unwrap();
        let schur = block2_is_positive(&u, &v, &w, 1e-10).unwrap();
        let direct = block2_is_positive_direct(&u, &v, &w, 1e-10).unwrap();
        assert_eq!(schur.is_positive, direct.is_positive);
    }

    #[test]
    fn dimension_error_on_nonsquare() {
        let m = DMatrix::from_element(2, 3, c64(0.0, 0.0));
        assert!(matches!(CMatrix::new(m), Err(Error::Dimension(_))));
    }

    #[test]
    fn nonfinite_rejected() {
        let m = DMatrix::from_element(1, 1, c64(f64::NAN, 0.0));
        assert!(matches!(CMatrix::new(m), Err(Error::NonFinite)));
    }

    #[test]
    fn half_plane_point_requires_strict_imaginary_part() {
        assert!(HalfPlanePoint::scalar(c64(1.0, 0.5)).is_ok());
        assert!(HalfPlanePoint::scalar(c64(1.0, 0.0)).is_err());
        assert!(HalfPlanePoint::scalar(c64(1.0, -0.5)).is_err());
    }

    #[test]
    fn matrix_json_round_trip_bit_exact() {
        let b = CMatrix::from_rows(
            2,
            &[
                c64(0.1, -0.2),
                c64(1.0 / 3.0, 2.0f64.sqrt()),
                c64(-1e-17, 3.5),
                c64(0.0, -0.0),
            ],
        )
        .unwrap();
        let s = b.to_json();
        let back = CMatrix::from_json(&s).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(b.entry(i, j).re.to_bits(), back.entry(i, j).re.to_bits());
                assert_eq!(b.entry(i, j).im.to_bits(), back.entry(i, j).im.to_bits());
            }
        }
    }
}

//! Seeded random matrix generation.
//!
//! A master seed fans out to per-sample seeds through a splitmix64 counter
//! scheme, so batches can run at any parallelism and still produce
//! bit-identical streams per sample index.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hermitian::{c64, CMatrix, HalfPlanePoint, HermMatrix, C64};

/// splitmix64 mixing step; the standard finalizer.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-sample seed derived from a master seed and a sample counter.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// RNG for one sample; order of execution cannot affect the stream.
pub fn sample_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

/// RNG from a raw per-sample seed (used to replay serialized samples).
pub fn raw_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Ginibre matrix: independent entries `(N + iN)/sqrt(2)`.
pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let data: Vec<C64> = (0..n * n)
        .map(|_| c64(normal(rng) * inv_sqrt2, normal(rng) * inv_sqrt2))
        .collect();
    CMatrix::from_dmatrix(DMatrix::from_row_slice(n, n, &data))
}

/// Gaussian Hermitian matrix `(G + G*)/2`.
pub fn gaussian_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermMatrix {
    HermMatrix::new(&gaussian_matrix(rng, n))
}

/// Well-conditioned positive definite matrix `I + G G*/n`.
pub fn positive_definite(rng: &mut ChaCha8Rng, n: usize) -> HermMatrix {
    let g = gaussian_matrix(rng, n);
    let gg = &g * &g.adjoint();
    HermMatrix::new(&(&CMatrix::identity(n) + &gg.scale_re(1.0 / n as f64)))
}

/// Random half-plane point: Gaussian Hermitian real part, `I + G G*/n`
/// imaginary part.
pub fn half_plane_point(rng: &mut ChaCha8Rng, n: usize) -> HalfPlanePoint {
    let re = gaussian_hermitian(rng, n);
    let im = positive_definite(rng, n);
    HalfPlanePoint::from_parts(&re, &im).expect("imaginary part is positive by construction")
}

/// Random unit vector in C^n for vector-state checks.
pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| c64(normal(rng), normal(rng))).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.iter().map(|z| z / norm).collect();
        }
    }
}

/// Random unitary from the QR factorization of a Ginibre matrix.
pub fn unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n);
    let qr = g.as_dmatrix().clone().qr();
    CMatrix::from_dmatrix(qr.q())
}

/// Matrix with operator norm exactly `s` (up to unitary roundoff):
/// `s * Q1 * Q2`.
pub fn matrix_with_norm(rng: &mut ChaCha8Rng, n: usize, s: f64) -> CMatrix {
    let q1 = unitary(rng, n);
    let q2 = unitary(rng, n);
    (&q1 * &q2).scale_re(s)
}

/// Invertible matrix with condition number about `cond`: `Q1 D Q2` with
/// singular values log-spaced in `[1/sqrt(cond), sqrt(cond)]`.
pub fn conditioned_matrix(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> CMatrix {
    let q1 = unitary(rng, n);
    let q2 = unitary(rng, n);
    let lo = cond.sqrt().recip();
    let hi = cond.sqrt();
    let mut d = DMatrix::from_element(n, n, c64(0.0, 0.0));
    for i in 0..n {
        let t = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
        d[(i, i)] = c64(lo * (hi / lo).powf(t), 0.0);
    }
    &(&q1 * &CMatrix::from_dmatrix(d)) * &q2
}

/// Re-draws until the Hermitian perturbation `v + delta` stays strictly
/// positive; used for direction matrices `v > 0`.
pub fn positive_direction(rng: &mut ChaCha8Rng, n: usize) -> HermMatrix {
    positive_definite(rng, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{imag_part, is_positive_definite, real_part};

    #[test]
    fn derived_seeds_are_stable() {
        assert_eq!(derive_seed(42, 0), derive_seed(42, 0));
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_ne!(derive_seed(42, 0), derive_seed(43, 0));
    }

    #[test]
    fn sample_streams_reproduce() {
        let a = gaussian_matrix(&mut sample_rng(7, 3), 3);
        let b = gaussian_matrix(&mut sample_rng(7, 3), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn half_plane_points_have_positive_imaginary_part() {
        for i in 0..16 {
            let p = half_plane_point(&mut sample_rng(1, i), 3);
            let cert = is_positive_definite(&p.imag(), 1e-12).unwrap();
            assert!(cert.is_positive);
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let q = unitary(&mut sample_rng(5, 0), 4);
        let prod = &q.adjoint() * &q;
        assert!((&prod - &CMatrix::identity(4)).fro_norm() < 1e-12);
    }

    #[test]
    fn norm_construction_is_exact_enough() {
        for &s in &[0.99, 1.0, 1.01] {
            let a = matrix_with_norm(&mut sample_rng(9, (s * 100.0) as u64), 3, s);
            let nrm = crate::hermitian::op_norm(&a);
            assert!((nrm - s).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_parts_are_consistent() {
        let p = half_plane_point(&mut sample_rng(11, 0), 2);
        let re = real_part(p.value());
        let im = imag_part(p.value());
        let back = &re.as_cmatrix().clone() + &im.as_cmatrix().scale(c64(0.0, 1.0));
        assert!((&back - p.value()).fro_norm() < 1e-13);
    }
}

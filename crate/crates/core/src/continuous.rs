//! Monte Carlo over the complex-Gaussian integral representations of the
//! permanent built from an LU or an SVD factorization.
//!
//! With `φ` standard circular complex Gaussians (`E[φ_j φ̄_k] = δ_jk`), Wick's
//! theorem gives `E[Π_i x_i y_i] = per(X·Y)` whenever `x = X·φ` and
//! `y = Yᵀ·φ̄`. Both estimators below are that identity for a particular
//! factorization of `A`. Their moments grow factorially with `n`.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimator::{Estimator, StreamRng};
use crate::linalg::{lup_decompose, svd_decompose};
use crate::matrix::{Matrix, Scalar};

/// `n` independent standard circular complex Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSampleVector {
    pub values: Vec<Scalar>,
}

/// Real and imaginary parts are independent `N(0, 1/2)`, so `E[|φ|²] = 1` and
/// `E[|φ|^{2k}] = k!`.
pub fn draw_gaussian_vector(n: usize, rng: &mut StreamRng) -> GaussianSampleVector {
    let values = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Scalar::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect();
    GaussianSampleVector { values }
}

fn require_real(a: &Matrix, what: &str) -> Result<usize> {
    let n = a.square_dim(what)?;
    if !a.is_real() {
        return Err(Error::Unsupported(format!("{what} requires a real matrix")));
    }
    Ok(n)
}

/// Integrand `Π_i (Σ_k φ̄_k U_ki)(Σ_j L_ij φ_j)` for `P·A = L·U`.
///
/// Row permutation does not change the permanent, so `per(L·U) = per A`.
pub struct LuEstimator {
    n: usize,
    l: Vec<f64>,
    u: Vec<f64>,
}

impl LuEstimator {
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = require_real(a, "LU Monte Carlo estimator")?;
        let f = lup_decompose(a)?;
        Ok(Self {
            n,
            l: f.l.real_parts(),
            u: f.u.real_parts(),
        })
    }

    pub fn sample_with_draws(&self, rng: &mut StreamRng) -> (Scalar, GaussianSampleVector) {
        let phi = draw_gaussian_vector(self.n, rng);
        let n = self.n;
        let mut acc = Scalar::new(1.0, 0.0);
        for i in 0..n {
            let mut x = Scalar::new(0.0, 0.0);
            // L is unit lower triangular.
            for (j, p) in phi.values.iter().enumerate().take(i + 1) {
                x += p * self.l[i * n + j];
            }
            let mut y = Scalar::new(0.0, 0.0);
            for (k, p) in phi.values.iter().enumerate().take(i + 1) {
                y += p.conj() * self.u[k * n + i];
            }
            acc *= x * y;
        }
        (acc, phi)
    }
}

impl Estimator for LuEstimator {
    fn sample(&self, rng: &mut StreamRng) -> Scalar {
        self.sample_with_draws(rng).0
    }
}

/// Integrand `Π_i (Σ_j U_ij √σ_j φ_j)(Σ_k V_ik √σ_k φ̄_k)` for `A = U·Σ·Vᵀ`,
/// drawing only as many Gaussians as the numerical rank.
pub struct SvdEstimator {
    n: usize,
    rank: usize,
    /// `U_ij √σ_j`, row-major `n × rank`.
    left: Vec<f64>,
    /// `V_ik √σ_k`, row-major `n × rank`.
    right: Vec<f64>,
}

impl SvdEstimator {
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = require_real(a, "SVD Monte Carlo estimator")?;
        let f = svd_decompose(a)?;
        let r = f.rank;
        let mut left = Vec::with_capacity(n * r);
        let mut right = Vec::with_capacity(n * r);
        for i in 0..n {
            for j in 0..r {
                let s = f.sigma[j].sqrt();
                left.push(f.u[(i, j)].re * s);
                right.push(f.v[(i, j)].re * s);
            }
        }
        Ok(Self {
            n,
            rank: r,
            left,
            right,
        })
    }

    /// Gaussian components drawn per sample.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sample_with_draws(&self, rng: &mut StreamRng) -> (Scalar, GaussianSampleVector) {
        let phi = draw_gaussian_vector(self.rank, rng);
        let r = self.rank;
        let mut acc = Scalar::new(1.0, 0.0);
        for i in 0..self.n {
            let mut x = Scalar::new(0.0, 0.0);
            let mut y = Scalar::new(0.0, 0.0);
            for (j, p) in phi.values.iter().enumerate() {
                x += p * self.left[i * r + j];
                y += p.conj() * self.right[i * r + j];
            }
            acc *= x * y;
        }
        (acc, phi)
    }
}

impl Estimator for SvdEstimator {
    fn sample(&self, rng: &mut StreamRng) -> Scalar {
        self.sample_with_draws(rng).0
    }
}

pub fn sample_lu_integrand(a: &Matrix, rng: &mut StreamRng) -> Result<Scalar> {
    Ok(LuEstimator::new(a)?.sample(rng))
}

pub fn sample_svd_integrand(a: &Matrix, rng: &mut StreamRng) -> Result<Scalar> {
    Ok(SvdEstimator::new(a)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::stream_rng;

    #[test]
    fn gaussian_moments() {
        let mut rng = stream_rng(99, 0);
        let n = 1_000_000;
        let (mut m1, mut m2, mut m4, mut m6) = (Scalar::new(0.0, 0.0), 0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = draw_gaussian_vector(1, &mut rng).values[0];
            let a = z.norm_sqr();
            m1 += z;
            m2 += a;
            m4 += a * a;
            m6 += a * a * a;
        }
        let n = n as f64;
        assert!((m1 / n).norm() < 0.01);
        assert!((m2 / n - 1.0).abs() < 0.01);
        assert!((m4 / n - 2.0).abs() < 0.05);
        assert!((m6 / n / 6.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn lu_diagonal_factors() {
        let a = Matrix::diagonal(&[2.0, 3.0]);
        let est = LuEstimator::new(&a).unwrap();
        let mut rng = stream_rng(1, 0);
        let (v, phi) = est.sample_with_draws(&mut rng);
        let want = phi.values[0].norm_sqr() * 2.0 * phi.values[1].norm_sqr() * 3.0;
        assert!((v - Scalar::new(want, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn svd_rank_one_reduces_to_a_single_moment() {
        let est = SvdEstimator::new(&Matrix::ones(3)).unwrap();
        assert_eq!(est.rank(), 1);
        let mut rng = stream_rng(1, 0);
        for _ in 0..10 {
            let (v, phi) = est.sample_with_draws(&mut rng);
            assert_eq!(phi.values.len(), 1);
            let want = phi.values[0].norm_sqr().powi(3);
            assert!((v - Scalar::new(want, 0.0)).norm() < 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn complex_and_non_square_inputs_are_rejected() {
        let mut a = Matrix::identity(2);
        a[(1, 0)] = Scalar::new(0.0, 1.0);
        assert!(matches!(LuEstimator::new(&a), Err(Error::Unsupported(_))));
        assert!(matches!(SvdEstimator::new(&a), Err(Error::Unsupported(_))));
        assert!(matches!(
            LuEstimator::new(&Matrix::zeros(2, 3)),
            Err(Error::Shape(_))
        ));
    }
}

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Scalar};

/// Singular values at or below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

const MAX_SWEEPS: usize = 30;
const ROTATION_TOLERANCE: f64 = 1e-12;

/// `A = U·diag(sigma)·Vᵀ` for a real square `A`, `sigma` nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Matrix,
    pub v: Matrix,
    pub sigma: Vec<f64>,
    pub rank: usize,
    pub sweeps: usize,
}

/// One-sided Jacobi SVD of a real square matrix.
///
/// Columns of a working copy of `A` are orthogonalized pairwise by plane
/// rotations, which are accumulated into `V`. The column norms are the singular
/// values and the normalized columns form `U`.
pub fn svd_decompose(a: &Matrix) -> Result<SvdFactors> {
    let n = a.square_dim("SVD")?;
    if !a.is_real() {
        return Err(Error::Unsupported(
            "SVD is implemented for real matrices only".into(),
        ));
    }
    // Column-major working storage: w[j] is column j.
    let mut w: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].re).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    // Columns shrunk to roundoff level carry no direction worth rotating.
    let frob_sq: f64 = w.iter().map(|c| dot(c, c)).sum();
    let negligible = (f64::EPSILON * f64::EPSILON) * frob_sq;

    let mut sweeps = 0;
    let mut converged = n < 2;
    let mut residual = 0.0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        residual = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || alpha <= negligible || beta <= negligible {
                    continue;
                }
                let off = gamma.abs() / (alpha * beta).sqrt();
                residual = residual.max(off);
                if off <= ROTATION_TOLERANCE {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = residual <= ROTATION_TOLERANCE;
    }
    if !converged {
        return Err(Error::Convergence {
            sweeps: MAX_SWEEPS,
            residual,
        });
    }

    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let top = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().filter(|&&s| s > RANK_TOLERANCE * top).count();

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        if k < rank {
            u_cols.push(w[j].iter().map(|x| x / sigma[k]).collect());
        }
    }
    complete_orthonormal(&mut u_cols, n);

    let mut u = Matrix::zeros(n, n);
    let mut vm = Matrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        for i in 0..n {
            u[(i, k)] = Scalar::new(u_cols[k][i], 0.0);
            vm[(i, k)] = Scalar::new(v[j][i], 0.0);
        }
    }
    Ok(SvdFactors {
        u,
        v: vm,
        sigma,
        rank,
        sweeps,
    })
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

// Extends an orthonormal set of columns to a basis using the unit vectors,
// with two passes of Gram-Schmidt per candidate.
fn complete_orthonormal(cols: &mut Vec<Vec<f64>>, n: usize) {
    let mut e = 0;
    while cols.len() < n && e < n {
        let mut cand: Vec<f64> = (0..n).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
        e += 1;
        for _ in 0..2 {
            for c in cols.iter() {
                let d = dot(c, &cand);
                for (x, y) in cand.iter_mut().zip(c) {
                    *x -= d * y;
                }
            }
        }
        let norm = dot(&cand, &cand).sqrt();
        if norm > 1e-8 {
            cols.push(cand.into_iter().map(|x| x / norm).collect());
        }
    }
}

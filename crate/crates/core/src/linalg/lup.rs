use crate::error::Result;
use crate::matrix::{Matrix, Scalar};
use crate::scaled::ScaledValue;

/// `P·A = L·U` with `L` unit lower triangular and `U` upper triangular.
///
/// `perm[i]` is the row of `A` that ends up in row `i` of `P·A`.
#[derive(Debug, Clone)]
pub struct LupFactors {
    pub l: Matrix,
    pub u: Matrix,
    pub perm: Vec<usize>,
    /// Sign of the permutation, `+1` or `-1`.
    pub parity: i8,
}

impl LupFactors {
    /// `A` with its rows permuted by `perm`, the matrix `L·U` reproduces.
    pub fn permuted(&self, a: &Matrix) -> Matrix {
        a.permute_rows(&self.perm)
    }
}

/// Gaussian elimination with partial pivoting on the largest-magnitude entry
/// of each column. Singular input yields a zero on the diagonal of `U` rather
/// than an error.
pub fn lup_decompose(a: &Matrix) -> Result<LupFactors> {
    let n = a.square_dim("LUP decomposition")?;
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut parity = 1i8;
    let mut l = Matrix::identity(n);

    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, w[(i, k)].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            continue;
        }
        if piv != k {
            for j in 0..n {
                let t = w[(k, j)];
                w[(k, j)] = w[(piv, j)];
                w[(piv, j)] = t;
            }
            for j in 0..k {
                let t = l[(k, j)];
                l[(k, j)] = l[(piv, j)];
                l[(piv, j)] = t;
            }
            perm.swap(k, piv);
            parity = -parity;
        }
        let pivot = w[(k, k)];
        for i in k + 1..n {
            let f = w[(i, k)] / pivot;
            if f == Scalar::new(0.0, 0.0) {
                continue;
            }
            l[(i, k)] = f;
            w[(i, k)] = Scalar::new(0.0, 0.0);
            for j in k + 1..n {
                let t = w[(k, j)];
                w[(i, j)] -= f * t;
            }
        }
    }
    Ok(LupFactors {
        l,
        u: w,
        perm,
        parity,
    })
}

/// Determinant as the signed product of the pivots, accumulated in scaled form.
pub fn determinant(a: &Matrix) -> Result<ScaledValue> {
    let n = a.square_dim("determinant")?;
    let f = lup_decompose(a)?;
    let mut acc = ScaledValue::from_f64(f64::from(f.parity));
    for i in 0..n {
        acc = acc * ScaledValue::from_complex(f.u[(i, i)]);
    }
    Ok(acc)
}

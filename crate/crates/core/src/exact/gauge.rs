//! The ℤₚ gauge sum over all `pⁿ` column phase assignments.

use rayon::prelude::*;

use super::{
    check_n, finish, ExactAlgorithm, ExactOptions, ExactResult, BLOCK_STEPS, GAUGE_ZP_MAX_TERMS,
};
use crate::accum::ComplexAccumulator;
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Scalar};
use crate::roots::RootTable;

/// `(1/pⁿ) Σ_q ω^{-Σq} Π_i Σ_j A_ij ω^{q_j}` over every `q ∈ ℤₚⁿ`.
pub fn per_gauge_zp_full(a: &Matrix, p: u32) -> Result<ExactResult> {
    per_gauge_zp_full_with(a, p, ExactOptions::default())
}

pub(super) fn per_gauge_zp_full_with(
    a: &Matrix,
    p: u32,
    opts: ExactOptions,
) -> Result<ExactResult> {
    if p < 2 {
        return Err(Error::Parameter(format!(
            "phase order p must be >= 2, got {p}"
        )));
    }
    let n = check_n(a, "full Zp gauge sum", usize::MAX, opts)?;
    let terms = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if terms > GAUGE_ZP_MAX_TERMS && !opts.ignore_size_guard {
        return Err(Error::SizeGuard(format!(
            "full Zp gauge sum is limited to p^n <= 2^26, got {p}^{n}"
        )));
    }
    let len = u64::try_from(terms)
        .map_err(|_| Error::SizeGuard(format!("{p}^{n} terms cannot be enumerated")))?;
    let roots = RootTable::new(p);
    let total = gauge_sum(a, &roots, len);
    let scale = (p as f64).powi(n as i32);
    Ok(finish(total / scale, a, terms, ExactAlgorithm::GaugeZp))
}

fn gauge_sum(a: &Matrix, roots: &RootTable, len: u64) -> Scalar {
    let blocks = len.div_ceil(BLOCK_STEPS);
    let parts: Vec<ComplexAccumulator> = (0..blocks)
        .into_par_iter()
        .map(|b| gauge_range(a, roots, b * BLOCK_STEPS, ((b + 1) * BLOCK_STEPS).min(len)))
        .collect();
    let mut acc = ComplexAccumulator::default();
    for part in parts {
        acc.merge(part);
    }
    acc.value()
}

// Partial sums are kept per suffix of columns: level k holds Σ_{j≥k} A_ij ω^{q_j}.
// A carry into digit d rebuilds levels d..0 from level d+1, so each term's row
// sums depend only on its own digits and never on where the walk started.
fn gauge_range(a: &Matrix, roots: &RootTable, start: u64, end: u64) -> ComplexAccumulator {
    let n = a.rows();
    let p = roots.order() as u64;
    let mut acc = ComplexAccumulator::default();
    if start >= end {
        return acc;
    }
    let mut digits = vec![0u64; n];
    let mut rest = start;
    for d in digits.iter_mut() {
        *d = rest % p;
        rest /= p;
    }
    let mut levels = vec![Scalar::new(0.0, 0.0); (n + 1) * n];
    let rebuild = |levels: &mut [Scalar], digits: &[u64], top: usize| {
        for k in (0..=top).rev() {
            let w = roots.pow(digits[k] as i64);
            let (lo, hi) = levels.split_at_mut((k + 1) * n);
            let below = &hi[..n];
            let here = &mut lo[k * n..];
            for i in 0..n {
                here[i] = below[i] + a[(i, k)] * w;
            }
        }
    };
    if n > 0 {
        rebuild(&mut levels, &digits, n - 1);
    }
    let mut digit_sum: u64 = digits.iter().sum();
    let mut idx = start;
    loop {
        let mut prod = roots.pow(-((digit_sum % p) as i64));
        for &s in &levels[..n] {
            prod *= s;
        }
        acc.add(prod);
        idx += 1;
        if idx >= end {
            break;
        }
        let mut d = 0;
        while digits[d] + 1 == p {
            digit_sum -= digits[d];
            digits[d] = 0;
            d += 1;
        }
        digits[d] += 1;
        digit_sum += 1;
        rebuild(&mut levels, &digits, d);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::per_naive;

    #[test]
    fn two_by_two_examples() {
        let j2 = Matrix::ones(2);
        let r = per_gauge_zp_full(&j2, 3).unwrap();
        assert!((r.to_f64() - 2.0).abs() < 1e-14);
        assert_eq!(r.terms_evaluated, 9);
        assert!(r.imaginary_residual < 1e-14);
        let r = per_gauge_zp_full(&j2, 2).unwrap();
        assert_eq!(r.to_f64(), 2.0);
        assert_eq!(r.terms_evaluated, 4);
        let r = per_gauge_zp_full(&Matrix::identity(2), 4).unwrap();
        assert_eq!(r.to_f64(), 1.0);
    }

    #[test]
    fn parameter_and_size_errors() {
        assert!(matches!(
            per_gauge_zp_full(&Matrix::ones(2), 1),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            per_gauge_zp_full(&Matrix::ones(17), 3),
            Err(Error::SizeGuard(_))
        ));
    }

    #[test]
    fn spans_several_blocks() {
        // 4^7 = 16384 terms.
        let a = Matrix::from_rows(&[
            [1.0, 0.5, 0.0, 2.0, 1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0, 0.0, 0.5, 1.0, 0.0],
            [1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 2.0],
            [0.5, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0],
            [0.0, 2.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0],
            [0.0, 1.0, 1.0, 0.5, 1.0, 0.0, 1.0],
        ]);
        let want = per_naive(&a).unwrap().to_f64();
        let got = per_gauge_zp_full(&a, 4).unwrap().to_f64();
        assert!((got - want).abs() < 1e-11 * want, "{got} vs {want}");
    }
}

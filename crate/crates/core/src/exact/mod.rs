//! Exact permanent algorithms.
//!
//! Every algorithm returns an [`ExactResult`] carrying the value, the number of
//! terms summed, and which formula produced it. The defining sum over
//! permutations ([`per_naive`]) is the reference the others are tested against.

mod gauge;
pub mod gray;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Scalar};
use crate::scaled::{scale_pow2, ScaledValue};

pub use gauge::per_gauge_zp_full;
use gray::{KernelScalar, WalkMode, WalkPlan};

pub const NAIVE_MAX_N: usize = 12;
pub const GRAY_MAX_N: usize = 30;
pub const GAUGE_Z2_MAX_N: usize = 26;
/// Upper bound on `pⁿ` for the full ℤₚ gauge sum.
pub const GAUGE_ZP_MAX_TERMS: u128 = 1 << 26;

/// Gray-code steps per work block. Blocks restart their row sums from scratch,
/// so the result does not depend on how blocks are spread over threads.
pub(crate) const BLOCK_STEPS: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactAlgorithm {
    Naive,
    Ryser,
    Glynn,
    GaugeZ2,
    GaugeZp,
}

impl fmt::Display for ExactAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExactAlgorithm::Naive => "naive",
            ExactAlgorithm::Ryser => "ryser",
            ExactAlgorithm::Glynn => "glynn",
            ExactAlgorithm::GaugeZ2 => "gauge-z2",
            ExactAlgorithm::GaugeZp => "gauge-zp",
        })
    }
}

/// Value of an exact computation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub value: ScaledValue,
    pub terms_evaluated: u128,
    pub algorithm: ExactAlgorithm,
    /// Magnitude of the imaginary part dropped from a real input's result.
    pub imaginary_residual: f64,
}

impl ExactResult {
    pub fn to_complex(&self) -> Scalar {
        self.value.to_complex()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExactOptions {
    /// Skip the desk-scale size guards.
    pub ignore_size_guard: bool,
}

fn check_n(a: &Matrix, what: &str, max_n: usize, opts: ExactOptions) -> Result<usize> {
    let n = a.square_dim(what)?;
    if n > max_n && !opts.ignore_size_guard {
        return Err(Error::SizeGuard(format!(
            "{what} is limited to n <= {max_n}, got n = {n}"
        )));
    }
    Ok(n)
}

fn empty_result(algorithm: ExactAlgorithm) -> ExactResult {
    ExactResult {
        value: ScaledValue::ONE,
        terms_evaluated: 1,
        algorithm,
        imaginary_residual: 0.0,
    }
}

/// Sum over all permutations in lexicographic order.
pub fn per_naive(a: &Matrix) -> Result<ExactResult> {
    per_naive_with(a, ExactOptions::default())
}

pub fn per_naive_with(a: &Matrix, opts: ExactOptions) -> Result<ExactResult> {
    let n = check_n(a, "naive permanent", NAIVE_MAX_N, opts)?;
    if n == 0 {
        return Ok(empty_result(ExactAlgorithm::Naive));
    }
    // The first row's column choice splits the permutations into n ordered
    // groups; group sums are merged in that order.
    let parts: Vec<crate::accum::ComplexAccumulator> = (0..n)
        .into_par_iter()
        .map(|c0| {
            let mut acc = crate::accum::ComplexAccumulator::default();
            let mut used = vec![false; n];
            used[c0] = true;
            naive_rec(a, 1, a[(0, c0)], &mut used, &mut acc);
            acc
        })
        .collect();
    let mut total = crate::accum::ComplexAccumulator::default();
    for p in parts {
        total.merge(p);
    }
    let terms = (1..=n as u128).product();
    Ok(finish(total.value(), a, terms, ExactAlgorithm::Naive))
}

fn naive_rec(
    a: &Matrix,
    row: usize,
    prefix: Scalar,
    used: &mut [bool],
    acc: &mut crate::accum::ComplexAccumulator,
) {
    let n = a.rows();
    if row == n {
        acc.add(prefix);
        return;
    }
    for c in 0..n {
        if !used[c] {
            used[c] = true;
            naive_rec(a, row + 1, prefix * a[(row, c)], used, acc);
            used[c] = false;
        }
    }
}

// Real inputs have their (zero) imaginary part stripped and the dropped
// magnitude recorded.
fn finish(value: Scalar, a: &Matrix, terms: u128, algorithm: ExactAlgorithm) -> ExactResult {
    let (value, residual) = if a.is_real() {
        (Scalar::new(value.re, 0.0), value.im.abs())
    } else {
        (value, 0.0)
    };
    ExactResult {
        value: ScaledValue::from_complex(value),
        terms_evaluated: terms,
        algorithm,
        imaginary_residual: residual,
    }
}

fn walk_total<T: KernelScalar>(a: &Matrix, mode: WalkMode) -> Scalar {
    let plan = WalkPlan::<T>::new(a, mode);
    let len = plan.len();
    let blocks = len.div_ceil(BLOCK_STEPS);
    let parts: Vec<T::Acc> = (0..blocks)
        .into_par_iter()
        .map(|b| plan.sum_range(b * BLOCK_STEPS..((b + 1) * BLOCK_STEPS).min(len)))
        .collect();
    let mut acc = T::Acc::default();
    for p in parts {
        T::merge(&mut acc, p);
    }
    T::finish(acc)
}

fn walk(a: &Matrix, mode: WalkMode) -> Scalar {
    if a.is_real() {
        walk_total::<f64>(a, mode)
    } else {
        walk_total::<Scalar>(a, mode)
    }
}

/// Ryser's inclusion-exclusion formula over column subsets, in Gray-code order.
pub fn per_ryser(a: &Matrix) -> Result<ExactResult> {
    per_ryser_with(a, ExactOptions::default())
}

pub fn per_ryser_with(a: &Matrix, opts: ExactOptions) -> Result<ExactResult> {
    let n = check_n(a, "Ryser permanent", GRAY_MAX_N, opts)?;
    if n == 0 {
        return Ok(empty_result(ExactAlgorithm::Ryser));
    }
    let total = walk(a, WalkMode::Subsets);
    let value = if n % 2 == 1 { -total } else { total };
    Ok(finish(value, a, (1u128 << n) - 1, ExactAlgorithm::Ryser))
}

/// Glynn's formula: signed products of row sums over sign vectors with the
/// first sign fixed to `+1`, `2^{n-1}` terms.
pub fn per_glynn(a: &Matrix) -> Result<ExactResult> {
    per_glynn_with(a, ExactOptions::default())
}

pub fn per_glynn_with(a: &Matrix, opts: ExactOptions) -> Result<ExactResult> {
    let n = check_n(a, "Glynn permanent", GRAY_MAX_N, opts)?;
    if n == 0 {
        return Ok(empty_result(ExactAlgorithm::Glynn));
    }
    let total = walk(a, WalkMode::GlynnSigns);
    let k = -(n as i64 - 1);
    let value = Scalar::new(scale_pow2(total.re, k), scale_pow2(total.im, k));
    Ok(finish(value, a, 1u128 << (n - 1), ExactAlgorithm::Glynn))
}

/// The full ℤ₂ gauge sum over all `2ⁿ` sign vectors.
pub fn per_gauge_z2_full(a: &Matrix) -> Result<ExactResult> {
    per_gauge_z2_full_with(a, ExactOptions::default())
}

pub fn per_gauge_z2_full_with(a: &Matrix, opts: ExactOptions) -> Result<ExactResult> {
    let n = check_n(a, "full Z2 gauge sum", GAUGE_Z2_MAX_N, opts)?;
    if n == 0 {
        return Ok(empty_result(ExactAlgorithm::GaugeZ2));
    }
    let total = walk(a, WalkMode::AllSigns);
    let k = -(n as i64);
    let value = Scalar::new(scale_pow2(total.re, k), scale_pow2(total.im, k));
    Ok(finish(value, a, 1u128 << n, ExactAlgorithm::GaugeZ2))
}

/// Checks the size guard `algorithm` applies to an `n × n` input without
/// computing anything.
pub fn check_size_guard(
    algorithm: ExactAlgorithm,
    n: usize,
    p: u32,
    opts: ExactOptions,
) -> Result<()> {
    if opts.ignore_size_guard {
        return Ok(());
    }
    let limit = match algorithm {
        ExactAlgorithm::Naive => NAIVE_MAX_N,
        ExactAlgorithm::Ryser | ExactAlgorithm::Glynn => GRAY_MAX_N,
        ExactAlgorithm::GaugeZ2 => GAUGE_Z2_MAX_N,
        ExactAlgorithm::GaugeZp => {
            let terms = u128::from(p.max(2))
                .checked_pow(n as u32)
                .unwrap_or(u128::MAX);
            if terms > GAUGE_ZP_MAX_TERMS {
                return Err(Error::SizeGuard(format!(
                    "gauge-zp with p = {p} at n = {n} needs {terms} terms, limit is {GAUGE_ZP_MAX_TERMS}"
                )));
            }
            return Ok(());
        }
    };
    if n > limit {
        return Err(Error::SizeGuard(format!(
            "{algorithm} is limited to n <= {limit}, got n = {n}"
        )));
    }
    Ok(())
}

/// Runs the named algorithm; `p` is only read by [`ExactAlgorithm::GaugeZp`].
pub fn per_exact(
    a: &Matrix,
    algorithm: ExactAlgorithm,
    p: u32,
    opts: ExactOptions,
) -> Result<ExactResult> {
    match algorithm {
        ExactAlgorithm::Naive => per_naive_with(a, opts),
        ExactAlgorithm::Ryser => per_ryser_with(a, opts),
        ExactAlgorithm::Glynn => per_glynn_with(a, opts),
        ExactAlgorithm::GaugeZ2 => per_gauge_z2_full_with(a, opts),
        ExactAlgorithm::GaugeZp => gauge::per_gauge_zp_full_with(a, p, opts),
    }
}

/// Glynn's sum returning a plain complex value with no size guard, for inner
/// use by estimators that have already validated their input.
pub(crate) fn glynn_value(a: &Matrix) -> Scalar {
    let n = a.rows();
    if n == 0 {
        return Scalar::new(1.0, 0.0);
    }
    let total = if n <= 13 {
        // Small inner calls stay on the current thread.
        let plan_sum = |real: bool| {
            if real {
                let plan = WalkPlan::<f64>::new(a, WalkMode::GlynnSigns);
                f64::finish(plan.sum_range(0..plan.len()))
            } else {
                let plan = WalkPlan::<Scalar>::new(a, WalkMode::GlynnSigns);
                Scalar::finish(plan.sum_range(0..plan.len()))
            }
        };
        plan_sum(a.is_real())
    } else {
        walk(a, WalkMode::GlynnSigns)
    };
    let k = -(n as i64 - 1);
    Scalar::new(scale_pow2(total.re, k), scale_pow2(total.im, k))
}

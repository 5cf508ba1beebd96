//! Binary reflected Gray-code walks over sign or subset configurations, with
//! the `n` row sums maintained incrementally.

use std::ops::{AddAssign, Mul, SubAssign};

use crate::accum::{ComplexAccumulator, DoubleDouble};
use crate::matrix::{Matrix, Scalar};

/// Entry types the Gray-code kernels run on.
pub trait KernelScalar:
    Copy + Send + Sync + Default + AddAssign + SubAssign + Mul<f64, Output = Self> + 'static
{
    type Acc: Copy + Send + Default;

    fn from_scalar(z: Scalar) -> Self;
    fn to_scalar(self) -> Scalar;
    /// Adds `±Π sums` to the accumulator.
    fn accumulate(acc: &mut Self::Acc, sums: &[Self], negative: bool);
    fn merge(acc: &mut Self::Acc, other: Self::Acc);
    fn finish(acc: Self::Acc) -> Scalar;
}

impl KernelScalar for f64 {
    type Acc = DoubleDouble;

    #[inline]
    fn from_scalar(z: Scalar) -> Self {
        z.re
    }

    #[inline]
    fn to_scalar(self) -> Scalar {
        Scalar::new(self, 0.0)
    }

    #[inline]
    fn accumulate(acc: &mut DoubleDouble, sums: &[f64], negative: bool) {
        let mut p = DoubleDouble::from_f64(1.0);
        for &s in sums {
            p = p.mul_f64(s);
        }
        *acc += if negative { -p } else { p };
    }

    #[inline]
    fn merge(acc: &mut DoubleDouble, other: DoubleDouble) {
        *acc += other;
    }

    fn finish(acc: DoubleDouble) -> Scalar {
        Scalar::new(acc.value(), 0.0)
    }
}

impl KernelScalar for Scalar {
    type Acc = ComplexAccumulator;

    #[inline]
    fn from_scalar(z: Scalar) -> Self {
        z
    }

    #[inline]
    fn to_scalar(self) -> Scalar {
        self
    }

    #[inline]
    fn accumulate(acc: &mut ComplexAccumulator, sums: &[Scalar], negative: bool) {
        let mut p = Scalar::new(1.0, 0.0);
        for &s in sums {
            p *= s;
        }
        acc.add(if negative { -p } else { p });
    }

    #[inline]
    fn merge(acc: &mut ComplexAccumulator, other: ComplexAccumulator) {
        acc.merge(other);
    }

    fn finish(acc: ComplexAccumulator) -> Scalar {
        acc.value()
    }
}

/// What a set bit of the Gray code means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMode {
    /// Bit `b` flips the sign of column `b + 1`; column 0 stays `+1` (Glynn).
    GlynnSigns,
    /// Bit `b` flips the sign of column `b` (full `2ⁿ` gauge sum).
    AllSigns,
    /// Bit `b` includes column `b` in the subset (Ryser).
    Subsets,
}

impl WalkMode {
    pub fn bits(self, n: usize) -> usize {
        match self {
            WalkMode::GlynnSigns => n.saturating_sub(1),
            WalkMode::AllSigns | WalkMode::Subsets => n,
        }
    }
}

/// Gray code of `k`.
#[inline]
pub fn gray(k: u64) -> u64 {
    k ^ (k >> 1)
}

/// Per-bit column updates shared by every walker over one matrix.
#[derive(Debug, Clone)]
pub struct WalkPlan<T> {
    mode: WalkMode,
    n: usize,
    base: Vec<T>,
    deltas: Vec<Vec<T>>,
}

impl<T: KernelScalar> WalkPlan<T> {
    pub fn new(a: &Matrix, mode: WalkMode) -> Self {
        let n = a.rows();
        let entry = |i: usize, j: usize| T::from_scalar(a[(i, j)]);
        let (base, deltas) = match mode {
            WalkMode::GlynnSigns | WalkMode::AllSigns => {
                let first = if mode == WalkMode::GlynnSigns { 1 } else { 0 };
                let base = (0..n)
                    .map(|i| {
                        let mut s = T::default();
                        for j in 0..n {
                            s += entry(i, j);
                        }
                        s
                    })
                    .collect();
                let deltas = (first..n)
                    .map(|j| (0..n).map(|i| entry(i, j) * -2.0).collect())
                    .collect();
                (base, deltas)
            }
            WalkMode::Subsets => {
                let deltas = (0..n)
                    .map(|j| (0..n).map(|i| entry(i, j)).collect())
                    .collect();
                (vec![T::default(); n], deltas)
            }
        };
        Self {
            mode,
            n,
            base,
            deltas,
        }
    }

    pub fn mode(&self) -> WalkMode {
        self.mode
    }

    /// Number of Gray-code steps in a full walk.
    pub fn len(&self) -> u64 {
        1u64 << self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row sums for an arbitrary code, computed from scratch.
    pub fn fresh_sums(&self, code: u64) -> Vec<T> {
        let mut sums = self.base.clone();
        for (b, d) in self.deltas.iter().enumerate() {
            if code >> b & 1 == 1 {
                for (s, &x) in sums.iter_mut().zip(d) {
                    *s += x;
                }
            }
        }
        sums
    }

    pub fn walker(&self, start: u64) -> GrayWalker<'_, T> {
        let code = gray(start);
        GrayWalker {
            plan: self,
            index: start,
            code,
            sums: self.fresh_sums(code),
        }
    }

    /// Signed sum of row-sum products over Gray indices `range`.
    pub fn sum_range(&self, range: std::ops::Range<u64>) -> T::Acc {
        let mut acc = T::Acc::default();
        if range.is_empty() {
            return acc;
        }
        let mut w = self.walker(range.start);
        loop {
            T::accumulate(&mut acc, &w.sums, w.parity_odd());
            if w.index + 1 >= range.end {
                break;
            }
            w.advance();
        }
        acc
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Position in a Gray-code walk together with the current row sums.
pub struct GrayWalker<'a, T> {
    plan: &'a WalkPlan<T>,
    index: u64,
    code: u64,
    sums: Vec<T>,
}

impl<T: KernelScalar> GrayWalker<'_, T> {
    /// Steps to the next Gray code, flipping exactly one bit.
    #[inline]
    pub fn advance(&mut self) {
        self.index += 1;
        let bit = self.index.trailing_zeros() as usize;
        self.code ^= 1 << bit;
        let d = &self.plan.deltas[bit];
        if self.code >> bit & 1 == 1 {
            for (s, &x) in self.sums.iter_mut().zip(d) {
                *s += x;
            }
        } else {
            for (s, &x) in self.sums.iter_mut().zip(d) {
                *s -= x;
            }
        }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn sums(&self) -> &[T] {
        &self.sums
    }

    /// Whether an odd number of bits is set (negative sign product, or odd subset size).
    #[inline]
    pub fn parity_odd(&self) -> bool {
        self.code.count_ones() & 1 == 1
    }
}

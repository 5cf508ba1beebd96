//! Floating values with a separate power-of-two exponent, so long products of
//! pivots or row sums cannot overflow.

use std::fmt;
use std::ops::Mul;

use crate::matrix::Scalar;

/// `mantissa × 2^exponent` with `|mantissa| ∈ [1, 2)`, or exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    mantissa: Scalar,
    exponent: i64,
}

/// Multiplies by `2^k` exactly (barring subnormal results).
pub(crate) fn scale_pow2(x: f64, k: i64) -> f64 {
    let mut x = x;
    let mut k = k;
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
    }
    x * 2f64.powi(k as i32)
}

impl ScaledValue {
    pub const ZERO: Self = Self {
        mantissa: Scalar::new(0.0, 0.0),
        exponent: 0,
    };
    pub const ONE: Self = Self {
        mantissa: Scalar::new(1.0, 0.0),
        exponent: 0,
    };

    /// Normalizes `mantissa × 2^exponent`.
    pub fn new(mantissa: Scalar, exponent: i64) -> Self {
        if mantissa.re == 0.0 && mantissa.im == 0.0 {
            return Self::ZERO;
        }
        debug_assert!(mantissa.re.is_finite() && mantissa.im.is_finite());
        let r = mantissa.norm();
        let mut k = r.log2().floor() as i64;
        let mut m = Scalar::new(scale_pow2(mantissa.re, -k), scale_pow2(mantissa.im, -k));
        // log2 can be off by one near powers of two.
        loop {
            let a = m.norm();
            if a >= 2.0 {
                m /= 2.0;
                k += 1;
            } else if a < 1.0 {
                m *= 2.0;
                k -= 1;
            } else {
                break;
            }
        }
        Self {
            mantissa: m,
            exponent: exponent + k,
        }
    }

    pub fn from_complex(z: Scalar) -> Self {
        Self::new(z, 0)
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(Scalar::new(x, 0.0), 0)
    }

    pub fn mantissa(&self) -> Scalar {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    /// Plain complex value; infinite components if it does not fit.
    pub fn to_complex(&self) -> Scalar {
        Scalar::new(
            scale_pow2(self.mantissa.re, self.exponent),
            scale_pow2(self.mantissa.im, self.exponent),
        )
    }

    /// Real part as a plain double.
    pub fn to_f64(&self) -> f64 {
        self.to_complex().re
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.exponent as f64 * std::f64::consts::LN_2
        }
    }

    pub fn scale(&self, c: Scalar) -> Self {
        Self::new(self.mantissa * c, self.exponent)
    }
}

impl Mul for ScaledValue {
    type Output = ScaledValue;

    fn mul(self, rhs: ScaledValue) -> ScaledValue {
        ScaledValue::new(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Mul<Scalar> for ScaledValue {
    type Output = ScaledValue;

    fn mul(self, rhs: Scalar) -> ScaledValue {
        self.scale(rhs)
    }
}

impl fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.to_complex();
        if z.re.is_finite() && z.im.is_finite() {
            if z.im == 0.0 {
                write!(f, "{}", z.re)
            } else {
                write!(f, "{z}")
            }
        } else {
            write!(f, "({})·2^{}", self.mantissa, self.exponent)
        }
    }
}

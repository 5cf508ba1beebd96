//! Tables of p-th roots of unity.

use std::f64::consts::PI;

use crate::matrix::Scalar;

/// `ω^k` for `k = 0..p`, `ω = e^{2πi/p}`.
///
/// Quarter-turn multiples are stored exactly so that `p = 2` and `p = 4`
/// produce exact signs and exact `±i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootTable {
    roots: Vec<Scalar>,
}

impl RootTable {
    /// Panics if `p < 1`; callers validate the order first.
    pub fn new(p: u32) -> Self {
        assert!(p >= 1, "root table order must be positive");
        let roots = (0..p)
            .map(|k| {
                if (4 * k) % p == 0 {
                    match (4 * k) / p {
                        0 => Scalar::new(1.0, 0.0),
                        1 => Scalar::new(0.0, 1.0),
                        2 => Scalar::new(-1.0, 0.0),
                        _ => Scalar::new(0.0, -1.0),
                    }
                } else {
                    Scalar::from_polar(1.0, 2.0 * PI * f64::from(k) / f64::from(p))
                }
            })
            .collect();
        Self { roots }
    }

    /// A deliberately wrong table: every root after the first is rotated by a
    /// small angle. Exists so the verification suite can prove it detects a
    /// broken phase table.
    #[doc(hidden)]
    pub fn corrupted(p: u32) -> Self {
        let mut t = Self::new(p);
        for z in t.roots.iter_mut().skip(1) {
            *z *= Scalar::from_polar(1.0, 1e-3);
        }
        t
    }

    pub fn order(&self) -> u32 {
        self.roots.len() as u32
    }

    /// `ω^k`, with `k` reduced modulo `p`.
    #[inline]
    pub fn pow(&self, k: i64) -> Scalar {
        let p = self.roots.len() as i64;
        self.roots[k.rem_euclid(p) as usize]
    }

    #[inline]
    pub fn as_slice(&self) -> &[Scalar] {
        &self.roots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_orders_are_exact() {
        assert_eq!(
            RootTable::new(2).as_slice(),
            &[Scalar::new(1.0, 0.0), Scalar::new(-1.0, 0.0)]
        );
        let t4 = RootTable::new(4);
        assert_eq!(t4.pow(1), Scalar::new(0.0, 1.0));
        assert_eq!(t4.pow(-1), Scalar::new(0.0, -1.0));
    }

    #[test]
    fn roots_have_unit_modulus_and_sum_to_zero() {
        for p in 2..=12 {
            let t = RootTable::new(p);
            let mut s = Scalar::new(0.0, 0.0);
            for &z in t.as_slice() {
                assert!((z.norm() - 1.0).abs() < 1e-15);
                s += z;
            }
            assert!(s.norm() < 1e-14, "p={p}");
            assert!((t.pow(1).powu(p) - Scalar::new(1.0, 0.0)).norm() < 1e-13);
        }
    }
}

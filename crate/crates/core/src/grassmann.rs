//! Exact expansions in small nilpotent algebras, used to check the identities
//! the estimators are built on.
//!
//! [`ZeonElement`] lives in the commutative algebra generated by
//! `φ*_1..φ*_n, φ_1..φ_n` with every generator squaring to zero. Its
//! coefficients are indexed by a (starred subset, unstarred subset) pair, so a
//! product of monomials is either zero (overlapping subsets) or the union with
//! no sign. The coefficient of the full pair is the Berezin integral, and for
//! `exp(Σ φ*_i A_ij φ_j)` it equals `per A`.
//!
//! [`SingleModeGrassmann`] is the 16-dimensional exterior algebra on one
//! anticommuting quadruple `ξ*, ξ, η*, η`, where the composite
//! `φ = ξη`, `φ* = η*ξ*` is even and nilpotent. The decoupling identities are
//! checked there coefficient by coefficient.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Scalar};
use crate::roots::RootTable;

/// Largest dimension [`zeon_exp_quadratic`] accepts.
pub const ZEON_MAX_N: usize = 4;

const ZERO: Scalar = Scalar::new(0.0, 0.0);
const ONE: Scalar = Scalar::new(1.0, 0.0);

/// Element of the zeon algebra on `n` starred and `n` unstarred generators.
#[derive(Clone, PartialEq)]
pub struct ZeonElement {
    n: usize,
    coeffs: Vec<Scalar>,
}

impl ZeonElement {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![ZERO; 1 << (2 * n)],
        }
    }

    pub fn scalar(n: usize, c: Scalar) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[0] = c;
        z
    }

    /// `c · Π_{i∈starred} φ*_i · Π_{j∈unstarred} φ_j`.
    pub fn monomial(n: usize, starred: u32, unstarred: u32, c: Scalar) -> Self {
        let mut z = Self::zero(n);
        z.set(starred, unstarred, c);
        z
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, starred: u32, unstarred: u32) -> usize {
        ((starred as usize) << self.n) | unstarred as usize
    }

    pub fn coefficient(&self, starred: u32, unstarred: u32) -> Scalar {
        self.coeffs[self.index(starred, unstarred)]
    }

    pub fn set(&mut self, starred: u32, unstarred: u32, c: Scalar) {
        let k = self.index(starred, unstarred);
        self.coeffs[k] = c;
    }

    pub fn scale(&self, c: Scalar) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Number of nonzero coefficients.
    pub fn support(&self) -> usize {
        self.coeffs.iter().filter(|c| **c != ZERO).count()
    }

    /// `exp(x)`, exact because the non-scalar part is nilpotent.
    pub fn exp(&self) -> Self {
        let c0 = self.coeffs[0];
        let mut nil = self.clone();
        nil.coeffs[0] = ZERO;
        let mut term = Self::scalar(self.n, ONE);
        let mut sum = term.clone();
        for k in 1..=2 * self.n {
            term = (&term * &nil).scale(Scalar::new(1.0 / k as f64, 0.0));
            sum = &sum + &term;
        }
        sum.scale(c0.exp())
    }

    /// Largest coefficient-wise difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for &ZeonElement {
    type Output = ZeonElement;

    fn mul(self, rhs: &ZeonElement) -> ZeonElement {
        assert_eq!(self.n, rhs.n, "zeon dimensions differ");
        let n = self.n;
        let mask = (1u32 << n) - 1;
        let mut out = ZeonElement::zero(n);
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let (s1, u1) = ((i >> n) as u32, i as u32 & mask);
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                if b == ZERO {
                    continue;
                }
                let (s2, u2) = ((j >> n) as u32, j as u32 & mask);
                if s1 & s2 == 0 && u1 & u2 == 0 {
                    let k = out.index(s1 | s2, u1 | u2);
                    out.coeffs[k] += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ZeonElement {
    type Output = ZeonElement;

    fn add(self, rhs: &ZeonElement) -> ZeonElement {
        ZeonElement {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ZeonElement {
    type Output = ZeonElement;

    fn sub(self, rhs: &ZeonElement) -> ZeonElement {
        ZeonElement {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ZeonElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n;
        let mask = (1usize << n) - 1;
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != ZERO {
                terms.push(format!("{c}·[{:0w$b}|{:0w$b}]", i >> n, i & mask, w = n));
            }
        }
        write!(f, "Zeon{{{}}}", terms.join(" + "))
    }
}

/// `exp(Σ_ij φ*_i A_ij φ_j)` expanded exactly.
pub fn zeon_exp_quadratic(a: &Matrix) -> Result<ZeonElement> {
    let n = a.square_dim("zeon expansion")?;
    if n > ZEON_MAX_N {
        return Err(Error::SizeGuard(format!(
            "zeon expansion is limited to n <= {ZEON_MAX_N}, got n = {n}"
        )));
    }
    let mut x = ZeonElement::zero(n);
    for i in 0..n {
        for j in 0..n {
            x.set(1 << i, 1 << j, a[(i, j)]);
        }
    }
    Ok(x.exp())
}

/// Coefficient of `φ*_1..φ*_n φ_1..φ_n`: the Berezin integral over all generators.
pub fn berezin_top_coefficient(x: &ZeonElement) -> Scalar {
    let full = (1u32 << x.n) - 1;
    x.coefficient(full, full)
}

/// Generators of the single-mode exterior algebra, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    XiStar = 0,
    Xi = 1,
    EtaStar = 2,
    Eta = 3,
}

/// Element of the exterior algebra on `ξ*, ξ, η*, η`.
///
/// Coefficient `k` multiplies the product of the generators whose bits are set
/// in `k`, taken in ascending bit order.
#[derive(Clone, Copy, PartialEq)]
pub struct SingleModeGrassmann {
    coeffs: [Scalar; 16],
}

impl SingleModeGrassmann {
    pub fn zero() -> Self {
        Self { coeffs: [ZERO; 16] }
    }

    pub fn scalar(c: Scalar) -> Self {
        let mut g = Self::zero();
        g.coeffs[0] = c;
        g
    }

    pub fn generator(g: Generator) -> Self {
        let mut x = Self::zero();
        x.coeffs[1 << g as usize] = ONE;
        x
    }

    pub fn coefficient(&self, mask: usize) -> Scalar {
        self.coeffs[mask]
    }

    pub fn scale(&self, c: Scalar) -> Self {
        let mut out = *self;
        for x in &mut out.coeffs {
            *x *= c;
        }
        out
    }

    /// `exp(x)`; the non-scalar part has nilpotency index at most 5.
    pub fn exp(&self) -> Self {
        let c0 = self.coeffs[0];
        let mut nil = *self;
        nil.coeffs[0] = ZERO;
        let mut term = Self::scalar(ONE);
        let mut sum = term;
        for k in 1..=4 {
            term = (term * nil).scale(Scalar::new(1.0 / k as f64, 0.0));
            sum = sum + term;
        }
        sum.scale(c0.exp())
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `∫dξ*dξ ∫dη*dη`: the coefficient of `ξ*ξη*η`.
    pub fn integrate(&self) -> Scalar {
        self.coeffs[0b1111]
    }
}

// Sign of the product of monomials `a·b` after sorting into canonical order:
// one flip for every generator of `b` that has to pass a larger one of `a`.
fn reorder_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0;
    for j in 0..4 {
        if b >> j & 1 == 1 {
            swaps += (a >> (j + 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Mul for SingleModeGrassmann {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (b, &y) in rhs.coeffs.iter().enumerate() {
                if y == ZERO || a & b != 0 {
                    continue;
                }
                out.coeffs[a | b] += x * y * reorder_sign(a, b);
            }
        }
        out
    }
}

impl Add for SingleModeGrassmann {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for (x, y) in out.coeffs.iter_mut().zip(rhs.coeffs) {
            *x += y;
        }
        out
    }
}

impl Sub for SingleModeGrassmann {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-ONE)
    }
}

impl fmt::Debug for SingleModeGrassmann {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 4] = ["ξ*", "ξ", "η*", "η"];
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c != ZERO {
                let mono: String = (0..4)
                    .filter(|b| k >> b & 1 == 1)
                    .map(|b| NAMES[b])
                    .collect();
                terms.push(format!("{c}{mono}"));
            }
        }
        write!(f, "Grassmann{{{}}}", terms.join(" + "))
    }
}

/// The composite even pair `(φ*, φ) = (η*ξ*, ξη)`.
pub fn composite_pair() -> (SingleModeGrassmann, SingleModeGrassmann) {
    use Generator::*;
    let g = SingleModeGrassmann::generator;
    (g(EtaStar) * g(XiStar), g(Xi) * g(Eta))
}

/// A decoupling identity for a single matrix element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsChannel {
    /// `e^{aφ*φ} = ½ Σ_{s=±1} e^{s√a ξ*ξ} e^{s√a η*η}`.
    DensityZ2,
    /// `e^{aφ*φ} = (1/p) Σ_q e^{ω^q √a ξ*ξ + ω^{-q} √a η*η}`.
    Zp(u32),
    /// `e^{aφ*φ} = (1/p) Σ_q e^{ω^q √a φ*} e^{ω^{-q} √a φ}`.
    PairingZp(u32),
    /// `φ = μν` with even `μ, ν`: `e^{aφ*φ} = ½ Σ_s e^{s√a μ*μ} e^{s√a ν*ν}`.
    ZeonCompositeZ2,
}

impl HsChannel {
    /// Name of the identity, without its phase order.
    pub fn family(&self) -> &'static str {
        match self {
            HsChannel::DensityZ2 => "HS density ℤ₂ identity",
            HsChannel::Zp(_) => "HS ℤₚ identity",
            HsChannel::PairingZp(_) => "HS pairing ℤₚ identity",
            HsChannel::ZeonCompositeZ2 => "HS zeon-composite ℤ₂ identity",
        }
    }
}

impl fmt::Display for HsChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HsChannel::Zp(p) | HsChannel::PairingZp(p) => write!(f, "{} (p={p})", self.family()),
            _ => f.write_str(self.family()),
        }
    }
}

impl std::str::FromStr for HsChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_p = |rest: &str| -> Result<u32> {
            rest.trim_start_matches(['(', ':', '='])
                .trim_end_matches(')')
                .parse()
                .map_err(|_| Error::Parameter(format!("bad phase order in channel {s:?}")))
        };
        if s == "density-z2" {
            Ok(HsChannel::DensityZ2)
        } else if s == "zeon-composite-z2" {
            Ok(HsChannel::ZeonCompositeZ2)
        } else if let Some(rest) = s.strip_prefix("pairing-zp") {
            Ok(HsChannel::PairingZp(parse_p(rest)?))
        } else if let Some(rest) = s.strip_prefix("zp") {
            Ok(HsChannel::Zp(parse_p(rest)?))
        } else {
            Err(Error::Parameter(format!(
                "unknown decoupling channel {s:?}"
            )))
        }
    }
}

/// Outcome of one identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsCheck {
    pub holds: bool,
    pub residual: f64,
}

/// Coefficient-wise tolerance for the identity checks.
pub const HS_TOLERANCE: f64 = 1e-12;

/// Checks a decoupling identity with the principal square root of `a`.
pub fn verify_hs_identity(channel: HsChannel, a: Scalar) -> Result<HsCheck> {
    verify_hs_identity_with(channel, a, a.sqrt(), &RootTable::new)
}

/// Checks a decoupling identity with an explicit `root` (`root² = a`) and a
/// caller-supplied root-of-unity table constructor.
pub fn verify_hs_identity_with(
    channel: HsChannel,
    a: Scalar,
    root: Scalar,
    table: &dyn Fn(u32) -> RootTable,
) -> Result<HsCheck> {
    if let HsChannel::Zp(p) | HsChannel::PairingZp(p) = channel {
        if p < 2 {
            return Err(Error::Parameter(format!(
                "phase order p must be >= 2, got {p}"
            )));
        }
    }
    let residual = match channel {
        HsChannel::ZeonCompositeZ2 => zeon_composite_residual(a, root),
        _ => single_mode_residual(channel, a, root, table),
    };
    Ok(HsCheck {
        holds: residual <= HS_TOLERANCE,
        residual,
    })
}

fn single_mode_residual(
    channel: HsChannel,
    a: Scalar,
    root: Scalar,
    table: &dyn Fn(u32) -> RootTable,
) -> f64 {
    use Generator::*;
    let g = SingleModeGrassmann::generator;
    let (phi_star, phi) = composite_pair();
    let lhs = (phi_star * phi).scale(a).exp();
    let xi_density = g(XiStar) * g(Xi);
    let eta_density = g(EtaStar) * g(Eta);

    let rhs = match channel {
        HsChannel::DensityZ2 => {
            let mut sum = SingleModeGrassmann::zero();
            for s in [1.0, -1.0] {
                let c = root * s;
                sum = sum + xi_density.scale(c).exp() * eta_density.scale(c).exp();
            }
            sum.scale(Scalar::new(0.5, 0.0))
        }
        HsChannel::Zp(p) => {
            let w = table(p);
            let mut sum = SingleModeGrassmann::zero();
            for q in 0..i64::from(p) {
                let exponent =
                    xi_density.scale(w.pow(q) * root) + eta_density.scale(w.pow(-q) * root);
                sum = sum + exponent.exp();
            }
            sum.scale(Scalar::new(1.0 / f64::from(p), 0.0))
        }
        HsChannel::PairingZp(p) => {
            let w = table(p);
            let mut sum = SingleModeGrassmann::zero();
            for q in 0..i64::from(p) {
                sum =
                    sum + phi_star.scale(w.pow(q) * root).exp() * phi.scale(w.pow(-q) * root).exp();
            }
            sum.scale(Scalar::new(1.0 / f64::from(p), 0.0))
        }
        HsChannel::ZeonCompositeZ2 => unreachable!("handled in the zeon algebra"),
    };
    lhs.max_diff(&rhs)
}

// Two-mode zeon algebra: index 0 is μ, index 1 is ν.
fn zeon_composite_residual(a: Scalar, root: Scalar) -> f64 {
    let phi_star_phi = ZeonElement::monomial(2, 0b11, 0b11, ONE);
    let lhs = phi_star_phi.scale(a).exp();
    let mu = ZeonElement::monomial(2, 0b01, 0b01, ONE);
    let nu = ZeonElement::monomial(2, 0b10, 0b10, ONE);
    let mut rhs = ZeonElement::zero(2);
    for s in [1.0, -1.0] {
        let c = root * s;
        rhs = &rhs + &(&mu.scale(c).exp() * &nu.scale(c).exp());
    }
    lhs.max_diff(&rhs.scale(Scalar::new(0.5, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::stream_rng;
    use crate::exact::per_naive;
    use rand::Rng;

    fn random_zeon(n: usize, rng: &mut crate::estimator::StreamRng) -> ZeonElement {
        let mut z = ZeonElement::zero(n);
        for k in 0..z.coeffs.len() {
            if rng.random_bool(0.3) {
                // Small integers keep every product exact.
                z.coeffs[k] = Scalar::new(f64::from(rng.random_range(-3..4)), 0.0);
            }
        }
        z
    }

    #[test]
    fn one_by_one_expansion() {
        let z = zeon_exp_quadratic(&Matrix::from_rows(&[[3.5]])).unwrap();
        assert_eq!(z.support(), 2);
        assert_eq!(z.coefficient(0, 0), ONE);
        assert_eq!(z.coefficient(1, 1), Scalar::new(3.5, 0.0));
    }

    #[test]
    fn top_coefficients() {
        let z = zeon_exp_quadratic(&Matrix::ones(2)).unwrap();
        assert!((berezin_top_coefficient(&z) - Scalar::new(2.0, 0.0)).norm() < 1e-14);
        let z = zeon_exp_quadratic(&Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]])).unwrap();
        assert!((berezin_top_coefficient(&z) - Scalar::new(10.0, 0.0)).norm() < 1e-13);
        let z = zeon_exp_quadratic(&Matrix::identity(3)).unwrap();
        assert!((berezin_top_coefficient(&z) - ONE).norm() < 1e-14);
        let z = zeon_exp_quadratic(&Matrix::ones(4)).unwrap();
        assert!((berezin_top_coefficient(&z) - Scalar::new(24.0, 0.0)).norm() < 1e-12);
        assert!(matches!(
            zeon_exp_quadratic(&Matrix::ones(5)),
            Err(Error::SizeGuard(_))
        ));
    }

    #[test]
    fn top_coefficient_is_the_permanent_for_small_integer_matrices() {
        let vals = [-1.0, 0.0, 1.0, 2.0];
        for k in 0..256 {
            let e: Vec<f64> = (0..4).map(|b| vals[(k >> (2 * b)) & 3]).collect();
            let a = Matrix::from_rows(&[[e[0], e[1]], [e[2], e[3]]]);
            let got = berezin_top_coefficient(&zeon_exp_quadratic(&a).unwrap());
            let want = per_naive(&a).unwrap().to_complex();
            assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0));
        }
    }

    #[test]
    fn zeon_product_is_commutative_and_associative() {
        let mut rng = stream_rng(10, 0);
        for _ in 0..20 {
            let (x, y, z) = (
                random_zeon(3, &mut rng),
                random_zeon(3, &mut rng),
                random_zeon(3, &mut rng),
            );
            assert_eq!(&x * &y, &y * &x);
            assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        }
    }

    #[test]
    fn zeon_generators_square_to_zero() {
        let g = ZeonElement::monomial(2, 0b01, 0, ONE);
        assert_eq!((&g * &g).support(), 0);
        let h = ZeonElement::monomial(2, 0, 0b10, ONE);
        assert_eq!((&h * &h).support(), 0);
        assert_eq!((&g * &h).coefficient(0b01, 0b10), ONE);
    }

    #[test]
    fn odd_generators_anticommute() {
        use Generator::*;
        let gens = [XiStar, Xi, EtaStar, Eta];
        for &a in &gens {
            let x = SingleModeGrassmann::generator(a);
            assert_eq!((x * x).max_diff(&SingleModeGrassmann::zero()), 0.0);
            for &b in &gens {
                let y = SingleModeGrassmann::generator(b);
                assert_eq!((x * y + y * x).max_diff(&SingleModeGrassmann::zero()), 0.0);
            }
        }
    }

    #[test]
    fn composite_fields_are_even_and_nilpotent() {
        use Generator::*;
        let (phi_star, phi) = composite_pair();
        let zero = SingleModeGrassmann::zero();
        assert_eq!((phi * phi).max_diff(&zero), 0.0);
        assert_eq!((phi_star * phi_star).max_diff(&zero), 0.0);
        assert_eq!((phi_star * phi - phi * phi_star).max_diff(&zero), 0.0);
        // Commutes with odd generators too.
        let xi = SingleModeGrassmann::generator(Xi);
        assert_eq!((phi_star * xi - xi * phi_star).max_diff(&zero), 0.0);
        // φ*φ = ξ*ξη*η, so the factorized integral of e^{aφ*φ} is a.
        assert_eq!((phi_star * phi).integrate(), ONE);
        let a = Scalar::new(2.5, -1.0);
        assert_eq!((phi_star * phi).scale(a).exp().integrate(), a);
    }

    #[test]
    fn identity_examples() {
        let c = verify_hs_identity(HsChannel::DensityZ2, Scalar::new(2.5, 0.0)).unwrap();
        assert!(c.holds && c.residual < 1e-14);
        assert!(verify_hs_identity(HsChannel::Zp(3), ONE).unwrap().holds);
        let c = verify_hs_identity(HsChannel::PairingZp(2), ZERO).unwrap();
        assert!(c.holds && c.residual == 0.0);
        assert!(verify_hs_identity(HsChannel::Zp(1), ONE).is_err());
    }

    #[test]
    fn identities_hold_for_random_complex_values_and_both_roots() {
        let mut rng = stream_rng(77, 0);
        for _ in 0..100 {
            let a = Scalar::from_polar(rng.random_range(0.0..10.0), rng.random_range(0.0..6.3));
            for ch in [HsChannel::DensityZ2, HsChannel::ZeonCompositeZ2]
                .into_iter()
                .chain((2..=5).flat_map(|p| [HsChannel::Zp(p), HsChannel::PairingZp(p)]))
            {
                for root in [a.sqrt(), -a.sqrt()] {
                    let c = verify_hs_identity_with(ch, a, root, &RootTable::new).unwrap();
                    assert!(c.holds, "{ch} a={a} residual={}", c.residual);
                }
            }
        }
    }

    #[test]
    fn corrupted_phase_table_is_detected() {
        let c = verify_hs_identity_with(HsChannel::Zp(3), ONE, ONE, &RootTable::corrupted).unwrap();
        assert!(!c.holds);
    }

    #[test]
    fn channel_names_parse() {
        assert_eq!(
            "density-z2".parse::<HsChannel>().unwrap(),
            HsChannel::DensityZ2
        );
        assert_eq!("zp(3)".parse::<HsChannel>().unwrap(), HsChannel::Zp(3));
        assert_eq!(
            "pairing-zp:4".parse::<HsChannel>().unwrap(),
            HsChannel::PairingZp(4)
        );
        assert!("spin".parse::<HsChannel>().is_err());
    }
}

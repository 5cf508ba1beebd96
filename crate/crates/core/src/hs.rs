//! Discrete Hubbard-Stratonovich estimators.
//!
//! Each nonzero `A_ij` is decoupled by an auxiliary variable: a random sign, a
//! random p-th root of unity, optionally times a fixed unit multiplier. The
//! resulting estimators are
//!
//! * determinant type, `|det H|²` with `H_ij = √A_ij · u_ij · x_ij`
//!   (Godsil-Gutman for signs, KKLLL for cube roots, arbitrary per-entry
//!   mixtures through a [`DecouplingScheme`]);
//! * pairing channel, a product of phase-weighted row and column sums;
//! * gauge, `ω^{-Σq} Π_i Σ_j A_ij ω^{q_j}` with one phase per column;
//! * recursive, `(per G)²` with `G_ij = √A_ij · s_ij`.
//!
//! All of them are unbiased for `per A`; the configuration spaces are finite
//! so small cases can be averaged exactly with
//! [`enumerate_expectation`](crate::estimator::enumerate_expectation).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{sample_enumerable, Enumerable, Estimator, EstimatorSample, StreamRng};
use crate::exact::glynn_value;
use crate::linalg::determinant;
use crate::matrix::{nonzeros, Matrix, NonzeroPattern, Scalar};
use crate::roots::RootTable;

/// Largest matrix the recursive estimator accepts (its inner permanent is exact).
pub const RECURSIVE_MAX_N: usize = 20;

fn require_order(p: u32) -> Result<()> {
    if p < 2 {
        Err(Error::Parameter(format!(
            "phase order p must be >= 2, got {p}"
        )))
    } else {
        Ok(())
    }
}

/// How one nonzero entry is decoupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Uniform `±1` (ℤ₂ density channel).
    Sign,
    /// Uniform p-th root of unity.
    Phase,
}

/// Decoupling of a single nonzero entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDecoupling {
    pub row: usize,
    pub col: usize,
    pub channel: Channel,
    /// Phase order; required for [`Channel::Phase`], ignored for signs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    /// Unit-modulus multiplier applied on top of the random variable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<FixedMultiplier>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedMultiplier {
    pub re: f64,
    pub im: f64,
}

impl EntryDecoupling {
    /// Radix of this entry's random variable.
    pub fn radix(&self) -> Result<u32> {
        match self.channel {
            Channel::Sign => Ok(2),
            Channel::Phase => {
                let p = self.p.ok_or_else(|| {
                    Error::Configuration(format!(
                        "entry ({},{}) uses the phase channel without \"p\"",
                        self.row, self.col
                    ))
                })?;
                require_order(p).map_err(|_| {
                    Error::Configuration(format!(
                        "entry ({},{}) has phase order {p} < 2",
                        self.row, self.col
                    ))
                })?;
                Ok(p)
            }
        }
    }

    pub fn multiplier(&self) -> Scalar {
        self.fixed
            .map_or(Scalar::new(1.0, 0.0), |f| Scalar::new(f.re, f.im))
    }
}

/// Per-entry decoupling choices, one per nonzero of the matrix.
///
/// The JSON form is an array of
/// `{"row": i, "col": j, "channel": "sign"|"phase", "p": k, "fixed": {"re": x, "im": y}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecouplingScheme {
    pub entries: Vec<EntryDecoupling>,
}

impl DecouplingScheme {
    /// Same channel on every nonzero of `pattern`.
    pub fn uniform(pattern: &NonzeroPattern, channel: Channel, p: Option<u32>) -> Self {
        Self {
            entries: pattern
                .entries
                .iter()
                .map(|e| EntryDecoupling {
                    row: e.row,
                    col: e.col,
                    channel,
                    p,
                    fixed: None,
                })
                .collect(),
        }
    }

    pub fn all_sign(pattern: &NonzeroPattern) -> Self {
        Self::uniform(pattern, Channel::Sign, None)
    }

    pub fn all_phase(pattern: &NonzeroPattern, p: u32) -> Self {
        Self::uniform(pattern, Channel::Phase, Some(p))
    }

    /// Signs everywhere with a fixed `i` on entry `(row, col)`. On the 2×2
    /// all-ones matrix with `(0, 1)` every sample equals the permanent.
    pub fn signs_with_imaginary_entry(pattern: &NonzeroPattern, row: usize, col: usize) -> Self {
        let mut s = Self::all_sign(pattern);
        for e in &mut s.entries {
            if (e.row, e.col) == (row, col) {
                e.fixed = Some(FixedMultiplier { re: 0.0, im: 1.0 });
            }
        }
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Configuration(format!("invalid scheme document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme serializes")
    }

    /// Reorders the entries into `pattern` order, checking that every nonzero
    /// is covered exactly once and every multiplier has unit modulus.
    pub fn aligned_to(&self, pattern: &NonzeroPattern) -> Result<Self> {
        if self.entries.len() != pattern.m() {
            return Err(Error::Configuration(format!(
                "scheme has {} entries, matrix has {} nonzeros",
                self.entries.len(),
                pattern.m()
            )));
        }
        let mut slots: Vec<Option<EntryDecoupling>> = vec![None; pattern.m()];
        for e in &self.entries {
            let k = pattern.position(e.row, e.col).ok_or_else(|| {
                Error::Configuration(format!(
                    "scheme entry ({},{}) is not a nonzero of the matrix",
                    e.row, e.col
                ))
            })?;
            if slots[k].is_some() {
                return Err(Error::Configuration(format!(
                    "scheme lists entry ({},{}) twice",
                    e.row, e.col
                )));
            }
            e.radix()?;
            let u = e.multiplier();
            if (u.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Configuration(format!(
                    "fixed multiplier {u} on entry ({},{}) is not unit modulus",
                    e.row, e.col
                )));
            }
            slots[k] = Some(e.clone());
        }
        Ok(Self {
            entries: slots
                .into_iter()
                .map(|s| s.expect("all slots filled"))
                .collect(),
        })
    }
}

struct Decoupled {
    row: usize,
    col: usize,
    /// `√A_ij · u_ij`.
    weight: Scalar,
    table: usize,
}

/// `|det H|²` with one random sign or phase per nonzero entry.
pub struct DeterminantEstimator {
    n: usize,
    entries: Vec<Decoupled>,
    tables: Vec<RootTable>,
    radices: Vec<u32>,
}

impl DeterminantEstimator {
    /// Random signs on every nonzero.
    pub fn godsil_gutman(a: &Matrix) -> Result<Self> {
        a.square_dim("Godsil-Gutman estimator")?;
        a.require_nonnegative_real("Godsil-Gutman estimator")?;
        Self::build(a, &DecouplingScheme::all_sign(&nonzeros(a)))
    }

    /// Random p-th roots of unity on every nonzero; `p = 3` is KKLLL.
    pub fn kkll(a: &Matrix, p: u32) -> Result<Self> {
        require_order(p)?;
        a.square_dim("Zp determinant estimator")?;
        a.require_nonnegative_real("Zp determinant estimator")?;
        Self::build(a, &DecouplingScheme::all_phase(&nonzeros(a), p))
    }

    pub fn custom(a: &Matrix, scheme: &DecouplingScheme) -> Result<Self> {
        a.square_dim("custom-scheme estimator")?;
        a.require_nonnegative_real("custom-scheme estimator")?;
        let aligned = scheme.aligned_to(&nonzeros(a))?;
        Self::build(a, &aligned)
    }

    fn build(a: &Matrix, scheme: &DecouplingScheme) -> Result<Self> {
        let mut tables: Vec<RootTable> = Vec::new();
        let mut entries = Vec::with_capacity(scheme.entries.len());
        let mut radices = Vec::with_capacity(scheme.entries.len());
        for e in &scheme.entries {
            let r = e.radix()?;
            let table = match tables.iter().position(|t| t.order() == r) {
                Some(k) => k,
                None => {
                    tables.push(RootTable::new(r));
                    tables.len() - 1
                }
            };
            entries.push(Decoupled {
                row: e.row,
                col: e.col,
                weight: e.multiplier() * a[(e.row, e.col)].re.sqrt(),
                table,
            });
            radices.push(r);
        }
        Ok(Self {
            n: a.rows(),
            entries,
            tables,
            radices,
        })
    }

    /// The decoupled matrix `H` at a configuration.
    pub fn decoupled_matrix(&self, config: &[u32]) -> Matrix {
        let mut h = Matrix::zeros(self.n, self.n);
        for (e, &q) in self.entries.iter().zip(config) {
            h[(e.row, e.col)] = e.weight * self.tables[e.table].pow(i64::from(q));
        }
        h
    }
}

impl Enumerable for DeterminantEstimator {
    fn radices(&self) -> &[u32] {
        &self.radices
    }

    fn evaluate(&self, config: &[u32]) -> Scalar {
        let det = determinant(&self.decoupled_matrix(config))
            .expect("decoupled matrix is square")
            .to_complex();
        Scalar::new(det.norm_sqr(), 0.0)
    }
}

impl Estimator for DeterminantEstimator {
    fn sample(&self, rng: &mut StreamRng) -> Scalar {
        sample_enumerable(self, rng).value
    }

    fn nonnegative(&self) -> bool {
        true
    }

    fn as_enumerable(&self) -> Option<&dyn Enumerable> {
        Some(self)
    }
}

/// Pairing-channel estimator:
/// `Π_i (Σ_k √A_ki ω^{-q_ki}) (Σ_j √A_ij ω^{q_ij})`.
pub struct PairingEstimator {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
    roots: RootTable,
    radices: Vec<u32>,
}

impl PairingEstimator {
    pub fn new(a: &Matrix, p: u32) -> Result<Self> {
        require_order(p)?;
        let n = a.square_dim("pairing estimator")?;
        a.require_nonnegative_real("pairing estimator")?;
        let entries: Vec<_> = nonzeros(a)
            .entries
            .iter()
            .map(|e| (e.row, e.col, e.value.re.sqrt()))
            .collect();
        let radices = vec![p; entries.len()];
        Ok(Self {
            n,
            entries,
            roots: RootTable::new(p),
            radices,
        })
    }
}

impl Enumerable for PairingEstimator {
    fn radices(&self) -> &[u32] {
        &self.radices
    }

    fn evaluate(&self, config: &[u32]) -> Scalar {
        let zero = Scalar::new(0.0, 0.0);
        let mut row_sums = vec![zero; self.n];
        let mut col_sums = vec![zero; self.n];
        for (&(i, j, w), &q) in self.entries.iter().zip(config) {
            let q = i64::from(q);
            row_sums[i] += self.roots.pow(q) * w;
            col_sums[j] += self.roots.pow(-q) * w;
        }
        row_sums
            .iter()
            .zip(&col_sums)
            .fold(Scalar::new(1.0, 0.0), |acc, (r, c)| acc * r * c)
    }
}

impl Estimator for PairingEstimator {
    fn sample(&self, rng: &mut StreamRng) -> Scalar {
        sample_enumerable(self, rng).value
    }

    fn as_enumerable(&self) -> Option<&dyn Enumerable> {
        Some(self)
    }
}

/// Sampled gauge formula: one random phase per column,
/// `(Π_k ω^{-q_k}) Π_i Σ_j A_ij ω^{q_j}`. Accepts any complex matrix.
pub struct GaugeEstimator {
    a: Matrix,
    roots: RootTable,
    radices: Vec<u32>,
}

impl GaugeEstimator {
    pub fn new(a: &Matrix, p: u32) -> Result<Self> {
        require_order(p)?;
        let n = a.square_dim("gauge estimator")?;
        Ok(Self {
            a: a.clone(),
            roots: RootTable::new(p),
            radices: vec![p; n],
        })
    }
}

impl Enumerable for GaugeEstimator {
    fn radices(&self) -> &[u32] {
        &self.radices
    }

    fn evaluate(&self, config: &[u32]) -> Scalar {
        let phases: Vec<Scalar> = config
            .iter()
            .map(|&q| self.roots.pow(i64::from(q)))
            .collect();
        let total: i64 = config.iter().map(|&q| i64::from(q)).sum();
        let mut acc = self.roots.pow(-total);
        for i in 0..self.a.rows() {
            let s: Scalar = self.a.row(i).iter().zip(&phases).map(|(x, w)| x * w).sum();
            acc *= s;
        }
        acc
    }
}

impl Estimator for GaugeEstimator {
    fn sample(&self, rng: &mut StreamRng) -> Scalar {
        sample_enumerable(self, rng).value
    }

    fn as_enumerable(&self) -> Option<&dyn Enumerable> {
        Some(self)
    }
}

/// `(per G(S))²` with `G_ij = √A_ij · s_ij`.
///
/// At depth 1 the inner permanent is exact (Glynn). At depth `d > 1` the square
/// is replaced by the product of two independent depth-`d−1` estimates of
/// `per G(S)`, whose entries are signed so the inner square roots are
/// complex (principal branch). Only depth 1 has an enumerable configuration
/// space.
pub struct RecursiveEstimator {
    a: Matrix,
    pattern: NonzeroPattern,
    depth: u32,
    radices: Vec<u32>,
}

impl RecursiveEstimator {
    pub fn new(a: &Matrix) -> Result<Self> {
        Self::with_depth(a, 1)
    }

    pub fn with_depth(a: &Matrix, depth: u32) -> Result<Self> {
        let n = a.square_dim("recursive estimator")?;
        a.require_nonnegative_real("recursive estimator")?;
        if n > RECURSIVE_MAX_N {
            return Err(Error::SizeGuard(format!(
                "recursive estimator is limited to n <= {RECURSIVE_MAX_N}, got n = {n}"
            )));
        }
        if depth == 0 {
            return Err(Error::Parameter(
                "recursion depth must be at least 1".into(),
            ));
        }
        let pattern = nonzeros(a);
        let radices = vec![2; pattern.m()];
        Ok(Self {
            a: a.clone(),
            pattern,
            depth,
            radices,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn signed_root(pattern: &NonzeroPattern, n: usize, signs: &[u32]) -> Matrix {
        let mut g = Matrix::zeros(n, n);
        for (e, &s) in pattern.entries.iter().zip(signs) {
            let root = e.value.sqrt();
            g[(e.row, e.col)] = if s == 0 { root } else { -root };
        }
        g
    }

    fn sample_level(a: &Matrix, depth: u32, rng: &mut StreamRng) -> Scalar {
        use rand::Rng;
        let pattern = nonzeros(a);
        let signs: Vec<u32> = (0..pattern.m()).map(|_| rng.random_range(0..2)).collect();
        let g = Self::signed_root(&pattern, a.rows(), &signs);
        if depth <= 1 {
            let p = glynn_value(&g);
            p * p
        } else {
            Self::sample_level(&g, depth - 1, rng) * Self::sample_level(&g, depth - 1, rng)
        }
    }
}

impl Enumerable for RecursiveEstimator {
    fn radices(&self) -> &[u32] {
        &self.radices
    }

    fn evaluate(&self, config: &[u32]) -> Scalar {
        let g = Self::signed_root(&self.pattern, self.a.rows(), config);
        let p = glynn_value(&g);
        p * p
    }
}

impl Estimator for RecursiveEstimator {
    fn sample(&self, rng: &mut StreamRng) -> Scalar {
        if self.depth == 1 {
            sample_enumerable(self, rng).value
        } else {
            Self::sample_level(&self.a, self.depth, rng)
        }
    }

    fn nonnegative(&self) -> bool {
        self.depth == 1
    }

    fn as_enumerable(&self) -> Option<&dyn Enumerable> {
        (self.depth == 1).then_some(self as &dyn Enumerable)
    }
}

pub fn sample_godsil_gutman(a: &Matrix, rng: &mut StreamRng) -> Result<EstimatorSample> {
    Ok(sample_enumerable(
        &DeterminantEstimator::godsil_gutman(a)?,
        rng,
    ))
}

pub fn sample_kkll_zp(a: &Matrix, p: u32, rng: &mut StreamRng) -> Result<EstimatorSample> {
    Ok(sample_enumerable(&DeterminantEstimator::kkll(a, p)?, rng))
}

pub fn sample_custom_scheme(
    a: &Matrix,
    scheme: &DecouplingScheme,
    rng: &mut StreamRng,
) -> Result<EstimatorSample> {
    Ok(sample_enumerable(
        &DeterminantEstimator::custom(a, scheme)?,
        rng,
    ))
}

pub fn sample_pairing(a: &Matrix, p: u32, rng: &mut StreamRng) -> Result<EstimatorSample> {
    Ok(sample_enumerable(&PairingEstimator::new(a, p)?, rng))
}

pub fn sample_gauge_zp(a: &Matrix, p: u32, rng: &mut StreamRng) -> Result<EstimatorSample> {
    Ok(sample_enumerable(&GaugeEstimator::new(a, p)?, rng))
}

pub fn sample_recursive(a: &Matrix, rng: &mut StreamRng) -> Result<EstimatorSample> {
    Ok(sample_enumerable(&RecursiveEstimator::new(a)?, rng))
}

//! The sampling interface shared by every estimator, and seeded streams.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::continuous::{LuEstimator, SvdEstimator};
use crate::error::{Error, Result};
use crate::hs::{
    DecouplingScheme, DeterminantEstimator, GaugeEstimator, PairingEstimator, RecursiveEstimator,
};
use crate::matrix::{Matrix, Scalar};

/// Random source for one estimator stream.
pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` under base seed `seed`.
///
/// Streams share the seed-derived key and differ in the ChaCha stream id, so
/// their sequences do not overlap.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// An unbiased estimator of the permanent of a fixed matrix.
pub trait Estimator: Send + Sync {
    fn sample(&self, rng: &mut StreamRng) -> Scalar;

    /// Whether every sample is a real nonnegative number (`|·|²`-type).
    fn nonnegative(&self) -> bool {
        false
    }

    /// The finite configuration space, for estimators that have one.
    fn as_enumerable(&self) -> Option<&dyn Enumerable> {
        None
    }
}

/// An estimator whose randomness is a uniformly drawn point of a finite
/// mixed-radix configuration space.
pub trait Enumerable: Send + Sync {
    /// Radix of each decoupled variable, in enumeration order.
    fn radices(&self) -> &[u32];

    /// Estimator value at one configuration; `config[k] < radices()[k]`.
    fn evaluate(&self, config: &[u32]) -> Scalar;

    fn space_size(&self) -> u128 {
        self.radices()
            .iter()
            .try_fold(1u128, |acc, &r| acc.checked_mul(u128::from(r)))
            .unwrap_or(u128::MAX)
    }
}

/// One point of a configuration space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub values: Vec<u32>,
    pub space_size: u128,
}

impl Configuration {
    pub fn draw(radices: &[u32], rng: &mut StreamRng) -> Self {
        let values = radices.iter().map(|&r| rng.random_range(0..r)).collect();
        let space_size = radices
            .iter()
            .try_fold(1u128, |acc, &r| acc.checked_mul(u128::from(r)))
            .unwrap_or(u128::MAX);
        Self { values, space_size }
    }
}

/// A sample together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSample {
    pub value: Scalar,
    pub config: Configuration,
}

/// Draws a configuration uniformly and evaluates the estimator there.
pub fn sample_enumerable(est: &dyn Enumerable, rng: &mut StreamRng) -> EstimatorSample {
    let config = Configuration::draw(est.radices(), rng);
    EstimatorSample {
        value: est.evaluate(&config.values),
        config,
    }
}

/// Estimator family and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorKind {
    GodsilGutman,
    Kkll { p: u32 },
    Custom { scheme: DecouplingScheme },
    Pairing { p: u32 },
    Gauge { p: u32 },
    Recursive { depth: u32 },
    LuMc,
    SvdMc,
}

impl EstimatorKind {
    /// Validates preconditions against `a` and builds the estimator.
    pub fn build(&self, a: &Matrix) -> Result<Arc<dyn Estimator>> {
        Ok(match self {
            EstimatorKind::GodsilGutman => Arc::new(DeterminantEstimator::godsil_gutman(a)?),
            EstimatorKind::Kkll { p } => Arc::new(DeterminantEstimator::kkll(a, *p)?),
            EstimatorKind::Custom { scheme } => Arc::new(DeterminantEstimator::custom(a, scheme)?),
            EstimatorKind::Pairing { p } => Arc::new(PairingEstimator::new(a, *p)?),
            EstimatorKind::Gauge { p } => Arc::new(GaugeEstimator::new(a, *p)?),
            EstimatorKind::Recursive { depth } => {
                Arc::new(RecursiveEstimator::with_depth(a, *depth)?)
            }
            EstimatorKind::LuMc => Arc::new(LuEstimator::new(a)?),
            EstimatorKind::SvdMc => Arc::new(SvdEstimator::new(a)?),
        })
    }

    /// Short tag used in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            EstimatorKind::GodsilGutman => "gg",
            EstimatorKind::Kkll { .. } => "kkll",
            EstimatorKind::Custom { .. } => "custom",
            EstimatorKind::Pairing { .. } => "pairing",
            EstimatorKind::Gauge { .. } => "gauge",
            EstimatorKind::Recursive { .. } => "recursive",
            EstimatorKind::LuMc => "lu-mc",
            EstimatorKind::SvdMc => "svd-mc",
        }
    }

    pub fn phase_order(&self) -> Option<u32> {
        match self {
            EstimatorKind::Kkll { p }
            | EstimatorKind::Pairing { p }
            | EstimatorKind::Gauge { p } => Some(*p),
            _ => None,
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase_order() {
            Some(p) => write!(f, "{}(p={p})", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}

/// A seeded, sequential source of samples from one estimator.
///
/// The `k`-th sample of stream `(seed, stream)` is fully determined by those
/// three numbers.
pub struct EstimatorStream {
    estimator: Arc<dyn Estimator>,
    seed: u64,
    stream: u64,
    rng: StreamRng,
    drawn: u64,
}

impl EstimatorStream {
    pub fn new(estimator: Arc<dyn Estimator>, seed: u64, stream: u64) -> Self {
        Self {
            estimator,
            seed,
            stream,
            rng: stream_rng(seed, stream),
            drawn: 0,
        }
    }

    /// Streams `0..count` over the same estimator.
    pub fn partition(estimator: Arc<dyn Estimator>, seed: u64, count: u64) -> Vec<Self> {
        (0..count)
            .map(|w| Self::new(Arc::clone(&estimator), seed, w))
            .collect()
    }

    pub fn next_sample(&mut self) -> Scalar {
        self.drawn += 1;
        self.estimator.sample(&mut self.rng)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream
    }

    pub fn samples_drawn(&self) -> u64 {
        self.drawn
    }

    pub fn estimator(&self) -> &Arc<dyn Estimator> {
        &self.estimator
    }
}

/// Largest configuration space [`enumerate_expectation`] will walk.
pub const ENUMERATION_MAX: u128 = 1 << 24;

/// Exact first and second absolute moments over a whole configuration space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enumeration {
    pub mean: Scalar,
    /// `E[|X|²]`.
    pub second_moment: f64,
    pub space_size: u128,
}

impl Enumeration {
    /// `E[|X|²] − |E[X]|²`.
    pub fn variance(&self) -> f64 {
        (self.second_moment - self.mean.norm_sqr()).max(0.0)
    }
}

/// Averages the estimator over its entire configuration space in mixed-radix
/// order, first variable fastest.
pub fn enumerate_expectation(est: &dyn Enumerable) -> Result<Enumeration> {
    enumerate_with_limit(est, ENUMERATION_MAX)
}

pub fn enumerate_with_limit(est: &dyn Enumerable, limit: u128) -> Result<Enumeration> {
    use crate::accum::{ComplexAccumulator, DoubleDouble};
    use rayon::prelude::*;

    let size = est.space_size();
    if size > limit {
        return Err(Error::SizeGuard(format!(
            "configuration space has {size} points, enumeration is limited to {limit}; sample instead"
        )));
    }
    let radices = est.radices();
    let len = size as u64;
    const CHUNK: u64 = 1 << 12;
    let parts: Vec<(ComplexAccumulator, DoubleDouble)> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(len);
            let mut config = vec![0u32; radices.len()];
            let mut rest = start;
            for (v, &r) in config.iter_mut().zip(radices) {
                *v = (rest % u64::from(r)) as u32;
                rest /= u64::from(r);
            }
            let mut mean = ComplexAccumulator::default();
            let mut second = DoubleDouble::ZERO;
            for idx in start..end {
                let x = est.evaluate(&config);
                mean.add(x);
                second = second.add_f64(x.norm_sqr());
                if idx + 1 < end {
                    for (v, &r) in config.iter_mut().zip(radices) {
                        *v += 1;
                        if *v < r {
                            break;
                        }
                        *v = 0;
                    }
                }
            }
            (mean, second)
        })
        .collect();
    let mut mean = ComplexAccumulator::default();
    let mut second = DoubleDouble::ZERO;
    for (m, s) in parts {
        mean.merge(m);
        second += s;
    }
    let count = size as f64;
    Ok(Enumeration {
        mean: mean.value() / count,
        second_moment: second.value() / count,
        space_size: size,
    })
}

/// Convenience: builds the estimator and enumerates it.
pub fn enumerate_kind(a: &Matrix, kind: &EstimatorKind) -> Result<Enumeration> {
    let est = kind.build(a)?;
    let en = est.as_enumerable().ok_or_else(|| {
        Error::Parameter(format!(
            "{kind} has no finite configuration space to enumerate"
        ))
    })?;
    enumerate_expectation(en)
}

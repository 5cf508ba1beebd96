//! Streaming moments for complex samples, normal-approximation intervals and
//! checkpointed sequential stopping.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimator::EstimatorStream;
use crate::matrix::Scalar;

/// Samples drawn per stream between stopping-rule checks.
pub const CHECKPOINT: u64 = 4096;

/// Mergeable single-pass moments of a complex sample stream.
///
/// The real part carries central moments up to order four (for kurtosis); the
/// imaginary part and the modulus carry second moments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningMoments {
    pub count: u64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub m2_re: f64,
    pub m3_re: f64,
    pub m4_re: f64,
    pub m2_im: f64,
    pub mean_abs: f64,
    pub m2_abs: f64,
    pub max_abs: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples<I: IntoIterator<Item = Scalar>>(xs: I) -> Result<Self> {
        let mut acc = Self::new();
        for x in xs {
            acc.update(x)?;
        }
        Ok(acc)
    }

    pub fn update(&mut self, x: Scalar) -> Result<()> {
        if !x.re.is_finite() || !x.im.is_finite() {
            return Err(Error::NonFinite(format!("sample {x}")));
        }
        self.push(x);
        Ok(())
    }

    #[inline]
    fn push(&mut self, x: Scalar) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;

        let delta = x.re - self.mean_re;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean_re += dn;
        self.m4_re +=
            term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2_re - 4.0 * dn * self.m3_re;
        self.m3_re += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2_re;
        self.m2_re += term1;

        let d = x.im - self.mean_im;
        self.mean_im += d / n;
        self.m2_im += d * (x.im - self.mean_im);

        let a = x.norm();
        let d = a - self.mean_abs;
        self.mean_abs += d / n;
        self.m2_abs += d * (a - self.mean_abs);
        self.max_abs = self.max_abs.max(a);
    }

    /// Moments of the concatenation of both streams.
    pub fn merge(&self, other: &Self) -> Self {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;

        let d = other.mean_re - self.mean_re;
        let d2 = d * d;
        let m2 = self.m2_re + other.m2_re + d2 * na * nb / n;
        let m3 = self.m3_re
            + other.m3_re
            + d2 * d * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * other.m2_re - nb * self.m2_re) / n;
        let m4 = self.m4_re
            + other.m4_re
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2_re + nb * nb * self.m2_re) / (n * n)
            + 4.0 * d * (na * other.m3_re - nb * self.m3_re) / n;

        let di = other.mean_im - self.mean_im;
        let da = other.mean_abs - self.mean_abs;
        Self {
            count: self.count + other.count,
            mean_re: self.mean_re + d * nb / n,
            mean_im: self.mean_im + di * nb / n,
            m2_re: m2,
            m3_re: m3,
            m4_re: m4,
            m2_im: self.m2_im + other.m2_im + di * di * na * nb / n,
            mean_abs: self.mean_abs + da * nb / n,
            m2_abs: self.m2_abs + other.m2_abs + da * da * na * nb / n,
            max_abs: self.max_abs.max(other.max_abs),
        }
    }

    pub fn mean(&self) -> Scalar {
        Scalar::new(self.mean_re, self.mean_im)
    }

    fn unbiased(&self, m2: f64) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Sample variance of the real part (divisor `count − 1`).
    pub fn variance_re(&self) -> f64 {
        self.unbiased(self.m2_re)
    }

    pub fn variance_im(&self) -> f64 {
        self.unbiased(self.m2_im)
    }

    /// `E|X − μ|²` estimate: real plus imaginary variance.
    pub fn variance(&self) -> f64 {
        self.variance_re() + self.variance_im()
    }

    pub fn variance_abs(&self) -> f64 {
        self.unbiased(self.m2_abs)
    }

    pub fn std_error_re(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance_re() / self.count as f64).sqrt()
        }
    }

    pub fn std_error_im(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance_im() / self.count as f64).sqrt()
        }
    }

    /// Excess kurtosis of the real part; `None` when the variance is zero.
    pub fn excess_kurtosis(&self) -> Option<f64> {
        if self.count < 2 || self.m2_re <= 0.0 {
            None
        } else {
            Some(self.count as f64 * self.m4_re / (self.m2_re * self.m2_re) - 3.0)
        }
    }
}

/// Normal-approximation confidence interval on the real part of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: Scalar,
    pub half_width: f64,
    pub confidence: f64,
    pub samples_used: u64,
    pub std_error: f64,
    pub std_error_im: f64,
}

impl IntervalEstimate {
    pub fn lo(&self) -> f64 {
        self.point.re - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.point.re + self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }

    /// Half-width relative to the point estimate; zero when both vanish.
    pub fn relative_half_width(&self) -> f64 {
        if self.half_width == 0.0 {
            0.0
        } else {
            self.half_width / self.point.re.abs()
        }
    }
}

/// Two-sided standard-normal quantile for `confidence`.
pub fn z_score(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Parameter(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(0.5 + confidence / 2.0))
}

pub fn interval(acc: &RunningMoments, confidence: f64) -> Result<IntervalEstimate> {
    if acc.count < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: acc.count,
        });
    }
    let z = z_score(confidence)?;
    let se = acc.std_error_re();
    Ok(IntervalEstimate {
        point: acc.mean(),
        half_width: z * se,
        confidence,
        samples_used: acc.count,
        std_error: se,
        std_error_im: acc.std_error_im(),
    })
}

/// When [`run_until`] stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_samples: Option<u64>,
    /// Target relative half-width of the interval.
    pub epsilon: Option<f64>,
    pub confidence: f64,
}

impl StopRule {
    pub fn samples(max_samples: u64) -> Self {
        Self {
            max_samples: Some(max_samples),
            epsilon: None,
            confidence: 0.95,
        }
    }

    pub fn precision(epsilon: f64, confidence: f64) -> Self {
        Self {
            max_samples: None,
            epsilon: Some(epsilon),
            confidence,
        }
    }

    fn validate(&self) -> Result<()> {
        z_score(self.confidence)?;
        match (self.max_samples, self.epsilon) {
            (None, None) => Err(Error::Parameter(
                "stop rule needs a sample cap or a target precision".into(),
            )),
            (_, Some(e)) if e.is_nan() || e <= 0.0 => Err(Error::Parameter(format!(
                "target precision must be positive, got {e}"
            ))),
            (Some(0), _) => Err(Error::Parameter("sample cap must be positive".into())),
            _ => Ok(()),
        }
    }
}

/// Interval half-width at one stopping check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub samples: u64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub moments: RunningMoments,
    pub interval: IntervalEstimate,
    /// Whether the precision target was reached (always true without one).
    pub target_met: bool,
    pub checkpoints: Vec<Checkpoint>,
    /// Per-stream accumulators, in stream order.
    pub per_stream: Vec<RunningMoments>,
}

/// Draws from one stream until the rule is satisfied.
pub fn run_until(stream: &mut EstimatorStream, rule: StopRule) -> Result<RunOutcome> {
    run_until_streams(std::slice::from_mut(stream), rule)
}

/// Draws from all streams in rounds of [`CHECKPOINT`] samples each, checking
/// the rule on the in-order merge of the stream accumulators after every
/// round. The outcome depends only on the seeds, the stream count and the rule.
pub fn run_until_streams(streams: &mut [EstimatorStream], rule: StopRule) -> Result<RunOutcome> {
    rule.validate()?;
    if streams.is_empty() {
        return Err(Error::Parameter("at least one stream is required".into()));
    }
    let k = streams.len() as u64;
    let mut accs = vec![RunningMoments::new(); streams.len()];
    let mut checkpoints = Vec::new();
    let mut total = 0u64;
    loop {
        let remaining = rule.max_samples.map(|m| m - total);
        let quotas: Vec<u64> = (0..k)
            .map(|w| match remaining {
                Some(r) if r < CHECKPOINT * k => r / k + u64::from(w < r % k),
                _ => CHECKPOINT,
            })
            .collect();
        streams
            .par_iter_mut()
            .zip(accs.par_iter_mut())
            .zip(quotas.par_iter())
            .for_each(|((s, acc), &q)| {
                for _ in 0..q {
                    let x = s.next_sample();
                    acc.push(x);
                }
            });
        total += quotas.iter().sum::<u64>();
        let merged = accs.iter().fold(RunningMoments::new(), |m, a| m.merge(a));
        if !merged.mean_re.is_finite() || !merged.m2_re.is_finite() {
            return Err(Error::NonFinite(
                "estimator produced a non-finite sample".into(),
            ));
        }
        let capped = rule.max_samples.is_some_and(|m| total >= m);
        let iv = if merged.count >= 2 {
            Some(interval(&merged, rule.confidence)?)
        } else {
            None
        };
        if let Some(iv) = iv {
            checkpoints.push(Checkpoint {
                samples: total,
                half_width: iv.half_width,
            });
        }
        let met = match (rule.epsilon, iv) {
            (Some(eps), Some(iv)) => iv.relative_half_width() <= eps,
            (Some(_), None) => false,
            (None, _) => true,
        };
        if (rule.epsilon.is_some() && met) || capped {
            let interval = match iv {
                Some(iv) => iv,
                None => interval(&merged, rule.confidence)?,
            };
            return Ok(RunOutcome {
                moments: merged,
                interval,
                target_met: met,
                checkpoints,
                per_stream: accs,
            });
        }
    }
}

//! Self-check suite: the algebraic identities behind the estimators, plus
//! cross-checks of the exact algorithms and enumerated estimator means
//! against the permutation-sum oracle.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{random_binary, random_real};
use crate::estimator::{enumerate_kind, stream_rng, EstimatorKind};
use crate::exact::{per_exact, per_naive, ExactAlgorithm, ExactOptions};
use crate::grassmann::{
    berezin_top_coefficient, verify_hs_identity_with, zeon_exp_quadratic, HsChannel, ZEON_MAX_N,
};
use crate::matrix::{Matrix, Scalar};
use crate::roots::RootTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Largest dimension used by the matrix checks.
    pub max_n: usize,
    pub seed: u64,
    /// Replace every root-of-unity table with a perturbed one.
    pub corrupt_roots: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            max_n: 4,
            seed: 0x5eed,
            corrupt_roots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Largest residual (absolute for identities, relative for permanents).
    pub max_residual: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const PERMANENT_TOLERANCE: f64 = 1e-9;
const IDENTITY_SAMPLES: usize = 100;

fn rel_err(got: Scalar, want: Scalar) -> f64 {
    (got - want).norm() / want.norm().max(1.0)
}

/// Runs the whole suite.
pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let mut checks = Vec::new();
    checks.extend(berezin_checks(cfg));
    checks.extend(identity_checks(cfg));
    checks.push(exact_equivalence(cfg));
    checks.push(enumerated_means(cfg));
    VerifyReport { checks }
}

fn berezin_checks(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let mut rng = stream_rng(cfg.seed, 1);
    let mut out = Vec::new();
    for n in 1..=cfg.max_n.min(ZEON_MAX_N) {
        let ones = Matrix::ones(n);
        let top = berezin_top_coefficient(&zeon_exp_quadratic(&ones).expect("n within zeon limit"));
        let factorial: f64 = (1..=n).map(|k| k as f64).product();
        let mut worst = rel_err(top, Scalar::new(factorial, 0.0));
        for _ in 0..10 {
            let a = random_real(n, &mut rng);
            let z = zeon_exp_quadratic(&a).expect("n within zeon limit");
            let want = per_naive(&a).expect("naive within limit").to_complex();
            worst = worst.max(rel_err(berezin_top_coefficient(&z), want));
        }
        out.push(CheckOutcome {
            name: format!("Berezin expansion n={n}"),
            passed: worst <= PERMANENT_TOLERANCE,
            max_residual: worst,
            detail: format!("per J{n} = {}", top.re.round()),
        });
    }
    out
}

fn identity_checks(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let table: &dyn Fn(u32) -> RootTable = if cfg.corrupt_roots {
        &RootTable::corrupted
    } else {
        &RootTable::new
    };
    let families: [(HsChannel, Vec<HsChannel>); 4] = [
        (HsChannel::DensityZ2, vec![HsChannel::DensityZ2]),
        (HsChannel::Zp(2), (2..=5).map(HsChannel::Zp).collect()),
        (
            HsChannel::PairingZp(2),
            (2..=5).map(HsChannel::PairingZp).collect(),
        ),
        (HsChannel::ZeonCompositeZ2, vec![HsChannel::ZeonCompositeZ2]),
    ];
    let mut out = Vec::new();
    for (family, channels) in families {
        let mut rng = stream_rng(cfg.seed, 2);
        let mut worst = 0.0f64;
        let mut first_failure = None;
        for _ in 0..IDENTITY_SAMPLES {
            let a = Scalar::from_polar(
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            for &ch in &channels {
                for root in [a.sqrt(), -a.sqrt()] {
                    let check = verify_hs_identity_with(ch, a, root, table).expect("valid channel");
                    worst = worst.max(check.residual);
                    if !check.holds && first_failure.is_none() {
                        first_failure = Some(format!("{ch} fails at a = {a:.6}"));
                    }
                }
            }
        }
        out.push(CheckOutcome {
            name: family.family().to_string(),
            passed: first_failure.is_none(),
            max_residual: worst,
            detail: first_failure.unwrap_or_else(|| {
                format!("{IDENTITY_SAMPLES} random a, both square-root branches")
            }),
        });
    }
    out
}

fn exact_equivalence(cfg: &VerifyConfig) -> CheckOutcome {
    let mut rng = stream_rng(cfg.seed, 3);
    let opts = ExactOptions::default();
    let mut worst = 0.0f64;
    let mut detail = None;
    let algs = [
        (ExactAlgorithm::Ryser, 2),
        (ExactAlgorithm::Glynn, 2),
        (ExactAlgorithm::GaugeZ2, 2),
        (ExactAlgorithm::GaugeZp, 2),
        (ExactAlgorithm::GaugeZp, 3),
        (ExactAlgorithm::GaugeZp, 4),
    ];
    for n in 2..=cfg.max_n.clamp(2, 8) {
        for _ in 0..5 {
            let a = random_real(n, &mut rng);
            let want = per_naive(&a).expect("naive within limit").to_complex();
            for &(alg, p) in &algs {
                let got = match per_exact(&a, alg, p, opts) {
                    Ok(r) => r.to_complex(),
                    Err(_) => continue,
                };
                let e = rel_err(got, want);
                if e > worst {
                    worst = e;
                    if e > PERMANENT_TOLERANCE {
                        detail.get_or_insert_with(|| {
                            format!("{alg} (p={p}) off by {e:.3e} at n={n}")
                        });
                    }
                }
            }
        }
    }
    CheckOutcome {
        name: "exact algorithms agree with the permutation sum".into(),
        passed: detail.is_none(),
        max_residual: worst,
        detail: detail.unwrap_or_else(|| "ryser, glynn, gauge-z2, gauge-zp p=2..4".into()),
    }
}

fn enumerated_means(cfg: &VerifyConfig) -> CheckOutcome {
    let mut rng = stream_rng(cfg.seed, 4);
    let mut corpus = vec![
        Matrix::ones(2),
        Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]),
    ];
    if cfg.max_n >= 3 {
        corpus.push(random_binary(3, 0.6, &mut rng));
    }
    let kinds = [
        EstimatorKind::GodsilGutman,
        EstimatorKind::Kkll { p: 3 },
        EstimatorKind::Pairing { p: 2 },
        EstimatorKind::Gauge { p: 2 },
        EstimatorKind::Gauge { p: 3 },
        EstimatorKind::Recursive { depth: 1 },
    ];
    let mut worst = 0.0f64;
    let mut detail = None;
    for a in &corpus {
        let want = per_naive(a).expect("naive within limit").to_complex();
        for kind in &kinds {
            // Skipped when the space is too large to walk.
            let Ok(en) = enumerate_kind(a, kind) else {
                continue;
            };
            let e = rel_err(en.mean, want);
            worst = worst.max(e);
            if e > PERMANENT_TOLERANCE {
                detail.get_or_insert_with(|| format!("{kind} mean {} vs {}", en.mean, want));
            }
        }
    }
    CheckOutcome {
        name: "enumerated estimator means equal the permanent".into(),
        passed: detail.is_none(),
        max_residual: worst,
        detail: detail
            .unwrap_or_else(|| format!("{} matrices, {} estimators", corpus.len(), kinds.len())),
    }
}

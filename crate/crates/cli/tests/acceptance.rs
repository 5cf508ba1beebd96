//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line; exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use permlab::continuous::{LuEstimator, SvdEstimator};
use permlab::corpus::{binary_3x3, random_binary, random_real, two_by_two};
use permlab::estimator::{
    enumerate_expectation, enumerate_kind, stream_rng, Estimator, EstimatorKind, EstimatorStream,
};
use permlab::exact::{
    per_gauge_z2_full, per_gauge_zp_full, per_glynn, per_naive, per_ryser, ExactResult,
};
use permlab::grassmann::{
    berezin_top_coefficient, verify_hs_identity_with, zeon_exp_quadratic, HsChannel, HS_TOLERANCE,
};
use permlab::hs::{DecouplingScheme, DeterminantEstimator};
use permlab::roots::RootTable;
use permlab::stats::{run_until_streams, RunningMoments, StopRule};
use permlab::{nonzeros, Matrix, Result, Scalar};
use rand::Rng;

type Outcome = std::result::Result<String, String>;

fn rel(got: Scalar, want: Scalar) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

// Relative error, with an absolute floor of 1 for zero permanents.
fn rel_floor(got: Scalar, want: Scalar) -> f64 {
    (got - want).norm() / want.norm().max(1.0)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    type Alg = (&'static str, fn(&Matrix) -> Result<ExactResult>);
    let algs: [Alg; 6] = [
        ("ryser", per_ryser),
        ("glynn", per_glynn),
        ("gauge-z2", per_gauge_z2_full),
        ("gauge-zp p=2", |a| per_gauge_zp_full(a, 2)),
        ("gauge-zp p=3", |a| per_gauge_zp_full(a, 3)),
        ("gauge-zp p=4", |a| per_gauge_zp_full(a, 4)),
    ];
    let mut rng = stream_rng(1, 0);
    let mut worst = 0.0f64;
    for n in 2..=8 {
        for _ in 0..100 {
            let a = random_real(n, &mut rng);
            let want = per_naive(&a).map_err(|e| e.to_string())?.to_complex();
            for (name, f) in &algs {
                let got = f(&a).map_err(|e| e.to_string())?.to_complex();
                let e = rel(got, want);
                worst = worst.max(e);
                ensure(e <= 1e-9, || format!("{name} at n={n}: {got} vs {want}"))?;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "700 matrices x 6 algorithms, worst relative error {worst:.2e}, {secs:.1} s"
    ))
}

fn grassmann_foundation() -> Outcome {
    let vals = [-1.0, 0.0, 1.0, 2.0];
    let mut worst = 0.0f64;
    let mut check = |a: &Matrix| -> std::result::Result<(), String> {
        let got = berezin_top_coefficient(&zeon_exp_quadratic(a).map_err(|e| e.to_string())?);
        let want = per_naive(a).map_err(|e| e.to_string())?.to_complex();
        let e = rel_floor(got, want);
        worst = worst.max(e);
        ensure(e <= 1e-10, || format!("{a:?}: {got} vs {want}"))
    };
    for k in 0..256usize {
        let e: Vec<f64> = (0..4).map(|b| vals[(k >> (2 * b)) & 3]).collect();
        check(&Matrix::from_rows(&[[e[0], e[1]], [e[2], e[3]]]))?;
    }
    let mut rng = stream_rng(2, 0);
    for n in [3, 4] {
        for _ in 0..50 {
            check(&random_real(n, &mut rng))?;
        }
    }

    let channels: Vec<HsChannel> = [HsChannel::DensityZ2, HsChannel::ZeonCompositeZ2]
        .into_iter()
        .chain((2..=5).flat_map(|p| [HsChannel::Zp(p), HsChannel::PairingZp(p)]))
        .collect();
    let mut residual = 0.0f64;
    let mut rng = stream_rng(2, 1);
    for _ in 0..100 {
        let a = Scalar::from_polar(
            rng.random_range(0.0..=10.0),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        for &ch in &channels {
            for root in [a.sqrt(), -a.sqrt()] {
                let c = verify_hs_identity_with(ch, a, root, &RootTable::new)
                    .map_err(|e| e.to_string())?;
                residual = residual.max(c.residual);
                ensure(c.holds, || {
                    format!("{ch} at a = {a}: residual {:.2e}", c.residual)
                })?;
            }
        }
    }
    ensure(residual <= HS_TOLERANCE, || {
        format!("residual {residual:.2e}")
    })?;
    Ok(format!(
        "356 expansions (worst {worst:.2e}); {} identities x 100 a x 2 roots (worst {residual:.2e})",
        channels.len()
    ))
}

fn unbiasedness_by_enumeration() -> Outcome {
    let start = Instant::now();
    let kinds = [
        EstimatorKind::GodsilGutman,
        EstimatorKind::Kkll { p: 3 },
        EstimatorKind::Pairing { p: 2 },
        EstimatorKind::Gauge { p: 2 },
        EstimatorKind::Gauge { p: 3 },
        EstimatorKind::Recursive { depth: 1 },
    ];
    let mut corpus = two_by_two();
    // Ten 3×3 0-1 matrices with at most 7 ones, spread over the family.
    let sparse = binary_3x3(7);
    let step = sparse.len() / 10;
    corpus.extend(sparse.into_iter().step_by(step).take(10));
    let mut worst = 0.0f64;
    for a in &corpus {
        let want = per_naive(a).map_err(|e| e.to_string())?.to_complex();
        for kind in &kinds {
            let en = enumerate_kind(a, kind).map_err(|e| e.to_string())?;
            let e = rel_floor(en.mean, want);
            worst = worst.max(e);
            ensure(e <= 1e-9, || {
                format!("{kind} on {a:?}: {} vs {want}", en.mean)
            })?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "{} matrices x {} estimators, worst {worst:.2e}, {secs:.2} s",
        corpus.len(),
        kinds.len()
    ))
}

fn zero_variance_example() -> Outcome {
    let a = Matrix::ones(2);
    let scheme = DecouplingScheme::signs_with_imaginary_entry(&nonzeros(&a), 0, 1);
    let est = DeterminantEstimator::custom(&a, &scheme).map_err(|e| e.to_string())?;
    let en = enumerate_expectation(&est).map_err(|e| e.to_string())?;
    ensure(en.variance() == 0.0, || {
        format!("enumerated variance {}", en.variance())
    })?;
    let mut streams = EstimatorStream::partition(Arc::new(est), 12, 1);
    let out =
        run_until_streams(&mut streams, StopRule::samples(10_000)).map_err(|e| e.to_string())?;
    ensure(out.moments.count == 10_000, || "sample count".into())?;
    ensure(out.interval.std_error == 0.0, || {
        format!("std error {}", out.interval.std_error)
    })?;
    Ok(format!(
        "enumerated variance 0 over {} configurations; std error 0 over 10000 samples, mean {}",
        en.space_size,
        out.moments.mean()
    ))
}

fn variance_reduction_ratio() -> Outcome {
    let j2 = Matrix::ones(2);
    let mut parts = Vec::new();
    for (k, want) in [(1, 0.75), (2, 0.5625)] {
        let a = Matrix::block_diagonal(&vec![j2.clone(); k]);
        let z2 = enumerate_kind(&a, &EstimatorKind::Gauge { p: 2 }).map_err(|e| e.to_string())?;
        for p in [3, 4] {
            let zp = enumerate_kind(&a, &EstimatorKind::Gauge { p }).map_err(|e| e.to_string())?;
            let ratio = zp.second_moment / z2.second_moment;
            ensure((ratio - want).abs() <= 1e-9, || {
                format!("n={} p={p}: ratio {ratio}, expected {want}", 2 * k)
            })?;
            parts.push(format!("n={} p={p}: {ratio:.12}", 2 * k));
        }
    }
    Ok(parts.join(", "))
}

fn estimator_ordering() -> Outcome {
    let a = Matrix::ones(2);
    let gg = enumerate_kind(&a, &EstimatorKind::GodsilGutman).map_err(|e| e.to_string())?;
    let kk = enumerate_kind(&a, &EstimatorKind::Kkll { p: 3 }).map_err(|e| e.to_string())?;
    ensure((kk.variance() - 2.0).abs() <= 1e-12, || {
        format!("KKLLL variance {}", kk.variance())
    })?;
    ensure((gg.variance() - 4.0).abs() <= 1e-12, || {
        format!("GG variance {}", gg.variance())
    })?;
    Ok(format!(
        "KKLLL(p=3) variance {} vs GG {}",
        kk.variance(),
        gg.variance()
    ))
}

fn continuous_representations() -> Outcome {
    let start = Instant::now();
    let mut corpus = two_by_two();
    corpus.push(Matrix::ones(3));
    let rule = StopRule {
        confidence: 0.99,
        ..StopRule::samples(1_000_000)
    };
    let mut misses = Vec::new();
    for (k, a) in corpus.iter().enumerate() {
        let want = per_naive(a).map_err(|e| e.to_string())?.to_f64();
        let ests: [(&str, Arc<dyn Estimator>, u64); 2] = [
            (
                "LU",
                Arc::new(LuEstimator::new(a).map_err(|e| e.to_string())?),
                70_000,
            ),
            (
                "SVD",
                Arc::new(SvdEstimator::new(a).map_err(|e| e.to_string())?),
                80_000,
            ),
        ];
        for (name, est, base) in ests {
            let mut streams = EstimatorStream::partition(est, base + k as u64, 4);
            let out = run_until_streams(&mut streams, rule).map_err(|e| e.to_string())?;
            if !out.interval.contains(want) {
                let z = (out.interval.point.re - want) / out.interval.std_error;
                misses.push(format!(
                    "{name} on {:?} misses {want} (z = {z:.2})",
                    a.data().iter().map(|x| x.re).collect::<Vec<_>>()
                ));
            }
        }
    }
    let checked = 2 * corpus.len();

    let rank_one = Matrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.5, 1.0, 1.5]]);
    let svd = SvdEstimator::new(&rank_one).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(13, 0);
    let mut draws_ok = svd.rank() == 1;
    for _ in 0..1000 {
        draws_ok &= svd.sample_with_draws(&mut rng).1.values.len() == 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(draws_ok, || {
        "rank-1 SVD drew more than one component".into()
    })?;
    ensure(secs < 300.0, || format!("took {secs:.1} s"))?;
    ensure(misses.is_empty(), || {
        format!(
            "{} of {checked} 99% intervals miss: {}",
            misses.len(),
            misses.join("; ")
        )
    })?;
    Ok(format!(
        "{checked} intervals at 1e6 samples all cover; rank-1 SVD draws 1 component; {secs:.1} s"
    ))
}

fn time_median<F: FnMut()>(reps: usize, mut f: F) -> Duration {
    let mut t: Vec<Duration> = (0..reps)
        .map(|_| {
            let s = Instant::now();
            f();
            s.elapsed()
        })
        .collect();
    t.sort();
    t[reps / 2]
}

fn performance() -> Outcome {
    let mut rng = stream_rng(14, 0);
    let a = random_binary(20, 0.5, &mut rng);
    let start = Instant::now();
    per_glynn(&a).map_err(|e| e.to_string())?;
    let glynn20 = start.elapsed().as_secs_f64();
    ensure(glynn20 < 10.0, || {
        format!("random 20x20 took {glynn20:.2} s")
    })?;

    let j20 = per_glynn(&Matrix::ones(20))
        .map_err(|e| e.to_string())?
        .to_f64();
    let fact: f64 = (1..=20).map(f64::from).product();
    let e = (j20 - fact).abs() / fact;
    ensure(e <= 1e-9, || {
        format!("Glynn(J20) = {j20}, relative error {e:.2e}")
    })?;

    let mut worst = 1.0f64;
    for n in 10..=20 {
        let a = random_binary(n, 0.5, &mut rng);
        let mut terms = (0u128, 0u128);
        let tr = time_median(3, || terms.0 = per_ryser(&a).unwrap().terms_evaluated);
        let tg = time_median(3, || terms.1 = per_glynn(&a).unwrap().terms_evaluated);
        let ryser = terms.0 as f64 / tr.as_secs_f64();
        let glynn = terms.1 as f64 / tg.as_secs_f64();
        let ratio = (ryser / glynn).max(glynn / ryser);
        worst = worst.max(ratio);
        ensure(ratio <= 10.0, || {
            format!("n={n}: ryser {ryser:.3e} vs glynn {glynn:.3e} terms/s")
        })?;
    }
    Ok(format!(
        "glynn 20x20 in {glynn20:.3} s; J20 relative error {e:.1e}; worst throughput ratio {worst:.2}"
    ))
}

fn reproducibility() -> Outcome {
    let input = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/j3.txt");
    let input = input.to_str().unwrap();
    let run = |alg: &str| -> std::result::Result<String, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_perm"))
            .args([
                "estimate",
                "--alg",
                alg,
                "--samples",
                "50000",
                "--seed",
                "99",
                "--streams",
                "3",
                "--output",
                "json",
                "-i",
                input,
            ])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            String::from_utf8_lossy(&out.stderr).into_owned()
        })?;
        let stdout = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
        serde_json::from_str::<serde_json::Value>(&stdout).map_err(|e| e.to_string())?;
        Ok(stdout
            .lines()
            .filter(|l| !l.trim_start().starts_with("\"elapsed_ms\""))
            .collect::<Vec<_>>()
            .join("\n"))
    };
    let algs = [
        "gg",
        "kkll",
        "pairing",
        "gauge",
        "recursive",
        "lu-mc",
        "svd-mc",
    ];
    for alg in algs {
        let (x, y) = (run(alg)?, run(alg)?);
        ensure(x == y, || format!("{alg}: runs differ"))?;
    }

    let a = Matrix::from_rows(&[[1.0, 2.0, 0.0], [1.0, 1.0, 1.0], [0.0, 2.0, 1.0]]);
    let est = EstimatorKind::Kkll { p: 3 }
        .build(&a)
        .map_err(|e| e.to_string())?;
    let mut streams = EstimatorStream::partition(Arc::clone(&est), 5, 4);
    let out =
        run_until_streams(&mut streams, StopRule::samples(100_000)).map_err(|e| e.to_string())?;
    let mut concat = RunningMoments::new();
    for (w, part) in out.per_stream.iter().enumerate() {
        let mut s = EstimatorStream::new(Arc::clone(&est), 5, w as u64);
        for _ in 0..part.count {
            concat.update(s.next_sample()).map_err(|e| e.to_string())?;
        }
    }
    let m = &out.moments;
    let pairs = [
        (m.mean_re, concat.mean_re),
        (m.variance_re(), concat.variance_re()),
        (m.variance_abs(), concat.variance_abs()),
        (
            m.excess_kurtosis().unwrap(),
            concat.excess_kurtosis().unwrap(),
        ),
    ];
    let worst = pairs
        .iter()
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    ensure(m.count == concat.count && worst <= 1e-10, || {
        format!("merged vs concatenated differ by {worst:.2e}")
    })?;
    Ok(format!(
        "{} estimators byte-identical across runs; merge vs concatenation {worst:.1e}",
        algs.len()
    ))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("Grassmann foundation", grassmann_foundation),
        ("unbiasedness by enumeration", unbiasedness_by_enumeration),
        ("zero-variance example", zero_variance_example),
        ("variance-reduction ratio", variance_reduction_ratio),
        ("estimator ordering", estimator_ordering),
        ("continuous representations", continuous_representations),
        ("performance", performance),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {} {name}: {why}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

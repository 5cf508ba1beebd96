use std::io::Read;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use permlab::estimator::{enumerate_expectation, EstimatorKind, EstimatorStream};
use permlab::exact::{check_size_guard, per_exact, ExactAlgorithm, ExactOptions};
use permlab::hs::DecouplingScheme;
use permlab::stats::{run_until_streams, RunOutcome, StopRule};
use permlab::verify::{run_verify, VerifyConfig};
use permlab::{load_matrix, nonzeros, Matrix};

use crate::report::{BenchRow, ComparedEstimator, Comparison, Enumerated, RunReport};
use crate::{
    BenchArgs, CliError, Command, EstimateArgs, EstimatorAlg, EstimatorArgs, ExactAlg, ExactArgs,
    OutputFormat, VarianceArgs, VerifyArgs, DEFAULT_SEED, EPSILON_ONLY_CAP,
};

/// What a subcommand produced. A report can accompany an error (a failed
/// `verify` still prints its checks).
pub struct Execution {
    pub report: Option<RunReport>,
    pub format: OutputFormat,
    pub error: Option<CliError>,
}

pub fn execute(command: Command) -> Execution {
    let format = match &command {
        Command::Exact(a) => a.output.output,
        Command::Estimate(a) => a.output.output,
        Command::Variance(a) => a.output.output,
        Command::Verify(a) => a.output.output,
        Command::Bench(a) => a.output.output,
    };
    let done = |r: Result<RunReport, CliError>| match r {
        Ok(report) => Execution {
            report: Some(report),
            format,
            error: None,
        },
        Err(error) => Execution {
            report: None,
            format,
            error: Some(error),
        },
    };
    match command {
        Command::Exact(a) => done(cmd_exact(&a)),
        Command::Estimate(a) => done(cmd_estimate(&a)),
        Command::Variance(a) => done(cmd_variance(&a)),
        Command::Bench(a) => done(cmd_bench(&a)),
        Command::Verify(a) => {
            let report = cmd_verify(&a);
            let failed: Vec<String> = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.clone())
                .collect();
            Execution {
                report: Some(report),
                format,
                error: (!failed.is_empty()).then_some(CliError::VerifyFailed(failed)),
            }
        }
    }
}

fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|source| CliError::Io {
                path: path.to_owned(),
                source,
            })?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?
    };
    Ok(load_matrix(&text)?)
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn exact_algorithm(alg: ExactAlg) -> ExactAlgorithm {
    match alg {
        ExactAlg::Naive => ExactAlgorithm::Naive,
        ExactAlg::Ryser => ExactAlgorithm::Ryser,
        ExactAlg::Glynn => ExactAlgorithm::Glynn,
        ExactAlg::GaugeZ2 => ExactAlgorithm::GaugeZ2,
        ExactAlg::GaugeZp => ExactAlgorithm::GaugeZp,
    }
}

pub fn cmd_exact(args: &ExactArgs) -> Result<RunReport, CliError> {
    let a = read_matrix(&args.input.input)?;
    let alg = exact_algorithm(args.alg);
    let p = match (alg, args.p) {
        (ExactAlgorithm::GaugeZp, None) => {
            return Err(CliError::Usage("gauge-zp needs --p".into()));
        }
        (_, p) => p,
    };
    let opts = ExactOptions {
        ignore_size_guard: args.override_size_guard,
    };
    let start = Instant::now();
    let r = per_exact(&a, alg, p.unwrap_or(2), opts)?;
    let mut report = RunReport::new(alg.to_string(), a.rows(), nonzeros(&a).m());
    report.parameters.p = p.filter(|_| alg == ExactAlgorithm::GaugeZp);
    report.elapsed_ms = elapsed_ms(start);
    report.terms = Some(u64::try_from(r.terms_evaluated).unwrap_or(u64::MAX));
    let value = r.to_complex();
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(permlab::Error::NonFinite(format!(
            "permanent {} is outside double range",
            r.value
        ))
        .into());
    }
    report.result = value.into();
    if r.imaginary_residual > 1e-9 * value.norm().max(1.0) {
        report.warnings.push(format!(
            "imaginary residual {:.3e} dropped from a real input",
            r.imaginary_residual
        ));
    }
    Ok(report)
}

/// Parses `--alg` style arguments into an estimator kind.
fn estimator_kind(args: &EstimatorArgs) -> Result<EstimatorKind, CliError> {
    let alg = args
        .alg
        .ok_or_else(|| CliError::Usage("--alg is required".into()))?;
    let kind = match alg {
        EstimatorAlg::Gg => EstimatorKind::GodsilGutman,
        EstimatorAlg::Kkll => EstimatorKind::Kkll {
            p: args.p.unwrap_or(3),
        },
        EstimatorAlg::Pairing => EstimatorKind::Pairing {
            p: args.p.unwrap_or(2),
        },
        EstimatorAlg::Gauge => EstimatorKind::Gauge {
            p: args.p.unwrap_or(2),
        },
        EstimatorAlg::Recursive => EstimatorKind::Recursive { depth: args.depth },
        EstimatorAlg::LuMc => EstimatorKind::LuMc,
        EstimatorAlg::SvdMc => EstimatorKind::SvdMc,
        EstimatorAlg::Custom => {
            let path = args
                .scheme
                .as_ref()
                .ok_or_else(|| CliError::Usage("custom needs --scheme".into()))?;
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            EstimatorKind::Custom {
                scheme: DecouplingScheme::from_json(&text)?,
            }
        }
    };
    Ok(kind)
}

/// Parses `gauge:p=3`, `kkll`, `recursive:depth=1`.
fn parse_kind_spec(spec: &str) -> Result<EstimatorKind, CliError> {
    let bad = || CliError::Usage(format!("cannot parse estimator {spec:?}"));
    let mut parts = spec.split(':');
    let name = parts.next().ok_or_else(bad)?.trim();
    let mut args = EstimatorArgs {
        alg: Some(<EstimatorAlg as clap::ValueEnum>::from_str(name, true).map_err(|_| bad())?),
        p: None,
        scheme: None,
        depth: 1,
    };
    for kv in parts {
        let (k, v) = kv.split_once('=').ok_or_else(bad)?;
        match k.trim() {
            "p" => args.p = Some(v.trim().parse().map_err(|_| bad())?),
            "depth" => args.depth = v.trim().parse().map_err(|_| bad())?,
            "scheme" => args.scheme = Some(v.trim().into()),
            _ => return Err(bad()),
        }
    }
    estimator_kind(&args)
}

fn resolve_seed(seed: Option<&str>) -> Result<u64, CliError> {
    match seed {
        None => Ok(DEFAULT_SEED),
        Some("random") => Ok(rand::random()),
        Some(s) => s.parse().map_err(|_| {
            CliError::Usage(format!("--seed must be an integer or `random`, got {s:?}"))
        }),
    }
}

fn default_streams() -> u64 {
    std::thread::available_parallelism().map_or(1, |n| n.get() as u64)
}

const HEAVY_TAIL_KURTOSIS: f64 = 50.0;

fn run_warnings(out: &RunOutcome, real_input: bool) -> Vec<String> {
    let mut w = Vec::new();
    if !out.target_met {
        w.push(format!(
            "target not met: relative half-width {:.3e} after {} samples",
            out.interval.relative_half_width(),
            out.moments.count
        ));
    }
    if let Some(k) = out.moments.excess_kurtosis() {
        if k > HEAVY_TAIL_KURTOSIS {
            w.push(format!(
                "heavy-tailed samples (excess kurtosis {k:.1}); the normal interval may undercover"
            ));
        }
    }
    let se_im = out.moments.std_error_im();
    let im = out.moments.mean().im;
    if real_input && im.abs() > 3.0 * se_im && im.abs() > 1e-12 * out.moments.mean().re.abs() {
        w.push(format!(
            "imaginary part of the mean {im:.3e} exceeds 3 standard errors ({se_im:.3e})"
        ));
    }
    // Half-width should fall like 1/sqrt(n); flag a clear shortfall.
    if let (Some(first), Some(last)) = (out.checkpoints.first(), out.checkpoints.last()) {
        if last.samples >= 16 * first.samples && first.half_width > 0.0 {
            let expected = first.half_width * (first.samples as f64 / last.samples as f64).sqrt();
            if last.half_width > 2.0 * expected {
                w.push(format!(
                    "interval half-width shrinks slower than 1/sqrt(n) ({:.3e} vs {:.3e} expected)",
                    last.half_width, expected
                ));
            }
        }
    }
    w
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<RunReport, CliError> {
    let a = read_matrix(&args.input.input)?;
    let kind = estimator_kind(&args.estimator)?;
    let seed = resolve_seed(args.seed.as_deref())?;
    let streams = args.streams.unwrap_or_else(default_streams);
    if streams == 0 {
        return Err(CliError::Usage("--streams must be positive".into()));
    }
    let rule = StopRule {
        max_samples: match (args.samples, args.epsilon) {
            (None, None) => {
                return Err(CliError::Usage("give --samples, --epsilon or both".into()));
            }
            (None, Some(_)) => Some(EPSILON_ONLY_CAP),
            (s, _) => s,
        },
        epsilon: args.epsilon,
        confidence: args.confidence,
    };
    let est = kind.build(&a)?;
    let start = Instant::now();
    let mut parts = EstimatorStream::partition(Arc::clone(&est), seed, streams);
    let out = run_until_streams(&mut parts, rule)?;

    let mut report = RunReport::new(kind.tag(), a.rows(), nonzeros(&a).m());
    report.parameters.p = kind.phase_order();
    report.parameters.scheme = args
        .estimator
        .scheme
        .as_ref()
        .filter(|_| matches!(kind, EstimatorKind::Custom { .. }))
        .map(|p| p.display().to_string());
    report.parameters.seed = Some(seed);
    report.parameters.streams = Some(streams);
    report.result = out.moments.mean().into();
    report.std_error = Some(out.interval.std_error);
    report.interval = Some([out.interval.lo(), out.interval.hi()]);
    report.samples = Some(out.moments.count);
    report.warnings = run_warnings(&out, a.is_real());
    report.elapsed_ms = elapsed_ms(start);
    Ok(report)
}

fn enumerate(a: &Matrix, kind: &EstimatorKind) -> Result<Enumerated, CliError> {
    let est = kind.build(a)?;
    let en = est.as_enumerable().ok_or_else(|| {
        CliError::Core(permlab::Error::Configuration(format!(
            "{kind} has no finite configuration space to enumerate"
        )))
    })?;
    Ok((&enumerate_expectation(en)?).into())
}

pub fn cmd_variance(args: &VarianceArgs) -> Result<RunReport, CliError> {
    let a = read_matrix(&args.input.input)?;
    let (n, m) = (a.rows(), nonzeros(&a).m());
    let start = Instant::now();
    let mut report;
    if let Some(spec) = &args.compare {
        let kinds = spec
            .split(',')
            .map(parse_kind_spec)
            .collect::<Result<Vec<_>, _>>()?;
        if kinds.len() != 2 {
            return Err(CliError::Usage(
                "--compare takes exactly two estimators".into(),
            ));
        }
        let estimators = kinds
            .iter()
            .map(|k| {
                Ok(ComparedEstimator {
                    estimator: k.to_string(),
                    enumerated: enumerate(&a, k)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let ratio = estimators[1].enumerated.second_moment / estimators[0].enumerated.second_moment;
        report = RunReport::new("compare", n, m);
        report.result.re = if ratio.is_finite() { ratio } else { 0.0 };
        if !ratio.is_finite() {
            report
                .warnings
                .push("second moment of the first estimator is zero".into());
        }
        report.comparison = Some(Comparison {
            estimators,
            second_moment_ratio: report.result.re,
        });
    } else {
        let kind = estimator_kind(&args.estimator)?;
        let en = enumerate(&a, &kind)?;
        report = RunReport::new(kind.tag(), n, m);
        report.parameters.p = kind.phase_order();
        report.result = en.mean;
        report.samples = Some(en.config_space_size);
        report.enumerated = Some(en);
    }
    report.elapsed_ms = elapsed_ms(start);
    Ok(report)
}

pub fn cmd_verify(args: &VerifyArgs) -> RunReport {
    let cfg = VerifyConfig {
        max_n: args.max_n,
        seed: args.seed.unwrap_or(VerifyConfig::default().seed),
        corrupt_roots: args.inject_root_fault,
    };
    let start = Instant::now();
    let v = run_verify(&cfg);
    let mut report = RunReport::new("verify", args.max_n, 0);
    report.parameters.seed = Some(cfg.seed);
    let passed = v.checks.iter().filter(|c| c.passed).count();
    report.result.re = passed as f64;
    report.terms = Some(v.checks.len() as u64);
    report.checks = v.checks;
    report.elapsed_ms = elapsed_ms(start);
    report
}

fn parse_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--n-range must look like A..B, got {s:?}"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<RunReport, CliError> {
    let (lo, hi) = parse_range(&args.n_range)?;
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let opts = ExactOptions {
        ignore_size_guard: args.override_size_guard,
    };
    // Check every guard before spending time on any run.
    for &alg in &args.alg {
        check_size_guard(exact_algorithm(alg), hi, args.p, opts)?;
    }
    let start = Instant::now();
    let mut rows = Vec::new();
    for &alg in &args.alg {
        let alg = exact_algorithm(alg);
        for n in lo..=hi {
            let mut rng = permlab::estimator::stream_rng(seed, n as u64);
            let a = permlab::corpus::random_binary(n, 0.5, &mut rng);
            let mut times = Vec::with_capacity(args.reps);
            let mut terms = 0;
            for _ in 0..args.reps {
                let t = Instant::now();
                let r = per_exact(&a, alg, args.p, opts)?;
                times.push(elapsed_ms(t));
                terms = u64::try_from(r.terms_evaluated).unwrap_or(u64::MAX);
            }
            times.sort_by(f64::total_cmp);
            let median_ms = times[times.len() / 2];
            rows.push(BenchRow {
                algorithm: alg.to_string(),
                n,
                median_ms,
                terms,
                terms_per_sec: terms as f64 / (median_ms / 1e3).max(1e-9),
            });
        }
    }
    let names: Vec<String> = args
        .alg
        .iter()
        .map(|&a| exact_algorithm(a).to_string())
        .collect();
    let mut report = RunReport::new(names.join(","), hi, 0);
    report.parameters.seed = Some(seed);
    report.result.re = rows.len() as f64;
    report.samples = Some(args.reps as u64);
    report.bench = rows;
    report.elapsed_ms = elapsed_ms(start);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_specs() {
        assert_eq!(
            parse_kind_spec("gauge:p=3").unwrap(),
            EstimatorKind::Gauge { p: 3 }
        );
        assert_eq!(
            parse_kind_spec("kkll").unwrap(),
            EstimatorKind::Kkll { p: 3 }
        );
        assert_eq!(
            parse_kind_spec("recursive:depth=2").unwrap(),
            EstimatorKind::Recursive { depth: 2 }
        );
        assert!(parse_kind_spec("gauge:q=3").is_err());
        assert!(parse_kind_spec("nope").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("10..20").unwrap(), (10, 20));
        assert_eq!(parse_range("3..=5").unwrap(), (3, 5));
        assert!(parse_range("5..3").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(resolve_seed(None).unwrap(), DEFAULT_SEED);
        assert_eq!(resolve_seed(Some("7")).unwrap(), 7);
        assert!(resolve_seed(Some("seven")).is_err());
    }
}

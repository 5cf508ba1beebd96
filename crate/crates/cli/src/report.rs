//! The versioned report every subcommand emits.

use std::fmt::Write as _;

use permlab::estimator::Enumeration;
use permlab::verify::CheckOutcome;
use permlab::Scalar;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Scalar> for ComplexValue {
    fn from(z: Scalar) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub p: Option<u32>,
    pub scheme: Option<String>,
    pub seed: Option<u64>,
    pub streams: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumerated {
    pub mean: ComplexValue,
    pub second_moment: f64,
    pub variance: f64,
    pub config_space_size: u64,
}

impl From<&Enumeration> for Enumerated {
    fn from(e: &Enumeration) -> Self {
        Self {
            mean: e.mean.into(),
            second_moment: e.second_moment,
            variance: e.variance(),
            config_space_size: u64::try_from(e.space_size).unwrap_or(u64::MAX),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparedEstimator {
    pub estimator: String,
    pub enumerated: Enumerated,
}

/// Second-moment ratio of the second estimator over the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub estimators: Vec<ComparedEstimator>,
    pub second_moment_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub n: usize,
    pub median_ms: f64,
    pub terms: u64,
    pub terms_per_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub parameters: Parameters,
    pub result: ComplexValue,
    pub std_error: Option<f64>,
    pub interval: Option<[f64; 2]>,
    pub samples: Option<u64>,
    pub terms: Option<u64>,
    pub elapsed_ms: f64,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumerated: Option<Enumerated>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckOutcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bench: Vec<BenchRow>,
}

impl RunReport {
    pub fn new(algorithm: impl Into<String>, n: usize, m: usize) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            algorithm: algorithm.into(),
            n,
            m,
            parameters: Parameters::default(),
            result: ComplexValue { re: 0.0, im: 0.0 },
            std_error: None,
            interval: None,
            samples: None,
            terms: None,
            elapsed_ms: 0.0,
            warnings: Vec::new(),
            enumerated: None,
            comparison: None,
            checks: Vec::new(),
            bench: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if !self.bench.is_empty() {
            s.push_str(&bench_table(&self.bench));
        } else if !self.checks.is_empty() {
            for c in &self.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(
                    s,
                    "{status}  {:<50} residual {:.2e}  {}",
                    c.name, c.max_residual, c.detail
                );
            }
        } else {
            let _ = writeln!(s, "algorithm   {}", self.algorithm);
            let _ = writeln!(s, "size        n={} m={}", self.n, self.m);
            let _ = writeln!(s, "result      {}", fmt_complex(self.result));
            if let Some(se) = self.std_error {
                let _ = writeln!(s, "std error   {se:.6e}");
            }
            if let Some([lo, hi]) = self.interval {
                let _ = writeln!(s, "interval    [{lo:.10}, {hi:.10}]");
            }
            if let Some(k) = self.samples {
                let _ = writeln!(s, "samples     {k}");
            }
            if let Some(t) = self.terms {
                let _ = writeln!(s, "terms       {t}");
            }
            if let Some(e) = &self.enumerated {
                write_enumerated(&mut s, "", e);
            }
            if let Some(c) = &self.comparison {
                for ce in &c.estimators {
                    let _ = writeln!(s, "{}:", ce.estimator);
                    write_enumerated(&mut s, "  ", &ce.enumerated);
                }
                let _ = writeln!(s, "second moment ratio  {:.12}", c.second_moment_ratio);
            }
        }
        let _ = writeln!(s, "elapsed     {:.3} ms", self.elapsed_ms);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

fn fmt_complex(z: ComplexValue) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!(
            "{} {} {}i",
            z.re,
            if z.im < 0.0 { '-' } else { '+' },
            z.im.abs()
        )
    }
}

fn write_enumerated(s: &mut String, indent: &str, e: &Enumerated) {
    let _ = writeln!(s, "{indent}enumerated mean    {}", fmt_complex(e.mean));
    let _ = writeln!(s, "{indent}second moment      {}", e.second_moment);
    let _ = writeln!(s, "{indent}variance           {}", e.variance);
    let _ = writeln!(s, "{indent}configurations     {}", e.config_space_size);
}

fn bench_table(rows: &[BenchRow]) -> String {
    let mut s = format!(
        "{:<10} {:>4} {:>14} {:>14} {:>16}\n",
        "algorithm", "n", "median ms", "terms", "terms/sec"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<10} {:>4} {:>14.3} {:>14} {:>16.4e}",
            r.algorithm, r.n, r.median_ms, r.terms, r.terms_per_sec
        );
    }
    s
}

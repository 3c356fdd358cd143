//! Sample statistics and Kolmogorov–Smirnov tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::special::KahanSum;

/// Minimum points per side accepted by the KS tests.
pub const KS_MIN_SAMPLES: usize = 500;
/// Asymptotic Kolmogorov critical value at level 0.01.
pub const KS_CRITICAL_1PCT: f64 = 1.627_62;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub sample_variance: f64,
    pub reps: usize,
}

impl Estimate {
    /// Mean, unbiased variance and `sqrt(var/reps)` of `xs`; needs two points.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::TooFewSamples { got: xs.len(), need: 2 });
        }
        let n = xs.len() as f64;
        let mean = mean(xs);
        let mut ss = KahanSum::new();
        ss.extend(xs.iter().map(|x| (x - mean) * (x - mean)));
        let sample_variance = ss.value() / (n - 1.0);
        Ok(Self { mean, std_error: (sample_variance / n).sqrt(), sample_variance, reps: xs.len() })
    }

    /// `|mean − target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == target { 0.0 } else { f64::INFINITY }
        } else {
            (self.mean - target).abs() / self.std_error
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    let mut s = KahanSum::new();
    s.extend(xs.iter().copied());
    s.value() / xs.len() as f64
}

/// Standard error of the unbiased sample variance, from the sample fourth
/// central moment: `sqrt((m₄ − s⁴)/n)`.
pub fn variance_std_error(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let mut m2 = KahanSum::new();
    let mut m4 = KahanSum::new();
    for &x in xs {
        let d2 = (x - m) * (x - m);
        m2.add(d2);
        m4.add(d2 * d2);
    }
    let s2 = m2.value() / (n - 1.0);
    ((m4.value() / n - s2 * s2) / n).max(0.0).sqrt()
}

/// Sample skewness `m₃ / m₂^{3/2}`.
pub fn skewness(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut m2, mut m3) = (KahanSum::new(), KahanSum::new());
    for &x in xs {
        let d = x - m;
        m2.add(d * d);
        m3.add(d * d * d);
    }
    (m3.value() / n) / (m2.value() / n).powf(1.5)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    /// `statistic ≤ threshold` unless `details` says otherwise.
    pub pass: bool,
    pub details: String,
    /// Statistical rejections are soft; closed-form mismatches are hard.
    pub soft: bool,
    /// Reported only; does not enter the suite verdict.
    #[serde(default)]
    pub informational: bool,
}

impl TestResult {
    /// Passes iff `statistic ≤ threshold`.
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64, soft: bool, details: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
            details: details.into(),
            soft,
            informational: false,
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample KS statistic `sup |F_n − F|`.
pub fn ks_statistic_cdf<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample KS statistic `sup |F_n − G_m|`.
pub fn ks_statistic_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let (a, b) = (sorted(xs), sorted(ys));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// What a sample is compared against.
pub enum Reference<'a> {
    Sample(&'a [f64]),
    Cdf(&'a dyn Fn(f64) -> f64),
}

/// Kolmogorov–Smirnov test at level 0.01 with the large-sample critical
/// value `1.6276·sqrt((n+m)/(nm))` (one-sample: `m → ∞`).
pub fn ks_distance(samples: &[f64], reference: Reference<'_>) -> Result<TestResult> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples { got: samples.len(), need: KS_MIN_SAMPLES });
    }
    let n = samples.len() as f64;
    let (statistic, threshold, details) = match reference {
        Reference::Sample(ys) => {
            if ys.len() < KS_MIN_SAMPLES {
                return Err(Error::TooFewSamples { got: ys.len(), need: KS_MIN_SAMPLES });
            }
            let m = ys.len() as f64;
            (
                ks_statistic_two_sample(samples, ys),
                KS_CRITICAL_1PCT * ((n + m) / (n * m)).sqrt(),
                format!("two-sample, n={}, m={}", samples.len(), ys.len()),
            )
        }
        Reference::Cdf(f) => (
            ks_statistic_cdf(samples, f),
            KS_CRITICAL_1PCT / n.sqrt(),
            format!("one-sample, n={}", samples.len()),
        ),
    };
    Ok(TestResult::at_most("ks", statistic, threshold, true, details))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

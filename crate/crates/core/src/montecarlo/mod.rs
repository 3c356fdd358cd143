//! Reproducible replicate harness.
//!
//! Replicate `r` draws its spectrum from `substream(master_seed, r)`, so every
//! output is a pure function of the configuration, whatever the thread count.

mod stats;
pub mod suites;

pub use stats::{
    ks_distance, ks_statistic_cdf, ks_statistic_two_sample, mean, normal_cdf, skewness, variance_std_error,
    Estimate, Reference, TestResult, KS_CRITICAL_1PCT, KS_MIN_SAMPLES,
};

use serde::{Deserialize, Serialize};

use crate::cue::{sample_haar_spectrum_with, Sampler, UnitarySpectrum};
use crate::error::{domain, Result};
use crate::measure::{check_fugacity, free_energy_of_angles};
use crate::par::{map_indexed, Execution};
use crate::rng::substream;
use crate::scaling::near_critical_q;

/// Smallest replicate count accepted by the statistical suites.
pub const MIN_STATISTICAL_REPS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mode {
    FixedQ { q: f64 },
    /// `q = 1 − c/N`, fixed at construction.
    NearCritical { c: f64, q: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub master_seed: u64,
    pub reps: usize,
    pub n: usize,
    pub mode: Mode,
    pub suite: String,
    #[serde(default)]
    pub sampler: Sampler,
    #[serde(default)]
    pub execution: Execution,
}

impl RunConfig {
    pub fn fixed_q(master_seed: u64, reps: usize, n: usize, q: f64) -> Result<Self> {
        check_fugacity(q)?;
        Self::build(master_seed, reps, n, Mode::FixedQ { q })
    }

    pub fn near_critical(master_seed: u64, reps: usize, n: usize, c: f64) -> Result<Self> {
        let q = near_critical_q(c, n)?;
        Self::build(master_seed, reps, n, Mode::NearCritical { c, q })
    }

    fn build(master_seed: u64, reps: usize, n: usize, mode: Mode) -> Result<Self> {
        if reps == 0 || n == 0 {
            return domain("reps and N must be positive");
        }
        Ok(Self {
            master_seed,
            reps,
            n,
            mode,
            suite: String::new(),
            sampler: Sampler::default(),
            execution: Execution::default(),
        })
    }

    pub fn with_suite(mut self, suite: impl Into<String>) -> Self {
        self.suite = suite.into();
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn q(&self) -> f64 {
        match self.mode {
            Mode::FixedQ { q } | Mode::NearCritical { q, .. } => q,
        }
    }

    pub(crate) fn require_statistical(&self) -> Result<()> {
        if self.reps < MIN_STATISTICAL_REPS {
            return domain(format!("statistical suites need reps ≥ {MIN_STATISTICAL_REPS}, got {}", self.reps));
        }
        Ok(())
    }
}

/// `f(spectrum_r)` for every replicate, in replicate order.
pub fn map_spectra<T, F>(config: &RunConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&UnitarySpectrum) -> T + Sync + Send,
{
    let (n, sampler, seed) = (config.n, config.sampler, config.master_seed);
    map_indexed(config.reps, config.execution, |r| {
        let mut rng = substream(seed, r as u64);
        sample_haar_spectrum_with(n, sampler, &mut rng).map(|s| f(&s))
    })
    .into_iter()
    .collect()
}

/// `log Z_N` over independent Haar spectra.
pub fn mc_free_energy(config: &RunConfig) -> Result<Vec<f64>> {
    let q = config.q();
    map_spectra(config, |s| free_energy_of_angles(s.angles(), q))
}

/// `E Z_N` estimate with heavy-tail diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PartitionEstimate {
    pub estimate: Estimate,
    /// Largest single sample over the sample sum.
    pub max_weight_fraction: f64,
    /// `(Σ Z)² / Σ Z²`.
    pub effective_sample_size: f64,
    pub details: String,
}

pub fn mc_partition_function(config: &RunConfig) -> Result<PartitionEstimate> {
    let zs: Vec<f64> = mc_free_energy(config)?.into_iter().map(f64::exp).collect();
    partition_estimate(config, &zs)
}

pub(crate) fn partition_estimate(config: &RunConfig, zs: &[f64]) -> Result<PartitionEstimate> {
    let estimate = Estimate::from_samples(zs)?;
    let total: f64 = zs.iter().sum();
    let max = zs.iter().copied().fold(0.0, f64::max);
    let sum_sq: f64 = zs.iter().map(|z| z * z).sum();
    let q = config.q();
    let mut details = String::new();
    if config.n >= 5 && q > 0.6 {
        details = format!("warning: q={q} > 0.6 at N={}; Z is heavy tailed and the error bar is unreliable", config.n);
    }
    Ok(PartitionEstimate {
        estimate,
        max_weight_fraction: max / total,
        effective_sample_size: total * total / sum_sq,
        details,
    })
}

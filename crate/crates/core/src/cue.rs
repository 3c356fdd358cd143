//! Disorder: Haar-random unitary spectra, cyclotomic spectra and power traces.
//!
//! Two Haar samplers are provided. [`Sampler::Householder`] orthonormalizes a
//! complex Ginibre matrix (QR with the diagonal phase correction) and
//! diagonalizes the result, at `O(N³)` per draw. [`Sampler::Verblunsky`] draws
//! the independent Verblunsky coefficients of the Haar spectral measure
//! (`|α_k|² ~ Beta(1, N−k−1)` with uniform phase, `α_{N−1}` uniform on the
//! circle) and locates the eigenvalues as the level crossings of the
//! monotone Prüfer phase of the paraorthogonal polynomial, at `O(N²)` per draw.
//! Both produce the same law; the default is the Verblunsky sampler.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Eigen-angles of an `N × N` unitary, sorted ascending in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr")]
pub struct UnitarySpectrum {
    n: usize,
    angles: Vec<f64>,
}

impl UnitarySpectrum {
    /// Reduces every angle into `[0, 2π)` and sorts.
    pub fn from_angles(mut angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return domain("spectrum needs at least one eigenvalue");
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return domain("non-finite eigen-angle");
        }
        for a in angles.iter_mut() {
            *a = a.rem_euclid(TAU);
            if *a >= TAU {
                *a = 0.0;
            }
        }
        angles.sort_by(f64::total_cmp);
        Ok(UnitarySpectrum { n: angles.len(), angles })
    }

    /// Identity matrix: all angles zero.
    pub fn identity(n: usize) -> Result<Self> {
        Self::from_angles(vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.angles.iter().map(|&a| Complex64::from_polar(1.0, a)).collect()
    }

    /// Spectrum with every angle shifted by `phi` (global phase `e^{iφ}·U`).
    pub fn rotated(&self, phi: f64) -> Self {
        Self::from_angles(self.angles.iter().map(|a| a + phi).collect()).expect("finite angles")
    }
}

#[derive(Deserialize)]
struct SpectrumRepr {
    n: usize,
    angles: Vec<f64>,
}

impl TryFrom<SpectrumRepr> for UnitarySpectrum {
    type Error = crate::Error;

    fn try_from(r: SpectrumRepr) -> Result<Self> {
        if r.n != r.angles.len() {
            return domain(format!("n = {} but {} angles given", r.n, r.angles.len()));
        }
        UnitarySpectrum::from_angles(r.angles)
    }
}

/// Newton parameters `p_d = Tr U^d`, `d = 1..=M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTraces {
    n: usize,
    values: Vec<Complex64>,
}

impl PowerTraces {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Depth `M`.
    pub fn depth(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `p_d` for `1 ≤ d ≤ M`.
    pub fn get(&self, d: usize) -> Complex64 {
        self.values[d - 1]
    }
}

/// `angles = 2πk/N`, `k = 0..N`.
pub fn roots_of_unity_spectrum(n: usize) -> Result<UnitarySpectrum> {
    if n == 0 {
        return domain("N must be positive");
    }
    UnitarySpectrum::from_angles((0..n).map(|k| TAU * k as f64 / n as f64).collect())
}

pub fn power_traces(s: &UnitarySpectrum, m: usize) -> Result<PowerTraces> {
    if m == 0 {
        return domain("power-trace depth must be positive");
    }
    let values = (1..=m)
        .map(|d| {
            let (re, im) = s.angles.iter().fold((0.0, 0.0), |(re, im), &a| {
                let (sin, cos) = (d as f64 * a).sin_cos();
                (re + cos, im + sin)
            });
            Complex64::new(re, im)
        })
        .collect();
    Ok(PowerTraces { n: s.n, values })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// Ginibre QR with phase correction, then dense eigenvalues.
    Householder,
    /// Independent Verblunsky coefficients and Prüfer-phase root finding.
    #[default]
    Verblunsky,
}

impl std::str::FromStr for Sampler {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "householder" => Ok(Sampler::Householder),
            "verblunsky" => Ok(Sampler::Verblunsky),
            other => domain(format!("unknown sampler {other:?}")),
        }
    }
}

pub fn sample_haar_spectrum<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitarySpectrum> {
    sample_haar_spectrum_with(n, Sampler::default(), rng)
}

pub fn sample_haar_spectrum_with<R: Rng + ?Sized>(
    n: usize,
    sampler: Sampler,
    rng: &mut R,
) -> Result<UnitarySpectrum> {
    if n == 0 {
        return domain("N must be positive");
    }
    match sampler {
        Sampler::Householder => householder_spectrum(n, rng),
        Sampler::Verblunsky => {
            let coeffs = sample_verblunsky(n, rng);
            UnitarySpectrum::from_angles(paraorthogonal_zeros(&coeffs))
        }
    }
}

fn householder_spectrum<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitarySpectrum> {
    let g = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Q · diag(r_jj / |r_jj|) is Haar distributed
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    let eig = nalgebra::linalg::Schur::new(q)
        .eigenvalues()
        .ok_or_else(|| crate::Error::Conditioning("Schur iteration did not converge".into()))?;
    UnitarySpectrum::from_angles(eig.iter().map(|z| z.arg()).collect())
}

/// Verblunsky coefficients `α_0, …, α_{N−1}` of the Haar spectral measure.
pub fn sample_verblunsky<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n - 1 {
        let shape = (n - k - 1) as f64;
        let u: f64 = rng.random();
        // 1 − V^{1/m} ~ Beta(1, m) with V = 1 − u in (0, 1]
        let radius2 = -(((1.0 - u).ln()) / shape).exp_m1();
        let phase: f64 = rng.random::<f64>() * TAU;
        out.push(Complex64::from_polar(radius2.sqrt(), phase));
    }
    let phase: f64 = rng.random::<f64>() * TAU;
    out.push(Complex64::from_polar(1.0, phase));
    out
}

/// Lifted Prüfer phase `ψ_{N−1}(θ)` and its θ-derivative.
///
/// With `b_k = zΦ_k/Φ_k^*` on `|z| = 1`, the Szegő recursion gives
/// `b_{k+1} = z (b_k − ᾱ_k)/(1 − α_k b_k)`, i.e.
/// `ψ_{k+1} = θ + ψ_k − 2 arg(1 − α_k e^{iψ_k})` with `ψ_0 = θ`.
fn prufer_phase(alpha: &[Complex64], theta: f64) -> (f64, f64) {
    let z = Complex64::from_polar(1.0, theta);
    let mut b = z;
    let mut arg_sum = 0.0;
    let mut deriv = 1.0;
    for a in &alpha[..alpha.len() - 1] {
        let ab = a * b;
        let w = Complex64::new(1.0 - ab.re, -ab.im);
        let norm2 = w.norm_sqr();
        // Re w > 0 since |α| < 1, so the principal atan is the continuous branch
        arg_sum += (w.im / w.re).atan();
        deriv = 1.0 + deriv * (1.0 - a.norm_sqr()) / norm2;
        let wc = w.conj();
        b = z * b * wc * wc / norm2;
    }
    let k = (alpha.len() - 1) as f64;
    (theta + k * theta - 2.0 * arg_sum, deriv)
}

/// Zeros of the paraorthogonal polynomial `Φ_N` for coefficients with
/// `|α_k| < 1` for `k < N−1` and `|α_{N−1}| = 1`, as angles in `[0, 2π)`.
///
/// `Φ_N(e^{iθ}) = 0` iff `ψ_{N−1}(θ) ≡ arg ᾱ_{N−1} (mod 2π)`, and `ψ_{N−1}`
/// is strictly increasing with total increase `2πN` over one turn, so every
/// level `arg ᾱ_{N−1} + 2πj` is crossed exactly once.
pub fn paraorthogonal_zeros(alpha: &[Complex64]) -> Vec<f64> {
    let n = alpha.len();
    let eta = (-alpha[n - 1].arg()).rem_euclid(TAU);
    if n == 1 {
        return vec![eta];
    }
    let grid = 2 * n;
    let h = TAU / grid as f64;
    let values: Vec<f64> = (0..=grid).map(|i| prufer_phase(alpha, i as f64 * h).0).collect();
    let f0 = values[0];
    let j0 = ((f0 - eta) / TAU).floor() as i64 + 1;
    let mut roots = Vec::with_capacity(n);
    let mut cell = 0;
    for j in j0..j0 + n as i64 {
        let target = eta + TAU * j as f64;
        while cell < grid - 1 && values[cell + 1] < target {
            cell += 1;
        }
        let (lo, hi) = (cell as f64 * h, (cell + 1) as f64 * h);
        roots.push(solve_monotone(alpha, target, lo, hi, values[cell], values[cell + 1]));
    }
    roots
}

const ROOT_STEP_TOL: f64 = 1e-13;

/// Safeguarded Newton for `ψ(θ) = target` on a bracket `[lo, hi]`.
fn solve_monotone(alpha: &[Complex64], target: f64, mut lo: f64, mut hi: f64, flo: f64, fhi: f64) -> f64 {
    let span = fhi - flo;
    let mut x = if span > 0.0 { lo + (hi - lo) * ((target - flo) / span).clamp(0.0, 1.0) } else { 0.5 * (lo + hi) };
    for _ in 0..60 {
        let (f, df) = prufer_phase(alpha, x);
        let g = f - target;
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - g / df;
        // below 1e-13 the step is dominated by rounding in ψ itself
        if (newton - x).abs() <= ROOT_STEP_TOL && newton > lo && newton < hi {
            return newton;
        }
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= ROOT_STEP_TOL {
            return next;
        }
        x = next;
    }
    x
}

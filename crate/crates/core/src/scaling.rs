//! Near-critical scaling `q_N = 1 − c/N`: extensive free energies, the
//! variance constant `σ_c²`, and the generic pair-statistic variance.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, integrate_2d, integrate_to_infinity, QuadResult};
use crate::special::{dilog_exp_neg, exp_integral_e1, KahanSum, ZETA2};

/// Largest coefficient index [`sw_variance`] will evaluate.
pub const SW_MAX_TERMS: usize = 20_000_000;

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        domain(format!("c must be positive and finite, got {c}"))
    }
}

/// `q_N = 1 − c/N`; requires `0 < c < N`.
pub fn near_critical_q(c: f64, n: usize) -> Result<f64> {
    check_c(c)?;
    if n == 0 || c >= n as f64 {
        return domain(format!("near-critical fugacity needs 0 < c < N, got c={c}, N={n}"));
    }
    Ok(1.0 - c / n as f64)
}

/// Quenched free energy density `(1 − e^{−c})/c + E₁(c)`.
pub fn mu_c(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok(-(-c).exp_m1() / c + exp_integral_e1(c))
}

/// Annealed free energy density `(π²/6 − Li₂(e^{−c}))/c`.
pub fn nu_c(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok((ZETA2 - dilog_exp_neg(c)) / c)
}

/// `ν_c = ∫_0^1 −log(1 − e^{−cx}) dx` by adaptive quadrature.
pub fn nu_c_quadrature(c: f64, tol: f64) -> Result<QuadResult> {
    check_c(c)?;
    integrate(|x| -(-(-c * x).exp_m1()).ln(), 0.0, 1.0, tol)
}

/// `h(c) = c(ν_c − μ_c)`.
pub fn h_gap(c: f64) -> Result<f64> {
    Ok(c * (nu_c(c)? - mu_c(c)?))
}

/// `1/(e^x − 1) − e^{−x}/x`, positive for `x > 0`.
pub fn h_prime_integrand(x: f64) -> f64 {
    1.0 / x.exp_m1() - (-x).exp() / x
}

/// `h′(c) = ∫_c^∞ (1/(e^x − 1) − e^{−x}/x) dx` by quadrature.
pub fn h_prime(c: f64, tol: f64) -> Result<QuadResult> {
    check_c(c)?;
    integrate_to_infinity(h_prime_integrand, c, tol)
}

/// Which exponent the `A`/`B` Riemann sums use for `q_N^{2k}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentConvention {
    /// `q_N^{2k} → e^{−2cx}`.
    #[default]
    #[serde(rename = "exp(-2cx)")]
    Doubled,
    /// `q_N^{2k} → e^{−cx}`, kept only for comparison.
    #[serde(rename = "exp(-cx)")]
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub c: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub sigma2: f64,
    /// Summed quadrature error estimates for `gamma` and `delta`.
    pub quad_error: f64,
    pub convention: ExponentConvention,
}

/// `α_c = ∫_0^1 e^{−2cx} dx`.
pub fn alpha_c(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok(-(-2.0 * c).exp_m1() / (2.0 * c))
}

/// `β_c = ∫_1^∞ e^{−2cx}/x² dx = e^{−2c} − 2c E₁(2c)`.
pub fn beta_c(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok((-2.0 * c).exp() - 2.0 * c * exp_integral_e1(2.0 * c))
}

/// `β_c` by direct quadrature of its defining integral.
pub fn beta_c_quadrature(c: f64, tol: f64) -> Result<QuadResult> {
    check_c(c)?;
    integrate_to_infinity(|x| (-2.0 * c * x).exp() / (x * x), 1.0, tol)
}

/// Smallest `S ≥ 2` with `e^{−cS}/(c(S² − 1)) ≤ bound`.
fn tail_cutoff(c: f64, bound: f64) -> f64 {
    let mut s = 2.0;
    while (-c * s).exp() / (c * (s * s - 1.0)) > bound {
        s *= 1.25;
    }
    s
}

/// `γ_c`: in `s = x + y`, `t = |x − y|` the region becomes `0 ≤ t ≤ 1`,
/// `s ≥ 2 − t`, and
/// `γ_c = 4 ∫_0^1 (1 − t) ∫_{2−t}^∞ e^{−cs}/(s² − t²) ds dt`.
/// The `s` range is cut at `S` where the remaining mass is below `tol/10`.
pub fn gamma_c(c: f64, tol: f64) -> Result<QuadResult> {
    check_c(c)?;
    // 4 ∫ (1−t) ∫_S^∞ ≤ 2 e^{−cS}/(c(S²−1))
    let s_max = tail_cutoff(c, 0.05 * tol);
    let r = integrate_2d(
        |t, s| 4.0 * (1.0 - t) * (-c * s).exp() / ((s - t) * (s + t)),
        0.0,
        1.0,
        |t| 2.0 - t,
        |_| s_max,
        0.9 * tol,
    )?;
    Ok(QuadResult { value: r.value, error: r.error + 0.1 * tol })
}

/// `δ_c = 4 ∫_1^2 (s − 1) e^{−cs} ∫_0^{2−s} dt/(s² − t²) ds`.
pub fn delta_c(c: f64, tol: f64) -> Result<QuadResult> {
    check_c(c)?;
    integrate_2d(
        |s, t| 4.0 * (s - 1.0) * (-c * s).exp() / ((s - t) * (s + t)),
        1.0,
        2.0,
        |_| 0.0,
        |s| 2.0 - s,
        tol,
    )
}

/// `μ_c, ν_c` and `σ_c² = α_c + β_c − γ_c − δ_c`.
pub fn sigma2_c(c: f64, tol: f64) -> Result<ScalingConstants> {
    sigma2_c_with(c, tol, ExponentConvention::Doubled)
}

pub fn sigma2_c_with(c: f64, tol: f64, convention: ExponentConvention) -> Result<ScalingConstants> {
    check_c(c)?;
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let (alpha, beta) = match convention {
        ExponentConvention::Doubled => (alpha_c(c)?, beta_c(c)?),
        ExponentConvention::Single => (-(-c).exp_m1() / c, (-c).exp() - c * exp_integral_e1(c)),
    };
    let g = gamma_c(c, 0.5 * tol)?;
    let d = delta_c(c, 0.5 * tol)?;
    let quad_error = g.error + d.error;
    if quad_error > tol {
        return Err(Error::Tolerance { tol, achieved: quad_error });
    }
    Ok(ScalingConstants {
        c,
        mu: mu_c(c)?,
        nu: nu_c(c)?,
        alpha,
        beta,
        gamma: g.value,
        delta: d.value,
        sigma2: alpha + beta - g.value - d.value,
        quad_error,
        convention,
    })
}

/// How fast the Fourier coefficients of a test function decay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DecayCertificate {
    /// `|f̂(k)| ≤ constant · ratio^k` for every `k ≥ 1`.
    Geometric { constant: f64, ratio: f64 },
    /// `f̂(k) = 0` for `k > support`.
    FiniteSupport { support: usize },
}

impl DecayCertificate {
    fn bound(&self, k: usize) -> f64 {
        match *self {
            Self::Geometric { constant, ratio } => constant * ratio.powi(k as i32),
            Self::FiniteSupport { support } => {
                if k <= support {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    /// Index `K ≥ n` beyond which `B_N` and `C_N` together omit at most `tol`.
    fn cutoff(&self, n: usize, tol: f64) -> Result<usize> {
        match *self {
            Self::FiniteSupport { support } => Ok(support.max(n)),
            Self::Geometric { constant, ratio } => {
                if !(0.0..1.0).contains(&ratio) || !(constant >= 0.0) {
                    return domain(format!("geometric certificate needs 0 ≤ ratio < 1, got {ratio}"));
                }
                if constant == 0.0 || ratio == 0.0 {
                    return Ok(n);
                }
                // B and C tails are each ≤ N² C² ρ^{2K+2} / (1 − ρ²)
                let nf = n as f64;
                let target = 0.5 * tol * (1.0 - ratio * ratio) / (nf * nf * constant * constant);
                let k = (target.ln() / (2.0 * ratio.ln()) - 1.0).ceil().max(0.0) as usize;
                let k = k.max(n);
                if k > SW_MAX_TERMS {
                    return Err(Error::Budget { required: k as u128, limit: SW_MAX_TERMS as u128 });
                }
                Ok(k)
            }
        }
    }
}

/// `Var[Σ_{m,n} f(θ_m − θ_n)] = 4(A_N + B_N − C_N − D_N)` for a real even
/// test function with Fourier coefficients `f̂(k)`:
///
/// - `A_N = Σ_{k<N} k² f̂(k)²`
/// - `B_N = (N² − N) Σ_{k≥N} f̂(k)²`
/// - `C_N = Σ_{max(k,l)≥N, 1≤|k−l|≤N−1} (N − |k−l|) f̂(k) f̂(l)`
/// - `D_N = Σ_{1≤k,l≤N−1, k+l≥N+1} (k + l − N) f̂(k) f̂(l)`
///
/// The infinite sums are cut where `certificate` guarantees the omitted part
/// is below `tol`; a coefficient exceeding the certified bound is an error.
pub fn sw_variance<F>(fhat: F, n: usize, tol: f64, certificate: Option<&DecayCertificate>) -> Result<f64>
where
    F: Fn(usize) -> f64,
{
    let cert = certificate.ok_or(Error::MissingCertificate)?;
    if n == 0 {
        return domain("N must be positive");
    }
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let kmax = cert.cutoff(n, tol)?;
    // coefficients 1..=kmax+n, index 0 unused
    let mut f = vec![0.0; kmax + n + 1];
    for (k, slot) in f.iter_mut().enumerate().skip(1) {
        let v = fhat(k);
        let bound = cert.bound(k);
        if !v.is_finite() || v.abs() > bound * (1.0 + 1e-12) {
            return domain(format!("f̂({k}) = {v} violates the decay certificate"));
        }
        *slot = v;
    }
    let nf = n as f64;

    let mut a = KahanSum::new();
    for k in 1..n {
        a.add((k * k) as f64 * f[k] * f[k]);
    }

    let mut b = KahanSum::new();
    for &fk in &f[n..=kmax] {
        b.add(fk * fk);
    }

    let mut c = KahanSum::new();
    for d in 1..n {
        let mut inner = KahanSum::new();
        for l in (n - d).max(1)..=kmax {
            inner.add(f[l] * f[l + d]);
        }
        c.add(2.0 * (n - d) as f64 * inner.value());
    }

    let mut dd = KahanSum::new();
    for k in 1..n {
        for l in (n + 1 - k).max(1)..n {
            dd.add((k + l - n) as f64 * f[k] * f[l]);
        }
    }

    Ok(4.0 * (a.value() + (nf * nf - nf) * b.value() - c.value() - dd.value()))
}

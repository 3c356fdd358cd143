//! Closed forms at fixed `q` and finite `N`.
//!
//! Every infinite series here is truncated against an explicit tail bound,
//! never a fixed number of terms.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measure::check_fugacity;
use crate::par::{map_indexed, Execution};
use crate::partitions::{enumerate_partitions, partitions_of, Partition};
use crate::special::{compensated_sum, harmonic, KahanSum, GAMMA_QUARTER};
use crate::symfunc::invariant_dimension;

/// Largest moment order accepted by [`moment_series`].
pub const MAX_MOMENT_ORDER: usize = 3;
/// Largest total weight accepted by [`moment_series`].
pub const MAX_MOMENT_WEIGHT: u32 = 12;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        domain("N must be positive")
    } else {
        Ok(())
    }
}

/// `E Z_N = Π_{n=1}^N (1 − q^n)^{-1}`.
pub fn expected_z(q: f64, n: usize) -> Result<f64> {
    Ok(log_expected_z(q, n)?.exp())
}

/// `log E Z_N = −Σ_{n=1}^N log(1 − q^n)`.
pub fn log_expected_z(q: f64, n: usize) -> Result<f64> {
    check_fugacity(q)?;
    check_n(n)?;
    let mut s = KahanSum::new();
    let mut qn = 1.0;
    for _ in 0..n {
        qn *= q;
        s.add(-(-qn).ln_1p());
    }
    Ok(s.value())
}

/// `E log Z_N = Σ_{d≤N} q^d + N(−log(1−q) − Σ_{d≤N} q^d/d)`.
pub fn expected_log_z(q: f64, n: usize) -> Result<f64> {
    check_fugacity(q)?;
    check_n(n)?;
    let mut geometric = KahanSum::new();
    let mut log_tail = KahanSum::new();
    log_tail.add(-(-q).ln_1p());
    let mut qd = 1.0;
    for d in 1..=n {
        qd *= q;
        geometric.add(qd);
        log_tail.add(-qd / d as f64);
    }
    Ok(geometric.value() + n as f64 * log_tail.value())
}

/// Finite-`N` gap `log E Z_N − E log Z_N`.
pub fn disorder_gap(q: f64, n: usize) -> Result<f64> {
    Ok(log_expected_z(q, n)? - expected_log_z(q, n)?)
}

/// Euler's function `φ(q) = Π_{n≥1} (1 − q^n)`.
pub fn euler_phi(q: f64, tol: f64) -> Result<f64> {
    Ok((-neg_log_euler_phi(q, tol)?).exp())
}

/// `−log φ(q) = −Σ log(1 − q^n)`, stopped once `q^{n+1}/(1−q)²` drops below
/// `tol` (a bound on the remaining sum).
pub fn neg_log_euler_phi(q: f64, tol: f64) -> Result<f64> {
    check_fugacity(q)?;
    check_tol(tol)?;
    let mut s = KahanSum::new();
    let mut qn = 1.0;
    loop {
        qn *= q;
        s.add(-(-qn).ln_1p());
        // −log(1 − x) ≤ x/(1 − x) ≤ x/(1 − q), summed geometrically
        if qn * q / ((1.0 - q) * (1.0 - q)) <= tol {
            return Ok(s.value());
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        domain(format!("tolerance must be positive, got {tol}"))
    }
}

/// Limiting disorder gap `Σ_{n≥2} q^n / ((1 − q^n) n)`.
///
/// Truncated at the first `M` with `q^{M+1}/((M+1)(1−q)²) ≤ tol`; the result
/// is checked against `−log φ(q) − q/(1−q)`.
pub fn disorder_gap_limit(q: f64, tol: f64) -> Result<f64> {
    check_fugacity(q)?;
    check_tol(tol)?;
    let value = lambert_gap(q, tol);
    let neg_log_phi = neg_log_euler_phi(q, tol)?;
    let other = neg_log_phi - q / (1.0 - q);
    let slack = (10.0 * tol).max(1e-13 * neg_log_phi);
    if (value - other).abs() > slack {
        return Err(Error::Conditioning(format!(
            "Lambert series {value:e} and Euler-function route {other:e} disagree"
        )));
    }
    Ok(value)
}

fn lambert_gap(q: f64, tol: f64) -> f64 {
    let mut s = KahanSum::new();
    let mut qn = q;
    let mut n = 1usize;
    loop {
        n += 1;
        qn *= q;
        s.add(qn / ((1.0 - qn) * n as f64));
        let next = qn * q / ((n + 1) as f64 * (1.0 - q) * (1.0 - q));
        if next <= tol {
            return s.value();
        }
    }
}

/// `(7/8) log 2 + (3/4) log π − log Γ(1/4) − π/24 − 1/(e^π − 1)`.
pub fn ramanujan_closed_form() -> f64 {
    let terms = [
        7.0 / 8.0 * LN_2,
        0.75 * PI.ln(),
        -GAMMA_QUARTER.ln(),
        -PI / 24.0,
        -1.0 / PI.exp_m1(),
    ];
    compensated_sum(&terms)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanujanReport {
    pub q: f64,
    pub closed_form: f64,
    pub series: f64,
    pub difference: f64,
    pub tol: f64,
    /// Closed form rounded to two significant figures.
    pub rounded: String,
    pub pass: bool,
}

/// Compares the Lambert-series gap at `q = e^{−π}` with the closed form.
pub fn ramanujan_gap_check(tol: f64) -> Result<RamanujanReport> {
    let q = (-PI).exp();
    let closed_form = ramanujan_closed_form();
    let series = disorder_gap_limit(q, tol.min(1e-14))?;
    let difference = (closed_form - series).abs();
    let rounded = format!("{closed_form:.2e}");
    let pass = difference <= tol && rounded == "9.63e-4" && closed_form > 0.0;
    Ok(RamanujanReport { q, closed_form, series, difference, tol, rounded, pass })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub value: f64,
    /// Contribution of the final weight shell `Σ|λⁱ| = maxTotalWeight`.
    pub last_shell_contribution: f64,
    pub tuples: u64,
}

/// Truncated `E Z_N^k = Σ q^{Σ|λⁱ|} I_N(λ¹, …, λᵏ)` over `k`-tuples with total
/// weight at most `max_total_weight`.
pub fn moment_series(q: f64, n: usize, k: usize, max_total_weight: u32) -> Result<MomentSeries> {
    moment_series_with(q, n, k, max_total_weight, Execution::default())
}

pub fn moment_series_with(
    q: f64,
    n: usize,
    k: usize,
    max_total_weight: u32,
    exec: Execution,
) -> Result<MomentSeries> {
    check_fugacity(q)?;
    check_n(n)?;
    if k == 0 || k > MAX_MOMENT_ORDER {
        return domain(format!("moment order must be in 1..={MAX_MOMENT_ORDER}, got {k}"));
    }
    if max_total_weight > MAX_MOMENT_WEIGHT {
        return Err(Error::Budget { required: max_total_weight as u128, limit: MAX_MOMENT_WEIGHT as u128 });
    }
    // outer index: the first shape; inner: the remaining k−1 shapes
    let firsts: Vec<Partition> = enumerate_partitions(n, max_total_weight).collect();
    let per_first = map_indexed(firsts.len(), exec, |i| -> Result<Vec<(u32, u128)>> {
        let first = &firsts[i];
        let mut out = Vec::new();
        let mut tuple = vec![first.clone()];
        fill_tuples(n, k - 1, max_total_weight - first.weight(), &mut tuple, &mut |shapes| {
            let w: u32 = shapes.iter().map(Partition::weight).sum();
            out.push((w, invariant_dimension(shapes, n)?));
            Ok(())
        })?;
        Ok(out)
    });
    // order-fixed reduction per weight shell
    let mut shells = vec![KahanSum::new(); max_total_weight as usize + 1];
    let mut tuples = 0u64;
    for chunk in per_first {
        for (w, dim) in chunk? {
            shells[w as usize].add(dim as f64);
            tuples += 1;
        }
    }
    let mut total = KahanSum::new();
    let mut last = 0.0;
    for (w, s) in shells.iter().enumerate() {
        let c = q.powi(w as i32) * s.value();
        total.add(c);
        if w == max_total_weight as usize {
            last = c;
        }
    }
    Ok(MomentSeries { value: total.value(), last_shell_contribution: last, tuples })
}

fn fill_tuples<F>(n: usize, remaining: usize, budget: u32, tuple: &mut Vec<Partition>, visit: &mut F) -> Result<()>
where
    F: FnMut(&[Partition]) -> Result<()>,
{
    if remaining == 0 {
        return visit(tuple);
    }
    for w in 0..=budget {
        for shape in partitions_of(w, n, w) {
            tuple.push(shape);
            fill_tuples(n, remaining - 1, budget - w, tuple, visit)?;
            tuple.pop();
        }
    }
    Ok(())
}

/// Mean `q/(1−q)` and variance `q²/(1−q²)` of `F = Σ_{d≥1} q^d X_d`.
pub fn limit_f_params(q: f64) -> Result<(f64, f64)> {
    check_fugacity(q)?;
    Ok((q / (1.0 - q), q * q / (1.0 - q * q)))
}

/// Truncation depth `M` with tail mean `q^{M+1}/(1−q) ≤ tol`.
pub fn limit_f_depth(q: f64, tol: f64) -> usize {
    let mut m = 1usize;
    while q.powi(m as i32 + 1) / (1.0 - q) > tol {
        m += 1;
    }
    m
}

/// One draw of `Σ_{d=1}^M q^d X_d`, `X_d` iid `Exp(1)`.
pub fn sample_limit_f<R: Rng + ?Sized>(q: f64, rng: &mut R, tol: f64) -> Result<f64> {
    check_fugacity(q)?;
    check_tol(tol)?;
    let m = limit_f_depth(q, tol);
    let mut qd = 1.0;
    let mut s = 0.0;
    for _ in 0..m {
        qd *= q;
        let x: f64 = Exp1.sample(rng);
        s += qd * x;
    }
    Ok(s)
}

/// `Var[log Z_N] = A + B − C − D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceDecomposition {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub total: f64,
    /// Bound on the omitted tails of `B` and `C`.
    pub truncation_error: f64,
}

/// Exact finite-`N` variance of the free energy.
///
/// - `A = Σ_{k<N} q^{2k}` in closed form;
/// - `B = N(N−1) Σ_{k≥N} q^{2k}/k²`;
/// - `C = 2 Σ_{d=1}^{N−1} (N−d) Σ_{l≥N−d} q^{2l+d}/(l(l+d))`;
/// - `D = Σ_{m=N+1}^{2N−2} (m−N) q^m (2/m)(H_{N−1} − H_{m−N})`, the finite
///   double sum grouped by `m = k + l`.
pub fn variance_exact(q: f64, n: usize, tol: f64) -> Result<VarianceDecomposition> {
    check_fugacity(q)?;
    check_n(n)?;
    check_tol(tol)?;
    let nf = n as f64;
    let q2 = q * q;
    let one_minus_q2 = 1.0 - q2;

    let a = if n == 1 { 0.0 } else { q2 * (1.0 - q2.powi(n as i32 - 1)) / one_minus_q2 };

    let (b, b_err) = if n == 1 {
        (0.0, 0.0)
    } else {
        let pref = nf * (nf - 1.0);
        let mut s = KahanSum::new();
        let mut k = n;
        let mut q2k = q2.powi(n as i32);
        loop {
            s.add(q2k / (k * k) as f64);
            let tail = pref * q2k * q2 / (((k + 1) * (k + 1)) as f64 * one_minus_q2);
            k += 1;
            q2k *= q2;
            if tail <= 0.25 * tol {
                break (pref * s.value(), tail);
            }
        }
    };

    let mut c_sum = KahanSum::new();
    let mut c_err = 0.0;
    let per_d_tol = if n > 1 { 0.25 * tol / (n - 1) as f64 } else { 0.0 };
    for dd in 1..n {
        let weight = 2.0 * (n - dd) as f64;
        let mut l = n - dd;
        let mut term_pow = q.powi((2 * l + dd) as i32);
        let mut s = KahanSum::new();
        loop {
            s.add(term_pow / (l as f64 * (l + dd) as f64));
            let next_pow = term_pow * q2;
            let tail = weight * next_pow / ((l + 1) as f64 * (l + 1 + dd) as f64 * one_minus_q2);
            l += 1;
            term_pow = next_pow;
            if tail <= per_d_tol || term_pow == 0.0 {
                c_err += tail;
                break;
            }
        }
        c_sum.add(weight * s.value());
    }
    let c = c_sum.value();

    let mut d_sum = KahanSum::new();
    if n >= 3 {
        let h: Vec<f64> = (0..n).map(harmonic).collect();
        let mut qm = q.powi(n as i32);
        for m in n + 1..=2 * n - 2 {
            qm *= q;
            let inner = 2.0 / m as f64 * (h[n - 1] - h[m - n]);
            d_sum.add((m - n) as f64 * qm * inner);
        }
    }
    let d = d_sum.value();

    let total = a + b - c - d;
    Ok(VarianceDecomposition { a, b, c, d, total, truncation_error: b_err + c_err })
}

/// `E |Tr U^d|² = min(d, N)` for Haar `U ∈ U(N)`.
pub fn diaconis_evans_expected(d: usize, n: usize) -> usize {
    d.min(n)
}

//! Quantities attached to one disorder realization `(U, q)`.
//!
//! Three independent routes to the free energy are provided:
//!
//! - [`log_partition_function`]: `−Σ_{i,j} Log(1 − q u_i ū_j)` with complex
//!   logarithms, from the Cauchy product;
//! - [`free_energy`]: the real pair statistic `½ Σ_{m,n} f(θ_m − θ_n)` with
//!   `f(θ) = −log(1 − 2q cos θ + q²)`;
//! - [`free_energy_series`]: `Σ_d (q^d/d)|p_d|²` from power traces with a
//!   certified tail.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cue::{roots_of_unity_spectrum, PowerTraces, UnitarySpectrum};
use crate::error::{domain, Error, Result};
use crate::partitions::{enumerate_partitions, from_particles, has_empty_ncore, partition_counts, ParticleConfig, Partition};
use crate::special::KahanSum;
use crate::symfunc::schur_eval;

/// Largest enumeration accepted by [`enumerate_z`].
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

const IMAG_RESIDUE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    spectrum: UnitarySpectrum,
    q: f64,
}

impl MeasureParams {
    pub fn new(spectrum: UnitarySpectrum, q: f64) -> Result<Self> {
        check_fugacity(q)?;
        Ok(MeasureParams { spectrum, q })
    }

    pub fn spectrum(&self) -> &UnitarySpectrum {
        &self.spectrum
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }
}

pub(crate) fn check_fugacity(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        domain(format!("fugacity must lie in (0, 1), got {q}"))
    }
}

/// `log Z` from the Cauchy product; fails if the imaginary residue exceeds
/// `1e-10` relative.
pub fn log_partition_function(p: &MeasureParams) -> Result<f64> {
    let u = p.spectrum.eigenvalues();
    let (mut re, mut im) = (KahanSum::new(), KahanSum::new());
    for a in &u {
        for b in &u {
            // Re(1 − q a b̄) ≥ 1 − q > 0, so the principal branch is continuous
            let l = (Complex64::new(1.0, 0.0) - p.q * a * b.conj()).ln();
            re.add(-l.re);
            im.add(-l.im);
        }
    }
    let (re, im) = (re.value(), im.value());
    if !re.is_finite() {
        return Err(Error::Overflow("log Z is not finite".into()));
    }
    if im.abs() > IMAG_RESIDUE_TOL * re.abs().max(1.0) {
        return Err(Error::Conditioning(format!("imaginary residue {im:e} in log Z")));
    }
    Ok(re)
}

/// `Z = Π_{i,j} (1 − q u_i ū_j)^{-1}`; overflows are reported, use
/// [`log_partition_function`] for large systems.
pub fn partition_function(p: &MeasureParams) -> Result<f64> {
    let log_z = log_partition_function(p)?;
    let z = log_z.exp();
    if z.is_finite() {
        Ok(z)
    } else {
        Err(Error::Overflow(format!("Z = exp({log_z}) exceeds the f64 range")))
    }
}

/// `f(θ) = −log(1 − 2q cos θ + q²)`, written as `(1−q)² + 4q sin²(θ/2)` to
/// keep precision as `q → 1`.
pub fn pair_potential(theta: f64, q: f64) -> f64 {
    let s = (0.5 * theta).sin();
    let one_minus = 1.0 - q;
    -(one_minus * one_minus + 4.0 * q * s * s).ln()
}

/// `log Z = ½ Σ_{m,n} f(θ_m − θ_n)`; always positive.
pub fn free_energy(p: &MeasureParams) -> f64 {
    free_energy_of_angles(p.spectrum.angles(), p.q)
}

pub(crate) fn free_energy_of_angles(angles: &[f64], q: f64) -> f64 {
    let n = angles.len();
    let mut sum = KahanSum::new();
    // diagonal: N · f(0) / 2 = −N log(1 − q)
    sum.add(-(n as f64) * (-q).ln_1p());
    for m in 0..n {
        let mut row = KahanSum::new();
        for k in m + 1..n {
            row.add(pair_potential(angles[m] - angles[k], q));
        }
        sum.add(row.value());
    }
    sum.value()
}

/// Smallest `M` with `N² q^{M+1} / ((M+1)(1−q)) ≤ tol`.
pub fn required_series_depth(n: usize, q: f64, tol: f64) -> usize {
    let n2 = (n * n) as f64;
    let mut m = 1usize;
    loop {
        let bound = n2 * q.powi(m as i32 + 1) / ((m + 1) as f64 * (1.0 - q));
        if bound <= tol || m > 10_000_000 {
            return m;
        }
        m += 1;
    }
}

/// `Σ_{d=1}^{M} (q^d/d)|p_d|²` over the available depth, within `tol` of the
/// exact free energy.
pub fn free_energy_series(t: &PowerTraces, q: f64, tol: f64) -> Result<f64> {
    check_fugacity(q)?;
    if tol <= 0.0 {
        return domain("tolerance must be positive");
    }
    let required = required_series_depth(t.n(), q, tol);
    if t.depth() < required {
        return Err(Error::InsufficientDepth { tol, required, available: t.depth() });
    }
    let mut sum = KahanSum::new();
    let mut qd = 1.0;
    for (i, p) in t.values().iter().enumerate() {
        qd *= q;
        sum.add(qd / (i + 1) as f64 * p.norm_sqr());
    }
    Ok(sum.value())
}

/// `q^{|λ|} |s_λ(U)|² / Z`.
pub fn measure_prob(lambda: &Partition, p: &MeasureParams) -> Result<f64> {
    let s = schur_eval(lambda, &p.spectrum.eigenvalues())?;
    let log_z = log_partition_function(p)?;
    Ok(weighted_abs_sq(s, lambda.weight() as f64, p.q, log_z))
}

fn weighted_abs_sq(s: Complex64, exponent: f64, q: f64, log_norm: f64) -> f64 {
    let a = s.norm_sqr();
    if a == 0.0 {
        return 0.0;
    }
    (a.ln() + exponent * q.ln() - log_norm).exp().min(1.0)
}

/// `log Z̃ = log Z + Σ_{i<j} log(q |u_i − u_j|²)`.
pub fn log_rescaled_partition_function(p: &MeasureParams) -> Result<f64> {
    let u = p.spectrum.eigenvalues();
    let mut sum = KahanSum::new();
    sum.add(log_partition_function(p)?);
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            let d = (u[i] - u[j]).norm_sqr();
            if d == 0.0 {
                return Err(Error::Conditioning("coincident eigenvalues make Z̃ vanish".into()));
            }
            sum.add(p.q.ln() + d.ln());
        }
    }
    Ok(sum.value())
}

/// Biorthogonal-ensemble form
/// `det[u_j^{κ_i}] det[ū_j^{κ_i}] Π q^{κ_i} / Z̃`.
pub fn determinantal_prob(kappa: &ParticleConfig, p: &MeasureParams) -> Result<f64> {
    let n = p.n();
    if kappa.len() != n {
        return domain(format!("{} particles for N = {n}", kappa.len()));
    }
    let u = p.spectrum.eigenvalues();
    let m = DMatrix::from_fn(n, n, |i, j| u[j].powu(kappa.positions()[i]));
    // det[ū_j^{κ_i}] is the conjugate of det[u_j^{κ_i}]
    let a = m.lu().determinant();
    let total: f64 = kappa.positions().iter().map(|&k| k as f64).sum();
    Ok(weighted_abs_sq(a, total, p.q, log_rescaled_partition_function(p)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedZ {
    pub value: f64,
    /// Certified bound on `Z − value`, truncation plus summation rounding.
    pub tail_bound: f64,
    pub terms: u64,
}

/// `Σ_{|λ| ≤ W} q^{|λ|} |s_λ(U)|²` with a rigorous tail bound.
///
/// The bound uses `|s_λ(U)| ≤ s_λ(1^N)` on the unit circle together with the
/// Cauchy identity `Σ_{|λ|=w} s_λ(1^N)² = C(N²+w−1, w)`, so the truncation
/// error is at most `Σ_{w>W} q^w C(N²+w−1, w)`. That series has term ratio
/// `q(N²+w)/(w+1)`, decreasing in `w`; once it drops below one the remainder
/// is closed by a geometric bound. A rounding allowance of
/// `4·terms·ε·value` is added.
pub fn enumerate_z(p: &MeasureParams, max_weight: u32) -> Result<EnumeratedZ> {
    let n = p.n();
    let count: u128 = partition_counts(n, max_weight).iter().sum();
    if count > ENUMERATION_LIMIT {
        return Err(Error::Budget { required: count, limit: ENUMERATION_LIMIT });
    }
    let u = p.spectrum.eigenvalues();
    let mut sum = KahanSum::new();
    let mut terms = 0u64;
    for lambda in enumerate_partitions(n, max_weight) {
        let s = schur_eval(&lambda, &u)?;
        sum.add(p.q.powi(lambda.weight() as i32) * s.norm_sqr());
        terms += 1;
    }
    let value = sum.value();
    let tail = dimension_tail(n, p.q, max_weight);
    let rounding = 4.0 * terms as f64 * f64::EPSILON * value;
    Ok(EnumeratedZ { value, tail_bound: tail + rounding, terms })
}

/// `Σ_{w > W} q^w C(N²+w−1, w)`, bounded above.
fn dimension_tail(n: usize, q: f64, max_weight: u32) -> f64 {
    let n2 = (n * n) as f64;
    let mut t = 1.0; // w = 0 term
    for w in 0..max_weight {
        t *= q * (n2 + w as f64) / (w as f64 + 1.0);
    }
    let mut tail = KahanSum::new();
    let mut w = max_weight as f64;
    loop {
        let ratio = q * (n2 + w) / (w + 1.0);
        t *= ratio;
        w += 1.0;
        tail.add(t);
        let next_ratio = q * (n2 + w) / (w + 1.0);
        if next_ratio < 1.0 && t * next_ratio / (1.0 - next_ratio) < 1e-3 * tail.value() {
            tail.add(t * next_ratio / (1.0 - next_ratio));
            return tail.value();
        }
        if !t.is_finite() {
            return f64::INFINITY;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclotomicViolation {
    pub partition: Partition,
    pub empty_core: bool,
    pub expected: f64,
    pub observed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclotomicReport {
    pub n: usize,
    pub q: f64,
    pub max_weight: u32,
    pub checked: usize,
    pub violations: Vec<CyclotomicViolation>,
    pub pass: bool,
}

/// Checks `P(λ) = (1−q^N)^N q^{|λ|}` on empty-`N`-core partitions and `0`
/// elsewhere at the roots-of-unity disorder.
pub fn cyclotomic_density_check(n: usize, q: f64, max_weight: u32) -> Result<CyclotomicReport> {
    if n == 0 || n > 4 {
        return domain(format!("cyclotomic check supports 1 ≤ N ≤ 4, got {n}"));
    }
    if max_weight > 24 {
        return domain(format!("cyclotomic check supports weights up to 24, got {max_weight}"));
    }
    let params = MeasureParams::new(roots_of_unity_spectrum(n)?, q)?;
    let base = (1.0 - q.powi(n as i32)).powi(n as i32);
    let mut violations = Vec::new();
    let mut checked = 0;
    for lambda in enumerate_partitions(n, max_weight) {
        checked += 1;
        let observed = measure_prob(&lambda, &params)?;
        let empty_core = has_empty_ncore(&lambda, n)?;
        let (expected, ok) = if empty_core {
            let e = base * q.powi(lambda.weight() as i32);
            (e, (observed - e).abs() <= 1e-8 * e)
        } else {
            (0.0, observed.abs() <= 1e-10)
        };
        if !ok {
            violations.push(CyclotomicViolation { partition: lambda, empty_core, expected, observed });
        }
    }
    let pass = violations.is_empty();
    Ok(CyclotomicReport { n, q, max_weight, checked, violations, pass })
}

/// The particle configuration for `λ` evaluated through the determinantal
/// route, for cross-checking [`measure_prob`].
pub fn determinantal_prob_of_partition(lambda: &Partition, p: &MeasureParams) -> Result<f64> {
    let kappa = crate::partitions::to_particles(lambda, p.n())?;
    debug_assert_eq!(&from_particles(&kappa), lambda);
    determinantal_prob(&kappa, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cue::{power_traces, sample_haar_spectrum};
    use crate::rng::substream;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn haar(n: usize, seed: u64, r: u64, q: f64) -> MeasureParams {
        MeasureParams::new(sample_haar_spectrum(n, &mut substream(seed, r)).unwrap(), q).unwrap()
    }

    #[test]
    fn fugacity_validation() {
        let s = roots_of_unity_spectrum(2).unwrap();
        for q in [0.0, 1.0, 1.5, -0.1, f64::NAN] {
            assert!(MeasureParams::new(s.clone(), q).is_err(), "{q}");
        }
    }

    #[test]
    fn single_particle_is_geometric() {
        for (angle, q) in [(0.0, 0.3), (1.3, 0.7), (5.9, 0.05)] {
            let params = MeasureParams::new(UnitarySpectrum::from_angles(vec![angle]).unwrap(), q).unwrap();
            assert_relative_eq!(partition_function(&params).unwrap(), 1.0 / (1.0 - q), max_relative = 1e-14);
            assert_relative_eq!(free_energy(&params), -(1.0 - q).ln(), max_relative = 1e-14);
            for k in 0..6 {
                let prob = measure_prob(&p(&[k]), &params).unwrap();
                assert_relative_eq!(prob, (1.0 - q) * q.powi(k as i32), max_relative = 1e-12);
                let kappa = ParticleConfig::new(vec![k]).unwrap();
                assert_relative_eq!(determinantal_prob(&kappa, &params).unwrap(), prob, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn roots_of_unity_partition_function() {
        let params = MeasureParams::new(roots_of_unity_spectrum(2).unwrap(), 0.5).unwrap();
        assert_relative_eq!(partition_function(&params).unwrap(), 16.0 / 9.0, max_relative = 1e-13);
        for n in 1..=6 {
            let q: f64 = 0.37;
            let params = MeasureParams::new(roots_of_unity_spectrum(n).unwrap(), q).unwrap();
            let want = -(n as f64) * (1.0 - q.powi(n as i32)).ln();
            assert_relative_eq!(log_partition_function(&params).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn diagonal_pair_term() {
        let q: f64 = 0.42;
        assert_relative_eq!(pair_potential(0.0, q), -2.0 * (1.0 - q).ln(), max_relative = 1e-15);
        let direct = -(1.0 - 2.0 * q * 0.9f64.cos() + q * q).ln();
        assert_relative_eq!(pair_potential(0.9, q), direct, max_relative = 1e-14);
    }

    #[test]
    fn triple_route_identity() {
        for (i, &n) in [2usize, 3, 5, 8].iter().enumerate() {
            for &q in &[0.2, 0.5, 0.8] {
                for r in 0..25 {
                    let params = haar(n, 100 + i as u64, r, q);
                    let fe = free_energy(&params);
                    let lz = log_partition_function(&params).unwrap();
                    assert!(fe > 0.0);
                    assert!((fe - lz).abs() <= 1e-9 * (1.0 + lz.abs()), "N={n} q={q}: {fe} vs {lz}");
                    let m = required_series_depth(n, q, 1e-10);
                    let traces = power_traces(params.spectrum(), m).unwrap();
                    let fs = free_energy_series(&traces, q, 1e-10).unwrap();
                    assert!((fe - fs).abs() <= 2e-9, "N={n} q={q}: {fe} vs series {fs}");
                }
            }
        }
    }

    #[test]
    fn series_examples() {
        // roots of unity N=2, q=1/2: −2 log(1 − 1/4)
        let t = power_traces(&roots_of_unity_spectrum(2).unwrap(), 80).unwrap();
        let v = free_energy_series(&t, 0.5, 1e-12).unwrap();
        assert_abs_diff_eq!(v, -2.0 * 0.75f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.575_364_144_903_561_9, epsilon = 1e-12);
        let t = power_traces(&UnitarySpectrum::identity(2).unwrap(), 200).unwrap();
        assert_abs_diff_eq!(free_energy_series(&t, 0.3, 1e-12).unwrap(), -4.0 * 0.7f64.ln(), epsilon = 1e-12);
        let t = power_traces(&UnitarySpectrum::identity(1).unwrap(), 200).unwrap();
        assert_abs_diff_eq!(free_energy_series(&t, 0.3, 1e-12).unwrap(), -(0.7f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn series_reports_required_depth() {
        let t = power_traces(&roots_of_unity_spectrum(4).unwrap(), 5).unwrap();
        match free_energy_series(&t, 0.5, 1e-10) {
            Err(Error::InsufficientDepth { required, available, .. }) => {
                assert_eq!(available, 5);
                assert_eq!(required, required_series_depth(4, 0.5, 1e-10));
                assert!(required > 5);
            }
            other => panic!("expected depth error, got {other:?}"),
        }
    }

    #[test]
    fn probabilities_and_normalization() {
        let params = haar(2, 9, 0, 0.3);
        let z = partition_function(&params).unwrap();
        assert_relative_eq!(measure_prob(&Partition::empty(), &params).unwrap(), 1.0 / z, max_relative = 1e-12);
        let mut total = KahanSum::new();
        for lambda in enumerate_partitions(2, 40) {
            let prob = measure_prob(&lambda, &params).unwrap();
            assert!((0.0..=1.0).contains(&prob));
            total.add(prob);
        }
        let tail = enumerate_z(&params, 40).unwrap().tail_bound / z;
        assert!((total.value() - 1.0).abs() <= tail + 1e-12, "{} tail {tail}", total.value());
    }

    #[test]
    fn determinantal_matches_schur_route() {
        for r in 0..5 {
            let params = haar(3, 21, r, 0.3);
            assert_relative_eq!(
                determinantal_prob(&ParticleConfig::packed(3), &params).unwrap(),
                measure_prob(&Partition::empty(), &params).unwrap(),
                max_relative = 1e-9
            );
            for lambda in enumerate_partitions(3, 7) {
                let a = measure_prob(&lambda, &params).unwrap();
                let b = determinantal_prob_of_partition(&lambda, &params).unwrap();
                assert!((a - b).abs() <= 1e-9 * a.max(1e-300), "{lambda}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rescaled_partition_function_ratio() {
        let params = haar(4, 3, 1, 0.6);
        let u = params.spectrum().eigenvalues();
        let mut log_ratio = 6.0 * 0.6f64.ln();
        for i in 0..4 {
            for j in i + 1..4 {
                log_ratio += (u[i] - u[j]).norm_sqr().ln();
            }
        }
        let got = log_rescaled_partition_function(&params).unwrap() - log_partition_function(&params).unwrap();
        assert_abs_diff_eq!(got, log_ratio, epsilon = 1e-12);
    }

    #[test]
    fn enumeration_oracle() {
        let params = MeasureParams::new(UnitarySpectrum::from_angles(vec![2.0]).unwrap(), 0.5).unwrap();
        let e = enumerate_z(&params, 50).unwrap();
        assert!((e.value - 2.0).abs() <= e.tail_bound);
        assert!(e.tail_bound < 1e-13);

        let q: f64 = 0.4;
        let params = MeasureParams::new(roots_of_unity_spectrum(2).unwrap(), q).unwrap();
        let e = enumerate_z(&params, 40).unwrap();
        assert!((e.value - (1.0 - q * q).powi(-2)).abs() <= e.tail_bound);

        let params = haar(3, 5, 0, 0.3);
        let e = enumerate_z(&params, 40).unwrap();
        let z = partition_function(&params).unwrap();
        assert!((z - e.value).abs() <= e.tail_bound, "{z} {e:?}");

        let mut last = 0.0;
        for w in [0, 2, 5, 10, 20] {
            let v = enumerate_z(&params, w).unwrap().value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn enumeration_budget_guard() {
        let params = haar(8, 1, 0, 0.3);
        assert!(matches!(enumerate_z(&params, 200), Err(Error::Budget { .. })));
    }

    #[test]
    fn cyclotomic_examples() {
        let q: f64 = 0.35;
        let params = MeasureParams::new(roots_of_unity_spectrum(2).unwrap(), q).unwrap();
        assert!(measure_prob(&p(&[1]), &params).unwrap().abs() < 1e-12);
        let want = (1.0 - q * q).powi(2) * q * q;
        assert_relative_eq!(measure_prob(&p(&[2]), &params).unwrap(), want, max_relative = 1e-10);
        for n in 1..=4 {
            let report = cyclotomic_density_check(n, q, 16).unwrap();
            assert!(report.pass, "{report:?}");
        }
        assert!(cyclotomic_density_check(5, q, 10).is_err());
    }

    #[test]
    fn overflow_is_signalled() {
        let params = MeasureParams::new(UnitarySpectrum::identity(40).unwrap(), 0.9999).unwrap();
        assert!(matches!(partition_function(&params), Err(Error::Overflow(_))));
        assert!(log_partition_function(&params).unwrap() > 709.0);
    }
}

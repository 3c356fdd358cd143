//! Schur polynomials and Littlewood–Richardson multiplicities.
//!
//! `s_λ(u)` is evaluated as the bialternant `det[u_j^{N−i+λ_i}] / det[u_j^{N−i}]`
//! with LU-factorized determinants. When the Vandermonde denominator is tiny
//! relative to its Hadamard bound `N^{N/2}` (coincident or nearly coincident
//! eigenvalues), evaluation switches to the Jacobi–Trudi determinant
//! `det[h_{λ_i−i+j}]` with `h_k` from the Newton recurrence
//! `k·h_k = Σ_{i=1}^k p_i h_{k−i}`.
//!
//! Tensor products of polynomial `U(N)` irreducibles are expanded pairwise by
//! the Littlewood–Richardson rule, discarding shapes with more than `N` rows
//! after every step.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::partitions::{partitions_of, Partition};

/// Relative Vandermonde size below which the bialternant is abandoned.
pub const SEPARATION_THRESHOLD: f64 = 1e-12;

/// Largest `|λ| + |μ|` accepted by the LR routines.
pub const LR_WEIGHT_CAP: u32 = 40;

const UNIT_MODULUS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchurPath {
    Bialternant,
    JacobiTrudi,
}

fn det(m: DMatrix<Complex64>) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.lu().determinant()
}

fn check_args(lambda: &Partition, u: &[Complex64]) -> Result<()> {
    if u.is_empty() {
        return domain("need at least one variable");
    }
    if lambda.len() > u.len() {
        return domain(format!("{lambda} has more than {} parts", u.len()));
    }
    if let Some(z) = u.iter().find(|z| (z.norm() - 1.0).abs() > UNIT_MODULUS_TOL) {
        return domain(format!("eigenvalue {z} is not on the unit circle"));
    }
    Ok(())
}

/// `s_λ(u_1, …, u_N)` for unit-modulus `u`.
pub fn schur_eval(lambda: &Partition, u: &[Complex64]) -> Result<Complex64> {
    schur_eval_traced(lambda, u).map(|(v, _)| v)
}

/// As [`schur_eval`], also reporting which evaluation path was taken.
pub fn schur_eval_traced(lambda: &Partition, u: &[Complex64]) -> Result<(Complex64, SchurPath)> {
    check_args(lambda, u)?;
    let n = u.len();
    let parts = lambda.padded(n)?;
    let vander = DMatrix::from_fn(n, n, |i, j| u[j].powu((n - 1 - i) as u32));
    let denom = det(vander);
    let bound = (n as f64).powf(n as f64 / 2.0);
    if denom.norm() >= SEPARATION_THRESHOLD * bound {
        let numer = det(DMatrix::from_fn(n, n, |i, j| u[j].powu((n - 1 - i) as u32 + parts[i])));
        let v = numer / denom;
        if v.is_finite() {
            return Ok((v, SchurPath::Bialternant));
        }
    }
    let v = jacobi_trudi(lambda, u)?;
    Ok((v, SchurPath::JacobiTrudi))
}

/// `s_λ` via `det[h_{λ_i − i + j}]`; valid for any complex arguments.
pub fn jacobi_trudi(lambda: &Partition, u: &[Complex64]) -> Result<Complex64> {
    let len = lambda.len();
    if len == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let top = (lambda.part(0) as usize) + len - 1;
    let h = complete_homogeneous(u, top);
    let m = DMatrix::from_fn(len, len, |i, j| {
        let k = lambda.part(i) as i64 - i as i64 + j as i64;
        if k < 0 { Complex64::new(0.0, 0.0) } else { h[k as usize] }
    });
    let v = det(m);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Conditioning(format!("Jacobi–Trudi determinant for {lambda} is not finite")))
    }
}

/// `h_0, …, h_top` from power sums by the Newton recurrence.
fn complete_homogeneous(u: &[Complex64], top: usize) -> Vec<Complex64> {
    let p: Vec<Complex64> = (1..=top)
        .map(|k| u.iter().map(|z| z.powu(k as u32)).sum())
        .collect();
    let mut h = vec![Complex64::new(1.0, 0.0); top + 1];
    for k in 1..=top {
        let s: Complex64 = (1..=k).map(|i| p[i - 1] * h[k - i]).sum();
        h[k] = s / k as f64;
    }
    h
}

/// Weyl dimension `Π_{i<j} (λ_i − λ_j + j − i)/(j − i)` of the `U(N)` irreducible.
pub fn weyl_dimension(lambda: &Partition, n: usize) -> Result<u128> {
    let parts = lambda.padded(n)?;
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..n {
        for j in i + 1..n {
            num *= (parts[i] - parts[j]) as u128 + (j - i) as u128;
            den *= (j - i) as u128;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
    }
    debug_assert_eq!(den, 1);
    Ok(num / den)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Littlewood–Richardson coefficient `c^ν_{λμ}`.
pub fn lr_coefficient(lambda: &Partition, mu: &Partition, nu: &Partition) -> Result<u64> {
    let total = lambda.weight() + mu.weight();
    if total > LR_WEIGHT_CAP {
        return Err(Error::Budget { required: total as u128, limit: LR_WEIGHT_CAP as u128 });
    }
    if nu.weight() != total || !lambda.is_contained_in(nu) {
        return Ok(0);
    }
    Ok(count_lr_tableaux(lambda, mu, nu))
}

/// Skew tableaux of shape `ν/λ` and content `μ` with rows weakly increasing,
/// columns strictly increasing and a lattice reverse reading word.
fn count_lr_tableaux(lambda: &Partition, mu: &Partition, nu: &Partition) -> u64 {
    let rows = nu.len();
    let content = mu.parts().to_vec();
    if content.is_empty() {
        return u64::from(lambda == nu);
    }
    // cells in reverse reading order: rows top to bottom, right to left
    let mut cells = Vec::new();
    for r in 0..rows {
        for c in (lambda.part(r)..nu.part(r)).rev() {
            cells.push((r, c as usize));
        }
    }
    let width = nu.part(0) as usize;
    let mut grid = vec![vec![0u32; width]; rows];
    let mut used = vec![0u32; content.len() + 1];

    fn rec(
        idx: usize,
        cells: &[(usize, usize)],
        lambda: &Partition,
        nu: &Partition,
        content: &[u32],
        grid: &mut [Vec<u32>],
        used: &mut [u32],
    ) -> u64 {
        if idx == cells.len() {
            return 1;
        }
        let (r, c) = cells[idx];
        // row weakly increasing: entry ≤ right neighbour (already filled)
        let max_entry = if (c + 1) < nu.part(r) as usize { grid[r][c + 1] } else { content.len() as u32 };
        // column strict against the cell above when it lies in the skew shape
        let min_entry = if r > 0 && c >= lambda.part(r - 1) as usize { grid[r - 1][c] + 1 } else { 1 };
        let mut total = 0;
        for e in min_entry..=max_entry {
            let ei = e as usize;
            if used[ei] >= content[ei - 1] {
                continue;
            }
            if ei > 1 && used[ei] + 1 > used[ei - 1] {
                continue;
            }
            used[ei] += 1;
            grid[r][c] = e;
            total += rec(idx + 1, cells, lambda, nu, content, grid, used);
            used[ei] -= 1;
        }
        grid[r][c] = 0;
        total
    }
    rec(0, &cells, lambda, nu, &content, &mut grid, &mut used)
}

/// Memoized products `s_λ s_μ = Σ_ν c^ν_{λμ} s_ν` keyed on `(λ, μ)`.
///
/// Entries are computed without row truncation so one table serves every
/// `N`; readers and writers may run concurrently.
#[derive(Default)]
pub struct LrTable {
    memo: RwLock<HashMap<(Partition, Partition), Arc<Vec<(Partition, u64)>>>>,
}

impl LrTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide shared table.
    pub fn global() -> &'static LrTable {
        static TABLE: OnceLock<LrTable> = OnceLock::new();
        TABLE.get_or_init(LrTable::new)
    }

    pub fn product(&self, lambda: &Partition, mu: &Partition) -> Result<Arc<Vec<(Partition, u64)>>> {
        let total = lambda.weight() + mu.weight();
        if total > LR_WEIGHT_CAP {
            return Err(Error::Budget { required: total as u128, limit: LR_WEIGHT_CAP as u128 });
        }
        // c^ν_{λμ} = c^ν_{μλ}
        let key = if lambda <= mu { (lambda.clone(), mu.clone()) } else { (mu.clone(), lambda.clone()) };
        if let Some(hit) = self.memo.read().expect("lr memo poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let (a, b) = (&key.0, &key.1);
        let max_len = a.len() + b.len();
        let mut out = Vec::new();
        for nu in partitions_of(total, max_len, a.part(0) + b.part(0)) {
            if !a.is_contained_in(&nu) || !b.is_contained_in(&nu) {
                continue;
            }
            let c = count_lr_tableaux(a, b, &nu);
            if c > 0 {
                out.push((nu, c));
            }
        }
        let out = Arc::new(out);
        self.memo
            .write()
            .expect("lr memo poisoned")
            .insert(key, Arc::clone(&out));
        Ok(out)
    }
}

/// Multiplicities of irreducibles in a tensor product, keyed by shape.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IrrepMultiplicityMap {
    entries: BTreeMap<Partition, u64>,
}

impl IrrepMultiplicityMap {
    pub fn single(lambda: Partition) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(lambda, 1);
        IrrepMultiplicityMap { entries }
    }

    pub fn get(&self, nu: &Partition) -> u64 {
        self.entries.get(nu).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Partition, &u64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ_ν m_ν²`.
    pub fn sum_of_squares(&self) -> u128 {
        self.entries.values().map(|&m| (m as u128) * (m as u128)).sum()
    }

    /// `Σ_ν m_ν · dim_N(ν)`.
    pub fn total_dimension(&self, n: usize) -> Result<u128> {
        self.entries
            .iter()
            .map(|(nu, &m)| weyl_dimension(nu, n).map(|d| d * m as u128))
            .sum()
    }
}

impl Serialize for IrrepMultiplicityMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            let key = serde_json::to_string(k).map_err(serde::ser::Error::custom)?;
            map.serialize_entry(&key, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for IrrepMultiplicityMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, u64>::deserialize(d)?;
        let mut entries = BTreeMap::new();
        for (k, v) in raw {
            let p: Partition = serde_json::from_str(&k).map_err(serde::de::Error::custom)?;
            entries.insert(p, v);
        }
        Ok(IrrepMultiplicityMap { entries })
    }
}

/// Multiplicities in `W^{λ¹} ⊗ … ⊗ W^{λᵏ}` restricted to at most `n` rows.
pub fn tensor_multiplicities(shapes: &[Partition], n: usize, max_weight: u32) -> Result<IrrepMultiplicityMap> {
    tensor_multiplicities_with(LrTable::global(), shapes, n, max_weight)
}

pub fn tensor_multiplicities_with(
    table: &LrTable,
    shapes: &[Partition],
    n: usize,
    max_weight: u32,
) -> Result<IrrepMultiplicityMap> {
    if n == 0 {
        return domain("N must be positive");
    }
    if let Some(bad) = shapes.iter().find(|s| s.len() > n) {
        return domain(format!("{bad} has more than {n} rows"));
    }
    let total: u32 = shapes.iter().map(Partition::weight).sum();
    let cap = max_weight.min(LR_WEIGHT_CAP);
    if total > cap {
        return Err(Error::Budget { required: total as u128, limit: cap as u128 });
    }
    let Some((first, rest)) = shapes.split_first() else {
        return Ok(IrrepMultiplicityMap::single(Partition::empty()));
    };
    let mut acc = IrrepMultiplicityMap::single(first.clone());
    for shape in rest {
        let mut next = BTreeMap::new();
        for (nu, &m) in &acc.entries {
            for (rho, c) in table.product(nu, shape)?.iter() {
                if rho.len() <= n {
                    *next.entry(rho.clone()).or_insert(0) += m * c;
                }
            }
        }
        acc = IrrepMultiplicityMap { entries: next };
    }
    Ok(acc)
}

/// `I_N(λ¹, …, λᵏ) = Σ_ν m_ν²`, the dimension of `U(N)`-invariants in
/// `End W^{λ¹} ⊗ … ⊗ End W^{λᵏ}`.
pub fn invariant_dimension(shapes: &[Partition], n: usize) -> Result<u128> {
    Ok(tensor_multiplicities(shapes, n, LR_WEIGHT_CAP)?.sum_of_squares())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_partitions;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_unit(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = stream(seed);
        (0..n)
            .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
            .collect()
    }

    /// Σ over semistandard tableaux of shape λ with entries 1..=N of u^T.
    fn tableau_oracle(lambda: &Partition, u: &[Complex64]) -> Complex64 {
        let cells: Vec<(usize, usize)> = (0..lambda.len())
            .flat_map(|r| (0..lambda.part(r) as usize).map(move |col| (r, col)))
            .collect();
        let mut grid = vec![vec![0usize; lambda.part(0) as usize]; lambda.len()];
        fn rec(i: usize, cells: &[(usize, usize)], grid: &mut Vec<Vec<usize>>, u: &[Complex64]) -> Complex64 {
            if i == cells.len() {
                return cells.iter().fold(Complex64::new(1.0, 0.0), |acc, &(r, c)| acc * u[grid[r][c] - 1]);
            }
            let (r, col) = cells[i];
            let lo_row = if col > 0 { grid[r][col - 1] } else { 1 };
            let lo_col = if r > 0 { grid[r - 1][col] + 1 } else { 1 };
            let mut s = Complex64::new(0.0, 0.0);
            for e in lo_row.max(lo_col)..=u.len() {
                grid[r][col] = e;
                s += rec(i + 1, cells, grid, u);
            }
            grid[r][col] = 0;
            s
        }
        rec(0, &cells, &mut grid, u)
    }

    #[test]
    fn schur_small_examples() {
        let th = 0.7f64;
        let z = Complex64::from_polar(1.0, th);
        for k in 0..6u32 {
            let v = schur_eval(&p(&[k]), &[z]).unwrap();
            assert!((v - Complex64::from_polar(1.0, k as f64 * th)).norm() < 1e-13);
        }
        let u = random_unit(2, 1);
        assert!((schur_eval(&p(&[1]), &u).unwrap() - (u[0] + u[1])).norm() < 1e-13);
        assert!((schur_eval(&p(&[1, 1]), &u).unwrap() - u[0] * u[1]).norm() < 1e-13);
        let u3 = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let lam = p(&[2, 1]);
        let want = tableau_oracle(&lam, &u3);
        assert!((schur_eval(&lam, &u3).unwrap() - want).norm() < 1e-12, "{want}");
    }

    #[test]
    fn schur_matches_tableau_sum() {
        for n in 1..=4 {
            let u = random_unit(n, 10 + n as u64);
            for lam in enumerate_partitions(n, 6) {
                let want = tableau_oracle(&lam, &u);
                let got = schur_eval(&lam, &u).unwrap();
                assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0), "{lam}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn coincident_eigenvalues_use_jacobi_trudi() {
        let u = vec![c(1.0, 0.0); 3];
        let (v, path) = schur_eval_traced(&p(&[2, 1]), &u).unwrap();
        assert_eq!(path, SchurPath::JacobiTrudi);
        // s_{21}(1,1,1) = dim = 8
        assert!((v - c(8.0, 0.0)).norm() < 1e-12);
        let (_, path) = schur_eval_traced(&p(&[2, 1]), &random_unit(3, 4)).unwrap();
        assert_eq!(path, SchurPath::Bialternant);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(schur_eval(&p(&[1, 1, 1]), &random_unit(2, 1)).is_err());
        assert!(schur_eval(&p(&[1]), &[c(2.0, 0.0)]).is_err());
        assert!(schur_eval(&p(&[1]), &[]).is_err());
    }

    #[test]
    fn paths_agree_on_separated_spectra() {
        let mut rng = stream(77);
        for trial in 0..40 {
            let n = 1 + trial % 8;
            // jittered equispaced angles keep the spectrum well separated
            let u: Vec<Complex64> = (0..n)
                .map(|j| {
                    let t = (j as f64 + 0.3 * rng.random::<f64>()) * std::f64::consts::TAU / n as f64;
                    Complex64::from_polar(1.0, t)
                })
                .collect();
            let w = rng.random_range(0..=10u32);
            let lams = partitions_of(w, n, w);
            let lam = &lams[rng.random_range(0..lams.len())];
            let (a, path) = schur_eval_traced(lam, &u).unwrap();
            assert_eq!(path, SchurPath::Bialternant);
            let b = jacobi_trudi(lam, &u).unwrap();
            assert!((a - b).norm() <= 1e-8 * a.norm().max(b.norm()).max(1.0), "{lam} n={n}: {a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn schur_symmetric_under_permutation(seed in 0u64..1000, w in 0u32..8) {
            let n = 4;
            let u = random_unit(n, seed);
            let lams = partitions_of(w, n, w);
            let lam = &lams[(seed as usize) % lams.len()];
            let mut v = u.clone();
            v.rotate_left(1 + (seed as usize) % 3);
            v.swap(0, 2);
            let a = schur_eval(lam, &u).unwrap();
            let b = schur_eval(lam, &v).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        }

        #[test]
        fn schur_homogeneous(seed in 0u64..1000, phi in 0.0f64..6.28, w in 0u32..8) {
            let n = 3;
            let u = random_unit(n, seed);
            let lams = partitions_of(w, n, w);
            let lam = &lams[(seed as usize) % lams.len()];
            let scale = Complex64::from_polar(1.0, phi);
            let scaled: Vec<_> = u.iter().map(|z| z * scale).collect();
            let a = schur_eval(lam, &scaled).unwrap();
            let b = scale.powu(lam.weight()) * schur_eval(lam, &u).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn lr_examples() {
        assert_eq!(lr_coefficient(&p(&[1]), &p(&[1]), &p(&[2])).unwrap(), 1);
        assert_eq!(lr_coefficient(&p(&[1]), &p(&[1]), &p(&[1, 1])).unwrap(), 1);
        assert_eq!(lr_coefficient(&p(&[1]), &p(&[1, 1]), &p(&[2, 1])).unwrap(), 1);
        assert_eq!(lr_coefficient(&p(&[1]), &p(&[1, 1]), &p(&[3])).unwrap(), 0);
        // classic c^{(4,2,1)}_{(2,1),(2,1)} = 2
        assert_eq!(lr_coefficient(&p(&[2, 1]), &p(&[2, 1]), &p(&[3, 2, 1])).unwrap(), 2);
        assert!(lr_coefficient(&p(&[21]), &p(&[20]), &p(&[41])).is_err());
    }

    /// Products via the Jacobi–Trudi expansion in enough variables, compared
    /// numerically against the LR expansion at random points.
    #[test]
    fn lr_products_match_schur_products() {
        let pairs = [(p(&[2, 1]), p(&[2, 1])), (p(&[3]), p(&[1, 1])), (p(&[2, 2]), p(&[1])), (p(&[1, 1, 1]), p(&[2]))];
        for (a, b) in pairs {
            let n = a.len() + b.len();
            let u = random_unit(n, 5);
            let lhs = schur_eval(&a, &u).unwrap() * schur_eval(&b, &u).unwrap();
            let rhs: Complex64 = LrTable::global()
                .product(&a, &b)
                .unwrap()
                .iter()
                .map(|(nu, m)| *m as f64 * schur_eval(nu, &u).unwrap())
                .sum();
            assert!((lhs - rhs).norm() < 1e-10, "{a} x {b}");
        }
    }

    #[test]
    fn tensor_examples() {
        let one = p(&[1]);
        let m = tensor_multiplicities(&[p(&[3, 1])], 3, 40).unwrap();
        assert_eq!(m, IrrepMultiplicityMap::single(p(&[3, 1])));
        let m = tensor_multiplicities(&[one.clone(), one.clone()], 2, 40).unwrap();
        assert_eq!(m.get(&p(&[2])), 1);
        assert_eq!(m.get(&p(&[1, 1])), 1);
        assert_eq!(m.len(), 2);
        let m = tensor_multiplicities(&[one.clone(), one.clone()], 1, 40).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(&p(&[2])), 1);
    }

    #[test]
    fn invariant_dimension_examples() {
        for n in 1..=4 {
            for lam in enumerate_partitions(n, 5) {
                assert_eq!(invariant_dimension(&[lam], n).unwrap(), 1);
            }
        }
        let one = p(&[1]);
        assert_eq!(invariant_dimension(&[one.clone(), one.clone()], 2).unwrap(), 2);
        assert_eq!(invariant_dimension(&[one.clone(), one.clone()], 5).unwrap(), 2);
        assert_eq!(invariant_dimension(&[one.clone(), one], 1).unwrap(), 1);
    }

    #[test]
    fn weyl_dimensions() {
        assert_eq!(weyl_dimension(&p(&[]), 4).unwrap(), 1);
        assert_eq!(weyl_dimension(&p(&[1]), 4).unwrap(), 4);
        assert_eq!(weyl_dimension(&p(&[2, 1]), 3).unwrap(), 8);
        assert_eq!(weyl_dimension(&p(&[2]), 3).unwrap(), 6);
        assert_eq!(weyl_dimension(&p(&[1, 1]), 3).unwrap(), 3);
    }

    #[test]
    fn dimension_conservation() {
        for n in 1..=4 {
            let shapes: Vec<_> = enumerate_partitions(n, 5).filter(|s| !s.is_empty()).collect();
            for (i, a) in shapes.iter().enumerate() {
                for b in shapes.iter().skip(i).step_by(3) {
                    let m = tensor_multiplicities(&[a.clone(), b.clone()], n, 40).unwrap();
                    let lhs = m.total_dimension(n).unwrap();
                    let rhs = weyl_dimension(a, n).unwrap() * weyl_dimension(b, n).unwrap();
                    assert_eq!(lhs, rhs, "{a} x {b}, n = {n}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn tensor_product_associative(i in 0usize..30, j in 0usize..30, k in 0usize..30, n in 1usize..5) {
            let shapes: Vec<_> = enumerate_partitions(n, 3).collect();
            let (a, b, c) = (&shapes[i % shapes.len()], &shapes[j % shapes.len()], &shapes[k % shapes.len()]);
            let left = tensor_multiplicities(&[a.clone(), b.clone(), c.clone()], n, 40).unwrap();
            // (b ⊗ c) first, then a
            let bc = tensor_multiplicities(&[b.clone(), c.clone()], n, 40).unwrap();
            let mut right = BTreeMap::new();
            for (nu, m) in bc.iter() {
                for (rho, mult) in tensor_multiplicities(&[a.clone(), nu.clone()], n, 40).unwrap().iter() {
                    *right.entry(rho.clone()).or_insert(0u64) += m * mult;
                }
            }
            prop_assert_eq!(left.entries, right);
        }

        #[test]
        fn invariant_dimension_permutation_symmetric(i in 0usize..20, j in 0usize..20, k in 0usize..20) {
            let n = 3;
            let shapes: Vec<_> = enumerate_partitions(n, 3).collect();
            let (a, b, c) = (&shapes[i % shapes.len()], &shapes[j % shapes.len()], &shapes[k % shapes.len()]);
            let x = invariant_dimension(&[a.clone(), b.clone(), c.clone()], n).unwrap();
            let y = invariant_dimension(&[c.clone(), a.clone(), b.clone()], n).unwrap();
            let z = invariant_dimension(&[b.clone(), a.clone(), c.clone()], n).unwrap();
            prop_assert_eq!(x, y);
            prop_assert_eq!(x, z);
        }
    }

    #[test]
    fn multiplicity_map_json() {
        let one = p(&[1]);
        let m = tensor_multiplicities(&[one.clone(), one], 2, 40).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"[1,1]":1,"[2]":1}"#);
        let back: IrrepMultiplicityMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn concurrent_table_access_is_consistent() {
        let table = LrTable::new();
        let a = p(&[2, 1]);
        let results: Vec<_> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..4).map(|_| s.spawn(|| table.product(&a, &a).unwrap())).collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(results.windows(2).all(|w| w[0] == w[1]));
    }
}

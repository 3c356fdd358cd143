//! Integer partitions, hard-particle configurations and bounded enumeration.
//!
//! A [`Partition`] is stored trimmed (no trailing zeros); [`Partition::padded`]
//! produces the dense length-`N` form needed whenever an ambient dimension is
//! in play. The particle map is `κ_i = N − i + λ_i` (1-based `i`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Weakly decreasing sequence of positive integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Validates and trims trailing zeros.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return domain(format!("parts {parts:?} are not weakly decreasing"));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Part `i` (0-based), zero beyond the length.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Dense zero-padded form of length `n`.
    pub fn padded(&self, n: usize) -> Result<Vec<u32>> {
        if self.len() > n {
            return domain(format!("partition {self} has more than {n} parts"));
        }
        let mut v = self.0.clone();
        v.resize(n, 0);
        Ok(v)
    }

    /// Conjugate (transposed) partition.
    pub fn conjugate(&self) -> Partition {
        let first = self.part(0) as usize;
        let parts = (0..first)
            .map(|j| self.0.iter().filter(|&&p| p as usize > j).count() as u32)
            .collect();
        Partition(parts)
    }

    /// Young-diagram containment `self ⊆ other`.
    pub fn is_contained_in(&self, other: &Partition) -> bool {
        self.len() <= other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = crate::Error;

    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Strictly decreasing nonnegative positions of `N` hard particles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct ParticleConfig(Vec<u32>);

impl ParticleConfig {
    pub fn new(positions: Vec<u32>) -> Result<Self> {
        if positions.is_empty() {
            return domain("particle configuration must have at least one particle");
        }
        if positions.windows(2).any(|w| w[0] <= w[1]) {
            return domain(format!("positions {positions:?} are not strictly decreasing"));
        }
        Ok(ParticleConfig(positions))
    }

    pub fn positions(&self) -> &[u32] {
        &self.0
    }

    /// Number of particles `N`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The densely packed configuration `(N−1, …, 1, 0)`.
    pub fn packed(n: usize) -> Self {
        ParticleConfig((0..n as u32).rev().collect())
    }
}

impl TryFrom<Vec<u32>> for ParticleConfig {
    type Error = crate::Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        ParticleConfig::new(v)
    }
}

impl From<ParticleConfig> for Vec<u32> {
    fn from(p: ParticleConfig) -> Self {
        p.0
    }
}

pub fn weight(lambda: &Partition) -> u32 {
    lambda.weight()
}

/// `κ_i = N − i + λ_i`.
pub fn to_particles(lambda: &Partition, n: usize) -> Result<ParticleConfig> {
    if n == 0 {
        return domain("ambient dimension must be positive");
    }
    let dense = lambda.padded(n)?;
    let positions = dense
        .iter()
        .enumerate()
        .map(|(i, &l)| (n - 1 - i) as u32 + l)
        .collect();
    Ok(ParticleConfig(positions))
}

/// `λ_i = κ_i − N + i`; the ambient `N` is the number of particles.
pub fn from_particles(kappa: &ParticleConfig) -> Partition {
    let n = kappa.len();
    let parts = kappa
        .positions()
        .iter()
        .enumerate()
        .map(|(i, &k)| k - (n - 1 - i) as u32)
        .collect();
    Partition::new(parts).expect("strictly decreasing positions give a partition")
}

/// True iff `κ_1, …, κ_N` hit every residue class mod `N` exactly once.
pub fn has_empty_ncore(lambda: &Partition, n: usize) -> Result<bool> {
    let kappa = to_particles(lambda, n)?;
    let mut seen = vec![false; n];
    for &k in kappa.positions() {
        let r = k as usize % n;
        if seen[r] {
            return Ok(false);
        }
        seen[r] = true;
    }
    Ok(true)
}

/// Partitions of exactly `w` with at most `max_len` parts, each part at most
/// `max_part`, in lexicographically descending order.
pub fn partitions_of(w: u32, max_len: usize, max_part: u32) -> Vec<Partition> {
    fn rec(rem: u32, max_len: usize, max_part: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        if max_len == 0 {
            return;
        }
        // largest first gives lexicographically descending output
        let hi = rem.min(max_part);
        for p in (1..=hi).rev() {
            // remaining parts cannot exceed p, so p * max_len must cover rem
            if (p as u64) * (max_len as u64) < rem as u64 {
                break;
            }
            cur.push(p);
            rec(rem - p, max_len - 1, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(w, max_len, max_part, &mut Vec::new(), &mut out);
    out
}

/// Every partition with at most `n` parts and weight at most `max_weight`,
/// weight-major and lexicographically descending within a weight.
pub fn enumerate_partitions(n: usize, max_weight: u32) -> impl Iterator<Item = Partition> {
    (0..=max_weight).flat_map(move |w| partitions_of(w, n, w))
}

/// Number of partitions of each weight `0..=max_weight` with at most `n`
/// parts, by the standard part-size recurrence.
pub fn partition_counts(n: usize, max_weight: u32) -> Vec<u128> {
    // partitions with at most n parts = partitions with parts of size at most n
    let w = max_weight as usize;
    let mut c = vec![0u128; w + 1];
    c[0] = 1;
    for part in 1..=n.min(w.max(1)) {
        for t in part..=w {
            c[t] += c[t - part];
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weights() {
        assert_eq!(weight(&p(&[])), 0);
        assert_eq!(weight(&p(&[3, 1])), 4);
        assert_eq!(weight(&p(&[5, 5, 2])), 12);
    }

    #[test]
    fn rejects_increasing_parts() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert_eq!(p(&[2, 1, 0, 0]).parts(), &[2, 1]);
    }

    #[test]
    fn particle_examples() {
        assert_eq!(to_particles(&p(&[0, 0, 0]), 3).unwrap().positions(), &[2, 1, 0]);
        assert_eq!(to_particles(&p(&[2, 1]), 2).unwrap().positions(), &[3, 1]);
        assert!(to_particles(&p(&[1, 1, 1]), 2).is_err());

        let k = |v: &[u32]| ParticleConfig::new(v.to_vec()).unwrap();
        assert_eq!(from_particles(&k(&[2, 1, 0])), p(&[]));
        assert_eq!(from_particles(&k(&[3, 1])), p(&[2, 1]));
        assert_eq!(from_particles(&k(&[5, 2, 0])), p(&[3, 1, 0]));
        assert!(ParticleConfig::new(vec![2, 2, 0]).is_err());
        assert!(ParticleConfig::new(vec![0, 1]).is_err());
    }

    #[test]
    fn bijection_exhaustive() {
        for n in 1..=8 {
            for lambda in enumerate_partitions(n, 12) {
                let kappa = to_particles(&lambda, n).unwrap();
                assert_eq!(from_particles(&kappa), lambda);
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let got: Vec<_> = enumerate_partitions(1, 3).collect();
        assert_eq!(got, vec![p(&[]), p(&[1]), p(&[2]), p(&[3])]);
        let got: Vec<_> = enumerate_partitions(2, 2).collect();
        assert_eq!(got, vec![p(&[]), p(&[1]), p(&[2]), p(&[1, 1])]);
        // 1 + 1 + 2 + 3 + 4 + 5 + 7, see series_oracle below
        assert_eq!(enumerate_partitions(3, 6).count(), 23);
    }

    /// Coefficients of Π_{n=1..N} (1 − q^n)^{-1} by multiplying truncated
    /// geometric series, independent of the enumerator.
    fn series_oracle(n: usize, w: usize) -> Vec<u128> {
        let mut poly = vec![0u128; w + 1];
        poly[0] = 1;
        for part in 1..=n {
            let mut next = vec![0u128; w + 1];
            for (i, &a) in poly.iter().enumerate() {
                let mut j = i;
                while j <= w {
                    next[j] += a;
                    j += part;
                }
            }
            poly = next;
        }
        poly
    }

    #[test]
    fn enumeration_matches_generating_function() {
        for n in 1..=5 {
            let oracle = series_oracle(n, 20);
            let mut counts = vec![0u128; 21];
            for lambda in enumerate_partitions(n, 20) {
                counts[lambda.weight() as usize] += 1;
            }
            assert_eq!(counts, oracle, "n = {n}");
            assert_eq!(partition_counts(n, 20), oracle);
        }
    }

    #[test]
    fn enumeration_order_is_weight_major_lex_descending() {
        let all: Vec<_> = enumerate_partitions(4, 9).collect();
        for w in all.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            assert!(a.weight() < b.weight() || (a.weight() == b.weight() && a.parts() > b.parts()));
        }
    }

    #[test]
    fn ncore_examples() {
        for n in 1..=5 {
            assert!(has_empty_ncore(&p(&[]), n).unwrap());
        }
        assert!(!has_empty_ncore(&p(&[1]), 2).unwrap());
        assert!(has_empty_ncore(&p(&[2]), 2).unwrap());
    }

    #[test]
    fn empty_ncore_generating_function() {
        // (1 − q^N)^{-N} = Σ_j C(N+j−1, j) q^{Nj}
        fn binom(n: u128, k: u128) -> u128 {
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        for n in 1..=4usize {
            let mut counts = vec![0u128; 13];
            for lambda in enumerate_partitions(n, 12) {
                if has_empty_ncore(&lambda, n).unwrap() {
                    counts[lambda.weight() as usize] += 1;
                }
            }
            for (w, &c) in counts.iter().enumerate() {
                let expect = if w % n == 0 {
                    binom((n + w / n - 1) as u128, (w / n) as u128)
                } else {
                    0
                };
                assert_eq!(c, expect, "n = {n}, w = {w}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let lambda = p(&[3, 1]);
        let s = serde_json::to_string(&lambda).unwrap();
        assert_eq!(s, "[3,1]");
        assert_eq!(serde_json::from_str::<Partition>(&s).unwrap(), lambda);
        assert!(serde_json::from_str::<Partition>("[1,3]").is_err());
        let kappa = to_particles(&lambda, 3).unwrap();
        assert_eq!(serde_json::to_string(&kappa).unwrap(), "[5,2,0]");
    }

    #[test]
    fn conjugate_and_containment() {
        assert_eq!(p(&[3, 1]).conjugate(), p(&[2, 1, 1]));
        assert!(p(&[2, 1]).is_contained_in(&p(&[3, 1, 1])));
        assert!(!p(&[2, 2]).is_contained_in(&p(&[3, 1])));
    }
}

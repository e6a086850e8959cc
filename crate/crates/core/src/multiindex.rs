//! Multi-indices (exponent vectors) and monomial enumeration.
//!
//! An [`Exponent`] `α = (α_1, …, α_n)` names the monomial `x^α` and, for a
//! symmetric tensor of order `|α|`, the orbit of index tuples whose multiset
//! of indices matches `α`. Exponents are ordered graded-lexicographically:
//! lower total degree first, and within a degree the exponent with the larger
//! leading power first, so `x_1^2 < x_1 x_2 < x_2^2`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent {
    alpha: Vec<u32>,
    degree: u32,
}

impl Exponent {
    pub fn new(alpha: Vec<u32>) -> Self {
        let degree = alpha.iter().sum();
        Self { alpha, degree }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![0; dim])
    }

    /// `e_i`, with `i` zero-based.
    pub fn unit(dim: usize, i: usize) -> Self {
        Self::pure_power(dim, i, 1)
    }

    /// `m·e_i`, with `i` zero-based.
    pub fn pure_power(dim: usize, i: usize, m: u32) -> Self {
        let mut alpha = vec![0; dim];
        alpha[i] = m;
        Self { alpha, degree: m }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.alpha
    }

    pub fn get(&self, i: usize) -> u32 {
        self.alpha[i]
    }

    /// The variable `i` when `self == m·e_i` for some `i`.
    pub fn pure_power_index(&self, m: u32) -> Option<usize> {
        if self.degree != m || m == 0 {
            return None;
        }
        self.alpha.iter().position(|&a| a == m)
    }

    pub fn is_zero(&self) -> bool {
        self.degree == 0
    }

    /// True when every entry is even (`α ∈ (2ℕ ∪ {0})^n`).
    pub fn is_even(&self) -> bool {
        self.alpha.iter().all(|a| a % 2 == 0)
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.dim(), other.dim());
        Exponent::new(
            self.alpha
                .iter()
                .zip(&other.alpha)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Appends a trailing coordinate (the homogenizing variable).
    pub fn extend(&self, last: u32) -> Exponent {
        let mut alpha = self.alpha.clone();
        alpha.push(last);
        Exponent::new(alpha)
    }

    /// Drops the trailing coordinate.
    pub fn truncate_last(&self) -> Exponent {
        Exponent::new(self.alpha[..self.alpha.len() - 1].to_vec())
    }

    pub fn monomial_value(&self, x: &[f64]) -> f64 {
        self.alpha
            .iter()
            .zip(x)
            .filter(|(a, _)| **a > 0)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }

    /// Sorted 1-based index tuple representing this exponent,
    /// e.g. `(2,0,1) ↦ (1,1,3)`.
    pub fn canonical_tuple(&self) -> Vec<usize> {
        self.alpha
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| std::iter::repeat_n(i + 1, a as usize))
            .collect()
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.alpha.cmp(&self.alpha))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.alpha.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(alpha: Vec<u32>) -> Self {
        Exponent::new(alpha)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonomialMode {
    /// `|α| = d`
    Exact,
    /// `|α| ≤ d`
    UpTo,
}

/// All exponents in `n` variables of degree `d` (or at most `d`), in grlex order.
pub fn enumerate_monomials(n: usize, d: u32, mode: MonomialMode) -> Vec<Exponent> {
    assert!(n >= 1, "monomials need at least one variable");
    let mut out = Vec::new();
    let degrees = match mode {
        MonomialMode::Exact => d..=d,
        MonomialMode::UpTo => 0..=d,
    };
    let mut buf = vec![0u32; n];
    for k in degrees {
        fill_degree(&mut buf, 0, k, &mut out);
    }
    out
}

fn fill_degree(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Exponent>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(Exponent::new(buf.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        buf[pos] = a;
        fill_degree(buf, pos + 1, remaining - a, out);
    }
}

pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        // acc * (n - i) is always divisible by (i + 1)
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// `I(m, n) = C(n+m-1, n-1)`, the number of distinct entries of a symmetric
/// tensor of order `m` in dimension `n`.
pub fn symmetric_dimension(m: u32, n: usize) -> u64 {
    binomial(n as u64 + m as u64 - 1, n as u64 - 1).expect("symmetric dimension overflow")
}

/// `|α|! / ∏ α_i!`: the number of index tuples in the orbit of `α`.
pub fn multiplicity(alpha: &Exponent) -> Result<u64> {
    let mut acc: u64 = 1;
    let mut partial: u64 = 0;
    for &a in alpha.as_slice() {
        partial += a as u64;
        let c = binomial(partial, a as u64).ok_or_else(|| Error::Overflow(alpha.alpha.clone()))?;
        acc = acc
            .checked_mul(c)
            .ok_or_else(|| Error::Overflow(alpha.alpha.clone()))?;
    }
    Ok(acc)
}

/// Exponent of a 1-based index tuple (order of entries is irrelevant).
pub fn tuple_to_exponent(tuple: &[usize], n: usize) -> Result<Exponent> {
    let mut alpha = vec![0u32; n];
    for &i in tuple {
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        alpha[i - 1] += 1;
    }
    Ok(Exponent::new(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exps(v: &[&[u32]]) -> Vec<Exponent> {
        v.iter().map(|a| Exponent::new(a.to_vec())).collect()
    }

    #[test]
    fn enumerate_counts_and_order() {
        assert_eq!(enumerate_monomials(3, 6, MonomialMode::Exact).len(), 28);
        assert_eq!(
            enumerate_monomials(2, 2, MonomialMode::Exact),
            exps(&[&[2, 0], &[1, 1], &[0, 2]])
        );
        assert_eq!(
            enumerate_monomials(1, 3, MonomialMode::UpTo),
            exps(&[&[0], &[1], &[2], &[3]])
        );
    }

    #[test]
    fn enumeration_is_sorted_without_duplicates() {
        let all = enumerate_monomials(3, 4, MonomialMode::UpTo);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all.len() as u64, binomial(7, 3).unwrap());
    }

    #[test]
    fn exact_counts_match_stars_and_bars() {
        for n in 1..=6usize {
            for d in 0..=10u32 {
                let got = enumerate_monomials(n, d, MonomialMode::Exact).len() as u64;
                assert_eq!(got, binomial(n as u64 + d as u64 - 1, n as u64 - 1).unwrap());
            }
        }
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(&Exponent::new(vec![6, 0, 0])).unwrap(), 1);
        assert_eq!(multiplicity(&Exponent::new(vec![1, 1])).unwrap(), 2);
        // 720 / (2·2·2)
        assert_eq!(multiplicity(&Exponent::new(vec![2, 2, 2])).unwrap(), 90);
    }

    #[test]
    fn multiplicity_overflow_is_reported() {
        let alpha = Exponent::new(vec![1; 30]);
        assert!(matches!(multiplicity(&alpha), Err(Error::Overflow(_))));
    }

    #[test]
    fn multiplicities_partition_all_tuples() {
        for n in 1..=4usize {
            for m in 0..=6u32 {
                let total: u64 = enumerate_monomials(n, m, MonomialMode::Exact)
                    .iter()
                    .map(|a| multiplicity(a).unwrap())
                    .sum();
                assert_eq!(total, (n as u64).pow(m));
            }
        }
    }

    #[test]
    fn tuple_conversions() {
        assert_eq!(tuple_to_exponent(&[1, 1, 3], 3).unwrap(), Exponent::new(vec![2, 0, 1]));
        assert_eq!(Exponent::new(vec![2, 0, 1]).canonical_tuple(), vec![1, 1, 3]);
        assert_eq!(tuple_to_exponent(&[2; 4], 3).unwrap(), Exponent::pure_power(3, 1, 4));
        assert!(matches!(
            tuple_to_exponent(&[1, 4], 3),
            Err(Error::IndexOutOfRange { index: 4, dim: 3 })
        ));
        assert!(tuple_to_exponent(&[0], 3).is_err());
    }

    #[test]
    fn tuple_round_trip_on_enumerated() {
        for alpha in enumerate_monomials(4, 5, MonomialMode::UpTo) {
            let t = alpha.canonical_tuple();
            assert_eq!(tuple_to_exponent(&t, 4).unwrap(), alpha);
        }
    }

    #[test]
    fn pure_power_detection() {
        assert_eq!(Exponent::pure_power(3, 2, 4).pure_power_index(4), Some(2));
        assert_eq!(Exponent::new(vec![2, 2, 0]).pure_power_index(4), None);
        assert_eq!(Exponent::new(vec![2, 0, 0]).pure_power_index(4), None);
    }
}

//! Even-order symmetric tensors stored by exponent.
//!
//! A symmetric tensor of order `m` in dimension `n` has one independent entry
//! per exponent `α` with `|α| = m`; the entry `A(α)` is the common value of
//! every `A_{i_1…i_m}` whose index multiset is `α`. Sums over all `n^m` index
//! tuples are therefore computed as multiplicity-weighted sums over exponents.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::multiindex::{multiplicity, tuple_to_exponent, Exponent};
use crate::poly::Polynomial;

/// Negative diagonal entries down to minus this value are treated as zero by
/// [`SymmetricTensor::diagonal_root_vector`].
pub const DIAGONAL_CLAMP_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTensor {
    order: usize,
    dim: usize,
    entries: BTreeMap<Exponent, f64>,
}

/// Sign pattern of the off-diagonal entries (`α ≠ m·e_i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EssentialSign {
    Nonpositive,
    Nonnegative,
    /// Every off-diagonal entry is zero.
    Both,
    Neither,
}

impl EssentialSign {
    pub fn allows_nonpositive(self) -> bool {
        matches!(self, EssentialSign::Nonpositive | EssentialSign::Both)
    }

    pub fn allows_nonnegative(self) -> bool {
        matches!(self, EssentialSign::Nonnegative | EssentialSign::Both)
    }
}

impl SymmetricTensor {
    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        if order == 0 || !order.is_multiple_of(2) {
            return Err(Error::InvalidOrder(order));
        }
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(Self {
            order,
            dim,
            entries: BTreeMap::new(),
        })
    }

    pub fn from_entries<I, E>(order: usize, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, f64)>,
        E: Into<Exponent>,
    {
        let mut t = Self::zeros(order, dim)?;
        for (alpha, v) in entries {
            t.set(alpha.into(), v)?;
        }
        Ok(t)
    }

    /// The tensor of the form `Σ_i coeffs[i] x_i^m`.
    pub fn diagonal(order: usize, coeffs: &[f64]) -> Result<Self> {
        let dim = coeffs.len();
        let mut t = Self::zeros(order, dim)?;
        for (i, &c) in coeffs.iter().enumerate() {
            t.set(Exponent::pure_power(dim, i, order as u32), c)?;
        }
        Ok(t)
    }

    /// `x^{⊗m}`: entry at `α` is `∏ x_i^{α_i}`.
    pub fn rank_one(x: &[f64], order: usize) -> Result<Self> {
        let mut t = Self::zeros(order, x.len())?;
        for alpha in crate::multiindex::enumerate_monomials(
            x.len(),
            order as u32,
            crate::multiindex::MonomialMode::Exact,
        ) {
            let v = alpha.monomial_value(x);
            t.set(alpha, v)?;
        }
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Exponent, f64)> + '_ {
        self.entries.iter().map(|(a, &v)| (a, v))
    }

    pub fn get(&self, alpha: &Exponent) -> f64 {
        self.entries.get(alpha).copied().unwrap_or(0.0)
    }

    /// Entry at a 1-based index tuple (any order of indices).
    pub fn entry(&self, tuple: &[usize]) -> Result<f64> {
        if tuple.len() != self.order {
            return Err(Error::OrderMismatch {
                expected: self.order,
                found: tuple.len(),
            });
        }
        Ok(self.get(&tuple_to_exponent(tuple, self.dim)?))
    }

    pub fn set(&mut self, alpha: Exponent, value: f64) -> Result<()> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: alpha.dim(),
            });
        }
        if alpha.degree() as usize != self.order {
            return Err(Error::OrderMismatch {
                expected: self.order,
                found: alpha.degree() as usize,
            });
        }
        if value == 0.0 {
            self.entries.remove(&alpha);
        } else {
            self.entries.insert(alpha, value);
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                expected: self.order,
                found: other.order,
            });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// `⟨A, B⟩ = Σ_{i_1…i_m} A_{i_1…i_m} B_{i_1…i_m}`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        let mut acc = 0.0;
        for (alpha, a) in &self.entries {
            if let Some(b) = other.entries.get(alpha) {
                acc += multiplicity(alpha)? as f64 * a * b;
            }
        }
        Ok(acc)
    }

    /// `f_A(x) = ⟨A, x^{⊗m}⟩`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut acc = 0.0;
        for (alpha, a) in &self.entries {
            acc += multiplicity(alpha)? as f64 * a * alpha.monomial_value(x);
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (alpha, b) in &other.entries {
            let v = out.get(alpha) + b;
            out.set(alpha.clone(), v)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= s;
        }
        out.entries.retain(|_, v| *v != 0.0);
        out
    }

    /// Frobenius norm over all `n^m` entries.
    pub fn norm(&self) -> f64 {
        self.inner(self).map(f64::sqrt).unwrap_or(0.0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `P^m A`, with `(P^m A)_{i_1…i_m} = Σ P_{i_1 j_1}⋯P_{i_m j_m} A_{j_1…j_m}`.
    ///
    /// Computed through the form identity `f_{P^m A}(x) = f_A(P^T x)`:
    /// the linear forms `(P^T x)_i` are substituted into `f_A` and the result
    /// re-expanded.
    pub fn transform(&self, p: &DMatrix<f64>) -> Result<Self> {
        if p.nrows() != self.dim || p.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: if p.nrows() != self.dim {
                    p.nrows()
                } else {
                    p.ncols()
                },
            });
        }
        let f = Polynomial::from_tensor(self)?;
        let g = f.substitute_linear(&p.transpose())?;
        g.to_tensor(self.order)
    }

    /// True for `α = m·e_i`.
    fn is_diagonal(&self, alpha: &Exponent) -> bool {
        alpha.pure_power_index(self.order as u32).is_some()
    }

    /// Sign classification of the off-diagonal entries, using exact
    /// comparisons against zero.
    pub fn classify_essential_sign(&self) -> EssentialSign {
        self.classify_essential_sign_tol(0.0)
    }

    /// As [`classify_essential_sign`](Self::classify_essential_sign), but
    /// entries with `|v| ≤ tol` count as zero.
    pub fn classify_essential_sign_tol(&self, tol: f64) -> EssentialSign {
        let mut pos = false;
        let mut neg = false;
        for (alpha, &v) in &self.entries {
            if self.is_diagonal(alpha) {
                continue;
            }
            if v > tol {
                pos = true;
            } else if v < -tol {
                neg = true;
            }
        }
        match (pos, neg) {
            (false, false) => EssentialSign::Both,
            (false, true) => EssentialSign::Nonpositive,
            (true, false) => EssentialSign::Nonnegative,
            (true, true) => EssentialSign::Neither,
        }
    }

    /// Off-diagonal exponents with a positive entry.
    pub fn positive_off_diagonal(&self) -> Vec<Exponent> {
        self.entries
            .iter()
            .filter(|(a, &v)| v > 0.0 && !self.is_diagonal(a))
            .map(|(a, _)| a.clone())
            .collect()
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.get(&Exponent::pure_power(self.dim, i, self.order as u32)))
            .collect()
    }

    /// `x̄_i = X_{i…i}^{1/m}`, clamping diagonal entries in `[-tol, 0)` to
    /// zero. A diagonal entry below `-tol` means `X` cannot be a sum of
    /// rank-one tensors.
    pub fn diagonal_root_vector(&self) -> Result<Vec<f64>> {
        self.diagonal_root_vector_tol(DIAGONAL_CLAMP_TOL)
    }

    pub fn diagonal_root_vector_tol(&self, tol: f64) -> Result<Vec<f64>> {
        let m = self.order as f64;
        self.diagonal_entries()
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                if d < -tol {
                    Err(Error::NegativeDiagonal {
                        index: i + 1,
                        value: d,
                    })
                } else {
                    Ok(d.max(0.0).powf(1.0 / m))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::{enumerate_monomials, MonomialMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn random_tensor(rng: &mut ChaCha8Rng, order: usize, dim: usize) -> SymmetricTensor {
        let entries = enumerate_monomials(dim, order as u32, MonomialMode::Exact)
            .into_iter()
            .map(|a| (a, rng.random_range(-1.0..1.0)));
        SymmetricTensor::from_entries(order, dim, entries).unwrap()
    }

    fn motzkin_tensor() -> SymmetricTensor {
        Polynomial::from_terms(
            3,
            [
                (vec![0, 0, 6], 1.0),
                (vec![2, 4, 0], 1.0),
                (vec![4, 2, 0], 1.0),
                (vec![2, 2, 2], -3.0),
            ],
        )
        .unwrap()
        .to_tensor(6)
        .unwrap()
    }

    /// Brute-force `⟨A, B⟩` over all `n^m` index tuples.
    fn inner_by_tuples(a: &SymmetricTensor, b: &SymmetricTensor) -> f64 {
        let (n, m) = (a.dim(), a.order());
        let mut acc = 0.0;
        for code in 0..n.pow(m as u32) {
            let mut c = code;
            let tuple: Vec<usize> = (0..m)
                .map(|_| {
                    let i = c % n + 1;
                    c /= n;
                    i
                })
                .collect();
            acc += a.entry(&tuple).unwrap() * b.entry(&tuple).unwrap();
        }
        acc
    }

    /// Brute-force `P^m A` over all `n^{2m}` index pairs.
    fn transform_by_tuples(p: &DMatrix<f64>, a: &SymmetricTensor) -> SymmetricTensor {
        let (n, m) = (a.dim(), a.order());
        let decode = |mut c: usize| -> Vec<usize> {
            (0..m)
                .map(|_| {
                    let i = c % n;
                    c /= n;
                    i
                })
                .collect()
        };
        let mut out = SymmetricTensor::zeros(m, n).unwrap();
        for alpha in enumerate_monomials(n, m as u32, MonomialMode::Exact) {
            let is: Vec<usize> = alpha.canonical_tuple().iter().map(|i| i - 1).collect();
            let mut acc = 0.0;
            for code in 0..n.pow(m as u32) {
                let js = decode(code);
                let one_based: Vec<usize> = js.iter().map(|j| j + 1).collect();
                let mut w = a.entry(&one_based).unwrap();
                for k in 0..m {
                    w *= p[(is[k], js[k])];
                }
                acc += w;
            }
            out.set(alpha, acc).unwrap();
        }
        out
    }

    #[test]
    fn rank_one_examples() {
        let t = SymmetricTensor::rank_one(&[1.0, 0.0], 2).unwrap();
        assert_eq!(t.entries().count(), 1);
        assert_eq!(t.get(&Exponent::new(vec![2, 0])), 1.0);
        let t = SymmetricTensor::rank_one(&[1.0, 1.0], 2).unwrap();
        assert_eq!(t.entries().count(), 3);
        assert!(t.entries().all(|(_, v)| v == 1.0));
        let t = SymmetricTensor::rank_one(&[2.0, -1.0], 4).unwrap();
        assert_eq!(t.get(&Exponent::new(vec![3, 1])), -8.0);
        assert!(matches!(
            SymmetricTensor::rank_one(&[1.0], 3),
            Err(Error::InvalidOrder(3))
        ));
    }

    #[test]
    fn inner_examples() {
        let x = SymmetricTensor::rank_one(&[1.0, 0.0], 2).unwrap();
        let y = SymmetricTensor::rank_one(&[0.0, 1.0], 2).unwrap();
        assert_eq!(x.inner(&y).unwrap(), 0.0);
        let a = SymmetricTensor::rank_one(&[1.0, 1.0], 2).unwrap();
        assert_eq!(a.inner(&a).unwrap(), 4.0);
        let b = SymmetricTensor::rank_one(&[1.0, 1.0], 4).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::OrderMismatch { .. })));
    }

    #[test]
    fn inner_of_rank_ones_is_power_of_dot() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [2usize, 4, 6] {
            for _ in 0..20 {
                let n = rng.random_range(1..=4);
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
                let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
                let lhs = SymmetricTensor::rank_one(&x, m)
                    .unwrap()
                    .inner(&SymmetricTensor::rank_one(&y, m).unwrap())
                    .unwrap();
                assert!(close(lhs, dot.powi(m as i32), 1e-12));
            }
        }
    }

    #[test]
    fn inner_matches_tuple_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (m, n) in [(2, 3), (4, 2), (4, 3), (6, 2)] {
            let a = random_tensor(&mut rng, m, n);
            let b = random_tensor(&mut rng, m, n);
            assert!(close(a.inner(&b).unwrap(), inner_by_tuples(&a, &b), 1e-12));
        }
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(motzkin_tensor().evaluate(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_tensor(&mut rng, 4, 3);
        assert_eq!(a.evaluate(&[0.0; 3]).unwrap(), 0.0);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let via_inner = a.inner(&SymmetricTensor::rank_one(&x, 4).unwrap()).unwrap();
            assert!(close(a.evaluate(&x).unwrap(), via_inner, 1e-12));
        }
        assert!(a.evaluate(&[1.0]).is_err());
    }

    #[test]
    fn transform_identity_and_matrix_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = random_tensor(&mut rng, 4, 3);
        let id = DMatrix::<f64>::identity(3, 3);
        let b = a.transform(&id).unwrap();
        for (alpha, v) in a.entries() {
            assert!(close(b.get(alpha), v, 1e-14));
        }

        let a2 = random_tensor(&mut rng, 2, 3);
        let p = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let mat = DMatrix::from_fn(3, 3, |i, j| a2.entry(&[i + 1, j + 1]).unwrap());
        let expected = &p * mat * p.transpose();
        let got = a2.transform(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(got.entry(&[i + 1, j + 1]).unwrap(), expected[(i, j)], 1e-12));
            }
        }
        assert!(a2.transform(&DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn transform_matches_entry_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (m, n) in [(2, 3), (4, 2), (4, 3)] {
            let a = random_tensor(&mut rng, m, n);
            let p = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let fast = a.transform(&p).unwrap();
            let slow = transform_by_tuples(&p, &a);
            for alpha in enumerate_monomials(n, m as u32, MonomialMode::Exact) {
                assert!(close(fast.get(&alpha), slow.get(&alpha), 1e-11));
            }
        }
    }

    #[test]
    fn transform_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for m in [2usize, 4] {
            let a = random_tensor(&mut rng, m, 3);
            let p = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let q = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let lhs = a.transform(&q).unwrap().transform(&p).unwrap();
            let rhs = a.transform(&(&p * &q)).unwrap();
            for alpha in enumerate_monomials(3, m as u32, MonomialMode::Exact) {
                assert!((lhs.get(&alpha) - rhs.get(&alpha)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn classify_examples() {
        assert!(!motzkin_tensor().classify_essential_sign().allows_nonpositive());
        assert_eq!(motzkin_tensor().classify_essential_sign(), EssentialSign::Neither);
        let diag = SymmetricTensor::diagonal(6, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(diag.classify_essential_sign(), EssentialSign::Both);
        let f = Polynomial::from_terms(
            2,
            [(vec![4, 0], 1.0), (vec![0, 4], 1.0), (vec![1, 3], -4.0)],
        )
        .unwrap();
        assert_eq!(
            f.to_tensor(4).unwrap().classify_essential_sign(),
            EssentialSign::Nonpositive
        );
    }

    #[test]
    fn diagonal_root_examples() {
        let x = SymmetricTensor::rank_one(&[2.0, 3.0], 4).unwrap();
        let r = x.diagonal_root_vector().unwrap();
        assert!(close(r[0], 2.0, 1e-14) && close(r[1], 3.0, 1e-14));

        let x = SymmetricTensor::rank_one(&[1.0, 0.0], 2)
            .unwrap()
            .add(&SymmetricTensor::rank_one(&[0.0, 1.0], 2).unwrap())
            .unwrap();
        assert_eq!(x.diagonal_root_vector().unwrap(), vec![1.0, 1.0]);

        let x = SymmetricTensor::diagonal(6, &[1.0 / 3.0; 3]).unwrap();
        let expected = (1.0f64 / 3.0).powf(1.0 / 6.0);
        assert!(x
            .diagonal_root_vector()
            .unwrap()
            .iter()
            .all(|v| close(*v, expected, 1e-14)));

        let x = SymmetricTensor::diagonal(2, &[1.0, -1e-9]).unwrap();
        assert_eq!(x.diagonal_root_vector().unwrap(), vec![1.0, 0.0]);
        // small positive entries keep their root
        let x = SymmetricTensor::diagonal(4, &[1e-12, 1.0]).unwrap();
        assert!(close(x.diagonal_root_vector().unwrap()[0], 1e-3, 1e-12));
        let x = SymmetricTensor::diagonal(2, &[1.0, -1e-3]).unwrap();
        assert!(matches!(
            x.diagonal_root_vector(),
            Err(Error::NegativeDiagonal { index: 2, .. })
        ));
    }

    #[test]
    fn inner_is_symmetric_bilinear_and_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let a = random_tensor(&mut rng, 4, 3);
            let b = random_tensor(&mut rng, 4, 3);
            let c = random_tensor(&mut rng, 4, 3);
            let s = rng.random_range(-2.0..2.0);
            assert!(close(a.inner(&b).unwrap(), b.inner(&a).unwrap(), 1e-14));
            let lhs = a.add(&b.scale(s)).unwrap().inner(&c).unwrap();
            let rhs = a.inner(&c).unwrap() + s * b.inner(&c).unwrap();
            assert!(close(lhs, rhs, 1e-12));
            assert!(a.inner(&a).unwrap() > 0.0);
        }
        let z = SymmetricTensor::zeros(4, 3).unwrap();
        assert_eq!(z.inner(&z).unwrap(), 0.0);
    }
}

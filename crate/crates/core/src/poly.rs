//! Sparse multivariate polynomials with real coefficients.
//!
//! Besides evaluation and a little arithmetic, this module houses the
//! sign-structure machinery: the support sets `Ω_f` and `Δ_f`, the companion
//! form `f̂`, the essentially-nonpositive coefficient test, degree-`m`
//! homogenization, and the correspondence between homogeneous forms and
//! symmetric tensors.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::multiindex::{multiplicity, Exponent};
use crate::tensor::SymmetricTensor;

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Exponent::zero(dim), c);
        p
    }

    /// `c · x_i` with `i` zero-based.
    pub fn variable(dim: usize, i: usize) -> Self {
        Self::monomial(Exponent::unit(dim, i), 1.0)
    }

    pub fn monomial(alpha: Exponent, c: f64) -> Self {
        let mut p = Self::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed and zero coefficients dropped.
    pub fn from_terms<I, E>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, f64)>,
        E: Into<Exponent>,
    {
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            let alpha = alpha.into();
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: alpha.dim(),
                });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// `Σ_i coeffs[i] · x_i^m`.
    pub fn pure_powers(coeffs: &[f64], m: u32) -> Self {
        let dim = coeffs.len();
        let mut p = Self::zero(dim);
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(Exponent::pure_power(dim, i, m), c);
        }
        p
    }

    pub fn add_term(&mut self, alpha: Exponent, c: f64) {
        debug_assert_eq!(alpha.dim(), self.dim);
        if c == 0.0 {
            return;
        }
        match self.terms.entry(alpha) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest total degree among nonzero terms (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|a| a.degree() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> + '_ {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, alpha: &Exponent) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    /// `r = f(0)`.
    pub fn constant_term(&self) -> f64 {
        self.coeff(&Exponent::zero(self.dim))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_homogeneous(&self, m: usize) -> bool {
        self.terms.keys().all(|a| a.degree() as usize == m)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| c * a.monomial_value(x))
            .sum()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Gradient at `x`, from the symbolic partial derivatives of each term.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (alpha, c) in &self.terms {
            let a = alpha.as_slice();
            for i in 0..self.dim {
                if a[i] == 0 {
                    continue;
                }
                let mut v = c * a[i] as f64;
                for (j, (&aj, &xj)) in a.iter().zip(x).enumerate() {
                    let p = if j == i { aj - 1 } else { aj };
                    if p > 0 {
                        v *= xj.powi(p as i32);
                    }
                }
                g[i] += v;
            }
        }
        g
    }

    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (alpha, c) in &self.terms {
            let a = alpha.get(i);
            if a == 0 {
                continue;
            }
            let mut beta = alpha.as_slice().to_vec();
            beta[i] -= 1;
            out.add_term(Exponent::new(beta), c * a as f64);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    /// `self + s·other`
    pub fn add_scaled(&self, other: &Polynomial, s: f64) -> Polynomial {
        self.add(&other.scale(s))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
        let mut acc: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                *acc.entry(a.add(b)).or_insert(0.0) += c * d;
            }
        }
        acc.retain(|_, v| *v != 0.0);
        Polynomial {
            dim: self.dim,
            terms: acc,
        }
    }

    pub fn square(&self) -> Polynomial {
        self.mul(self)
    }

    /// Drops coefficients with `|c| ≤ tol`.
    pub fn pruned(&self, tol: f64) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    /// Largest coefficient difference `max_α |f_α − g_α|`.
    pub fn max_coeff_diff(&self, other: &Polynomial) -> f64 {
        let keys: BTreeSet<&Exponent> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .map(|a| (self.coeff(a) - other.coeff(a)).abs())
            .fold(0.0, f64::max)
    }

    /// `g(x) = f(L x)`: variable `x_i` of `f` is replaced by the linear form
    /// `Σ_j L[i,j] x_j`. `L` must be `dim × k`; the result lives in `k`
    /// variables.
    pub fn substitute_linear(&self, l: &DMatrix<f64>) -> Result<Polynomial> {
        if l.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: l.nrows(),
            });
        }
        let k = l.ncols();
        let forms: Vec<Polynomial> = (0..self.dim)
            .map(|i| {
                let mut p = Polynomial::zero(k);
                for j in 0..k {
                    p.add_term(Exponent::unit(k, j), l[(i, j)]);
                }
                p
            })
            .collect();
        // powers[i][e] = forms[i]^e, built lazily
        let mut powers: Vec<Vec<Polynomial>> = forms
            .iter()
            .map(|_| vec![Polynomial::constant(k, 1.0)])
            .collect();
        let mut out = Polynomial::zero(k);
        for (alpha, c) in &self.terms {
            let mut term = Polynomial::constant(k, *c);
            for (i, &a) in alpha.as_slice().iter().enumerate() {
                while powers[i].len() <= a as usize {
                    let next = powers[i].last().unwrap().mul(&forms[i]);
                    powers[i].push(next);
                }
                if a > 0 {
                    term = term.mul(&powers[i][a as usize]);
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// `Ω_f`: exponents with nonzero coefficient other than the pure powers
    /// `m·e_i`. The constant exponent is included when `f(0) ≠ 0`.
    pub fn omega_support(&self, m: u32) -> BTreeSet<Exponent> {
        self.terms
            .keys()
            .filter(|a| a.pure_power_index(m).is_none())
            .cloned()
            .collect()
    }

    /// `Δ_f ⊆ Ω_f`: terms with a negative coefficient or an odd exponent.
    pub fn delta_support(&self, m: u32) -> BTreeSet<Exponent> {
        self.omega_support(m)
            .into_iter()
            .filter(|a| self.coeff(a) < 0.0 || !a.is_even())
            .collect()
    }

    /// `f̂ = Σ f_{m,i} x_i^m − Σ_{α∈Δ_f} |f_α| x^α`.
    pub fn hat(&self, m: u32) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (a, c) in &self.terms {
            if a.pure_power_index(m).is_some() {
                out.add_term(a.clone(), *c);
            }
        }
        for a in self.delta_support(m) {
            out.add_term(a.clone(), -self.coeff(&a).abs());
        }
        out
    }

    /// Exponents in `Ω_f ∖ {0}` whose coefficient is positive.
    pub fn enp_violations(&self, m: u32) -> Vec<Exponent> {
        self.omega_support(m)
            .into_iter()
            .filter(|a| !a.is_zero() && self.coeff(a) > 0.0)
            .collect()
    }

    /// True when `f_α ≤ 0` for all `α ∈ Ω_f ∖ {0}`.
    pub fn has_enp_coefficients(&self, m: u32) -> bool {
        self.enp_violations(m).is_empty()
    }

    fn check_degree(&self, m: usize) -> Result<()> {
        let d = self.degree();
        if d > m {
            return Err(Error::DegreeTooHigh { degree: d, max: m });
        }
        Ok(())
    }

    /// Degree-`m` homogenization `f̃(x, t) = Σ f_α x^α t^{m−|α|}`, with `t`
    /// appended as the last variable.
    pub fn homogenize(&self, m: usize) -> Result<Polynomial> {
        self.check_degree(m)?;
        let mut out = Polynomial::zero(self.dim + 1);
        for (a, c) in &self.terms {
            out.add_term(a.extend(m as u32 - a.degree()), *c);
        }
        Ok(out)
    }

    /// `g(x, 1)`: substitutes 1 for the last variable.
    pub fn dehomogenize(&self) -> Result<Polynomial> {
        if self.dim < 2 {
            return Err(Error::Precondition(
                "dehomogenization needs at least two variables".into(),
            ));
        }
        let mut out = Polynomial::zero(self.dim - 1);
        for (a, c) in &self.terms {
            out.add_term(a.truncate_last(), *c);
        }
        Ok(out)
    }

    /// The symmetric tensor `A` with `f(x) = ⟨A, x^{⊗m}⟩`,
    /// `A(α) = f_α / multiplicity(α)`.
    pub fn to_tensor(&self, m: usize) -> Result<SymmetricTensor> {
        if !self.is_homogeneous(m) {
            return Err(Error::NotHomogeneous(m));
        }
        let mut t = SymmetricTensor::zeros(m, self.dim)?;
        for (a, c) in &self.terms {
            t.set(a.clone(), c / multiplicity(a)? as f64)?;
        }
        Ok(t)
    }

    pub fn from_tensor(t: &SymmetricTensor) -> Result<Polynomial> {
        let mut out = Polynomial::zero(t.dim());
        for (a, v) in t.entries() {
            out.add_term(a.clone(), v * multiplicity(a)? as f64);
        }
        Ok(out)
    }
}

pub fn tensor_from_polynomial(f: &Polynomial, m: usize) -> Result<SymmetricTensor> {
    f.to_tensor(m)
}

pub fn polynomial_from_tensor(t: &SymmetricTensor) -> Result<Polynomial> {
    Polynomial::from_tensor(t)
}

/// Formats a real number with twelve significant digits, trailing zeros
/// trimmed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        let s = format!("{:.*e}", digits.saturating_sub(1), x);
        return match s.split_once('e') {
            Some((mant, e)) => format!("{}e{}", trim_zeros(mant), e),
            None => s,
        };
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl fmt::Display for Polynomial {
    /// Highest degree first, lex order within a degree, e.g.
    /// `x1^2 - 2*x1*x2 + 0.5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<(&Exponent, &f64)> = self.terms.iter().collect();
        ordered.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then_with(|| a.0.cmp(b.0)));
        for (k, (alpha, &c)) in ordered.into_iter().enumerate() {
            let neg = c < 0.0;
            let mag = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &a) in alpha.as_slice().iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, a)),
                }
            }
            let coef = format_sig(mag, 12);
            if factors.is_empty() {
                write!(f, "{coef}")?;
            } else if coef == "1" {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{coef}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::tensor::EssentialSign;

    fn poly(dim: usize, terms: &[(&[u32], f64)]) -> Polynomial {
        Polynomial::from_terms(dim, terms.iter().map(|(a, c)| (a.to_vec(), *c))).unwrap()
    }

    pub(crate) fn motzkin() -> Polynomial {
        poly(
            3,
            &[
                (&[0, 0, 6], 1.0),
                (&[2, 4, 0], 1.0),
                (&[4, 2, 0], 1.0),
                (&[2, 2, 2], -3.0),
            ],
        )
    }

    fn ep3_objective() -> Polynomial {
        poly(
            3,
            &[
                (&[6, 0, 0], 1.0),
                (&[0, 6, 0], 1.0),
                (&[0, 0, 6], 1.0),
                (&[2, 4, 0], -1.0),
                (&[2, 0, 4], -1.0),
                (&[4, 2, 0], -1.0),
                (&[0, 2, 4], -1.0),
                (&[4, 0, 2], -1.0),
                (&[0, 4, 2], -1.0),
            ],
        )
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(motzkin().evaluate(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        let f = poly(1, &[(&[2], 1.0), (&[1], -2.0), (&[0], 1.0)]);
        assert_eq!(f.evaluate(&[3.0]).unwrap(), 4.0);
        assert_eq!(f.evaluate(&[0.0]).unwrap(), f.constant_term());
        assert!(f.evaluate(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn omega_support_examples() {
        let f = poly(2, &[(&[4, 0], 1.0), (&[0, 4], 1.0), (&[2, 2], -1.0)]);
        assert_eq!(f.omega_support(4), [Exponent::new(vec![2, 2])].into());
        assert!(Polynomial::pure_powers(&[1.0; 3], 6).omega_support(6).is_empty());
        let expected: BTreeSet<Exponent> = [vec![2, 4, 0], vec![4, 2, 0], vec![2, 2, 2]]
            .into_iter()
            .map(Exponent::new)
            .collect();
        assert_eq!(motzkin().omega_support(6), expected);
        // the constant exponent belongs to Ω_f
        let g = poly(1, &[(&[2], 1.0), (&[0], -1.0)]);
        assert!(g.omega_support(2).contains(&Exponent::zero(1)));
    }

    #[test]
    fn delta_support_examples() {
        let f = poly(2, &[(&[4, 0], 1.0), (&[2, 2], 2.0)]);
        assert!(f.delta_support(4).is_empty());
        let g = poly(2, &[(&[4, 0], 1.0), (&[0, 4], 1.0), (&[2, 2], -1.0)]);
        assert_eq!(g.delta_support(4), [Exponent::new(vec![2, 2])].into());
        let h = poly(2, &[(&[4, 0], 1.0), (&[3, 1], 1.0)]);
        assert_eq!(h.delta_support(4), [Exponent::new(vec![3, 1])].into());
    }

    #[test]
    fn hat_examples() {
        let f = poly(2, &[(&[4, 0], 1.0), (&[2, 2], 2.0)]);
        assert_eq!(f.hat(4), poly(2, &[(&[4, 0], 1.0)]));
        let h = poly(2, &[(&[4, 0], 1.0), (&[3, 1], 1.0)]);
        assert_eq!(h.hat(4), poly(2, &[(&[4, 0], 1.0), (&[3, 1], -1.0)]));
        assert_eq!(ep3_objective().hat(6), ep3_objective());
    }

    #[test]
    fn homogenize_examples() {
        let f = poly(1, &[(&[2], 1.0), (&[1], -2.0), (&[0], 1.0)]);
        let g = f.homogenize(2).unwrap();
        assert_eq!(g, poly(2, &[(&[2, 0], 1.0), (&[1, 1], -2.0), (&[0, 2], 1.0)]));
        assert_eq!(g.dehomogenize().unwrap(), f);

        let f1 = poly(2, &[(&[4, 0], 2.0), (&[0, 4], 3.0), (&[0, 0], -1.0)]);
        assert_eq!(
            f1.homogenize(4).unwrap(),
            poly(3, &[(&[4, 0, 0], 2.0), (&[0, 4, 0], 3.0), (&[0, 0, 4], -1.0)])
        );

        let h = motzkin().homogenize(6).unwrap();
        assert!(h.terms().all(|(a, _)| a.get(3) == 0));
        assert!(matches!(
            motzkin().homogenize(4),
            Err(Error::DegreeTooHigh { degree: 6, max: 4 })
        ));
    }

    #[test]
    fn enp_examples() {
        assert!(ep3_objective().has_enp_coefficients(6));
        assert!(!motzkin().has_enp_coefficients(6));
        assert_eq!(motzkin().enp_violations(6).len(), 2);
        assert!(Polynomial::constant(2, 5.0).has_enp_coefficients(4));
    }

    #[test]
    fn tensor_conversion_examples() {
        let f = poly(2, &[(&[1, 1], 1.0)]);
        let t = f.to_tensor(2).unwrap();
        assert_eq!(t.get(&Exponent::new(vec![1, 1])), 0.5);
        assert_eq!(t.entry(&[1, 2]).unwrap(), 0.5);
        assert_eq!(t.entry(&[1, 1]).unwrap(), 0.0);
        let g = Polynomial::monomial(Exponent::pure_power(3, 0, 4), 1.0);
        assert_eq!(g.to_tensor(4).unwrap().get(&Exponent::pure_power(3, 0, 4)), 1.0);
        assert_eq!(Polynomial::from_tensor(&t).unwrap(), f);
        assert!(matches!(
            poly(2, &[(&[2, 0], 1.0), (&[1, 0], 1.0)]).to_tensor(2),
            Err(Error::NotHomogeneous(2))
        ));
    }

    #[test]
    fn homogenization_keeps_enp_structure() {
        let f = poly(
            2,
            &[
                (&[4, 0], -2.0),
                (&[0, 4], 1.0),
                (&[1, 1], -3.0),
                (&[2, 0], -1.0),
                (&[1, 0], -0.5),
                (&[0, 0], 4.0),
            ],
        );
        assert!(f.has_enp_coefficients(4));
        let t = f.homogenize(4).unwrap().to_tensor(4).unwrap();
        assert!(t.classify_essential_sign().allows_nonpositive());
        assert_eq!(t.classify_essential_sign(), EssentialSign::Nonpositive);
    }

    #[test]
    fn gradient_matches_symbolic_derivative() {
        let f = motzkin();
        let x = [0.3, -1.2, 0.7];
        let g = f.gradient(&x).unwrap();
        for (i, gi) in g.iter().enumerate() {
            let d = f.derivative(i).evaluate(&x).unwrap();
            assert!((gi - d).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_substitution_identity_and_swap() {
        let f = motzkin();
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(f.substitute_linear(&id).unwrap().max_coeff_diff(&f) < 1e-15);
        let swap = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 1.]);
        let g = f.substitute_linear(&swap).unwrap();
        assert_eq!(g.coeff(&Exponent::new(vec![4, 2, 0])), 1.0);
        assert_eq!(g.coeff(&Exponent::new(vec![2, 4, 0])), 1.0);
    }

    #[test]
    fn display_and_format() {
        let f = poly(2, &[(&[2, 0], 1.0), (&[1, 1], -2.0), (&[0, 0], 0.5)]);
        assert_eq!(f.to_string(), "x1^2 - 2*x1*x2 + 0.5");
        assert_eq!(format_sig(-1.27950705695, 12), "-1.27950705695");
        assert_eq!(format_sig(1e-9, 12), "1e-9");
        assert_eq!(format_sig(2.0, 12), "2");
    }
}

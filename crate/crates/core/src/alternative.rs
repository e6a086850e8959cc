//! Theorems of the alternative for essentially nonpositive tensors.
//!
//! For symmetric tensors `F_0, …, F_p` of even order `m` that become
//! essentially nonpositive after a common change of variables `P`, exactly
//! one of the following holds:
//!
//! * **(I)** some `x` has `F_l x^m < 0` for every `l`;
//! * **(II)** some `λ` in the simplex makes `Σ λ_l F_l` an SOS tensor.
//!
//! [`yuan_alternative`] decides which, returning a checkable
//! [`AltCertificate`]. [`s_lemma`] and [`matrix_alternative`] are the
//! homogeneous S-lemma and the quadratic (`m = 2`) special case.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multiindex::Exponent;
use crate::optim::{bfgs, BfgsSettings};
use crate::poly::Polynomial;
use crate::sdp::{SdpProblem, SdpSettings};
use crate::sos::{gram_basis, shift_polynomial, SosCertificate, SosProgram, VarKind};
use crate::tensor::SymmetricTensor;

/// Witness validation threshold: `max_l F_l(u) < -WITNESS_TOL` at unit `u`.
pub const WITNESS_TOL: f64 = 1e-9;

/// Largest accepted condition number of `P`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AltOutcome {
    StatementI,
    StatementII,
    AssumptionViolated,
    Indeterminate,
}

impl AltOutcome {
    pub fn label(self) -> &'static str {
        match self {
            AltOutcome::StatementI => "STATEMENT_I",
            AltOutcome::StatementII => "STATEMENT_II",
            AltOutcome::AssumptionViolated => "ASSUMPTION_VIOLATED",
            AltOutcome::Indeterminate => "INDETERMINATE",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AltCertificate {
    pub outcome: AltOutcome,
    /// Simplex weights (statement II).
    pub lambda: Option<Vec<f64>>,
    /// Decomposition of `Σ λ_l f_{F_l}` in the original variables.
    pub sos: Option<SosCertificate>,
    /// Unit vector with every `F_l x^m < 0` (statement I).
    pub witness: Option<Vec<f64>>,
    /// `γ*` of `max γ s.t. Σλ_l F_l − γ·D is SOS, λ ∈ simplex`.
    pub margin: Option<f64>,
    /// Tensors (by index) failing the sign assumption.
    pub violations: Vec<usize>,
    pub notes: Vec<String>,
}

impl AltCertificate {
    fn bare(outcome: AltOutcome) -> Self {
        Self {
            outcome,
            lambda: None,
            sos: None,
            witness: None,
            margin: None,
            violations: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Re-checks whichever certificate is attached against the original
    /// tensors: the witness by evaluation, `λ` by the simplex condition and
    /// SOS reconstruction.
    pub fn validate(&self, tensors: &[SymmetricTensor]) -> bool {
        match self.outcome {
            AltOutcome::StatementI => self
                .witness
                .as_ref()
                .is_some_and(|x| max_value_tensors(tensors, x) < -WITNESS_TOL),
            AltOutcome::StatementII => {
                let (Some(lambda), Some(sos)) = (&self.lambda, &self.sos) else {
                    return false;
                };
                let simplex = lambda.iter().all(|&l| l >= 0.0)
                    && (lambda.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
                let Ok(target) = combination(tensors, lambda) else {
                    return false;
                };
                let recon = sos.reconstruction().max_coeff_diff(&target);
                simplex
                    && recon <= SosCertificate::tolerance_for(&target)
                    && sos.min_eigenvalue() >= -1e-7
            }
            _ => true,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AltSettings {
    pub sdp: SdpSettings,
    /// Decision threshold on `γ*`.
    pub tol: f64,
    /// Random starts for the fallback witness search.
    pub starts: usize,
    pub seed: u64,
}

impl Default for AltSettings {
    fn default() -> Self {
        Self {
            sdp: SdpSettings::default(),
            tol: 1e-6,
            starts: 64,
            seed: 0,
        }
    }
}

fn combination(tensors: &[SymmetricTensor], lambda: &[f64]) -> Result<Polynomial> {
    let n = tensors[0].dim();
    let mut acc = Polynomial::zero(n);
    for (t, &l) in tensors.iter().zip(lambda) {
        acc = acc.add_scaled(&Polynomial::from_tensor(t)?, l);
    }
    Ok(acc)
}

fn unit(x: &[f64]) -> Option<Vec<f64>> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (r > 0.0 && r.is_finite()).then(|| x.iter().map(|v| v / r).collect())
}

fn max_value_tensors(tensors: &[SymmetricTensor], x: &[f64]) -> f64 {
    let Some(u) = unit(x) else { return f64::INFINITY };
    tensors
        .iter()
        .map(|t| t.evaluate(&u).unwrap_or(f64::INFINITY))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn max_value(forms: &[Polynomial], x: &[f64]) -> f64 {
    let Some(u) = unit(x) else { return f64::INFINITY };
    forms
        .iter()
        .map(|f| f.eval_unchecked(&u))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `τ log Σ exp(f_l(x/‖x‖)/τ)` and its gradient, for forms of degree `m`.
fn softmax_on_sphere(forms: &[Polynomial], m: usize, tau: f64, x: &[f64]) -> (f64, Vec<f64>) {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 <= 1e-300 {
        return (f64::INFINITY, vec![0.0; x.len()]);
    }
    let rm = r2.powf(m as f64 / 2.0);
    let vals: Vec<f64> = forms.iter().map(|f| f.eval_unchecked(x) / rm).collect();
    let vmax = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = vals.iter().map(|v| ((v - vmax) / tau).exp()).collect();
    let wsum: f64 = weights.iter().sum();
    let value = vmax + tau * wsum.ln();
    let mut grad = vec![0.0; x.len()];
    for ((f, &v), &w) in forms.iter().zip(&vals).zip(&weights) {
        let g = f.gradient_unchecked(x);
        let w = w / wsum;
        for i in 0..x.len() {
            grad[i] += w * (g[i] / rm - m as f64 * v * x[i] / r2);
        }
    }
    (value, grad)
}

/// Smoothed descent on `max_l f_l(x/‖x‖)` with a decreasing temperature.
fn refine(forms: &[Polynomial], m: usize, x0: &[f64]) -> Vec<f64> {
    let scale = forms
        .iter()
        .map(|f| f.max_abs_coeff())
        .fold(1e-12, f64::max);
    let mut x = unit(x0).unwrap_or_else(|| x0.to_vec());
    for tau in [1e-1, 1e-2, 1e-3, 1e-4] {
        let t = tau * scale;
        let (xn, _) = bfgs(
            |z| softmax_on_sphere(forms, m, t, z),
            &x,
            BfgsSettings {
                max_iter: 100,
                grad_tol: 1e-12,
            },
        );
        if let Some(u) = unit(&xn) {
            if max_value(forms, &u) <= max_value(forms, &x) {
                x = u;
            }
        }
    }
    x
}

/// Tries to produce a unit `x` with every form negative, starting from the
/// given candidates and falling back to seeded random starts.
pub(crate) fn find_witness(
    forms: &[Polynomial],
    m: usize,
    candidates: &[Vec<f64>],
    starts: usize,
    seed: u64,
) -> Option<Vec<f64>> {
    let n = forms[0].dim();
    for c in candidates {
        if max_value(forms, c) < -WITNESS_TOL {
            return unit(c);
        }
        let x = refine(forms, m, c);
        if max_value(forms, &x) < -WITNESS_TOL {
            return Some(x);
        }
    }
    let results: Vec<(f64, usize, Vec<f64>)> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let x0: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let x = refine(forms, m, &x0);
            (max_value(forms, &x), k, x)
        })
        .collect();
    results
        .into_iter()
        .filter(|(v, _, _)| *v < -WITNESS_TOL)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, _, x)| x)
}

/// Candidates from the moment diagonal: the diagonal roots and, for small
/// `n`, all their sign patterns, best first.
fn moment_candidates(forms: &[Polynomial], roots: &[f64]) -> Vec<Vec<f64>> {
    let n = roots.len();
    let nonzero: Vec<usize> = (0..n).filter(|&i| roots[i] != 0.0).collect();
    if nonzero.is_empty() {
        return Vec::new();
    }
    let mut out = vec![roots.to_vec()];
    if nonzero.len() <= 10 {
        for mask in 1u32..(1 << nonzero.len()) {
            let mut x = roots.to_vec();
            for (b, &i) in nonzero.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    x[i] = -x[i];
                }
            }
            out.push(x);
        }
    }
    out.sort_by(|a, b| max_value(forms, a).total_cmp(&max_value(forms, b)));
    out.truncate(4);
    out
}

fn check_family(tensors: &[SymmetricTensor]) -> Result<(usize, usize)> {
    let first = tensors
        .first()
        .ok_or_else(|| Error::Precondition("at least one tensor is required".into()))?;
    let (m, n) = (first.order(), first.dim());
    for t in tensors {
        if t.order() != m {
            return Err(Error::OrderMismatch {
                expected: m,
                found: t.order(),
            });
        }
        if t.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.dim(),
            });
        }
    }
    Ok((m, n))
}

fn check_transform(p: &DMatrix<f64>, n: usize) -> Result<DMatrix<f64>> {
    if p.nrows() != n || p.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.nrows(),
        });
    }
    let sv = p.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(Error::Precondition(format!(
            "transformation is singular or ill-conditioned (condition number {:e})",
            smax / smin
        )));
    }
    // (P^T)^{-1}
    p.transpose()
        .try_inverse()
        .ok_or_else(|| Error::Singular("transformation matrix".into()))
}

/// `max γ s.t. Σ λ_l f_l − γ Σ x_i^m is SOS, Σ λ_l = 1, λ ≥ 0` for forms of
/// degree `m`; the variables are `λ_0..λ_p` followed by `γ`.
pub fn alternative_program(forms: &[Polynomial], m: usize) -> Result<SosProgram> {
    let n = forms
        .first()
        .ok_or_else(|| Error::Precondition("at least one form is required".into()))?
        .dim();
    let mut program = SosProgram::new(gram_basis(n, m, true)?, Polynomial::zero(n))?;
    for f in forms {
        program.add_variable(VarKind::Nonnegative, f.clone(), 0.0)?;
    }
    program.add_variable(VarKind::Free, shift_polynomial(n, m, true).scale(-1.0), 1.0)?;
    program.add_linear_equality((0..forms.len()).map(|l| (l, 1.0)).collect(), 1.0)?;
    Ok(program)
}

/// The semidefinite program solved by [`yuan_alternative`] (after `P`).
pub fn alternative_sdp(tensors: &[SymmetricTensor], p: Option<&DMatrix<f64>>) -> Result<SdpProblem> {
    let (m, n) = check_family(tensors)?;
    if let Some(p) = p {
        check_transform(p, n)?;
    }
    let forms = tensors
        .iter()
        .map(|t| match p {
            Some(p) => Polynomial::from_tensor(&t.transform(p)?),
            None => Polynomial::from_tensor(t),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(alternative_program(&forms, m)?.assemble()?.problem)
}

/// Decides the alternative for `F_0..F_p` after the change of variables `P`.
pub fn yuan_alternative(
    tensors: &[SymmetricTensor],
    p: Option<&DMatrix<f64>>,
    settings: &AltSettings,
) -> Result<AltCertificate> {
    let (m, n) = check_family(tensors)?;
    let p_inv_t = p.map(|p| check_transform(p, n)).transpose()?;

    let transformed: Vec<SymmetricTensor> = match p {
        Some(p) => tensors.iter().map(|t| t.transform(p)).collect::<Result<_>>()?,
        None => tensors.to_vec(),
    };
    let violations: Vec<usize> = transformed
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let tol = 1e-12 * t.max_abs_entry().max(1.0);
            !t.classify_essential_sign_tol(tol).allows_nonpositive()
        })
        .map(|(l, _)| l)
        .collect();
    if !violations.is_empty() {
        let mut cert = AltCertificate::bare(AltOutcome::AssumptionViolated);
        cert.notes.push(format!(
            "tensor(s) {} have positive off-diagonal entries after the transformation",
            violations
                .iter()
                .map(|l| format!("F_{l}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        cert.violations = violations;
        return Ok(cert);
    }

    let forms: Vec<Polynomial> = transformed
        .iter()
        .map(|t| {
            let f = Polynomial::from_tensor(t)?;
            Ok(f.pruned(1e-14 * f.max_abs_coeff().max(1.0)))
        })
        .collect::<Result<_>>()?;
    let basis = gram_basis(n, m, true)?;
    let d = shift_polynomial(n, m, true);
    let program = alternative_program(&forms, m)?;
    let gamma_var = forms.len();
    let sol = program.solve(&settings.sdp)?;
    let gamma = sol.theta[gamma_var];

    let mut cert = AltCertificate::bare(AltOutcome::Indeterminate);
    cert.margin = Some(gamma);
    if !sol.sdp.is_acceptable(1e-6) {
        cert.notes.push(format!("SDP solver stopped with status {:?}", sol.status()));
        return Ok(cert);
    }

    if gamma >= -settings.tol {
        let raw: Vec<f64> = sol.theta[..forms.len()].iter().map(|l| l.max(0.0)).collect();
        let total: f64 = raw.iter().sum();
        let lambda: Vec<f64> = raw.iter().map(|l| l / total).collect();
        let target_z = forms
            .iter()
            .zip(&lambda)
            .fold(Polynomial::zero(n), |acc, (f, &l)| acc.add_scaled(f, l));
        let gram = &sol.gram + basis.diagonal_gram(&d).expect("pure powers are squares") * gamma;
        let sos = SosCertificate::from_gram(&target_z, gram, basis.clone()).and_then(|c| match &p_inv_t {
            None => Ok(c),
            Some(pit) => {
                let squares = c
                    .squares
                    .iter()
                    .map(|g| g.substitute_linear(pit).map(|s| s.pruned(1e-15)))
                    .collect::<Result<Vec<_>>>()?;
                SosCertificate::from_squares(&combination(tensors, &lambda)?, squares, basis.clone())
            }
        });
        let target = combination(tensors, &lambda)?;
        match sos {
            Ok(c) if c.is_valid_for(&target) => {
                cert.outcome = AltOutcome::StatementII;
                cert.lambda = Some(lambda);
                cert.sos = Some(c);
            }
            Ok(c) => cert.notes.push(format!(
                "certificate residual {:e} exceeds tolerance at margin {gamma:e}",
                c.residual
            )),
            Err(e) => cert.notes.push(format!("certificate extraction failed: {e}")),
        }
        return Ok(cert);
    }

    let moments = &sol.moments;
    let candidates = match moments.diagonal_roots(1e-8) {
        Ok(roots) => moment_candidates(&forms, &roots),
        Err(e) => {
            cert.notes.push(format!("moment diagonal unusable: {e}"));
            Vec::new()
        }
    };
    match find_witness(&forms, m, &candidates, settings.starts, settings.seed) {
        Some(z) => {
            let x = match p {
                Some(p) => (p.transpose() * nalgebra::DVector::from_vec(z)).iter().copied().collect(),
                None => z,
            };
            let x = unit(&x).expect("witness is nonzero");
            if max_value_tensors(tensors, &x) < -WITNESS_TOL {
                cert.outcome = AltOutcome::StatementI;
                cert.witness = Some(x);
            } else {
                cert.notes.push("witness failed validation in the original variables".into());
            }
        }
        None => cert.notes.push(format!(
            "margin {gamma:e} indicates statement I but no witness was validated"
        )),
    }
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SLemmaOutcome {
    /// `F_0 + Σ λ_l F_l` is SOS with `λ ≥ 0`.
    Holds,
    /// Some `x` has `F_l x^m ≤ 0` for `l ≥ 1` but `F_0 x^m < 0`.
    Violated,
    AssumptionViolated,
    Indeterminate,
}

#[derive(Clone, Debug)]
pub struct SLemmaResult {
    pub outcome: SLemmaOutcome,
    /// Multipliers for `F_1..F_p`.
    pub lambda: Option<Vec<f64>>,
    pub certificate: Option<SosCertificate>,
    pub violator: Option<Vec<f64>>,
    pub alternative: AltCertificate,
    pub notes: Vec<String>,
}

/// Homogeneous S-lemma: `F_l x^m ≤ 0 (l ≥ 1) ⇒ F_0 x^m ≥ 0` holds iff
/// `F_0 + Σ λ_l F_l` is SOS for some `λ ≥ 0`, given a Slater point `x0`.
pub fn s_lemma(
    f0: &SymmetricTensor,
    constraints: &[SymmetricTensor],
    x0: &[f64],
    p: Option<&DMatrix<f64>>,
    settings: &AltSettings,
) -> Result<SLemmaResult> {
    for (l, t) in constraints.iter().enumerate() {
        let v = t.evaluate(x0)?;
        if v >= 0.0 {
            return Err(Error::Precondition(format!(
                "Slater point fails: F_{} at x0 equals {v}",
                l + 1
            )));
        }
    }
    let mut all = vec![f0.clone()];
    all.extend_from_slice(constraints);
    let alt = yuan_alternative(&all, p, settings)?;
    let mut result = SLemmaResult {
        outcome: SLemmaOutcome::Indeterminate,
        lambda: None,
        certificate: None,
        violator: None,
        alternative: alt.clone(),
        notes: Vec::new(),
    };
    match alt.outcome {
        AltOutcome::AssumptionViolated => result.outcome = SLemmaOutcome::AssumptionViolated,
        AltOutcome::Indeterminate => result.notes.extend(alt.notes.iter().cloned()),
        AltOutcome::StatementI => {
            result.outcome = SLemmaOutcome::Violated;
            result.violator = alt.witness.clone();
        }
        AltOutcome::StatementII => {
            let lam = alt.lambda.as_ref().expect("statement II carries weights");
            let l0 = lam[0];
            if l0 <= settings.tol {
                result.notes.push(format!(
                    "weight on F_0 is {l0:e}, which contradicts the Slater point"
                ));
            } else {
                let lambda: Vec<f64> = lam[1..].iter().map(|l| l / l0).collect();
                let mut weights = vec![1.0];
                weights.extend_from_slice(&lambda);
                let target = combination(&all, &weights)?;
                let sos = alt.sos.as_ref().expect("statement II carries a certificate");
                let c = sos.scaled_for(1.0 / l0, &target);
                if c.is_valid_for(&target) {
                    result.outcome = SLemmaOutcome::Holds;
                    result.lambda = Some(lambda);
                    result.certificate = Some(c);
                } else {
                    result.notes.push(format!("rescaled certificate residual {:e}", c.residual));
                }
            }
        }
    }
    Ok(result)
}

/// The order-2 tensor of a symmetric matrix.
pub fn matrix_to_tensor(a: &DMatrix<f64>) -> Result<SymmetricTensor> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    let mut t = SymmetricTensor::zeros(2, n)?;
    for i in 0..n {
        for j in i..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            if v != 0.0 {
                t.set(Exponent::unit(n, i).add(&Exponent::unit(n, j)), v)?;
            }
        }
    }
    Ok(t)
}

/// Matrix case: either some `x` has every `x^T A_l x < 0`, or a convex
/// combination of the `A_l` is PSD. `Q` is the congruence making every
/// `Q^T A_l Q` a Z-matrix.
pub fn matrix_alternative(
    mats: &[DMatrix<f64>],
    q: Option<&DMatrix<f64>>,
    settings: &AltSettings,
) -> Result<AltCertificate> {
    let tensors: Vec<SymmetricTensor> = mats.iter().map(matrix_to_tensor).collect::<Result<_>>()?;
    let p = q.map(|q| q.transpose());
    let mut cert = yuan_alternative(&tensors, p.as_ref(), settings)?;
    if cert.outcome == AltOutcome::StatementII {
        let lambda = cert.lambda.as_ref().expect("statement II carries weights");
        let n = mats[0].nrows();
        let mut sum = DMatrix::zeros(n, n);
        for (a, &l) in mats.iter().zip(lambda) {
            sum += a * l;
        }
        let lmin = sum.symmetric_eigenvalues().min();
        cert.notes.push(format!("min eigenvalue of the combination: {lmin:e}"));
        if lmin < -1e-8 {
            cert.outcome = AltOutcome::Indeterminate;
            cert.notes.push("eigenvalue cross-check failed".into());
        }
    }
    Ok(cert)
}

//! Polynomial optimization with essentially nonpositive coefficients.
//!
//! Problem (P): `min f_0(x) s.t. f_l(x) ≤ 0, l = 1..p`, where every `f_l` has
//! degree at most `m` and nonpositive coefficients outside the constant term
//! and the pure powers `x_i^m`. For such problems the first SOS relaxation
//!
//! ```text
//!   max μ  s.t.  f_0 + Σ λ_l f_l − μ = σ_0,  λ ≥ 0,  σ_0 SOS, deg σ_0 ≤ m
//! ```
//!
//! is exact, and a minimizer is read off the dual moments as
//! `x̄_i = y_{m e_i}^{1/m}`. [`solve_exact_sos`] solves the relaxation,
//! recovers and validates `x̄`, and compares against [`oracle_minimize`], an
//! independent multi-start local search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multiindex::Exponent;
use crate::optim::{bfgs, BfgsSettings};
use crate::poly::Polynomial;
use crate::sdp::{SdpProblem, SdpSettings, SdpStatus};
use crate::sos::{gram_basis, MomentVector, SosCertificate, SosProgram, VarKind};
use crate::tensor::SymmetricTensor;

/// Feasibility tolerance for validated minimizers.
pub const FEAS_TOL: f64 = 1e-6;
/// Feasibility tolerance for oracle points.
pub const ORACLE_FEAS_TOL: f64 = 1e-8;
/// `μ*` above `oracle + UNBOUNDED_CAP·(1 + |oracle|)` is treated as divergence.
pub const UNBOUNDED_CAP: f64 = 1e3;

#[derive(Clone, Debug, PartialEq)]
pub struct PopInstance {
    m: usize,
    objective: Polynomial,
    constraints: Vec<Polynomial>,
    slater: Option<Vec<f64>>,
    enp_checked: bool,
}

impl PopInstance {
    /// Builds (P), rejecting polynomials without ENP coefficients.
    pub fn new(objective: Polynomial, constraints: Vec<Polynomial>, m: usize) -> Result<Self> {
        let inst = Self::new_unchecked(objective, constraints, m)?;
        let offenders = inst.enp_violations();
        if let Some((l, exps)) = offenders.first() {
            let list: Vec<String> = exps.iter().map(|e| e.to_string()).collect();
            return Err(Error::Precondition(format!(
                "f_{l} has positive coefficients at {} (not essentially nonpositive)",
                list.join(", ")
            )));
        }
        Ok(Self {
            enp_checked: true,
            ..inst
        })
    }

    /// Builds (P) without the sign check; only shape is validated.
    pub fn new_unchecked(objective: Polynomial, constraints: Vec<Polynomial>, m: usize) -> Result<Self> {
        if m == 0 || !m.is_multiple_of(2) {
            return Err(Error::InvalidOrder(m));
        }
        let n = objective.dim();
        for f in std::iter::once(&objective).chain(&constraints) {
            if f.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: f.dim(),
                });
            }
            if f.degree() > m {
                return Err(Error::DegreeTooHigh {
                    degree: f.degree(),
                    max: m,
                });
            }
        }
        Ok(Self {
            m,
            objective,
            constraints,
            slater: None,
            enp_checked: false,
        })
    }

    pub fn with_slater_point(mut self, x0: Vec<f64>) -> Result<Self> {
        if x0.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x0.len(),
            });
        }
        self.slater = Some(x0);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn objective(&self) -> &Polynomial {
        &self.objective
    }

    pub fn constraints(&self) -> &[Polynomial] {
        &self.constraints
    }

    pub fn slater_point(&self) -> Option<&[f64]> {
        self.slater.as_deref()
    }

    /// Whether the constructor enforced the ENP condition.
    pub fn enp_checked(&self) -> bool {
        self.enp_checked
    }

    /// `(l, offending exponents)` for every `f_l` failing the ENP condition,
    /// with `l = 0` the objective.
    pub fn enp_violations(&self) -> Vec<(usize, Vec<Exponent>)> {
        std::iter::once(&self.objective)
            .chain(&self.constraints)
            .enumerate()
            .map(|(l, f)| (l, f.enp_violations(self.m as u32)))
            .filter(|(_, v)| !v.is_empty())
            .collect()
    }

    pub fn is_enp(&self) -> bool {
        self.enp_violations().is_empty()
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|g| g.eval_unchecked(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.constraints.is_empty() || self.max_violation(x) <= tol
    }

    fn is_strictly_feasible(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|g| g.eval_unchecked(x) < 0.0)
    }

    /// Coordinates of the box used for random starts: for each variable, the
    /// largest `(|c| / a)^{1/m}` over constraints `a x_i^m + … + c`, padded.
    fn search_radius(&self) -> Vec<f64> {
        let n = self.dim();
        let m = self.m as u32;
        (0..n)
            .map(|i| {
                let mut r: f64 = 0.0;
                for g in &self.constraints {
                    let a = g.coeff(&Exponent::pure_power(n, i, m));
                    let c = g.constant_term();
                    if a > 0.0 && c < 0.0 {
                        r = r.max((-c / a).powf(1.0 / m as f64));
                    }
                }
                if r > 0.0 {
                    1.2 * r
                } else {
                    2.0
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validation {
    ExactSolutionRecovered,
    BoundOnly,
    Unbounded,
    Indeterminate,
}

impl Validation {
    pub fn label(self) -> &'static str {
        match self {
            Validation::ExactSolutionRecovered => "EXACT",
            Validation::BoundOnly => "BOUND_ONLY",
            Validation::Unbounded => "UNBOUNDED",
            Validation::Indeterminate => "INDETERMINATE",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleBudget {
    pub starts: usize,
    /// Grid step for an exhaustive scan (used only for `n ≤ 3`).
    pub grid: Option<f64>,
    pub seed: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            starts: 64,
            grid: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Best feasible point and its objective value.
    pub best: Option<(Vec<f64>, f64)>,
    pub starts: usize,
    pub grid_points: usize,
}

impl OracleResult {
    pub fn value(&self) -> Option<f64> {
        self.best.as_ref().map(|(_, v)| *v)
    }

    pub fn point(&self) -> Option<&[f64]> {
        self.best.as_ref().map(|(x, _)| x.as_slice())
    }
}

#[derive(Clone, Debug)]
pub struct PopSettings {
    pub sdp: SdpSettings,
    pub oracle: OracleBudget,
    /// Run the oracle as part of [`solve_exact_sos`].
    pub run_oracle: bool,
}

impl Default for PopSettings {
    fn default() -> Self {
        Self {
            sdp: SdpSettings::default(),
            oracle: OracleBudget::default(),
            run_oracle: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlaterEvidence {
    /// The supplied point is strictly feasible.
    Supplied,
    /// The supplied point is not strictly feasible.
    SuppliedInvalid,
    /// A strictly feasible point was found by the oracle.
    Found,
    NotFound,
    /// No constraints.
    NotNeeded,
}

#[derive(Clone, Debug)]
pub struct PopReport {
    /// `μ*`, a lower bound on min (P) whenever the SDP converged.
    pub bound: f64,
    pub multipliers: Vec<f64>,
    /// Decomposition of `f_0 + Σ λ_l f_l − μ*`.
    pub sigma: Option<SosCertificate>,
    /// Dual moments normalized to `y_0 = 1`.
    pub moments: MomentVector,
    pub recovered: Option<Vec<f64>>,
    pub validation: Validation,
    pub oracle: Option<OracleResult>,
    /// The oracle found a feasible value above the bound by more than the
    /// validation tolerance: the relaxation is not exact here.
    pub gap: bool,
    pub slater: SlaterEvidence,
    pub sdp_status: SdpStatus,
    pub sdp_iterations: usize,
    pub notes: Vec<String>,
    pub problem: SdpProblem,
}

impl PopReport {
    pub fn oracle_value(&self) -> Option<f64> {
        self.oracle.as_ref().and_then(|o| o.value())
    }
}

fn objective_tol(bound: f64) -> f64 {
    1e-4 * (1.0 + bound.abs())
}

/// ExactSolutionRecovered iff `x` is feasible to `1e-6` and
/// `f_0(x) ≤ μ* + 1e-4·(1+|μ*|)`.
pub fn validate_solution(inst: &PopInstance, x: &[f64], bound: f64) -> Validation {
    if x.len() == inst.dim()
        && x.iter().all(|v| v.is_finite())
        && inst.is_feasible(x, FEAS_TOL)
        && inst.objective.eval_unchecked(x) <= bound + objective_tol(bound)
    {
        Validation::ExactSolutionRecovered
    } else {
        Validation::BoundOnly
    }
}

/// Indices of variables that appear with an odd exponent somewhere.
fn odd_variables(inst: &PopInstance) -> Vec<usize> {
    (0..inst.dim())
        .filter(|&i| {
            std::iter::once(&inst.objective)
                .chain(&inst.constraints)
                .any(|f| f.terms().any(|(a, _)| a.get(i) % 2 == 1))
        })
        .collect()
}

/// Solves the SOS relaxation, recovers a minimizer from the moments and
/// validates it.
pub fn solve_exact_sos(inst: &PopInstance, settings: &PopSettings) -> Result<PopReport> {
    let n = inst.dim();
    let basis = gram_basis(n, inst.m, false)?;
    let mut program = SosProgram::new(basis.clone(), inst.objective.clone())?;
    for g in &inst.constraints {
        program.add_variable(VarKind::Nonnegative, g.clone(), 0.0)?;
    }
    let mu_var = program.add_variable(VarKind::Free, Polynomial::constant(n, -1.0), 1.0)?;
    let assembled = program.assemble()?;
    let problem = assembled.problem.clone();
    let sol = program.solve(&settings.sdp)?;
    let bound = sol.theta[mu_var];
    let multipliers: Vec<f64> = sol.theta[..inst.constraints.len()]
        .iter()
        .map(|l| l.max(0.0))
        .collect();
    let mut notes = Vec::new();

    let y0 = sol.moments.normalization();
    let moments = if y0.abs() > 1e-12 {
        sol.moments.scaled(1.0 / y0)
    } else {
        notes.push(format!("moment normalization y_0 = {y0:e}"));
        sol.moments.clone()
    };

    let sigma_target = inst
        .constraints
        .iter()
        .zip(&multipliers)
        .fold(inst.objective.clone(), |acc, (g, &l)| acc.add_scaled(g, l))
        .add_scaled(&Polynomial::constant(n, 1.0), -bound);
    let sigma = match SosCertificate::from_gram(&sigma_target, sol.gram.clone(), basis.clone()) {
        Ok(c) => {
            if !c.is_valid_for(&sigma_target) {
                notes.push(format!("SOS certificate residual {:e}", c.residual));
            }
            Some(c)
        }
        Err(e) => {
            notes.push(format!("SOS certificate unavailable: {e}"));
            None
        }
    };

    let oracle = settings
        .run_oracle
        .then(|| oracle_minimize(inst, &settings.oracle));
    let oracle_value = oracle.as_ref().and_then(|o| o.value());

    let slater = if inst.constraints.is_empty() {
        SlaterEvidence::NotNeeded
    } else if let Some(x0) = &inst.slater {
        if inst.is_strictly_feasible(x0) {
            SlaterEvidence::Supplied
        } else {
            SlaterEvidence::SuppliedInvalid
        }
    } else if inst.is_strictly_feasible(&vec![0.0; n])
        || oracle
            .as_ref()
            .and_then(|o| o.point())
            .is_some_and(|x| inst.is_strictly_feasible(x))
    {
        SlaterEvidence::Found
    } else {
        SlaterEvidence::NotFound
    };
    if matches!(slater, SlaterEvidence::NotFound | SlaterEvidence::SuppliedInvalid) {
        notes.push("no strictly feasible point confirmed; the bound remains valid".into());
    }

    let mut report = PopReport {
        bound,
        multipliers,
        sigma,
        moments,
        recovered: None,
        validation: Validation::BoundOnly,
        oracle,
        gap: false,
        slater,
        sdp_status: sol.status(),
        sdp_iterations: sol.sdp.iterations,
        notes,
        problem,
    };

    let diverged = sol.status() == SdpStatus::DualInfeasibleLikely
        || oracle_value.is_some_and(|v| bound > v + UNBOUNDED_CAP * (1.0 + v.abs()));
    if diverged {
        report.validation = Validation::Unbounded;
        report.notes.push("relaxation appears unbounded (empty feasible set?)".into());
        return Ok(report);
    }
    if !sol.sdp.is_acceptable(1e-6) {
        report.validation = Validation::Indeterminate;
        report
            .notes
            .push(format!("SDP solver stopped with status {:?}", sol.status()));
        return Ok(report);
    }

    report.recovered = recover_minimizer(inst, &report.moments, bound, &mut report.notes);
    if let Some(x) = &report.recovered {
        report.validation = validate_solution(inst, x, bound);
    }
    if let Some(v) = oracle_value {
        report.gap = v - bound > objective_tol(bound);
        if bound > v + 1e-6 * (1.0 + v.abs()) {
            report
                .notes
                .push(format!("bound {bound} exceeds the oracle value {v}"));
        }
    }
    Ok(report)
}

/// Diagonal roots of the moments, then sign patterns, then local descent.
/// Returns the first validated point, or the raw diagonal roots.
fn recover_minimizer(
    inst: &PopInstance,
    moments: &MomentVector,
    bound: f64,
    notes: &mut Vec<String>,
) -> Option<Vec<f64>> {
    let roots = match moments.diagonal_roots(1e-8) {
        Ok(r) => r,
        Err(e) => {
            notes.push(format!("moment diagonal unusable: {e}"));
            return None;
        }
    };
    let anchors = anchor_points(inst, None);
    if validate_solution(inst, &roots, bound) == Validation::ExactSolutionRecovered {
        return Some(polish(inst, roots, bound, &anchors));
    }
    let odd: Vec<usize> = odd_variables(inst)
        .into_iter()
        .filter(|&i| roots[i] != 0.0)
        .collect();
    if odd.len() <= 12 {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 1u32..(1 << odd.len()) {
            let mut x = roots.clone();
            for (b, &i) in odd.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    x[i] = -x[i];
                }
            }
            if validate_solution(inst, &x, bound) == Validation::ExactSolutionRecovered {
                let v = inst.objective.eval_unchecked(&x);
                if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                    best = Some((v, x));
                }
            }
        }
        if let Some((_, x)) = best {
            return Some(polish(inst, x, bound, &anchors));
        }
    }
    if let Some(x) = local_solve(inst, &roots, &anchors) {
        if validate_solution(inst, &x, bound) == Validation::ExactSolutionRecovered {
            notes.push("minimizer refined by local descent from the moment point".into());
            return Some(x);
        }
    }
    notes.push("moment point did not validate".into());
    Some(roots)
}

/// The conic program (CP): homogenized tensors `F̃_0..F̃_p` in `n + 1`
/// variables, minimized as `⟨F̃_0, X⟩` over `X` in the cone of sums of
/// rank-one tensors `x^{⊗m}` with `X(m·e_{n+1}) = 1` and `⟨F̃_l, X⟩ ≤ 0`.
#[derive(Clone, Debug)]
pub struct ConicRelaxation {
    pub tensors: Vec<SymmetricTensor>,
    /// The entry fixed to 1: `m·e_{n+1}`.
    pub normalization: Exponent,
    pub note: &'static str,
}

pub fn build_conic_relaxation(inst: &PopInstance) -> Result<ConicRelaxation> {
    let tensors = std::iter::once(&inst.objective)
        .chain(&inst.constraints)
        .map(|f| f.homogenize(inst.m)?.to_tensor(inst.m))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConicRelaxation {
        tensors,
        normalization: Exponent::pure_power(inst.dim() + 1, inst.dim(), inst.m as u32),
        note: "membership in the rank-one cone is outer-approximated by the moment SDP dual to the SOS relaxation; the conic program itself is not solved",
    })
}

// ---------------------------------------------------------------------------
// oracle

/// Strictly feasible or feasible points used to repair infeasible iterates.
fn anchor_points(inst: &PopInstance, extra: Option<&[f64]>) -> Vec<Vec<f64>> {
    let n = inst.dim();
    let mut out = Vec::new();
    if let Some(x0) = &inst.slater {
        if inst.is_feasible(x0, 0.0) {
            out.push(x0.clone());
        }
    }
    let zero = vec![0.0; n];
    if inst.is_feasible(&zero, 0.0) {
        out.push(zero);
    }
    if let Some(x) = extra {
        if inst.is_feasible(x, 0.0) {
            out.push(x.to_vec());
        }
    }
    out
}

/// Moves `x` toward a feasible anchor until every constraint is `≤ 0`.
fn repair(inst: &PopInstance, x: &[f64], anchors: &[Vec<f64>]) -> Option<Vec<f64>> {
    if inst.is_feasible(x, 0.0) {
        return Some(x.to_vec());
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for a in anchors {
        let at = |t: f64| -> Vec<f64> { a.iter().zip(x).map(|(ai, xi)| ai + t * (xi - ai)).collect() };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inst.is_feasible(&at(mid), 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = at(lo);
        let v = inst.objective.eval_unchecked(&p);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, p));
        }
    }
    best.map(|(_, p)| p)
}

/// Augmented Lagrangian with BFGS inner solves from `x0`, followed by
/// feasibility repair. Returns a point feasible to [`ORACLE_FEAS_TOL`].
/// Local descent from an already validated point. The result is feasible
/// to the oracle tolerance, so it replaces `x` whenever it still validates.
fn polish(inst: &PopInstance, x: Vec<f64>, bound: f64, anchors: &[Vec<f64>]) -> Vec<f64> {
    match local_solve(inst, &x, anchors) {
        Some(y) if validate_solution(inst, &y, bound) == Validation::ExactSolutionRecovered => y,
        _ => x,
    }
}

fn local_solve(inst: &PopInstance, x0: &[f64], anchors: &[Vec<f64>]) -> Option<Vec<f64>> {
    let p = inst.constraints.len();
    let f0 = &inst.objective;
    let scale = 1.0 + f0.max_abs_coeff();
    let mut x = x0.to_vec();
    let mut nu = vec![0.0; p];
    let mut rho = 10.0 * scale;
    let inner = BfgsSettings {
        max_iter: 200,
        grad_tol: 1e-12,
    };
    let mut last_violation = f64::INFINITY;
    let outer = if p == 0 { 1 } else { 25 };
    for _ in 0..outer {
        let (nu_c, rho_c) = (nu.clone(), rho);
        let lagrangian = |z: &[f64]| -> (f64, Vec<f64>) {
            let mut v = f0.eval_unchecked(z);
            let mut g = f0.gradient_unchecked(z);
            for (l, c) in inst.constraints.iter().enumerate() {
                let s = nu_c[l] + rho_c * c.eval_unchecked(z);
                if s > 0.0 {
                    v += (s * s - nu_c[l] * nu_c[l]) / (2.0 * rho_c);
                    for (gi, ci) in g.iter_mut().zip(c.gradient_unchecked(z)) {
                        *gi += s * ci;
                    }
                } else {
                    v -= nu_c[l] * nu_c[l] / (2.0 * rho_c);
                }
            }
            (v, g)
        };
        let (xn, val) = bfgs(lagrangian, &x, inner);
        if !val.is_finite() || xn.iter().any(|v| !v.is_finite()) {
            break;
        }
        x = xn;
        if p == 0 {
            break;
        }
        let viol = inst.max_violation(&x).max(0.0);
        for (l, c) in inst.constraints.iter().enumerate() {
            nu[l] = (nu[l] + rho * c.eval_unchecked(&x)).max(0.0);
        }
        if viol <= 1e-12 {
            break;
        }
        if viol > 0.25 * last_violation {
            rho = (rho * 4.0).min(1e12);
        }
        last_violation = viol;
    }
    if inst.is_feasible(&x, ORACLE_FEAS_TOL) {
        return Some(x);
    }
    repair(inst, &x, anchors)
}

fn grid_scan(inst: &PopInstance, step: f64, radius: &[f64]) -> (Option<(Vec<f64>, f64)>, usize) {
    let n = inst.dim();
    let axes: Vec<Vec<f64>> = radius
        .iter()
        .map(|&r| {
            let k = (r / step).floor() as i64;
            (-k..=k).map(|i| i as f64 * step).collect()
        })
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut count = 0usize;
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    'outer: loop {
        for i in 0..n {
            x[i] = axes[i][idx[i]];
        }
        count += 1;
        if inst.is_feasible(&x, ORACLE_FEAS_TOL) {
            let v = inst.objective.eval_unchecked(&x);
            if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                best = Some((x.clone(), v));
            }
        }
        for i in 0..n {
            idx[i] += 1;
            if idx[i] < axes[i].len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    (best, count)
}

/// Multi-start local search for min (P): seeded random starts in a box
/// scaled by the constraint data, plus an optional grid scan for `n ≤ 3`.
/// Deterministic for a fixed seed.
pub fn oracle_minimize(inst: &PopInstance, budget: &OracleBudget) -> OracleResult {
    let n = inst.dim();
    let radius = inst.search_radius();
    let (grid_best, grid_points) = match budget.grid {
        Some(step) if n <= 3 && step > 0.0 => grid_scan(inst, step, &radius),
        _ => (None, 0),
    };
    let anchors = anchor_points(inst, grid_best.as_ref().map(|(x, _)| x.as_slice()));

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(budget.starts + 2);
    if let Some((x, _)) = &grid_best {
        starts.push(x.clone());
    }
    starts.extend(anchors.iter().cloned());
    let fixed = starts.len();
    let seeded: Vec<Vec<f64>> = (0..budget.starts)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(k as u64));
            radius.iter().map(|&r| rng.random_range(-r..=r)).collect()
        })
        .collect();
    starts.extend(seeded);

    let results: Vec<(usize, Option<(Vec<f64>, f64)>)> = starts
        .par_iter()
        .enumerate()
        .map(|(k, x0)| {
            let x = local_solve(inst, x0, &anchors);
            (k, x.map(|x| {
                let v = inst.objective.eval_unchecked(&x);
                (x, v)
            }))
        })
        .collect();
    let mut best = grid_best;
    for (_, r) in results.into_iter() {
        if let Some((x, v)) = r {
            if v.is_finite()
                && inst.is_feasible(&x, ORACLE_FEAS_TOL)
                && best.as_ref().is_none_or(|(_, bv)| v < *bv)
            {
                best = Some((x, v));
            }
        }
    }
    OracleResult {
        best,
        starts: fixed + budget.starts,
        grid_points,
    }
}

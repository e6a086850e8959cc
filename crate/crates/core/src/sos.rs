//! Sum-of-squares programs via Gram matrices.
//!
//! A polynomial `f` of degree `≤ m` is SOS iff `f(x) = z(x)^T Q z(x)` for some
//! `Q ⪰ 0`, where `z` collects the monomials of degree `≤ m/2` (exactly `m/2`
//! for forms). An [`SosProgram`] asks for such a `Q` for an affine family
//! `f(θ) = f_base + Σ θ_j f_j` while optimizing a linear objective in `θ`, and
//! compiles to an [`SdpProblem`] with one coefficient-matching row per
//! exponent. The dual multipliers of those rows form a [`MomentVector`].

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::multiindex::{enumerate_monomials, Exponent, MonomialMode};
use crate::poly::Polynomial;
use crate::sdp::{self, SdpProblem, SdpSettings, SdpSolution, SdpStatus, SparseBlockMatrix};

/// Gram eigenvalues below `-GRAM_CLAMP_LIMIT` (relative) are rejected.
pub const GRAM_CLAMP_LIMIT: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct GramBasis {
    dim: usize,
    degree: u32,
    homogeneous: bool,
    monomials: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

impl GramBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The polynomial degree `m` the basis is built for.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Exponent] {
        &self.monomials
    }

    pub fn position(&self, beta: &Exponent) -> Option<usize> {
        self.index.get(beta).copied()
    }

    /// Exponents reachable as `β + γ`, i.e. the coefficient rows of an SOS
    /// program over this basis.
    pub fn coefficient_exponents(&self) -> Vec<Exponent> {
        let mode = if self.homogeneous {
            MonomialMode::Exact
        } else {
            MonomialMode::UpTo
        };
        enumerate_monomials(self.dim, self.degree, mode)
    }

    /// `z(x)` evaluated at a point.
    pub fn evaluate(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.monomials.iter().map(|b| b.monomial_value(x)))
    }

    /// The polynomial `z^T Q z`.
    pub fn quadratic_form(&self, q: &DMatrix<f64>) -> Polynomial {
        let mut p = Polynomial::zero(self.dim);
        for (i, bi) in self.monomials.iter().enumerate() {
            for (j, bj) in self.monomials.iter().enumerate() {
                let v = q[(i, j)];
                if v != 0.0 {
                    p.add_term(bi.add(bj), v);
                }
            }
        }
        p
    }

    /// A diagonal Gram matrix for a polynomial supported on the squares
    /// `x^{2β}` of basis monomials.
    pub fn diagonal_gram(&self, f: &Polynomial) -> Option<DMatrix<f64>> {
        let mut q = DMatrix::zeros(self.len(), self.len());
        for (alpha, c) in f.terms() {
            if !alpha.is_even() {
                return None;
            }
            let half = Exponent::new(alpha.as_slice().iter().map(|a| a / 2).collect());
            q[(self.position(&half)?, self.position(&half)?)] = c;
        }
        Some(q)
    }
}

/// Exponents of degree exactly `m/2` (homogeneous) or at most `m/2`, grlex.
pub fn gram_basis(n: usize, m: usize, homogeneous: bool) -> Result<GramBasis> {
    if !m.is_multiple_of(2) || n == 0 {
        return Err(Error::InvalidOrder(m));
    }
    let mode = if homogeneous {
        MonomialMode::Exact
    } else {
        MonomialMode::UpTo
    };
    let monomials = enumerate_monomials(n, (m / 2) as u32, mode);
    let index = monomials
        .iter()
        .enumerate()
        .map(|(i, b)| (b.clone(), i))
        .collect();
    Ok(GramBasis {
        dim: n,
        degree: m as u32,
        homogeneous,
        monomials,
        index,
    })
}

#[derive(Clone, Debug)]
pub struct SosCertificate {
    pub gram: DMatrix<f64>,
    pub basis: GramBasis,
    pub squares: Vec<Polynomial>,
    /// `max_α |f_α − (Σ g_j²)_α|`
    pub residual: f64,
}

impl SosCertificate {
    /// Builds a certificate for `f` from a Gram matrix, checking the
    /// reconstruction against `1e-6·(1 + max|f_α|)`.
    pub fn from_gram(f: &Polynomial, gram: DMatrix<f64>, basis: GramBasis) -> Result<Self> {
        let squares = extract_decomposition(&gram, &basis)?;
        let residual = reconstruct(&squares, f.dim()).max_coeff_diff(f);
        Ok(Self {
            gram,
            basis,
            squares,
            residual,
        })
    }

    /// Certificate from explicit squares `g_j`, each expressed in `basis`;
    /// the Gram matrix is `Σ v_j v_j^T` for the coefficient vectors `v_j`.
    pub fn from_squares(f: &Polynomial, squares: Vec<Polynomial>, basis: GramBasis) -> Result<Self> {
        let k = basis.len();
        let mut gram = DMatrix::zeros(k, k);
        for g in &squares {
            let mut v = DVector::zeros(k);
            for (alpha, c) in g.terms() {
                let pos = basis.position(alpha).ok_or_else(|| {
                    Error::Precondition(format!("square has monomial {alpha} outside the Gram basis"))
                })?;
                v[pos] = c;
            }
            gram += &v * v.transpose();
        }
        let residual = reconstruct(&squares, f.dim()).max_coeff_diff(f);
        Ok(Self {
            gram,
            basis,
            squares,
            residual,
        })
    }

    /// The same decomposition scaled by `s ≥ 0`, checked against `f`.
    pub fn scaled_for(&self, s: f64, f: &Polynomial) -> Self {
        let r = s.sqrt();
        let squares: Vec<Polynomial> = self.squares.iter().map(|g| g.scale(r)).collect();
        let residual = reconstruct(&squares, f.dim()).max_coeff_diff(f);
        Self {
            gram: &self.gram * s,
            basis: self.basis.clone(),
            squares,
            residual,
        }
    }

    pub fn tolerance_for(f: &Polynomial) -> f64 {
        1e-6 * (1.0 + f.max_abs_coeff())
    }

    pub fn is_valid_for(&self, f: &Polynomial) -> bool {
        self.residual <= Self::tolerance_for(f) && self.min_eigenvalue() >= -1e-7
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.gram.is_empty() {
            return 0.0;
        }
        self.gram.clone().symmetric_eigenvalues().min()
    }

    pub fn reconstruction(&self) -> Polynomial {
        reconstruct(&self.squares, self.basis.dim())
    }
}

fn reconstruct(squares: &[Polynomial], dim: usize) -> Polynomial {
    squares
        .iter()
        .fold(Polynomial::zero(dim), |acc, g| acc.add(&g.square()))
}

/// `Q = Σ ω_j v_j v_j^T` ↦ `g_j = √ω_j · (v_j · z)`. Slightly negative
/// eigenvalues are clamped; eigenvalues below `-1e-5·max(1, ‖Q‖)` are an error.
pub fn extract_decomposition(gram: &DMatrix<f64>, basis: &GramBasis) -> Result<Vec<Polynomial>> {
    if gram.nrows() != basis.len() || gram.ncols() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: gram.nrows(),
        });
    }
    let mut sym = gram.clone();
    let t = sym.transpose();
    sym += t;
    sym *= 0.5;
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    let min = eig.eigenvalues.min();
    if min < -GRAM_CLAMP_LIMIT * scale {
        return Err(Error::BadGram(min));
    }
    let mut squares = Vec::new();
    for (j, &w) in eig.eigenvalues.iter().enumerate() {
        if w <= 1e-13 * scale {
            continue;
        }
        let v = eig.eigenvectors.column(j);
        let sw = w.sqrt();
        let g = Polynomial::from_terms(
            basis.dim(),
            basis
                .monomials()
                .iter()
                .zip(v.iter())
                .filter(|(_, &c)| c != 0.0)
                .map(|(b, &c)| (b.clone(), sw * c)),
        )?;
        squares.push(g);
    }
    Ok(squares)
}

/// Linear functional `y` on polynomials of degree `≤ m`, indexed by exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    dim: usize,
    degree: u32,
    values: BTreeMap<Exponent, f64>,
}

impl MomentVector {
    pub fn new(dim: usize, degree: u32, values: BTreeMap<Exponent, f64>) -> Self {
        Self {
            dim,
            degree,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn get(&self, alpha: &Exponent) -> f64 {
        self.values.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> impl Iterator<Item = (&Exponent, f64)> + '_ {
        self.values.iter().map(|(a, &v)| (a, v))
    }

    /// `y_0`, the value on the constant monomial.
    pub fn normalization(&self) -> f64 {
        self.get(&Exponent::zero(self.dim))
    }

    /// `⟨y, f⟩ = Σ_α y_α f_α`.
    pub fn pairing(&self, f: &Polynomial) -> f64 {
        f.terms().map(|(a, c)| c * self.get(a)).sum()
    }

    /// `M(y)_{βγ} = y_{β+γ}` over a basis.
    pub fn moment_matrix(&self, basis: &GramBasis) -> DMatrix<f64> {
        let ms = basis.monomials();
        DMatrix::from_fn(ms.len(), ms.len(), |i, j| self.get(&ms[i].add(&ms[j])))
    }

    pub fn min_eigenvalue(&self, basis: &GramBasis) -> f64 {
        self.moment_matrix(basis).symmetric_eigenvalues().min()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            values: self.values.iter().map(|(a, v)| (a.clone(), v * s)).collect(),
        }
    }

    /// `(y_{m e_1}^{1/m}, …, y_{m e_n}^{1/m})`, with pure-power moments
    /// in `[-tol, 0)` clamped to zero.
    pub fn diagonal_roots(&self, tol: f64) -> Result<Vec<f64>> {
        let m = self.degree;
        (0..self.dim)
            .map(|i| {
                let v = self.get(&Exponent::pure_power(self.dim, i, m));
                if v < -tol {
                    Err(Error::NegativeDiagonal { index: i + 1, value: v })
                } else {
                    Ok(v.max(0.0).powf(1.0 / m as f64))
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Nonnegative,
    Free,
}

#[derive(Clone, Debug)]
struct Variable {
    kind: VarKind,
    direction: Polynomial,
    objective: f64,
}

/// `maximize c·θ  s.t.  f_base + Σ θ_j f_j is SOS`, plus optional linear
/// equalities on `θ`.
#[derive(Clone, Debug)]
pub struct SosProgram {
    basis: GramBasis,
    base: Polynomial,
    vars: Vec<Variable>,
    equalities: Vec<(Vec<(usize, f64)>, f64)>,
}

/// One row of the un-reduced system `A(X) + F θ_free = b`.
#[derive(Clone, Debug)]
struct Row {
    a: SparseBlockMatrix,
    free: Vec<f64>,
    b: f64,
}

/// An [`SosProgram`] compiled to standard form. Free variables are removed
/// by solving for them from pivot rows; the bookkeeping needed to undo that
/// is kept here.
#[derive(Clone, Debug)]
pub struct AssembledSos {
    pub problem: SdpProblem,
    /// Exponent of each coefficient row (equality rows follow).
    row_exponents: Vec<Exponent>,
    rows: Vec<Row>,
    /// For each SDP constraint, the originating row.
    kept: Vec<usize>,
    pivots: Vec<usize>,
    /// `F_P^{-1}`
    pivot_inverse: DMatrix<f64>,
    /// Objective weights on the free variables.
    free_objective: Vec<f64>,
    objective_constant: f64,
    /// Position of each variable: 1×1 block index or free slot.
    slots: Vec<(VarKind, usize)>,
}

#[derive(Clone, Debug)]
pub struct SosSolution {
    pub sdp: SdpSolution,
    pub theta: Vec<f64>,
    pub gram: DMatrix<f64>,
    pub moments: MomentVector,
    /// `c·θ` at the primal iterate.
    pub objective: f64,
    /// Dual objective, an upper bound on `c·θ` when dual feasible.
    pub dual_objective: f64,
}

impl SosSolution {
    pub fn status(&self) -> SdpStatus {
        self.sdp.status
    }
}

impl SosProgram {
    pub fn new(basis: GramBasis, base: Polynomial) -> Result<Self> {
        check_support(&basis, &base)?;
        Ok(Self {
            basis,
            base,
            vars: Vec::new(),
            equalities: Vec::new(),
        })
    }

    pub fn basis(&self) -> &GramBasis {
        &self.basis
    }

    pub fn add_variable(&mut self, kind: VarKind, direction: Polynomial, objective: f64) -> Result<usize> {
        check_support(&self.basis, &direction)?;
        self.vars.push(Variable {
            kind,
            direction,
            objective,
        });
        Ok(self.vars.len() - 1)
    }

    /// `Σ coeffs_j θ_j = rhs`.
    pub fn add_linear_equality(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> Result<()> {
        if let Some(&(j, _)) = coeffs.iter().find(|(j, _)| *j >= self.vars.len()) {
            return Err(Error::Precondition(format!("no SOS variable with index {j}")));
        }
        self.equalities.push((coeffs, rhs));
        Ok(())
    }

    pub fn num_variables(&self) -> usize {
        self.vars.len()
    }

    pub fn assemble(&self) -> Result<AssembledSos> {
        let mut slots = Vec::with_capacity(self.vars.len());
        let (mut nonneg, mut free) = (0usize, 0usize);
        for v in &self.vars {
            match v.kind {
                VarKind::Nonnegative => {
                    nonneg += 1;
                    slots.push((VarKind::Nonnegative, nonneg));
                }
                VarKind::Free => {
                    slots.push((VarKind::Free, free));
                    free += 1;
                }
            }
        }
        let mut block_sizes = vec![self.basis.len()];
        block_sizes.extend(std::iter::repeat_n(1, nonneg));

        let exps = self.basis.coefficient_exponents();
        let row_of: HashMap<&Exponent, usize> = exps.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut rows: Vec<Row> = exps
            .iter()
            .map(|a| Row {
                a: SparseBlockMatrix::new(),
                free: vec![0.0; free],
                b: self.base.coeff(a),
            })
            .collect();
        let ms = self.basis.monomials();
        for i in 0..ms.len() {
            for j in i..ms.len() {
                let r = row_of[&ms[i].add(&ms[j])];
                rows[r].a.add(0, i, j, 1.0);
            }
        }
        for (v, &(kind, slot)) in self.vars.iter().zip(&slots) {
            for (alpha, c) in v.direction.terms() {
                let r = row_of[alpha];
                match kind {
                    VarKind::Nonnegative => rows[r].a.add(slot, 0, 0, -c),
                    VarKind::Free => rows[r].free[slot] -= c,
                }
            }
        }
        let mut row_exponents = exps.clone();
        for (coeffs, rhs) in &self.equalities {
            let mut row = Row {
                a: SparseBlockMatrix::new(),
                free: vec![0.0; free],
                b: *rhs,
            };
            for &(j, c) in coeffs {
                match slots[j] {
                    (VarKind::Nonnegative, slot) => row.a.add(slot, 0, 0, c),
                    (VarKind::Free, slot) => row.free[slot] += c,
                }
            }
            rows.push(row);
            row_exponents.push(Exponent::zero(self.basis.dim()));
        }

        let mut objective = SparseBlockMatrix::new();
        let mut free_objective = vec![0.0; free];
        for (v, &(kind, slot)) in self.vars.iter().zip(&slots) {
            match kind {
                VarKind::Nonnegative => objective.add(slot, 0, 0, v.objective),
                VarKind::Free => free_objective[slot] = v.objective,
            }
        }

        // choose pivot rows for the free columns by partial pivoting
        let mut pivots: Vec<usize> = Vec::with_capacity(free);
        let mut work: Vec<Vec<f64>> = rows.iter().map(|r| r.free.clone()).collect();
        for col in 0..free {
            let (best, val) = work
                .iter()
                .enumerate()
                .filter(|(r, _)| !pivots.contains(r))
                .map(|(r, w)| (r, w[col].abs()))
                .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == usize::MAX || val <= 1e-12 {
                return Err(Error::Singular(format!(
                    "free SOS variable {} does not appear in any coefficient row",
                    col + 1
                )));
            }
            let prow = work[best].clone();
            for (r, w) in work.iter_mut().enumerate() {
                if r != best {
                    let factor = w[col] / prow[col];
                    for (wc, pc) in w.iter_mut().zip(&prow) {
                        *wc -= factor * pc;
                    }
                }
            }
            pivots.push(best);
        }
        let fp = DMatrix::from_fn(free, free, |i, j| rows[pivots[i]].free[j]);
        let pivot_inverse = if free == 0 {
            DMatrix::zeros(0, 0)
        } else {
            fp.try_inverse()
                .ok_or_else(|| Error::Singular("free-variable pivot block".into()))?
        };

        let combine = |w: &DVector<f64>, base: &SparseBlockMatrix, bval: f64, sign: f64| {
            let mut a = base.clone();
            let mut b = bval;
            for (i, &p) in pivots.iter().enumerate() {
                let wi = w[i];
                if wi == 0.0 {
                    continue;
                }
                for (bl, r, c, v) in rows[p].a.entries() {
                    a.add(bl, r, c, sign * wi * v);
                }
                b += sign * wi * rows[p].b;
            }
            (a, b)
        };

        let mut problem = SdpProblem::new(block_sizes);
        let mut kept = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if pivots.contains(&r) {
                continue;
            }
            let w = pivot_inverse.transpose() * DVector::from_vec(row.free.clone());
            let (mut a, b) = combine(&w, &row.a, row.b, -1.0);
            a = prune(a);
            if a.is_empty() {
                if b.abs() > 1e-12 {
                    return Err(Error::Singular(format!(
                        "coefficient row {} cannot be matched",
                        row_exponents[r]
                    )));
                }
                continue;
            }
            problem.add_constraint(a, b);
            kept.push(r);
        }
        let cf = pivot_inverse.transpose() * DVector::from_vec(free_objective.clone());
        let (c, constant) = combine(&cf, &objective, 0.0, -1.0);
        problem.set_objective(prune(c));
        Ok(AssembledSos {
            problem,
            row_exponents,
            rows,
            kept,
            pivots,
            pivot_inverse,
            free_objective,
            objective_constant: -constant,
            slots,
        })
    }

    pub fn solve(&self, settings: &SdpSettings) -> Result<SosSolution> {
        let asm = self.assemble()?;
        let sol = sdp::solve(&asm.problem, settings)?;
        Ok(asm.recover(self, sol))
    }
}

fn prune(m: SparseBlockMatrix) -> SparseBlockMatrix {
    let mut out = SparseBlockMatrix::new();
    for (b, r, c, v) in m.entries() {
        if v.abs() > 1e-15 {
            out.add(b, r, c, v);
        }
    }
    out
}

fn check_support(basis: &GramBasis, f: &Polynomial) -> Result<()> {
    if f.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: f.dim(),
        });
    }
    let m = basis.degree() as usize;
    if f.degree() > m {
        return Err(Error::DegreeTooHigh {
            degree: f.degree(),
            max: m,
        });
    }
    if basis.is_homogeneous() && !f.is_zero() && !f.is_homogeneous(m) {
        return Err(Error::NotHomogeneous(m));
    }
    Ok(())
}

impl AssembledSos {
    pub fn num_coefficient_rows(&self) -> usize {
        self.row_exponents.len()
    }

    fn recover(&self, program: &SosProgram, sol: SdpSolution) -> SosSolution {
        let free = self.pivots.len();
        // reduced system: θ_free = F_P^{-1}(b_P − A_P(X))
        let rhs = DVector::from_iterator(
            free,
            self.pivots.iter().map(|&p| self.rows[p].b - self.rows[p].a.inner(&sol.x)),
        );
        let theta_free = &self.pivot_inverse * rhs;
        let theta: Vec<f64> = self
            .slots
            .iter()
            .map(|&(kind, slot)| match kind {
                VarKind::Nonnegative => sol.x[slot][(0, 0)],
                VarKind::Free => theta_free[slot],
            })
            .collect();

        // full dual: y_r on kept rows, pivot rows from F^T ŷ = c_free
        let mut yhat = vec![0.0; self.rows.len()];
        for (k, &r) in self.kept.iter().enumerate() {
            yhat[r] = sol.y[k];
        }
        let mut rest = DVector::from_vec(self.free_objective.clone());
        for (r, row) in self.rows.iter().enumerate() {
            if !self.pivots.contains(&r) {
                for j in 0..free {
                    rest[j] -= row.free[j] * yhat[r];
                }
            }
        }
        let yp = self.pivot_inverse.transpose() * rest;
        for (i, &p) in self.pivots.iter().enumerate() {
            yhat[p] = yp[i];
        }
        let num_coeff = program.basis.coefficient_exponents().len();
        let values = self.row_exponents[..num_coeff]
            .iter()
            .zip(&yhat)
            .map(|(a, &v)| (a.clone(), v))
            .collect();
        let moments = MomentVector::new(program.basis.dim(), program.basis.degree(), values);
        let objective = program
            .vars
            .iter()
            .zip(&theta)
            .map(|(v, t)| v.objective * t)
            .sum();
        let dual_objective = sol.dual_objective + self.objective_constant;
        SosSolution {
            gram: sol.x[0].clone(),
            sdp: sol,
            theta,
            moments,
            objective,
            dual_objective,
        }
    }
}

/// Compiles an SOS program to standard form.
pub fn assemble_sos_program(program: &SosProgram) -> Result<SdpProblem> {
    Ok(program.assemble()?.problem)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SosSettings {
    pub sdp: SdpSettings,
    /// Decision threshold on `γ*`.
    pub tol: f64,
}

impl Default for SosSettings {
    fn default() -> Self {
        Self {
            sdp: SdpSettings::default(),
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub enum SosVerdict {
    Sos(SosCertificate),
    /// `⟨y, f⟩ = γ* < 0` and `M(y) ⪰ 0`, normalized by `⟨y, D⟩ = 1`.
    NotSos { witness: MomentVector, gamma: f64 },
    /// `|γ*| ≤ tol` and no certificate validated.
    Boundary { gamma: f64 },
    Indeterminate { status: SdpStatus },
}

impl SosVerdict {
    pub fn is_sos(&self) -> bool {
        matches!(self, SosVerdict::Sos(_))
    }
}

/// Full output of [`sos_check_detailed`].
#[derive(Clone, Debug)]
pub struct SosCheck {
    pub verdict: SosVerdict,
    pub gamma: f64,
    pub basis: GramBasis,
    pub moments: MomentVector,
    pub solution: SosSolution,
    pub problem: SdpProblem,
}

/// The shift polynomial `D = Σ x_i^m (+ 1 unless homogeneous)`.
pub fn shift_polynomial(n: usize, m: usize, homogeneous: bool) -> Polynomial {
    let mut d = Polynomial::pure_powers(&vec![1.0; n], m as u32);
    if !homogeneous {
        d.add_term(Exponent::zero(n), 1.0);
    }
    d
}

pub fn sos_check(f: &Polynomial, m: usize, settings: &SosSettings) -> Result<SosVerdict> {
    Ok(sos_check_detailed(f, m, settings)?.verdict)
}

/// Solves `max γ s.t. f − γD is SOS` and classifies by the sign of `γ*`.
pub fn sos_check_detailed(f: &Polynomial, m: usize, settings: &SosSettings) -> Result<SosCheck> {
    if !m.is_multiple_of(2) || m == 0 {
        return Err(Error::InvalidOrder(m));
    }
    if f.degree() > m {
        return Err(Error::DegreeTooHigh {
            degree: f.degree(),
            max: m,
        });
    }
    let n = f.dim();
    let homogeneous = !f.is_zero() && f.is_homogeneous(m);
    let basis = gram_basis(n, m, homogeneous)?;
    let d = shift_polynomial(n, m, homogeneous);
    let mut program = SosProgram::new(basis.clone(), f.clone())?;
    program.add_variable(VarKind::Free, d.scale(-1.0), 1.0)?;
    let assembled = program.assemble()?;
    let sol = sdp::solve(&assembled.problem, &settings.sdp)?;
    let solution = assembled.recover(&program, sol);
    let gamma = solution.theta[0];
    let moments = solution.moments.clone();

    let verdict = if !solution.sdp.is_acceptable(1e-6) {
        SosVerdict::Indeterminate {
            status: solution.status(),
        }
    } else {
        let mut gram = solution.gram.clone();
        if let Some(dg) = basis.diagonal_gram(&d) {
            gram += dg * gamma;
        }
        let cert = SosCertificate::from_gram(f, gram, basis.clone());
        match cert {
            Ok(c) if gamma >= -settings.tol && c.is_valid_for(f) => SosVerdict::Sos(c),
            _ if gamma < -settings.tol => SosVerdict::NotSos {
                witness: moments.clone(),
                gamma: moments.pairing(f),
            },
            _ => SosVerdict::Boundary { gamma },
        }
    };
    Ok(SosCheck {
        verdict,
        gamma,
        basis,
        moments,
        solution,
        problem: assembled.problem,
    })
}

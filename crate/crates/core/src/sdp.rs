//! Dense block-diagonal semidefinite programming.
//!
//! Problems are stated in the form
//!
//! ```text
//!   maximize   ⟨C, X⟩
//!   subject to ⟨A_k, X⟩ = b_k,   k = 1..K
//!              X ⪰ 0 (blockwise)
//! ```
//!
//! with dual `minimize b·y  s.t.  Σ_k y_k A_k − C = S ⪰ 0`. Size-1 blocks
//! model nonnegative scalars. The solver is an infeasible-start primal–dual
//! path-following method using the HKM search direction.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Sparse symmetric block-diagonal matrix. Only entries with `row ≤ col` are
/// stored; an off-diagonal entry stands for both `(row, col)` and `(col, row)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseBlockMatrix {
    entries: BTreeMap<(usize, usize, usize), f64>,
}

impl SparseBlockMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` at `(row, col)` of `block` (and, implicitly, at the
    /// transposed position).
    pub fn add(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let key = (block, row.min(col), row.max(col));
        *self.entries.entry(key).or_insert(0.0) += value;
    }

    pub fn get(&self, block: usize, row: usize, col: usize) -> f64 {
        self.entries
            .get(&(block, row.min(col), row.max(col)))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stored `(block, row, col, value)` with `row ≤ col`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(b, r, c), &v)| (b, r, c, v))
    }

    /// Both orientations of every off-diagonal entry.
    fn expanded(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.entries.len() * 2);
        for (&(b, r, c), &v) in &self.entries {
            out.push((b, r, c, v));
            if r != c {
                out.push((b, c, r, v));
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|(&(_, r, c), v)| if r == c { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_dense(&self, sizes: &[usize]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect();
        for (b, r, c, v) in self.expanded() {
            out[b][(r, c)] = v;
        }
        out
    }

    /// `⟨self, X⟩` for dense symmetric `X`.
    pub fn inner(&self, x: &[DMatrix<f64>]) -> f64 {
        self.entries
            .iter()
            .map(|(&(b, r, c), &v)| {
                if r == c {
                    v * x[b][(r, c)]
                } else {
                    2.0 * v * x[b][(r, c)]
                }
            })
            .sum()
    }
}

/// Full (both-orientation) entries of one constraint, grouped by block.
type ExpandedConstraint = Vec<(usize, Vec<(usize, usize, f64)>)>;

fn group_by_block(entries: Vec<(usize, usize, usize, f64)>) -> ExpandedConstraint {
    let mut map: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
    for (b, r, c, v) in entries {
        map.entry(b).or_default().push((r, c, v));
    }
    map.into_iter().collect()
}

/// `tr(A W)` for a grouped sparse symmetric `A` and arbitrary square blocks `W`.
fn trace_product(a: &ExpandedConstraint, w: &[DMatrix<f64>]) -> f64 {
    let mut acc = 0.0;
    for (b, list) in a {
        for &(r, c, v) in list {
            acc += v * w[*b][(c, r)];
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    block_sizes: Vec<usize>,
    objective: SparseBlockMatrix,
    constraints: Vec<(SparseBlockMatrix, f64)>,
}

impl SdpProblem {
    pub fn new(block_sizes: Vec<usize>) -> Self {
        Self {
            block_sizes,
            objective: SparseBlockMatrix::new(),
            constraints: Vec::new(),
        }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn objective(&self) -> &SparseBlockMatrix {
        &self.objective
    }

    pub fn objective_mut(&mut self) -> &mut SparseBlockMatrix {
        &mut self.objective
    }

    pub fn set_objective(&mut self, c: SparseBlockMatrix) {
        self.objective = c;
    }

    pub fn add_constraint(&mut self, a: SparseBlockMatrix, b: f64) -> usize {
        self.constraints.push((a, b));
        self.constraints.len() - 1
    }

    pub fn constraints(&self) -> &[(SparseBlockMatrix, f64)] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::MalformedSdp("block sizes must be positive".into()));
        }
        if self.constraints.is_empty() {
            return Err(Error::MalformedSdp("at least one constraint is required".into()));
        }
        let check = |m: &SparseBlockMatrix, what: &str| -> Result<()> {
            for (b, _r, c, v) in m.entries() {
                if b >= self.block_sizes.len() || c >= self.block_sizes[b] {
                    return Err(Error::MalformedSdp(format!("{what}: entry outside its block")));
                }
                if !v.is_finite() {
                    return Err(Error::MalformedSdp(format!("{what}: non-finite entry")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (k, (a, b)) in self.constraints.iter().enumerate() {
            check(a, &format!("constraint {}", k + 1))?;
            if !b.is_finite() {
                return Err(Error::MalformedSdp(format!("constraint {}: non-finite rhs", k + 1)));
            }
        }
        Ok(())
    }

    /// Writes the plain-text dump: `%` lines are comments, every matrix is
    /// one section of row-major dense rows.
    ///
    /// ```text
    /// % blocks
    /// 20 1
    /// % constraints
    /// 83
    /// % b
    /// <one value per line>
    /// % C block 1
    /// <rows>
    /// % A 1 block 1
    /// <rows>
    /// ```
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "% tensoralt SDP dump");
        let _ = writeln!(
            s,
            "% maximize <C,X> subject to <A_k,X> = b_k, X psd (block diagonal)"
        );
        let _ = writeln!(s, "% blocks");
        let sizes: Vec<String> = self.block_sizes.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(s, "{}", sizes.join(" "));
        let _ = writeln!(s, "% constraints");
        let _ = writeln!(s, "{}", self.constraints.len());
        let _ = writeln!(s, "% b");
        for (_, b) in &self.constraints {
            let _ = writeln!(s, "{b:e}");
        }
        let write_matrix = |s: &mut String, label: &str, m: &SparseBlockMatrix| {
            for (bi, dense) in m.to_dense(&self.block_sizes).iter().enumerate() {
                let _ = writeln!(s, "% {label} block {}", bi + 1);
                for r in 0..dense.nrows() {
                    let row: Vec<String> = (0..dense.ncols())
                        .map(|c| format!("{:e}", dense[(r, c)]))
                        .collect();
                    let _ = writeln!(s, "{}", row.join(" "));
                }
            }
        };
        write_matrix(&mut s, "C", &self.objective);
        for (k, (a, _)) in self.constraints.iter().enumerate() {
            write_matrix(&mut s, &format!("A {}", k + 1), a);
        }
        s
    }

    pub fn write_dump(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.dump())?;
        Ok(())
    }

    /// Parses the format written by [`dump`](Self::dump).
    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
        let parse_err = |line: usize, message: &str| Error::Parse {
            line,
            column: 1,
            message: message.to_string(),
        };
        let mut next_numbers = |what: &str| -> Result<(usize, Vec<f64>)> {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| parse_err(0, &format!("unexpected end of dump, expected {what}")))?;
            let nums = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| parse_err(ln, &format!("bad number '{t}'"))))
                .collect::<Result<Vec<f64>>>()?;
            Ok((ln, nums))
        };
        let (_, sizes) = next_numbers("block sizes")?;
        let sizes: Vec<usize> = sizes.into_iter().map(|v| v as usize).collect();
        let (_, count) = next_numbers("constraint count")?;
        let count = count.first().copied().unwrap_or(0.0) as usize;
        let mut b = Vec::with_capacity(count);
        for _ in 0..count {
            b.push(next_numbers("b entry")?.1[0]);
        }
        let read_matrix = |next: &mut dyn FnMut(&str) -> Result<(usize, Vec<f64>)>| -> Result<SparseBlockMatrix> {
            let mut m = SparseBlockMatrix::new();
            for (bi, &size) in sizes.iter().enumerate() {
                for r in 0..size {
                    let (ln, row) = next("matrix row")?;
                    if row.len() != size {
                        return Err(parse_err(ln, "row length does not match block size"));
                    }
                    for (c, &v) in row.iter().enumerate().skip(r) {
                        if v != 0.0 {
                            m.add(bi, r, c, v);
                        }
                    }
                }
            }
            Ok(m)
        };
        let mut problem = SdpProblem::new(sizes.clone());
        problem.objective = read_matrix(&mut next_numbers)?;
        for bk in b {
            let a = read_matrix(&mut next_numbers)?;
            problem.constraints.push((a, bk));
        }
        Ok(problem)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Mehrotra-style predictor–corrector; without it a fixed centering
    /// heuristic is used.
    pub predictor_corrector: bool,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            predictor_corrector: true,
            step_fraction: 0.98,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasibleLikely,
    DualInfeasibleLikely,
    MaxIterations,
    NumericalTrouble,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub status: SdpStatus,
    /// `‖b − A(X)‖ / (1 + ‖b‖)`
    pub primal_residual: f64,
    /// `‖A^T y − S − C‖ / (1 + ‖C‖)`
    pub dual_residual: f64,
    /// `max(|⟨C,X⟩ − b·y|, ⟨X,S⟩) / (1 + |b·y|)`
    pub gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn max_residual(&self) -> f64 {
        self.primal_residual.max(self.dual_residual).max(self.gap)
    }

    /// Optimal, or stopped early with every residual at most `tol`.
    pub fn is_acceptable(&self, tol: f64) -> bool {
        self.status == SdpStatus::Optimal
            || (matches!(
                self.status,
                SdpStatus::MaxIterations | SdpStatus::NumericalTrouble
            ) && self.max_residual() <= tol)
    }
}

fn block_inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn block_norm(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Largest `α` with `X + α D ⪰ 0` (infinite when `D ⪰ 0`); `None` if `X` is
/// not numerically positive definite.
fn max_step(x: &[DMatrix<f64>], d: &[DMatrix<f64>]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(d) {
        if xb.nrows() == 1 {
            if db[(0, 0)] < 0.0 {
                alpha = alpha.min(-xb[(0, 0)] / db[(0, 0)]);
            }
            continue;
        }
        let chol = xb.clone().cholesky()?;
        let l = chol.l();
        let li_d = l.solve_lower_triangular(db)?;
        let w = l.solve_lower_triangular(&li_d.transpose())?;
        let mut w = w.transpose();
        symmetrize(&mut w);
        let lmin = w.symmetric_eigenvalues().min();
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    Some(alpha)
}

fn invert_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut inv = m.clone().cholesky()?.inverse();
    symmetrize(&mut inv);
    Some(inv)
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    s: Vec<DMatrix<f64>>,
}

struct Measures {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    primal_residual: f64,
    dual_residual: f64,
    gap: f64,
    pobj: f64,
    dobj: f64,
}

struct Solver<'a> {
    problem: &'a SdpProblem,
    settings: SdpSettings,
    sizes: Vec<usize>,
    a: Vec<ExpandedConstraint>,
    b: DVector<f64>,
    c: Vec<DMatrix<f64>>,
    b_norm: f64,
    c_norm: f64,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a SdpProblem, settings: SdpSettings) -> Self {
        let sizes = problem.block_sizes.clone();
        let a = problem
            .constraints
            .iter()
            .map(|(m, _)| group_by_block(m.expanded()))
            .collect();
        let b = DVector::from_iterator(
            problem.constraints.len(),
            problem.constraints.iter().map(|(_, b)| *b),
        );
        let c = problem.objective.to_dense(&sizes);
        let b_norm = b.norm();
        let c_norm = block_norm(&c);
        Self {
            problem,
            settings,
            sizes,
            a,
            b,
            c,
            b_norm,
            c_norm,
        }
    }

    fn apply_a(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|a| trace_product(a, x)))
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect();
        for (k, a) in self.a.iter().enumerate() {
            let yk = y[k];
            if yk == 0.0 {
                continue;
            }
            for (b, list) in a {
                for &(r, c, v) in list {
                    out[*b][(r, c)] += yk * v;
                }
            }
        }
        out
    }

    fn measure(&self, it: &Iterate) -> Measures {
        let rp = &self.b - self.apply_a(&it.x);
        let aty = self.apply_at(&it.y);
        let rd: Vec<DMatrix<f64>> = aty
            .iter()
            .zip(&it.s)
            .zip(&self.c)
            .map(|((a, s), c)| a - s - c)
            .collect();
        let pobj = block_inner(&self.c, &it.x);
        let dobj = self.b.dot(&it.y);
        let xs = block_inner(&it.x, &it.s);
        Measures {
            primal_residual: rp.norm() / (1.0 + self.b_norm),
            dual_residual: block_norm(&rd) / (1.0 + self.c_norm),
            gap: (pobj - dobj).abs().max(xs) / (1.0 + dobj.abs()),
            rp,
            rd,
            pobj,
            dobj,
        }
    }

    fn schur(&self, x: &[DMatrix<f64>], sinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let k = self.a.len();
        let mut m = DMatrix::zeros(k, k);
        let mut t: Vec<DMatrix<f64>> = self.sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect();
        for (j, aj) in self.a.iter().enumerate() {
            // t = X A_j S^{-1} on the blocks touched by A_j
            for (b, list) in aj {
                let xb = &x[*b];
                let n = xb.nrows();
                let mut xa = DMatrix::zeros(n, n);
                for &(r, c, v) in list {
                    for i in 0..n {
                        xa[(i, c)] += v * xb[(i, r)];
                    }
                }
                t[*b] = xa * &sinv[*b];
            }
            for (i, ai) in self.a.iter().enumerate() {
                let mut acc = 0.0;
                for (b, list) in ai {
                    if !aj.iter().any(|(bj, _)| bj == b) {
                        continue;
                    }
                    for &(r, c, v) in list {
                        acc += v * t[*b][(c, r)];
                    }
                }
                m[(i, j)] = acc;
            }
        }
        let mt = m.transpose();
        (m + mt) * 0.5
    }

    fn solve(&self) -> SdpSolution {
        let xi = 1.0
            + self.b.amax()
            + self
                .problem
                .constraints
                .iter()
                .map(|(a, _)| a.frobenius_norm())
                .fold(self.problem.objective.frobenius_norm(), f64::max);
        let mut it = Iterate {
            x: self.sizes.iter().map(|&s| DMatrix::identity(s, s) * xi).collect(),
            y: DVector::zeros(self.a.len()),
            s: self.sizes.iter().map(|&s| DMatrix::identity(s, s) * xi).collect(),
        };
        let nu: usize = self.sizes.iter().sum();
        let mut last_alpha = 0.0f64;
        let mut best: Option<(f64, SdpSolution)> = None;

        for iter in 0..=self.settings.max_iter {
            let meas = self.measure(&it);
            let snapshot = |status: SdpStatus, it: &Iterate| SdpSolution {
                x: it.x.clone(),
                y: it.y.iter().copied().collect(),
                s: it.s.clone(),
                status,
                primal_residual: meas.primal_residual,
                dual_residual: meas.dual_residual,
                gap: meas.gap,
                primal_objective: meas.pobj,
                dual_objective: meas.dobj,
                iterations: iter,
            };
            let worst = meas.primal_residual.max(meas.dual_residual).max(meas.gap);
            if best.as_ref().is_none_or(|(w, _)| worst < *w) {
                best = Some((worst, snapshot(SdpStatus::NumericalTrouble, &it)));
            }
            if worst <= self.settings.tol {
                return snapshot(SdpStatus::Optimal, &it);
            }
            let divergence = 1e10 * xi;
            if block_norm(&it.x) > divergence && meas.primal_residual < 1e-6 {
                return snapshot(SdpStatus::DualInfeasibleLikely, &it);
            }
            if it.y.norm() > divergence && meas.dual_residual < 1e-6 {
                return snapshot(SdpStatus::PrimalInfeasibleLikely, &it);
            }
            if iter == self.settings.max_iter {
                return snapshot(SdpStatus::MaxIterations, &it);
            }

            match self.step(&mut it, &meas, nu, last_alpha) {
                Some(alpha) => last_alpha = alpha,
                None => {
                    let (_, sol) = best.expect("at least one iterate recorded");
                    return sol;
                }
            }
            if last_alpha < 1e-12 {
                let (_, sol) = best.expect("at least one iterate recorded");
                return sol;
            }
        }
        unreachable!("loop returns at max_iter")
    }

    /// One Newton step; returns the smaller of the two step lengths, or
    /// `None` on a factorization failure.
    fn step(&self, it: &mut Iterate, meas: &Measures, nu: usize, last_alpha: f64) -> Option<f64> {
        let sinv: Vec<DMatrix<f64>> = it.s.iter().map(invert_spd).collect::<Option<_>>()?;
        let mu = block_inner(&it.x, &it.s) / nu as f64;
        let m = self.schur(&it.x, &sinv);
        let chol = m.clone().cholesky();
        let lu = if chol.is_none() { Some(m.clone().lu()) } else { None };
        let solve_m = |rhs: &DVector<f64>| -> Option<DVector<f64>> {
            match (&chol, &lu) {
                (Some(c), _) => Some(c.solve(rhs)),
                (None, Some(l)) => l.solve(rhs),
                _ => None,
            }
        };
        // x_rd_sinv = X Rd S^{-1}
        let x_rd_sinv: Vec<DMatrix<f64>> = it
            .x
            .iter()
            .zip(&meas.rd)
            .zip(&sinv)
            .map(|((x, rd), si)| x * rd * si)
            .collect();

        let direction = |sigma: f64, second_order: Option<&Vec<DMatrix<f64>>>| -> Option<(Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>)> {
            // target = σμ S^{-1} − X − X Rd S^{-1} (− ΔX_a ΔS_a S^{-1})
            let target: Vec<DMatrix<f64>> = sinv
                .iter()
                .zip(&it.x)
                .zip(&x_rd_sinv)
                .enumerate()
                .map(|(b, ((si, x), xr))| {
                    let mut t = si * (sigma * mu) - x - xr;
                    if let Some(corr) = second_order {
                        t -= &corr[b];
                    }
                    t
                })
                .collect();
            let rhs = DVector::from_iterator(
                self.a.len(),
                self.a.iter().enumerate().map(|(k, a)| trace_product(a, &target) - meas.rp[k]),
            );
            let dy = solve_m(&rhs)?;
            let at_dy = self.apply_at(&dy);
            let ds: Vec<DMatrix<f64>> = at_dy.iter().zip(&meas.rd).map(|(a, rd)| a + rd).collect();
            // ΔX = σμS^{-1} − X − X ΔS S^{-1}, and target already holds the Rd part
            let dx: Vec<DMatrix<f64>> = target
                .iter()
                .zip(&it.x)
                .zip(&at_dy)
                .zip(&sinv)
                .map(|(((t, x), a), si)| {
                    let mut d = t - x * a * si;
                    symmetrize(&mut d);
                    d
                })
                .collect();
            Some((dx, dy, ds))
        };

        let frac = self.settings.step_fraction;
        let steps = |dx: &[DMatrix<f64>], ds: &[DMatrix<f64>]| -> Option<(f64, f64)> {
            let ap = (frac * max_step(&it.x, dx)?).min(1.0);
            let ad = (frac * max_step(&it.s, ds)?).min(1.0);
            Some((ap, ad))
        };

        let (dx, dy, ds) = if self.settings.predictor_corrector {
            let (dxa, _dya, dsa) = direction(0.0, None)?;
            let (apa, ada) = steps(&dxa, &dsa)?;
            let xa: Vec<DMatrix<f64>> = it.x.iter().zip(&dxa).map(|(x, d)| x + d * apa).collect();
            let sa: Vec<DMatrix<f64>> = it.s.iter().zip(&dsa).map(|(s, d)| s + d * ada).collect();
            let mu_aff = block_inner(&xa, &sa) / nu as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            let corr: Vec<DMatrix<f64>> = dxa
                .iter()
                .zip(&dsa)
                .zip(&sinv)
                .map(|((a, b), si)| a * b * si)
                .collect();
            direction(sigma, Some(&corr))?
        } else {
            let sigma = if last_alpha == 0.0 {
                0.5
            } else {
                (1.0 - last_alpha).powi(2).clamp(0.1, 0.5)
            };
            direction(sigma, None)?
        };

        let (ap, ad) = steps(&dx, &ds)?;
        for (x, d) in it.x.iter_mut().zip(&dx) {
            *x += d * ap;
            symmetrize(x);
        }
        it.y += &dy * ad;
        for (s, d) in it.s.iter_mut().zip(&ds) {
            *s += d * ad;
            symmetrize(s);
        }
        Some(ap.min(ad))
    }
}

pub fn solve(problem: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    problem.validate()?;
    Ok(Solver::new(problem, *settings).solve())
}

/// Random instance with a known optimal value, built from a strictly
/// complementary pair `(X*, S*)` and a random `y*`:
/// `b = A(X*)`, `C = A^T y* − S*`. Returns the problem and `⟨C, X*⟩`.
///
/// `X*` is scaled to trace `Σ n_b`, the first constraint is the trace and the
/// others are orthogonal to `I − X*`, so `X = I` is strictly feasible and a
/// large multiple on the trace row makes the dual strictly feasible too. The
/// number of constraints is capped so that the rows stay independent.
pub fn random_instance_with_optimum<R: rand::Rng>(
    rng: &mut R,
    block_sizes: &[usize],
    num_constraints: usize,
) -> (SdpProblem, f64) {
    use rand_distr::{Distribution, StandardNormal};
    let gauss = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };
    let mut x_star = Vec::new();
    let mut s_star = Vec::new();
    for &n in block_sizes {
        let g = DMatrix::from_fn(n, n, |_, _| gauss(rng));
        let q = g.qr().q();
        let rank = if n == 1 { usize::from(rng.random::<bool>()) } else { rng.random_range(1..n) };
        let mut x = DMatrix::zeros(n, n);
        let mut s = DMatrix::zeros(n, n);
        for j in 0..n {
            let col = q.column(j);
            let w = rng.random_range(0.5..2.0);
            if j < rank {
                x += col * col.transpose() * w;
            } else {
                s += col * col.transpose() * w;
            }
        }
        symmetrize(&mut x);
        symmetrize(&mut s);
        x_star.push(x);
        s_star.push(s);
    }
    let total: usize = block_sizes.iter().sum();
    let trace: f64 = x_star.iter().map(|x| x.trace()).sum();
    if trace == 0.0 {
        // only possible when every block is 1x1 with X* = 0
        x_star[0][(0, 0)] = 1.0;
        s_star[0][(0, 0)] = 0.0;
    }
    let trace: f64 = x_star.iter().map(|x| x.trace()).sum();
    for x in x_star.iter_mut() {
        *x *= total as f64 / trace;
    }
    let d: Vec<DMatrix<f64>> = x_star
        .iter()
        .map(|x| DMatrix::identity(x.nrows(), x.nrows()) - x)
        .collect();
    let dd = block_inner(&d, &d);
    // all constraints live in the complement of D
    let svec: usize = block_sizes.iter().map(|n| n * (n + 1) / 2).sum();
    let room = if dd > 0.0 { svec - 1 } else { svec };
    let num_constraints = num_constraints.clamp(1, room.max(1));

    let mut problem = SdpProblem::new(block_sizes.to_vec());
    let mut c_dense: Vec<DMatrix<f64>> = s_star.iter().map(|s| -s.clone()).collect();
    for k in 0..num_constraints {
        let mut dense: Vec<DMatrix<f64>> = if k == 0 {
            block_sizes.iter().map(|&n| DMatrix::identity(n, n)).collect()
        } else {
            block_sizes
                .iter()
                .map(|&n| {
                    let mut a = DMatrix::from_fn(n, n, |_, _| gauss(rng));
                    symmetrize(&mut a);
                    a
                })
                .collect()
        };
        if k > 0 && dd > 0.0 {
            let coef = block_inner(&dense, &d) / dd;
            for (a, db) in dense.iter_mut().zip(&d) {
                *a -= db * coef;
            }
        }
        let yk = gauss(rng);
        let mut a = SparseBlockMatrix::new();
        for (bi, m) in dense.iter().enumerate() {
            c_dense[bi] += m * yk;
            for r in 0..m.nrows() {
                for col in r..m.ncols() {
                    a.add(bi, r, col, m[(r, col)]);
                }
            }
        }
        let bk = block_inner(&dense, &x_star);
        problem.add_constraint(a, bk);
    }
    let mut c = SparseBlockMatrix::new();
    for (bi, m) in c_dense.iter().enumerate() {
        for r in 0..m.nrows() {
            for col in r..m.ncols() {
                c.add(bi, r, col, m[(r, col)]);
            }
        }
    }
    problem.set_objective(c);
    let optimum = block_inner(&c_dense, &x_star);
    (problem, optimum)
}

/// Dual feasibility and complementarity residuals recomputed from scratch.
pub fn kkt_residual(problem: &SdpProblem, sol: &SdpSolution) -> f64 {
    let solver = Solver::new(problem, SdpSettings::default());
    let it = Iterate {
        x: sol.x.clone(),
        y: DVector::from_vec(sol.y.clone()),
        s: sol.s.clone(),
    };
    let m = solver.measure(&it);
    m.primal_residual.max(m.dual_residual).max(m.gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_problem() -> SdpProblem {
        // max -μ s.t. x_11 = 3 in a 1x1 block... expressed with one 1x1 block:
        // maximize ⟨-1, X⟩ s.t. X = 3  gives -3
        let mut p = SdpProblem::new(vec![1]);
        p.objective_mut().add(0, 0, 0, -1.0);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 0, 1.0);
        p.add_constraint(a, 3.0);
        p
    }

    #[test]
    fn scalar_equality() {
        let sol = solve(&scalar_problem(), &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective + 3.0).abs() < 1e-7);
        assert!((sol.dual_objective + 3.0).abs() < 1e-7);
    }

    #[test]
    fn minimize_diag_trace_one() {
        // max ⟨-diag(1,2), X⟩ s.t. tr X = 1  → -1
        let mut p = SdpProblem::new(vec![2]);
        p.objective_mut().add(0, 0, 0, -1.0);
        p.objective_mut().add(0, 1, 1, -2.0);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 0, 1.0);
        a.add(0, 1, 1, 1.0);
        p.add_constraint(a, 1.0);
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective + 1.0).abs() < 1e-7);
        assert!((sol.x[0][(0, 0)] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn max_eigenvalue_problem() {
        // max ⟨C, X⟩, tr X = 1 gives λ_max(C) = 3 for C = [[2,1],[1,2]]
        let mut p = SdpProblem::new(vec![2]);
        p.objective_mut().add(0, 0, 0, 2.0);
        p.objective_mut().add(0, 0, 1, 1.0);
        p.objective_mut().add(0, 1, 1, 2.0);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 0, 1.0);
        a.add(0, 1, 1, 1.0);
        p.add_constraint(a, 1.0);
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.dual_objective - 3.0).abs() < 1e-7);
    }

    #[test]
    fn random_instances_hit_known_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let (p, opt) = random_instance_with_optimum(&mut rng, &[4, 3, 1], 6);
            let sol = solve(&p, &SdpSettings::default()).unwrap();
            assert_eq!(sol.status, SdpStatus::Optimal, "{sol:?}");
            assert!((sol.primal_objective - opt).abs() <= 1e-6 * (1.0 + opt.abs()));
            assert!(kkt_residual(&p, &sol) <= 1e-7);
            // weak duality
            assert!(sol.primal_objective <= sol.dual_objective + sol.gap * (1.0 + sol.dual_objective.abs()) + 1e-12);
        }
    }

    #[test]
    fn plain_centering_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let settings = SdpSettings { predictor_corrector: false, ..SdpSettings::default() };
        for _ in 0..5 {
            let (p, opt) = random_instance_with_optimum(&mut rng, &[5, 2], 7);
            let sol = solve(&p, &settings).unwrap();
            assert_eq!(sol.status, SdpStatus::Optimal);
            assert!((sol.primal_objective - opt).abs() <= 1e-6 * (1.0 + opt.abs()));
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (p, _) = random_instance_with_optimum(&mut rng, &[3, 3], 4);
        let a = solve(&p, &SdpSettings::default()).unwrap();
        let b = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn unbounded_primal_is_flagged() {
        // max x_11 s.t. x_22 = 1 on a 2x2 block of scalars: x_11 unbounded
        let mut p = SdpProblem::new(vec![1, 1]);
        p.objective_mut().add(0, 0, 0, 1.0);
        let mut a = SparseBlockMatrix::new();
        a.add(1, 0, 0, 1.0);
        p.add_constraint(a, 1.0);
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::DualInfeasibleLikely);
    }

    #[test]
    fn infeasible_primal_is_not_optimal() {
        // X ⪰ 0 with x_11 = -1
        let mut p = SdpProblem::new(vec![1]);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 0, 1.0);
        p.add_constraint(a, -1.0);
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_ne!(sol.status, SdpStatus::Optimal);
    }

    #[test]
    fn dump_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (p, _) = random_instance_with_optimum(&mut rng, &[3, 1], 3);
        let q = SdpProblem::parse_dump(&p.dump()).unwrap();
        assert_eq!(q.block_sizes(), p.block_sizes());
        assert_eq!(q.num_constraints(), 3);
        for ((a, b), (a2, b2)) in p.constraints().iter().zip(q.constraints()) {
            assert!((b - b2).abs() < 1e-12 * (1.0 + b.abs()));
            for (bl, r, c, v) in a.entries() {
                assert!((a2.get(bl, r, c) - v).abs() < 1e-12 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn malformed_problems_rejected() {
        let p = SdpProblem::new(vec![2]);
        assert!(solve(&p, &SdpSettings::default()).is_err());
        let mut p = SdpProblem::new(vec![2]);
        let mut a = SparseBlockMatrix::new();
        a.add(0, 0, 5, 1.0);
        p.add_constraint(a, 1.0);
        assert!(matches!(p.validate(), Err(Error::MalformedSdp(_))));
    }
}

//! Infeasible-start primal–dual path-following method (HKM direction with a
//! Mehrotra predictor–corrector) for block SDP/LP programs in standard form
//!
//! ```text
//! min ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X ∈ S₊^{n_1} × … × S₊^{n_k} × R₊^{l}
//! ```

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::herm::{HermConstraint, HermExpr};
use super::program::{ConicProgram, LinExpr, ScalarSign, Sense, VarId, VarKind};
use crate::qlinalg::{HermitianOperator, SubsystemShape};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Target for the relative gap and the relative primal and dual
    /// infeasibilities.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative mismatch above which a linearly dependent constraint is
    /// declared inconsistent rather than redundant.
    pub consistency_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, consistency_tol: 1e-6 }
    }
}

/// Per-iteration diagnostics in the units of the original program (user
/// sense for the objectives).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub mu: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Clone, Debug)]
pub struct Solution<T: Real> {
    pub status: SolveStatus,
    /// Objective at the returned primal point, including the constant term.
    pub primal_objective: T,
    /// `b·y` plus the objective constant.
    pub dual_objective: T,
    /// Max-abs violation of the equality constraints (all of them, including
    /// rows removed as redundant).
    pub primal_residual: T,
    /// Max-abs entry of the dual slack residual `C − Aᵀy − S`.
    pub dual_residual: T,
    pub relative_gap: T,
    pub iterations: usize,
    pub values: Vec<T>,
    /// Multipliers indexed by constraint, with the sign convention that the
    /// dual objective is `Σ y_i b_i` in the user's sense.
    pub duals: Vec<T>,
    pub blocks: Vec<DMatrix<T>>,
    pub dual_blocks: Vec<DMatrix<T>>,
    pub history: Vec<IterationRecord>,
    /// Normalized infeasibility ray: constraint multipliers for
    /// `PrimalInfeasible`, variable values for `DualInfeasible`.
    pub certificate: Option<Vec<T>>,
}

impl<T: Real> Solution<T> {
    pub fn objective(&self) -> T {
        self.primal_objective
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, v: VarId) -> T {
        self.values[v.0]
    }

    pub fn eval(&self, e: &LinExpr<T>) -> T {
        e.evaluate(&self.values)
    }

    pub fn herm_value(&self, e: &HermExpr<T>) -> HermitianOperator<T> {
        e.evaluate(&self.values)
    }

    pub fn multiplier(&self, h: &HermConstraint, shape: SubsystemShape) -> HermitianOperator<T> {
        h.multiplier(&self.duals, shape)
    }

    /// Smallest eigenvalue over all primal PSD blocks.
    pub fn min_block_eigenvalue(&self) -> T {
        self.blocks
            .iter()
            .map(|b| b.clone().symmetric_eigenvalues().min())
            .fold(T::max_value().unwrap(), |a, b| a.min(b))
    }
}

/// Where a program variable lives in the standard form.
#[derive(Clone, Copy, Debug)]
enum Slot {
    Entry { block: usize, row: usize, col: usize },
    Lp(usize),
    Free(usize, usize),
}

/// Symmetric sparse coefficient matrix restricted to one block: `(r, c, v)`
/// with `r <= c` stands for `v` at both `(r, c)` and `(c, r)`.
type BlockPart<T> = Vec<(usize, usize, T)>;

struct Standard<T: Real> {
    dims: Vec<usize>,
    nlp: usize,
    m: usize,
    /// Per block: rows touching it.
    blk: Vec<Vec<(usize, BlockPart<T>)>>,
    /// Per row: LP coefficients.
    lp_rows: Vec<Vec<(usize, T)>>,
    /// Per LP coordinate: rows touching it.
    lp_cols: Vec<Vec<(usize, T)>>,
    b: DVector<T>,
    c_blk: Vec<DMatrix<T>>,
    c_lp: DVector<T>,
}

#[derive(Clone)]
struct Point<T: Real> {
    x: Vec<DMatrix<T>>,
    xl: DVector<T>,
    y: DVector<T>,
    s: Vec<DMatrix<T>>,
    sl: DVector<T>,
}

struct Direction<T: Real> {
    dx: Vec<DMatrix<T>>,
    dxl: DVector<T>,
    dy: DVector<T>,
    ds: Vec<DMatrix<T>>,
    dsl: DVector<T>,
}

fn slots<T: Real>(p: &ConicProgram<T>) -> (Vec<Slot>, usize) {
    let mut nlp = 0;
    let slots = p
        .vars
        .iter()
        .map(|k| match *k {
            VarKind::Entry { block, row, col } => Slot::Entry { block, row, col },
            VarKind::Scalar { index } => match p.scalars[index].sign {
                ScalarSign::Nonneg => {
                    nlp += 1;
                    Slot::Lp(nlp - 1)
                }
                ScalarSign::Free => {
                    nlp += 2;
                    Slot::Free(nlp - 2, nlp - 1)
                }
            },
        })
        .collect();
    (slots, nlp)
}

/// Indices of a maximal linearly independent subset of the constraint rows
/// (greedy incremental Cholesky on the Gram matrix), or `None` when a
/// dependent row has an inconsistent right-hand side.
fn independent_rows<T: Real>(rows: &[(Vec<(VarId, T)>, T)], consistency_tol: T) -> Option<Vec<usize>> {
    let m = rows.len();
    let mut cols: HashMap<usize, Vec<(usize, T)>> = HashMap::new();
    for (i, (terms, _)) in rows.iter().enumerate() {
        for &(v, a) in terms {
            cols.entry(v.0).or_default().push((i, a));
        }
    }
    let mut gram = DMatrix::<T>::zeros(m, m);
    for list in cols.values() {
        for &(i, a) in list {
            for &(j, b) in list {
                gram[(i, j)] += a * b;
            }
        }
    }
    let dep_tol = T::lit(T::STRUCTURAL_TOL * 10.0);
    let mut accepted: Vec<usize> = Vec::new();
    let mut l: Vec<Vec<T>> = Vec::new();
    for i in 0..m {
        let gii = gram[(i, i)];
        let bi = rows[i].1;
        if gii == T::zero() {
            if bi.abs() > consistency_tol {
                return None;
            }
            continue;
        }
        let r = accepted.len();
        let mut z = vec![T::zero(); r];
        for t in 0..r {
            let mut acc = gram[(accepted[t], i)];
            for s in 0..t {
                acc -= l[t][s] * z[s];
            }
            z[t] = acc / l[t][t];
        }
        let d = gii - z.iter().fold(T::zero(), |a, &v| a + v * v);
        if d > dep_tol * gii {
            let mut row = z;
            row.push(d.sqrt());
            l.push(row);
            accepted.push(i);
        } else {
            let mut lam = z;
            for t in (0..r).rev() {
                let mut acc = lam[t];
                for s in t + 1..r {
                    acc -= l[s][t] * lam[s];
                }
                lam[t] = acc / l[t][t];
            }
            let pred = (0..r).fold(T::zero(), |a, t| a + lam[t] * rows[accepted[t]].1);
            let scale = T::one() + bi.abs() + (0..r).fold(T::zero(), |a, t| a + (lam[t] * rows[accepted[t]].1).abs());
            if (pred - bi).abs() > consistency_tol * scale {
                return None;
            }
        }
    }
    Some(accepted)
}

impl<T: Real> Standard<T> {
    fn build(p: &ConicProgram<T>, slots: &[Slot], nlp: usize, kept: &[usize], row_scale: &[T], b_scale: T, c_scale: T) -> Self {
        let dims: Vec<usize> = p.blocks.iter().map(|b| b.dim).collect();
        let m = kept.len();
        let half = T::lit(0.5);
        let mut blk_map: Vec<Vec<(usize, BlockPart<T>)>> = vec![Vec::new(); dims.len()];
        let mut lp_rows = vec![Vec::new(); m];
        let mut b = DVector::zeros(m);
        for (i, &orig) in kept.iter().enumerate() {
            let con = &p.constraints[orig];
            let s = row_scale[orig];
            b[i] = con.rhs * s / b_scale;
            let mut parts: HashMap<usize, BlockPart<T>> = HashMap::new();
            for &(v, a) in &con.terms {
                let a = a * s;
                match slots[v.0] {
                    Slot::Entry { block, row, col } => {
                        let coef = if row == col { a } else { a * half };
                        parts.entry(block).or_default().push((row, col, coef));
                    }
                    Slot::Lp(l) => lp_rows[i].push((l, a)),
                    Slot::Free(pl, nl) => {
                        lp_rows[i].push((pl, a));
                        lp_rows[i].push((nl, -a));
                    }
                }
            }
            let mut keys: Vec<usize> = parts.keys().copied().collect();
            keys.sort_unstable();
            for k in keys {
                blk_map[k].push((i, parts.remove(&k).unwrap()));
            }
        }
        let mut lp_cols = vec![Vec::new(); nlp];
        for (i, row) in lp_rows.iter().enumerate() {
            for &(l, a) in row {
                lp_cols[l].push((i, a));
            }
        }
        let sign = if p.sense == Sense::Maximize { -T::one() } else { T::one() };
        let mut c_blk: Vec<DMatrix<T>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        let mut c_lp = DVector::zeros(nlp);
        for &(v, a) in &p.objective.terms {
            let a = sign * a / c_scale;
            match slots[v.0] {
                Slot::Entry { block, row, col } => {
                    if row == col {
                        c_blk[block][(row, row)] += a;
                    } else {
                        c_blk[block][(row, col)] += a * half;
                        c_blk[block][(col, row)] += a * half;
                    }
                }
                Slot::Lp(l) => c_lp[l] += a,
                Slot::Free(pl, nl) => {
                    c_lp[pl] += a;
                    c_lp[nl] -= a;
                }
            }
        }
        Self { dims, nlp, m, blk: blk_map, lp_rows, lp_cols, b, c_blk, c_lp }
    }

    /// `(⟨A_i, Z⟩)_i` for possibly non-symmetric block matrices.
    fn apply(&self, z: &[DMatrix<T>], zl: &DVector<T>) -> DVector<T> {
        let mut out = DVector::zeros(self.m);
        for (k, rows) in self.blk.iter().enumerate() {
            for (i, part) in rows {
                out[*i] += pair(part, &z[k]);
            }
        }
        for (i, row) in self.lp_rows.iter().enumerate() {
            for &(l, a) in row {
                out[i] += a * zl[l];
            }
        }
        out
    }

    fn adjoint(&self, y: &DVector<T>) -> (Vec<DMatrix<T>>, DVector<T>) {
        let mut blocks: Vec<DMatrix<T>> = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (k, rows) in self.blk.iter().enumerate() {
            for (i, part) in rows {
                let yi = y[*i];
                for &(r, c, v) in part {
                    blocks[k][(r, c)] += yi * v;
                    if r != c {
                        blocks[k][(c, r)] += yi * v;
                    }
                }
            }
        }
        let mut lp = DVector::zeros(self.nlp);
        for (i, row) in self.lp_rows.iter().enumerate() {
            for &(l, a) in row {
                lp[l] += a * y[i];
            }
        }
        (blocks, lp)
    }

    fn nu(&self) -> T {
        T::from_usize_lossy(self.dims.iter().sum::<usize>() + self.nlp)
    }

    /// Schur complement `M_ij = Σ_k tr(A_i X A_j S⁻¹) + Σ_l a_il a_jl x_l/s_l`.
    fn schur(&self, x: &[DMatrix<T>], sinv: &[DMatrix<T>], xl: &DVector<T>, sl: &DVector<T>) -> DMatrix<T> {
        let mut mat = DMatrix::<T>::zeros(self.m, self.m);
        for (k, rows) in self.blk.iter().enumerate() {
            let n = self.dims[k];
            let xk = &x[k];
            let sk = &sinv[k];
            let cols: Vec<Vec<T>> = rows
                .par_iter()
                .map(|(_, part)| {
                    let bj = if part.len() * 4 > n {
                        let mut a = DMatrix::<T>::zeros(n, n);
                        for &(r, c, v) in part {
                            a[(r, c)] += v;
                            if r != c {
                                a[(c, r)] += v;
                            }
                        }
                        xk * a * sk
                    } else {
                        let mut bj = DMatrix::<T>::zeros(n, n);
                        for &(p, q, v) in part {
                            rank_one_add(&mut bj, xk, sk, p, q, v);
                            if p != q {
                                rank_one_add(&mut bj, xk, sk, q, p, v);
                            }
                        }
                        bj
                    };
                    rows.iter().map(|(_, pi)| pair(pi, &bj)).collect()
                })
                .collect();
            for (jj, (j, _)) in rows.iter().enumerate() {
                for (ii, (i, _)) in rows.iter().enumerate() {
                    mat[(*i, *j)] += cols[jj][ii];
                }
            }
        }
        for (l, col) in self.lp_cols.iter().enumerate() {
            let w = xl[l] / sl[l];
            for &(i, a) in col {
                for &(j, b) in col {
                    mat[(i, j)] += a * b * w;
                }
            }
        }
        let half = T::lit(0.5);
        let t = mat.transpose();
        (mat + t) * half
    }
}

/// `Σ v·(Z_rc + Z_cr)` over the symmetric part.
fn pair<T: Real>(part: &BlockPart<T>, z: &DMatrix<T>) -> T {
    part.iter().fold(T::zero(), |acc, &(r, c, v)| {
        if r == c {
            acc + v * z[(r, r)]
        } else {
            acc + v * (z[(r, c)] + z[(c, r)])
        }
    })
}

/// `B += v · X[:, p] ⊗ S⁻¹[q, :]`.
fn rank_one_add<T: Real>(b: &mut DMatrix<T>, x: &DMatrix<T>, sinv: &DMatrix<T>, p: usize, q: usize, v: T) {
    let n = b.nrows();
    for col in 0..n {
        let s = v * sinv[(q, col)];
        if s == T::zero() {
            continue;
        }
        for row in 0..n {
            b[(row, col)] += x[(row, p)] * s;
        }
    }
}

fn sym<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    let t = m.transpose();
    (m + t) * T::lit(0.5)
}

fn frob<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &v| a + v * v).sqrt()
}

fn inner<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (&u, &v)| acc + u * v)
}

fn max_abs<T: Real>(it: impl IntoIterator<Item = T>) -> T {
    it.into_iter().fold(T::zero(), |a, v| a.max(v.abs()))
}

/// Largest `α ≤ 1/...` keeping `X + αΔX` positive semidefinite (may exceed 1).
fn max_step_psd<T: Real>(x: &DMatrix<T>, dx: &DMatrix<T>) -> T {
    let big = T::lit(1e30);
    let Some(ch) = Cholesky::new(x.clone()) else {
        return T::zero();
    };
    let l = ch.l();
    let Some(y) = l.solve_lower_triangular(dx) else {
        return T::zero();
    };
    let Some(z) = l.solve_lower_triangular(&y.transpose()) else {
        return T::zero();
    };
    let lmin = sym(z).symmetric_eigenvalues().min();
    if lmin >= T::zero() {
        big
    } else {
        -T::one() / lmin
    }
}

fn max_step_lp<T: Real>(x: &DVector<T>, dx: &DVector<T>) -> T {
    let mut a = T::lit(1e30);
    for (xi, di) in x.iter().zip(dx.iter()) {
        if *di < T::zero() {
            a = a.min(-*xi / *di);
        }
    }
    a
}

struct Residuals<T: Real> {
    rp: DVector<T>,
    rd: Vec<DMatrix<T>>,
    rdl: DVector<T>,
    pobj: T,
    dobj: T,
    pinf: T,
    dinf: T,
    gap: T,
}

impl<T: Real> Standard<T> {
    fn residuals(&self, pt: &Point<T>, b_norm: T, c_norm: T) -> Residuals<T> {
        let rp = &self.b - self.apply(&pt.x, &pt.xl);
        let (aty, atyl) = self.adjoint(&pt.y);
        let rd: Vec<DMatrix<T>> = (0..self.dims.len()).map(|k| &self.c_blk[k] - &pt.s[k] - &aty[k]).collect();
        let rdl = &self.c_lp - &pt.sl - atyl;
        let pobj = (0..self.dims.len()).fold(T::zero(), |a, k| a + inner(&self.c_blk[k], &pt.x[k])) + self.c_lp.dot(&pt.xl);
        let dobj = self.b.dot(&pt.y);
        let pinf = rp.norm() / (T::one() + b_norm);
        let dn = (rd.iter().fold(T::zero(), |a, m| a + frob(m).powi(2)) + rdl.norm_squared()).sqrt();
        let dinf = dn / (T::one() + c_norm);
        let gap = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());
        Residuals { rp, rd, rdl, pobj, dobj, pinf, dinf, gap }
    }

    /// Solves the Newton system for a given centering target `σμ` and
    /// second-order correction.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        pt: &Point<T>,
        sinv: &[DMatrix<T>],
        chol: &Cholesky<T, nalgebra::Dyn>,
        res: &Residuals<T>,
        sigma_mu: T,
        corr: Option<(&[DMatrix<T>], &DVector<T>)>,
    ) -> Direction<T> {
        let nb = self.dims.len();
        let rc: Vec<DMatrix<T>> = (0..nb)
            .map(|k| {
                let mut t = &sinv[k] * sigma_mu;
                if let Some((cb, _)) = corr {
                    t -= &cb[k] * &sinv[k];
                }
                t - &pt.x[k]
            })
            .collect();
        let rcl = DVector::from_fn(self.nlp, |l, _| {
            let mut v = sigma_mu;
            if let Some((_, cl)) = corr {
                v -= cl[l];
            }
            v / pt.sl[l] - pt.xl[l]
        });
        let xrs: Vec<DMatrix<T>> = (0..nb).map(|k| &pt.x[k] * &res.rd[k] * &sinv[k]).collect();
        let xrsl = DVector::from_fn(self.nlp, |l, _| pt.xl[l] * res.rdl[l] / pt.sl[l]);
        let rhs = &res.rp - self.apply(&rc, &rcl) + self.apply(&xrs, &xrsl);
        let dy = chol.solve(&rhs);
        let (atdy, atdyl) = self.adjoint(&dy);
        let ds: Vec<DMatrix<T>> = (0..nb).map(|k| &res.rd[k] - &atdy[k]).collect();
        let dsl = &res.rdl - atdyl;
        let dx: Vec<DMatrix<T>> = (0..nb).map(|k| sym(&rc[k] - &pt.x[k] * &ds[k] * &sinv[k])).collect();
        let dxl = DVector::from_fn(self.nlp, |l, _| rcl[l] - pt.xl[l] * dsl[l] / pt.sl[l]);
        Direction { dx, dxl, dy, ds, dsl }
    }

    fn step_lengths(&self, pt: &Point<T>, d: &Direction<T>) -> (T, T) {
        let mut ap = max_step_lp(&pt.xl, &d.dxl);
        let mut ad = max_step_lp(&pt.sl, &d.dsl);
        for k in 0..self.dims.len() {
            ap = ap.min(max_step_psd(&pt.x[k], &d.dx[k]));
            ad = ad.min(max_step_psd(&pt.s[k], &d.ds[k]));
        }
        (ap, ad)
    }
}

fn factor<T: Real>(m: &DMatrix<T>) -> Option<Cholesky<T, nalgebra::Dyn>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(ch);
    }
    let diag_max = (0..m.nrows()).fold(T::zero(), |a, i| a.max(m[(i, i)].abs())).max(T::lit(1e-30));
    let mut delta = diag_max * T::lit(1e-14);
    for _ in 0..12 {
        let mut r = m.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += delta;
        }
        if let Some(ch) = Cholesky::new(r) {
            return Some(ch);
        }
        delta *= T::lit(10.0);
    }
    None
}

/// Solves `p` with default options.
pub fn solve<T: Real>(p: &ConicProgram<T>) -> Solution<T> {
    solve_with(p, &SolveOptions::default())
}

pub fn solve_with<T: Real>(p: &ConicProgram<T>, opts: &SolveOptions) -> Solution<T> {
    let (slot_map, nlp) = slots(p);
    let tol = T::lit(opts.tol);

    // Row normalization and redundancy removal.
    let row_scale: Vec<T> = p
        .constraints
        .iter()
        .map(|c| {
            let n = c.terms.iter().fold(T::zero(), |a, t| a + t.1 * t.1).sqrt();
            if n > T::zero() { T::one() / n } else { T::one() }
        })
        .collect();
    let scaled_rows: Vec<(Vec<(VarId, T)>, T)> = p
        .constraints
        .iter()
        .zip(&row_scale)
        .map(|(c, &s)| (c.terms.iter().map(|&(v, a)| (v, a * s)).collect(), c.rhs * s))
        .collect();
    let Some(kept) = independent_rows(&scaled_rows, T::lit(opts.consistency_tol)) else {
        return trivial_infeasible(p, &slot_map);
    };

    let b_raw = kept.iter().fold(T::zero(), |a, &i| a.max(scaled_rows[i].1.abs()));
    let b_scale = b_raw.max(T::one());
    let c_raw = p.objective.terms.iter().fold(T::zero(), |a, t| a.max(t.1.abs()));
    let c_scale = c_raw.max(T::one());
    let sf = Standard::build(p, &slot_map, nlp, &kept, &row_scale, b_scale, c_scale);
    let nb = sf.dims.len();
    let b_norm = sf.b.norm();
    let c_norm = (sf.c_blk.iter().fold(T::zero(), |a, m| a + frob(m).powi(2)) + sf.c_lp.norm_squared()).sqrt();

    let mut pt = initial_point(&sf);
    let sense = if p.sense == Sense::Maximize { -T::one() } else { T::one() };
    let obj_unscale = b_scale * c_scale;
    let constant = p.objective.constant;
    let user_obj = |v: T| sense * v * obj_unscale + constant;

    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut certificate = None;
    let mut best: Option<(T, Point<T>)> = None;
    let mut stalls = 0;
    let mut iterations = 0;
    let (mut last_ap, mut last_ad) = (T::zero(), T::zero());
    let big = T::lit(1e8);

    for iter in 0..=opts.max_iter {
        let res = sf.residuals(&pt, b_norm, c_norm);
        let mu = (0..nb).fold(T::zero(), |a, k| a + inner(&pt.x[k], &pt.s[k])) + pt.xl.dot(&pt.sl);
        let mu = mu / sf.nu().max(T::one());
        history.push(IterationRecord {
            iter,
            primal_objective: user_obj(res.pobj).as_f64(),
            dual_objective: user_obj(res.dobj).as_f64(),
            primal_infeasibility: res.pinf.as_f64(),
            dual_infeasibility: res.dinf.as_f64(),
            mu: mu.as_f64(),
            step_primal: last_ap.as_f64(),
            step_dual: last_ad.as_f64(),
        });
        iterations = iter;
        let merit = res.pinf.max(res.dinf).max(res.gap);
        if best.as_ref().is_none_or(|(m, _)| merit < *m) {
            best = Some((merit, pt.clone()));
        }
        if res.pinf <= tol && res.dinf <= tol && res.gap <= tol {
            status = SolveStatus::Optimal;
            break;
        }
        // Divergence: an exploding dual with positive objective certifies
        // primal infeasibility; an exploding primal with negative objective
        // certifies dual infeasibility.
        let ymax = max_abs(pt.y.iter().copied());
        if ymax > big && res.dobj > T::zero() && res.dobj > ymax * T::lit(1e-3) {
            status = SolveStatus::PrimalInfeasible;
            let yy = pt.y.clone() / res.dobj;
            certificate = Some(expand_duals(p, &kept, &row_scale, &yy, T::one()));
            break;
        }
        let xmax = pt.x.iter().map(|m| max_abs(m.iter().copied())).fold(max_abs(pt.xl.iter().copied()), |a, b| a.max(b));
        if xmax > big && res.pobj < T::zero() && -res.pobj > xmax * T::lit(1e-3) {
            status = SolveStatus::DualInfeasible;
            let scale = -T::one() / res.pobj;
            let xs: Vec<DMatrix<T>> = pt.x.iter().map(|m| m * scale).collect();
            certificate = Some(primal_values(&slot_map, &xs, &(pt.xl.clone() * scale)));
            break;
        }
        if iter == opts.max_iter || stalls >= 5 {
            break;
        }

        let sinv: Option<Vec<DMatrix<T>>> = pt.s.iter().map(|s| Cholesky::new(s.clone()).map(|c| sym(c.inverse()))).collect();
        let Some(sinv) = sinv else { break };
        let schur = sf.schur(&pt.x, &sinv, &pt.xl, &pt.sl);
        let Some(chol) = factor(&schur) else { break };

        // Predictor.
        let pred = sf.direction(&pt, &sinv, &chol, &res, T::zero(), None);
        let (ap, ad) = sf.step_lengths(&pt, &pred);
        let (ap, ad) = (ap.min(T::one()), ad.min(T::one()));
        let mut mu_aff = T::zero();
        for k in 0..nb {
            mu_aff += inner(&(&pt.x[k] + &pred.dx[k] * ap), &(&pt.s[k] + &pred.ds[k] * ad));
        }
        mu_aff += (&pt.xl + &pred.dxl * ap).dot(&(&pt.sl + &pred.dsl * ad));
        mu_aff /= sf.nu().max(T::one());
        let expon = T::one().max(T::lit(3.0) * ap.min(ad).powi(2));
        let sigma = (mu_aff / mu).max(T::zero()).powf(expon).min(T::one());

        // Corrector.
        let corr: Vec<DMatrix<T>> = (0..nb).map(|k| &pred.dx[k] * &pred.ds[k]).collect();
        let corrl = pred.dxl.component_mul(&pred.dsl);
        let dir = sf.direction(&pt, &sinv, &chol, &res, sigma * mu, Some((&corr, &corrl)));
        let (ap_max, ad_max) = sf.step_lengths(&pt, &dir);
        let gamma = T::lit(0.9) + T::lit(0.09) * ap.min(ad);
        let ap = (gamma * ap_max).min(T::one());
        let ad = (gamma * ad_max).min(T::one());

        for k in 0..nb {
            pt.x[k] += &dir.dx[k] * ap;
            pt.s[k] += &dir.ds[k] * ad;
        }
        pt.xl += &dir.dxl * ap;
        pt.sl += &dir.dsl * ad;
        pt.y += &dir.dy * ad;
        last_ap = ap;
        last_ad = ad;
        if ap < T::lit(1e-8) && ad < T::lit(1e-8) {
            stalls += 1;
        } else {
            stalls = 0;
        }
    }

    if status == SolveStatus::MaxIter {
        if let Some((_, b)) = best.take() {
            pt = b;
        }
    }

    // Unscale.
    let xs: Vec<DMatrix<T>> = pt.x.iter().map(|m| m * b_scale).collect();
    let xl = pt.xl.clone() * b_scale;
    let values = primal_values(&slot_map, &xs, &xl);
    let duals = expand_duals(p, &kept, &row_scale, &pt.y, c_scale * sense);
    let dual_blocks: Vec<DMatrix<T>> = pt.s.iter().map(|m| m * c_scale).collect();

    let primal_residual = max_abs(p.constraints.iter().map(|c| {
        c.terms.iter().fold(-c.rhs, |a, &(v, coef)| a + coef * values[v.0])
    }));
    let res = sf.residuals(&pt, b_norm, c_norm);
    let dual_residual = res
        .rd
        .iter()
        .map(|m| max_abs(m.iter().copied()))
        .fold(max_abs(res.rdl.iter().copied()), |a, b| a.max(b))
        * c_scale;
    let primal_objective = p.objective.evaluate(&values);
    let dual_objective = p.constraints.iter().zip(&duals).fold(constant, |a, (c, &y)| a + c.rhs * y);

    Solution {
        status,
        primal_objective,
        dual_objective,
        primal_residual,
        dual_residual,
        relative_gap: res.gap,
        iterations,
        values,
        duals,
        blocks: xs,
        dual_blocks,
        history,
        certificate,
    }
}

fn initial_point<T: Real>(sf: &Standard<T>) -> Point<T> {
    let ten = T::lit(10.0);
    let mut x = Vec::new();
    let mut s = Vec::new();
    for (k, &n) in sf.dims.iter().enumerate() {
        let nn = T::from_usize_lossy(n);
        let mut xi = ten.max(nn.sqrt());
        let mut eta = ten.max(nn.sqrt()).max(frob(&sf.c_blk[k]));
        for (i, part) in &sf.blk[k] {
            let an = part.iter().fold(T::zero(), |a, &(r, c, v)| a + if r == c { v * v } else { T::lit(2.0) * v * v }).sqrt();
            xi = xi.max(nn * (T::one() + sf.b[*i].abs()) / (T::one() + an));
            eta = eta.max(an);
        }
        x.push(DMatrix::identity(n, n) * xi);
        s.push(DMatrix::identity(n, n) * eta);
    }
    let nl = T::from_usize_lossy(sf.nlp.max(1));
    let mut xi = ten.max(nl.sqrt());
    let mut eta = ten.max(nl.sqrt()).max(sf.c_lp.norm());
    for (i, row) in sf.lp_rows.iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        let an = row.iter().fold(T::zero(), |a, t| a + t.1 * t.1).sqrt();
        xi = xi.max(nl * (T::one() + sf.b[i].abs()) / (T::one() + an));
        eta = eta.max(an);
    }
    Point {
        x,
        xl: DVector::from_element(sf.nlp, xi),
        y: DVector::zeros(sf.m),
        s,
        sl: DVector::from_element(sf.nlp, eta),
    }
}

fn primal_values<T: Real>(slots: &[Slot], x: &[DMatrix<T>], xl: &DVector<T>) -> Vec<T> {
    slots
        .iter()
        .map(|s| match *s {
            Slot::Entry { block, row, col } => x[block][(row, col)],
            Slot::Lp(l) => xl[l],
            Slot::Free(a, b) => xl[a] - xl[b],
        })
        .collect()
}

fn expand_duals<T: Real>(p: &ConicProgram<T>, kept: &[usize], row_scale: &[T], y: &DVector<T>, factor: T) -> Vec<T> {
    let mut out = vec![T::zero(); p.constraints.len()];
    for (i, &orig) in kept.iter().enumerate() {
        out[orig] = y[i] * row_scale[orig] * factor;
    }
    out
}

fn trivial_infeasible<T: Real>(p: &ConicProgram<T>, slot_map: &[Slot]) -> Solution<T> {
    let blocks: Vec<DMatrix<T>> = p.blocks.iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect();
    let nan = T::lit(f64::NAN);
    let nlp = slot_map.iter().fold(0, |a, s| match *s {
        Slot::Lp(l) => a.max(l + 1),
        Slot::Free(_, n) => a.max(n + 1),
        _ => a,
    });
    Solution {
        status: SolveStatus::PrimalInfeasible,
        primal_objective: nan,
        dual_objective: nan,
        primal_residual: nan,
        dual_residual: nan,
        relative_gap: nan,
        iterations: 0,
        values: primal_values(slot_map, &blocks, &DVector::zeros(nlp)),
        duals: vec![T::zero(); p.constraints.len()],
        dual_blocks: blocks.clone(),
        blocks,
        history: Vec::new(),
        certificate: None,
    }
}

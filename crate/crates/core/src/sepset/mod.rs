//! Outer approximations of the set of separable operators, and numerical
//! tests of whether an operator is an entanglement witness.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{c, cr, ComplexMatrix, HermitianOperator, SubsystemShape};
use crate::scalar::Real;
use crate::sdp::{solve_with, ConicProgram, HermExpr, Sense, SolveOptions, SolveStatus};

/// Outer relaxation of the separable cone on `V ⊗ B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SepRelaxation {
    /// Positive partial transpose.
    Ppt,
    /// `k` symmetric extensions of the second factor, optionally with every
    /// partial transpose of the extension positive.
    Dps { k: usize, with_ppt: bool },
}

impl SepRelaxation {
    pub fn tag(&self) -> String {
        match *self {
            Self::Ppt => "ppt".into(),
            Self::Dps { k, with_ppt: false } => format!("dps{k}"),
            Self::Dps { k, with_ppt: true } => format!("dps{k}-ppt"),
        }
    }

    /// True when the relaxed set coincides with the separable set for the
    /// given local dimensions (PPT criterion on `2⊗2` and `2⊗3`).
    pub fn is_exact_for(&self, d_v: usize, d_b: usize) -> bool {
        let small = d_v * d_b <= 6;
        match *self {
            Self::Ppt => small,
            Self::Dps { with_ppt, .. } => with_ppt && small,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Dps { k: 0, .. } => Err(Error::InvalidInput("DPS level must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SepRelaxation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for SepRelaxation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "ppt" {
            return Ok(Self::Ppt);
        }
        let rest = s.strip_prefix("dps").ok_or_else(|| Error::InvalidInput(format!("unknown relaxation {s:?}")))?;
        let (num, with_ppt) = match rest.strip_suffix("-ppt") {
            Some(n) => (n, true),
            None => (rest, false),
        };
        let k: usize = num.parse().map_err(|_| Error::InvalidInput(format!("unknown relaxation {s:?}")))?;
        let r = Self::Dps { k, with_ppt };
        r.validate()?;
        Ok(r)
    }
}

/// Isometry `Sym^k(C^d) → (C^d)^{⊗k}` whose columns are the normalized
/// occupation-number states.
pub fn symmetric_isometry<T: Real>(d: usize, k: usize) -> ComplexMatrix<T> {
    let total = d.pow(k as u32);
    let mut occupations: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut order: Vec<Vec<usize>> = Vec::new();
    let mut occ_of = Vec::with_capacity(total);
    for t in 0..total {
        let mut occ = vec![0; d];
        let mut rem = t;
        for _ in 0..k {
            occ[rem % d] += 1;
            rem /= d;
        }
        let next = occupations.len();
        let idx = *occupations.entry(occ.clone()).or_insert_with(|| {
            order.push(occ.clone());
            next
        });
        occ_of.push(idx);
    }
    let mut counts = vec![0usize; order.len()];
    for &i in &occ_of {
        counts[i] += 1;
    }
    let mut p = ComplexMatrix::<T>::zeros(total, order.len());
    for (t, &col) in occ_of.iter().enumerate() {
        p[(t, col)] = cr(T::one() / T::from_usize_lossy(counts[col]).sqrt());
    }
    p
}

fn bipartite_dims(shape: &SubsystemShape) -> Result<(usize, usize)> {
    match shape.dims() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::Dimension(format!("expected a bipartite shape, got {shape}"))),
    }
}

/// Declares a fresh operator in the relaxed set and returns its expression
/// on `shape` (bipartite `V ⊗ B`).
pub fn relaxed_operator<T: Real>(
    prog: &mut ConicProgram<T>,
    label: &str,
    shape: &SubsystemShape,
    rel: SepRelaxation,
) -> Result<HermExpr<T>> {
    rel.validate()?;
    let (d_v, d_b) = bipartite_dims(shape)?;
    match rel {
        SepRelaxation::Ppt => {
            let (_, x) = prog.add_hermitian_block(label, shape.clone());
            prog.add_hermitian_psd(format!("{label}^T_V"), &x.partial_transpose(0)?)?;
            Ok(x)
        }
        SepRelaxation::Dps { k, with_ppt } => {
            let p = symmetric_isometry::<T>(d_b, k);
            let s = p.ncols();
            let (_, xi) = prog.add_hermitian_block(format!("{label}:ext"), SubsystemShape::bipartite(d_v, s));
            if with_ppt {
                prog.add_hermitian_psd(format!("{label}:ext^T_V"), &xi.partial_transpose(0)?)?;
            }
            let lift = ComplexMatrix::<T>::identity(d_v, d_v).kronecker(&p);
            let mut full_dims = vec![d_v];
            full_dims.extend(std::iter::repeat_n(d_b, k));
            let full = xi.conjugate_by(&lift, SubsystemShape::new(full_dims)?)?;
            if with_ppt {
                for last in 1..k {
                    let mut e = full.clone();
                    for sys in (k + 1 - last)..=k {
                        e = e.partial_transpose(sys)?;
                    }
                    prog.add_hermitian_psd(format!("{label}:ext^T_last{last}"), &e)?;
                }
            }
            full.partial_trace(&[0, 1])
        }
    }
}

/// Constrains an existing expression to the relaxed set.
pub fn constrain_separable<T: Real>(
    prog: &mut ConicProgram<T>,
    label: &str,
    expr: &HermExpr<T>,
    rel: SepRelaxation,
) -> Result<()> {
    let x = relaxed_operator(prog, label, expr.shape(), rel)?;
    let mut diff = x;
    diff.add_scaled(expr, -T::one())?;
    let zero = HermitianOperator::zeros(expr.shape().clone());
    prog.add_hermitian_equality(&diff, &zero)?;
    Ok(())
}

/// `min tr[Wρ]` over unit-trace `ρ` in the relaxed set. A nonnegative value
/// certifies that `W` is nonnegative on every separable state.
pub fn min_over_relaxation<T: Real>(w: &HermitianOperator<T>, shape: &SubsystemShape, rel: SepRelaxation) -> Result<T> {
    min_over_relaxation_with(w, shape, rel, &SolveOptions::default())
}

pub fn min_over_relaxation_with<T: Real>(
    w: &HermitianOperator<T>,
    shape: &SubsystemShape,
    rel: SepRelaxation,
    opts: &SolveOptions,
) -> Result<T> {
    if w.dim() != shape.total() {
        return Err(Error::Dimension(format!("operator of dimension {} on shape {shape}", w.dim())));
    }
    let mut prog = ConicProgram::new();
    let rho = relaxed_operator(&mut prog, "rho", shape, rel)?;
    prog.add_constraint(rho.trace(), T::one());
    let w = w.clone().with_shape(shape.clone())?;
    prog.set_objective(rho.trace_with(&w)?, Sense::Minimize);
    let sol = solve_with(&prog, opts);
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver { status: sol.status });
    }
    Ok(sol.objective())
}

fn random_unit<T: Real>(rng: &mut ChaCha8Rng, d: usize) -> DVector<Complex<T>> {
    let v = DVector::from_fn(d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(T::lit(re), T::lit(im))
    });
    let n = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    v.map(|z| z / n)
}

/// `(I ⊗ b)† W (I ⊗ b)` or `(a ⊗ I)† W (a ⊗ I)`.
fn reduce<T: Real>(w: &ComplexMatrix<T>, d_a: usize, d_b: usize, v: &DVector<Complex<T>>, first: bool) -> HermitianOperator<T> {
    let n = if first { d_a } else { d_b };
    let (len, pos): (usize, fn(usize, usize, usize) -> usize) = if first {
        (d_b, |outer, k, d_b| outer * d_b + k)
    } else {
        (d_a, |outer, k, d_b| k * d_b + outer)
    };
    let m = ComplexMatrix::<T>::from_fn(n, n, |i, j| {
        let mut acc = cr(T::zero());
        for k in 0..len {
            for l in 0..len {
                acc += v[k].conj() * w[(pos(i, k, d_b), pos(j, l, d_b))] * v[l];
            }
        }
        acc
    });
    let half = T::lit(0.5);
    HermitianOperator::new((&m + m.adjoint()).map(|z| z * half), SubsystemShape::single(n)).expect("reduced operator is Hermitian")
}

/// See-saw search for `min ⟨a⊗b|W|a⊗b⟩` over product unit vectors. Restart
/// `s` starts from a complex Gaussian vector drawn with seed `s`; each run
/// alternates exact minimization over one factor until the value moves by
/// less than `1e-10` or `iters` sweeps are done. Returns the best value
/// found, an upper bound on the separable minimum.
pub fn min_over_products<T: Real>(w: &HermitianOperator<T>, shape: &SubsystemShape, restarts: usize, iters: usize) -> Result<T> {
    let (d_a, d_b) = bipartite_dims(shape)?;
    if w.dim() != d_a * d_b {
        return Err(Error::Dimension(format!("operator of dimension {} on shape {shape}", w.dim())));
    }
    let wm = w.matrix();
    let best = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut b = random_unit::<T>(&mut rng, d_b);
            let mut last = T::lit(f64::INFINITY);
            let mut best = last;
            for _ in 0..iters.max(1) {
                let (_, a) = reduce(wm, d_a, d_b, &b, true).min_eigenpair();
                let (val, nb) = reduce(wm, d_a, d_b, &a, false).min_eigenpair();
                b = nb;
                best = best.min(val);
                if (last - val).abs() < T::lit(1e-10) {
                    break;
                }
                last = val;
            }
            best.as_f64()
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(T::lit(best))
}

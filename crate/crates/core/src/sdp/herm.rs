//! Affine expressions whose value is a complex Hermitian matrix, and their
//! embedding into real PSD blocks.

use nalgebra::Complex;

use super::program::{BlockId, ConicProgram, ConstraintId, LinExpr, ScalarSign, VarId};
use crate::error::{Error, Result};
use crate::qlinalg::{c, index, ComplexMatrix, HermitianOperator, SubsystemShape};
use crate::scalar::Real;

/// Complex affine scalar `re + i·im`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CExpr<T: Real> {
    pub re: LinExpr<T>,
    pub im: LinExpr<T>,
}

impl<T: Real> CExpr<T> {
    pub fn zero() -> Self {
        Self { re: LinExpr::zero(), im: LinExpr::zero() }
    }

    pub fn constant(z: Complex<T>) -> Self {
        Self { re: LinExpr::constant(z.re), im: LinExpr::constant(z.im) }
    }

    /// `self += z·other`.
    pub fn add_mul(&mut self, other: &Self, z: Complex<T>) {
        if z.re != T::zero() {
            self.re.add_scaled(&other.re, z.re);
            self.im.add_scaled(&other.im, z.re);
        }
        if z.im != T::zero() {
            self.re.add_scaled(&other.im, -z.im);
            self.im.add_scaled(&other.re, z.im);
        }
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    fn compact(&mut self) {
        self.re.compact();
        self.im.compact();
    }
}

/// `n × n` matrix of complex affine entries with Hermitian symmetry
/// (`E_ji = conj(E_ij)`), stored in full row-major order.
#[derive(Clone, Debug)]
pub struct HermExpr<T: Real> {
    shape: SubsystemShape,
    entries: Vec<CExpr<T>>,
}

impl<T: Real> HermExpr<T> {
    pub fn zeros(shape: SubsystemShape) -> Self {
        let n = shape.total();
        Self { shape, entries: vec![CExpr::zero(); n * n] }
    }

    pub fn constant(op: &HermitianOperator<T>) -> Self {
        let n = op.dim();
        let entries = (0..n * n).map(|k| CExpr::constant(op.entry(k / n, k % n))).collect();
        Self { shape: op.shape().clone(), entries }
    }

    /// `v · C` for a scalar variable `v` and constant Hermitian `C`.
    pub fn scalar_times(v: VarId, op: &HermitianOperator<T>) -> Self {
        let n = op.dim();
        let entries = (0..n * n)
            .map(|k| {
                let z = op.entry(k / n, k % n);
                CExpr { re: LinExpr::term(v, z.re), im: LinExpr::term(v, z.im) }
            })
            .map(|mut e| {
                e.compact();
                e
            })
            .collect();
        Self { shape: op.shape().clone(), entries }
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.total()
    }

    pub fn entry(&self, i: usize, j: usize) -> &CExpr<T> {
        &self.entries[i * self.dim() + j]
    }

    fn entry_mut(&mut self, i: usize, j: usize) -> &mut CExpr<T> {
        let n = self.dim();
        &mut self.entries[i * n + j]
    }

    pub fn with_shape(mut self, shape: SubsystemShape) -> Result<Self> {
        if shape.total() != self.dim() {
            return Err(Error::Dimension(format!("cannot view {} as {shape}", self.shape)));
        }
        self.shape = shape;
        Ok(self)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("{} vs {}", self.shape, other.shape)));
        }
        Ok(())
    }

    /// `self += s·other`.
    pub fn add_scaled(&mut self, other: &Self, s: T) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.re.add_scaled(&b.re, s);
            a.im.add_scaled(&b.im, s);
        }
        Ok(())
    }

    pub fn add_constant(&mut self, op: &HermitianOperator<T>, s: T) -> Result<()> {
        self.add_scaled(&Self::constant(op), s)
    }

    pub fn add_scalar_times(&mut self, v: VarId, op: &HermitianOperator<T>, s: T) -> Result<()> {
        self.add_scaled(&Self::scalar_times(v, op), s)
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.re.scale(s);
            e.im.scale(s);
        }
        out
    }

    /// Merges duplicate terms in every entry.
    pub fn compact(&mut self) {
        for e in &mut self.entries {
            e.compact();
        }
    }

    /// `tr_{others}` keeping the factors in `keep` (sorted).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let dims = self.shape.dims();
        for &k in keep {
            if k >= dims.len() {
                return Err(Error::SubsystemIndex { index: k, count: dims.len() });
            }
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let out_shape = if keep.is_empty() {
            SubsystemShape::single(1)
        } else {
            SubsystemShape::new(keep.iter().map(|&k| dims[k]).collect())?
        };
        let mut out = Self::zeros(out_shape);
        let n = self.dim();
        let m = out.dim();
        index::for_each_partial_trace_term(dims, &keep, |r, col, i, j| {
            let src = &self.entries[i * n + j];
            let dst = &mut out.entries[r * m + col];
            dst.re.add_scaled(&src.re, T::one());
            dst.im.add_scaled(&src.im, T::one());
        });
        out.compact();
        Ok(out)
    }

    pub fn partial_transpose(&self, sys: usize) -> Result<Self> {
        let dims = self.shape.dims();
        if sys >= dims.len() {
            return Err(Error::SubsystemIndex { index: sys, count: dims.len() });
        }
        let n = self.dim();
        let entries = (0..n * n)
            .map(|k| {
                let (i, j) = index::partial_transpose_source(dims, sys, k / n, k % n);
                self.entries[i * n + j].clone()
            })
            .collect();
        Ok(Self { shape: self.shape.clone(), entries })
    }

    /// `tr_1[E (ω ⊗ I)]` where factor 0 is contracted against `ω`.
    pub fn contract_first(&self, omega: &HermitianOperator<T>) -> Result<Self> {
        let dims = self.shape.dims();
        if dims.len() < 2 || dims[0] != omega.dim() {
            return Err(Error::Dimension(format!("cannot contract {} with a {}-dim operator", self.shape, omega.dim())));
        }
        let dv = dims[0];
        let out_shape = SubsystemShape::new(dims[1..].to_vec())?;
        let m = out_shape.total();
        let n = self.dim();
        let mut out = Self::zeros(out_shape);
        for r in 0..m {
            for col in 0..m {
                let dst = &mut out.entries[r * m + col];
                for v in 0..dv {
                    for w in 0..dv {
                        let z = omega.entry(w, v);
                        if z.re == T::zero() && z.im == T::zero() {
                            continue;
                        }
                        dst.add_mul(&self.entries[(v * m + r) * n + w * m + col], z);
                    }
                }
            }
        }
        out.compact();
        Ok(out)
    }

    /// `A E A†` for a constant `A` of size `out_shape.total() × n`.
    pub fn conjugate_by(&self, a: &ComplexMatrix<T>, out_shape: SubsystemShape) -> Result<Self> {
        let n = self.dim();
        let m = out_shape.total();
        if a.ncols() != n || a.nrows() != m {
            return Err(Error::Dimension(format!("conjugation by {}x{} on dimension {n}", a.nrows(), a.ncols())));
        }
        let zero = T::zero();
        let rows: Vec<Vec<(usize, Complex<T>)>> = (0..m)
            .map(|p| (0..n).filter_map(|i| {
                let z = a[(p, i)];
                (z.re != zero || z.im != zero).then_some((i, z))
            }).collect())
            .collect();
        let mut out = Self::zeros(out_shape);
        for p in 0..m {
            for q in p..m {
                let mut acc = CExpr::zero();
                for &(i, zi) in &rows[p] {
                    for &(j, zj) in &rows[q] {
                        acc.add_mul(&self.entries[i * n + j], zi * zj.conj());
                    }
                }
                acc.compact();
                if p != q {
                    out.entries[q * m + p] = acc.conj();
                }
                out.entries[p * m + q] = acc;
            }
        }
        Ok(out)
    }

    /// `I_d ⊗ E`.
    pub fn identity_tensor(&self, d: usize) -> Self {
        let n = self.dim();
        let shape = SubsystemShape::single(d).concat(&self.shape);
        let m = d * n;
        let mut out = Self::zeros(shape);
        for k in 0..d {
            for i in 0..n {
                for j in 0..n {
                    out.entries[(k * n + i) * m + k * n + j] = self.entries[i * n + j].clone();
                }
            }
        }
        out
    }

    /// `tr[W E]` (real for Hermitian `W`).
    pub fn trace_with(&self, w: &HermitianOperator<T>) -> Result<LinExpr<T>> {
        let n = self.dim();
        if w.dim() != n {
            return Err(Error::Dimension(format!("trace of {} against {}", self.shape, w.shape())));
        }
        let mut out = LinExpr::zero();
        for i in 0..n {
            for j in 0..n {
                let z = w.entry(j, i);
                let e = &self.entries[i * n + j];
                out.add_scaled(&e.re, z.re);
                out.add_scaled(&e.im, -z.im);
            }
        }
        Ok(out.compacted())
    }

    pub fn trace(&self) -> LinExpr<T> {
        let n = self.dim();
        let mut out = LinExpr::zero();
        for i in 0..n {
            out.add_scaled(&self.entries[i * n + i].re, T::one());
        }
        out.compacted()
    }

    /// Value at a primal point (indexed by `VarId`).
    pub fn evaluate(&self, values: &[T]) -> HermitianOperator<T> {
        let n = self.dim();
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let e = &self.entries[i * n + j];
            c(e.re.evaluate(values), e.im.evaluate(values))
        });
        let half = T::lit(0.5);
        let sym = (&m + m.adjoint()).map(|z| z * half);
        HermitianOperator::new(sym, self.shape.clone()).expect("symmetrized value is Hermitian")
    }
}

/// Real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]`; its spectrum is
/// that of `H` with every eigenvalue doubled.
pub fn embed_hermitian<T: Real>(h: &HermitianOperator<T>) -> nalgebra::DMatrix<T> {
    let n = h.dim();
    nalgebra::DMatrix::from_fn(2 * n, 2 * n, |r, col| {
        let z = h.entry(r % n, col % n);
        match (r < n, col < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Constraint rows of a Hermitian matrix equality: a real-part row for every
/// `i <= j` and an imaginary-part row for every `i < j`.
#[derive(Clone, Debug)]
pub struct HermConstraint {
    n: usize,
    re: Vec<ConstraintId>,
    im: Vec<Option<ConstraintId>>,
}

impl HermConstraint {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Hermitian matrix `F` such that `Σ_rows y_row·row(X) = tr[F·E(X)]`.
    pub fn multiplier<T: Real>(&self, duals: &[T], shape: SubsystemShape) -> HermitianOperator<T> {
        let n = self.n;
        let half = T::lit(0.5);
        let mut m = ComplexMatrix::<T>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let k = i * n + j;
                let yr = duals[self.re[k].0];
                if i == j {
                    m[(i, i)] = c(yr, T::zero());
                } else {
                    let yi = self.im[k].map_or(T::zero(), |id| duals[id.0]);
                    m[(i, j)] = c(yr * half, yi * half);
                    m[(j, i)] = c(yr * half, -yi * half);
                }
            }
        }
        HermitianOperator::new(m, shape).expect("multiplier is Hermitian by construction")
    }
}

impl<T: Real> ConicProgram<T> {
    /// Complex Hermitian PSD variable of size `shape.total()`, realized as
    /// the real symmetric `2n` block `[[A, −B], [B, A]]` read through its
    /// J-average.
    pub fn add_hermitian_block(&mut self, label: impl Into<String>, shape: SubsystemShape) -> (BlockId, HermExpr<T>) {
        let n = shape.total();
        let b = self.add_psd_block(label, 2 * n);
        let half = T::lit(0.5);
        let mut expr = HermExpr::zeros(shape);
        for i in 0..n {
            for j in 0..n {
                let mut re = LinExpr::term(self.entry(b, i, j), half);
                re.add_term(self.entry(b, n + i, n + j), half);
                let mut im = LinExpr::zero();
                if i != j {
                    im.add_term(self.entry(b, n + i, j), half);
                    im.add_term(self.entry(b, i, n + j), -half);
                }
                *expr.entry_mut(i, j) = CExpr { re: re.compacted(), im: im.compacted() };
            }
        }
        (b, expr)
    }

    /// `lhs = rhs` entrywise.
    pub fn add_hermitian_equality(&mut self, lhs: &HermExpr<T>, rhs: &HermitianOperator<T>) -> Result<HermConstraint> {
        let n = lhs.dim();
        if rhs.dim() != n {
            return Err(Error::Dimension(format!("equality between {} and {}", lhs.shape(), rhs.shape())));
        }
        let mut re = vec![ConstraintId(usize::MAX); n * n];
        let mut im = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let e = lhs.entry(i, j);
                let z = rhs.entry(i, j);
                re[i * n + j] = self.add_constraint(e.re.clone(), z.re);
                if i != j {
                    im[i * n + j] = Some(self.add_constraint(e.im.clone(), z.im));
                }
            }
        }
        Ok(HermConstraint { n, re, im })
    }

    /// Constrains `expr ⪰ 0` through a fresh Hermitian block equal to it.
    pub fn add_hermitian_psd(&mut self, label: impl Into<String>, expr: &HermExpr<T>) -> Result<(BlockId, HermConstraint)> {
        let (b, y) = self.add_hermitian_block(label, expr.shape().clone());
        let mut diff = y;
        diff.add_scaled(expr, -T::one())?;
        let zero = HermitianOperator::zeros(expr.shape().clone());
        let h = self.add_hermitian_equality(&diff, &zero)?;
        Ok((b, h))
    }

    /// Nonnegative scalar with a label.
    pub fn add_nonneg(&mut self, label: impl Into<String>) -> VarId {
        self.add_scalar(label, ScalarSign::Nonneg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{ket_from_complex, partial_trace, partial_transpose, tensor};

    fn random_values(n: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn setup(shape: SubsystemShape) -> (ConicProgram<f64>, HermExpr<f64>, Vec<f64>) {
        let mut p = ConicProgram::new();
        let (_, e) = p.add_hermitian_block("X", shape);
        let v = random_values(p.num_vars(), 7);
        (p, e, v)
    }

    #[test]
    fn linear_maps_commute_with_evaluation() {
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        let (_, e, v) = setup(shape.clone());
        let x = e.evaluate(&v);
        let pt = e.partial_trace(&[1]).unwrap().evaluate(&v);
        assert!(pt.max_abs_diff(&partial_trace(&x, &[1]).unwrap()) < 1e-14);
        let tr0 = e.partial_trace(&[0]).unwrap().evaluate(&v);
        assert!(tr0.max_abs_diff(&partial_trace(&x, &[0]).unwrap()) < 1e-14);
        let ptr = e.partial_transpose(0).unwrap().evaluate(&v);
        assert!(ptr.max_abs_diff(&partial_transpose(&x, 0).unwrap()) < 1e-14);

        let w = ket_from_complex::<f64>(&[(0.3, 0.1), (-0.2, 0.9)]);
        let omega = HermitianOperator::projector(&w, SubsystemShape::single(2)).unwrap();
        let got = e.contract_first(&omega).unwrap().evaluate(&v);
        let id3 = HermitianOperator::identity(SubsystemShape::single(3));
        let prod = x.matrix() * tensor(&omega, &id3).matrix();
        let want = partial_trace(&HermitianOperator::new(
            (&prod + prod.adjoint()).map(|z| z * 0.5),
            shape.clone(),
        ).unwrap(), &[1]).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-14);

        let tw = e.trace_with(&tensor(&omega, &id3)).unwrap().evaluate(&v);
        assert!((tw - x.inner(&tensor(&omega, &id3))).abs() < 1e-14);

        let id2 = e.identity_tensor(2).evaluate(&v);
        let want = tensor(&HermitianOperator::identity(SubsystemShape::single(2)), &x);
        assert!(id2.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn conjugation_matches_dense() {
        let (_, e, v) = setup(SubsystemShape::single(3));
        let a = ComplexMatrix::<f64>::from_fn(2, 3, |i, j| c((i + 2 * j) as f64 * 0.3 - 0.5, (i as f64) - 0.2 * j as f64));
        let got = e.conjugate_by(&a, SubsystemShape::single(2)).unwrap().evaluate(&v);
        let x = e.evaluate(&v);
        let want = &a * x.matrix() * a.adjoint();
        assert!((got.matrix() - want).iter().all(|z| z.norm_sqr().sqrt() < 1e-13));
    }

    #[test]
    fn multiplier_reproduces_rowwise_pairing() {
        let mut p = ConicProgram::<f64>::new();
        let (_, e) = p.add_hermitian_block("X", SubsystemShape::single(3));
        let zero = HermitianOperator::zeros(SubsystemShape::single(3));
        let h = p.add_hermitian_equality(&e, &zero).unwrap();
        let y = random_values(p.num_constraints(), 3);
        let v = random_values(p.num_vars(), 4);
        let rowwise: f64 = p
            .constraints()
            .iter()
            .zip(&y)
            .map(|(c, yi)| yi * c.terms.iter().map(|(var, a)| a * v[var.0]).sum::<f64>())
            .sum();
        let f = h.multiplier(&y, SubsystemShape::single(3));
        let paired = f.inner(&e.evaluate(&v));
        assert!((rowwise - paired).abs() < 1e-13);
    }
}

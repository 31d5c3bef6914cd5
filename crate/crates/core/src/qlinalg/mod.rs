//! Dense complex-matrix primitives for finite-dimensional multipartite
//! systems: tensor products, partial traces and transposes, spectra and the
//! generalized Bell basis.

pub mod index;
mod json;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use json::{ComplexMatrixJson, MatrixJson};

/// Dense complex matrix.
pub type ComplexMatrix<T> = DMatrix<Complex<T>>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Ordered local dimensions of a multipartite system, leftmost factor first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Dimension(format!("invalid subsystem dims {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn single(d: usize) -> Self {
        Self::new(vec![d]).expect("positive dimension")
    }

    pub fn bipartite(d_a: usize, d_b: usize) -> Self {
        Self::new(vec![d_a, d_b]).expect("positive dimensions")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn concat(&self, other: &SubsystemShape) -> SubsystemShape {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SubsystemShape { dims }
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.dims.len() {
            return Err(Error::SubsystemIndex { index, count: self.dims.len() });
        }
        Ok(())
    }
}

impl fmt::Display for SubsystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

/// Largest entrywise deviation from Hermiticity, `‖X − X†‖_max`.
pub fn hermitian_defect<T: Real>(m: &ComplexMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let d = m[(i, j)] - m[(j, i)].conj();
            worst = worst.max(d.norm_sqr().sqrt());
        }
    }
    worst
}

fn max_abs<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.norm_sqr().sqrt()))
}

/// A Hermitian operator together with the subsystem structure of the space
/// it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Real> {
    matrix: ComplexMatrix<T>,
    shape: SubsystemShape,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates and symmetrizes `(X + X†)/2`. Matrices whose asymmetry
    /// exceeds the rejection threshold (relative to the largest entry, floor
    /// 1) are refused.
    pub fn new(matrix: ComplexMatrix<T>, shape: SubsystemShape) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if shape.total() != matrix.nrows() {
            return Err(Error::Dimension(format!(
                "shape {shape} does not match matrix dimension {}",
                matrix.nrows()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let defect = hermitian_defect(&matrix);
        let scale = max_abs(&matrix).max(T::one());
        if defect > T::lit(T::HERMITIAN_REJECT) * scale {
            return Err(Error::NotHermitian(defect.as_f64()));
        }
        let half = T::lit(0.5);
        let sym = (&matrix + matrix.adjoint()).map(|z| z * half);
        Ok(Self { matrix: sym, shape })
    }

    /// Builds from a matrix known to be Hermitian up to roundoff, with a
    /// single-factor shape.
    pub fn from_matrix(matrix: ComplexMatrix<T>) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, SubsystemShape::single(n.max(1)))
    }

    pub fn from_real(rows: &[&[f64]], shape: SubsystemShape) -> Result<Self> {
        let n = rows.len();
        let m = ComplexMatrix::<T>::from_fn(n, n, |i, j| cr(T::lit(rows[i][j])));
        Self::new(m, shape)
    }

    pub fn zeros(shape: SubsystemShape) -> Self {
        let n = shape.total();
        Self { matrix: ComplexMatrix::zeros(n, n), shape }
    }

    pub fn identity(shape: SubsystemShape) -> Self {
        let n = shape.total();
        Self { matrix: ComplexMatrix::identity(n, n), shape }
    }

    /// `I/n`.
    pub fn maximally_mixed(shape: SubsystemShape) -> Self {
        let n = T::from_usize_lossy(shape.total());
        Self::identity(shape).scaled(T::one() / n)
    }

    /// `|v⟩⟨v|` for a (not necessarily normalized) vector.
    pub fn projector(v: &DVector<Complex<T>>, shape: SubsystemShape) -> Result<Self> {
        if v.len() != shape.total() {
            return Err(Error::Dimension(format!(
                "vector of length {} does not fit shape {shape}",
                v.len()
            )));
        }
        let m = v * v.adjoint();
        Ok(Self { matrix: m, shape })
    }

    /// Computational-basis diagonal operator.
    pub fn diagonal(values: &[T], shape: SubsystemShape) -> Result<Self> {
        if values.len() != shape.total() {
            return Err(Error::Dimension("diagonal length does not match shape".into()));
        }
        let n = values.len();
        let m = ComplexMatrix::from_fn(n, n, |i, j| if i == j { cr(values[i]) } else { cr(T::zero()) });
        Ok(Self { matrix: m, shape })
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.matrix[(i, j)]
    }

    /// Reinterprets the operator with a different factorization of the same
    /// total dimension.
    pub fn with_shape(mut self, shape: SubsystemShape) -> Result<Self> {
        if shape.total() != self.dim() {
            return Err(Error::Dimension(format!(
                "cannot reshape dimension {} to {shape}",
                self.dim()
            )));
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc + self.matrix[(i, i)].re)
    }

    /// `tr(A B)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                let p = self.matrix[(i, j)] * other.matrix[(j, i)];
                acc += p.re;
            }
        }
        acc
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { matrix: self.matrix.map(|z| z * s), shape: self.shape.clone() }
    }

    /// `U X U†`. `U` must be square of the operator's dimension.
    pub fn conjugate_by(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::Dimension("conjugating matrix has wrong size".into()));
        }
        let m = u * &self.matrix * u.adjoint();
        Self::new(m, self.shape.clone())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.matrix)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut ev: Vec<T> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().first().copied().unwrap_or_else(T::zero)
    }

    /// Smallest eigenvalue and a corresponding unit eigenvector.
    pub fn min_eigenpair(&self) -> (T, DVector<Complex<T>>) {
        let eig = self.matrix.clone().symmetric_eigen();
        let (k, &val) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty operator");
        (val, eig.eigenvectors.column(k).into_owned())
    }

    /// `f(X)` through the spectral decomposition.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Self {
        let eig = self.matrix.clone().symmetric_eigen();
        let v = &eig.eigenvectors;
        let fd = ComplexMatrix::<T>::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j { cr(f(eig.eigenvalues[i])) } else { cr(T::zero()) }
        });
        let m = v * fd * v.adjoint();
        let half = T::lit(0.5);
        Self { matrix: (&m + m.adjoint()).map(|z| z * half), shape: self.shape.clone() }
    }

    pub fn is_psd(&self, tol: T) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `tr(X²)`.
    pub fn purity(&self) -> T {
        self.inner(self)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        tensor(self, other)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        partial_trace(self, keep)
    }

    pub fn partial_transpose(&self, sys: usize) -> Result<Self> {
        partial_transpose(self, sys)
    }
}

impl<'a, T: Real> Add<&'a HermitianOperator<T>> for &'a HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn add(self, rhs: &'a HermitianOperator<T>) -> HermitianOperator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        HermitianOperator { matrix: &self.matrix + &rhs.matrix, shape: self.shape.clone() }
    }
}

impl<'a, T: Real> Sub<&'a HermitianOperator<T>> for &'a HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn sub(self, rhs: &'a HermitianOperator<T>) -> HermitianOperator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        HermitianOperator { matrix: &self.matrix - &rhs.matrix, shape: self.shape.clone() }
    }
}

impl<T: Real> Mul<T> for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn mul(self, rhs: T) -> HermitianOperator<T> {
        self.scaled(rhs)
    }
}

impl<T: Real> Neg for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn neg(self) -> HermitianOperator<T> {
        self.scaled(-T::one())
    }
}

/// Kronecker product with concatenated subsystem shape.
pub fn tensor<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> HermitianOperator<T> {
    HermitianOperator { matrix: a.matrix.kronecker(&b.matrix), shape: a.shape.concat(&b.shape) }
}

/// Traces out every factor not listed in `keep`. An empty `keep` yields the
/// 1×1 operator holding the full trace.
pub fn partial_trace<T: Real>(x: &HermitianOperator<T>, keep: &[usize]) -> Result<HermitianOperator<T>> {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &k in &keep {
        x.shape.check_index(k)?;
    }
    let dims = x.shape.dims();
    let out_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let out_shape = if out_dims.is_empty() {
        SubsystemShape::single(1)
    } else {
        SubsystemShape::new(out_dims)?
    };
    let n = out_shape.total();
    let mut out = ComplexMatrix::<T>::zeros(n, n);
    index::for_each_partial_trace_term(dims, &keep, |r, c, i, j| {
        out[(r, c)] += x.matrix[(i, j)];
    });
    Ok(HermitianOperator { matrix: out, shape: out_shape })
}

/// Transposes the factor `sys` in place.
pub fn partial_transpose<T: Real>(x: &HermitianOperator<T>, sys: usize) -> Result<HermitianOperator<T>> {
    x.shape.check_index(sys)?;
    let dims = x.shape.dims();
    let n = x.dim();
    let m = ComplexMatrix::from_fn(n, n, |r, col| {
        let (i, j) = index::partial_transpose_source(dims, sys, r, col);
        x.matrix[(i, j)]
    });
    Ok(HermitianOperator { matrix: m, shape: x.shape.clone() })
}

/// Smallest eigenvalue of a raw matrix, refusing non-Hermitian input.
pub fn min_eigenvalue<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    Ok(HermitianOperator::from_matrix(m.clone())?.min_eigenvalue())
}

/// Generalized Pauli shift `X|j⟩ = |j+1 mod d⟩`.
pub fn shift<T: Real>(d: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { cr(T::one()) } else { cr(T::zero()) })
}

/// Generalized Pauli clock `Z|j⟩ = ω^j|j⟩`, `ω = e^{2πi/d}`.
pub fn clock<T: Real>(d: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let angle = T::two_pi() * T::from_usize_lossy(j) / T::from_usize_lossy(d);
            c(angle.cos(), angle.sin())
        } else {
            cr(T::zero())
        }
    })
}

/// Heisenberg–Weyl unitary `X^k Z^l`.
pub fn heisenberg_weyl<T: Real>(k: usize, l: usize, d: usize) -> ComplexMatrix<T> {
    let x = shift::<T>(d);
    let z = clock::<T>(d);
    let mut u = ComplexMatrix::<T>::identity(d, d);
    for _ in 0..k {
        u = &x * u;
    }
    let mut zl = ComplexMatrix::<T>::identity(d, d);
    for _ in 0..l {
        zl = &z * zl;
    }
    u * zl
}

/// `|Φ⁺⟩ = Σᵢ|ii⟩/√d`.
pub fn phi_plus<T: Real>(d: usize) -> DVector<Complex<T>> {
    let amp = T::one() / T::from_usize_lossy(d).sqrt();
    DVector::from_fn(d * d, |i, _| if i / d == i % d { cr(amp) } else { cr(T::zero()) })
}

/// Generalized Bell vectors `(U_a ⊗ I)|Φ⁺⟩` with `U_a = X^k Z^l`,
/// `a = k + d·l`, paired with their labelling unitary.
pub fn bell_vectors<T: Real>(d: usize) -> Vec<(DVector<Complex<T>>, ComplexMatrix<T>)> {
    let phi = phi_plus::<T>(d);
    let id = ComplexMatrix::<T>::identity(d, d);
    let mut out = Vec::with_capacity(d * d);
    for l in 0..d {
        for k in 0..d {
            let u = heisenberg_weyl::<T>(k, l, d);
            let v = u.kronecker(&id) * &phi;
            out.push((v, u));
        }
    }
    out
}

/// The `d²` generalized Bell projectors on `d ⊗ d`. For `d = 2` the order is
/// `Φ⁺, Ψ⁺, Φ⁻, Ψ⁻`.
pub fn bell_basis<T: Real>(d: usize) -> Result<Vec<HermitianOperator<T>>> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("Bell basis needs d >= 2, got {d}")));
    }
    let shape = SubsystemShape::bipartite(d, d);
    bell_vectors::<T>(d)
        .into_iter()
        .map(|(v, _)| HermitianOperator::projector(&v, shape.clone()))
        .collect()
}

/// Computational-basis ket `|i⟩` in dimension `d`.
pub fn ket<T: Real>(d: usize, i: usize) -> DVector<Complex<T>> {
    DVector::from_fn(d, |k, _| if k == i { cr(T::one()) } else { cr(T::zero()) })
}

/// Ket from real amplitudes, normalized.
pub fn ket_from_real<T: Real>(amps: &[f64]) -> DVector<Complex<T>> {
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    DVector::from_fn(amps.len(), |k, _| cr(T::lit(amps[k] / norm)))
}

/// Ket from complex amplitudes `(re, im)`, normalized.
pub fn ket_from_complex<T: Real>(amps: &[(f64, f64)]) -> DVector<Complex<T>> {
    let norm = amps.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
    DVector::from_fn(amps.len(), |k, _| c(T::lit(amps[k].0 / norm), T::lit(amps[k].1 / norm)))
}

pub fn kron_vec<T: Real>(a: &DVector<Complex<T>>, b: &DVector<Complex<T>>) -> DVector<Complex<T>> {
    a.kronecker(b)
}

/// Pauli matrices `(X, Y, Z)`.
pub fn paulis<T: Real>() -> [ComplexMatrix<T>; 3] {
    let z0 = cr(T::zero());
    let one = cr(T::one());
    let i = c(T::zero(), T::one());
    [
        ComplexMatrix::from_row_slice(2, 2, &[z0, one, one, z0]),
        ComplexMatrix::from_row_slice(2, 2, &[z0, -i, i, z0]),
        ComplexMatrix::from_row_slice(2, 2, &[one, z0, z0, -one]),
    ]
}

pub fn is_unitary<T: Real>(u: &ComplexMatrix<T>, tol: T) -> bool {
    if u.nrows() != u.ncols() {
        return false;
    }
    let prod = u * u.adjoint();
    let id = ComplexMatrix::<T>::identity(u.nrows(), u.nrows());
    max_abs(&(prod - id)) <= tol
}

/// Rank of a set of Hermitian operators viewed as vectors in the real space
/// of Hermitian matrices (rank of their Gram matrix).
pub fn hermitian_span_rank<T: Real>(ops: &[HermitianOperator<T>], tol: T) -> usize {
    let k = ops.len();
    if k == 0 {
        return 0;
    }
    let gram = DMatrix::<T>::from_fn(k, k, |i, j| ops[i].inner(&ops[j]));
    let ev = gram.symmetric_eigenvalues();
    let top = ev.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    ev.iter().filter(|&&v| v > tol * top.max(T::one())).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type H = HermitianOperator<f64>;

    fn basis_proj(d: usize, i: usize) -> H {
        H::projector(&ket(d, i), SubsystemShape::single(d)).unwrap()
    }

    fn phi_plus_op(d: usize) -> H {
        H::projector(&phi_plus(d), SubsystemShape::bipartite(d, d)).unwrap()
    }

    fn random_herm(n: usize, seed: u64) -> H {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = ComplexMatrix::<f64>::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        H::new(&m + m.adjoint(), SubsystemShape::single(n)).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = H::identity(SubsystemShape::single(2));
        let i4 = tensor(&i2, &i2);
        assert_eq!(i4.shape().dims(), &[2, 2]);
        assert_eq!(i4.max_abs_diff(&H::identity(SubsystemShape::bipartite(2, 2))), 0.0);
    }

    #[test]
    fn basis_tensor_is_diagonal() {
        let t = tensor(&basis_proj(2, 0), &basis_proj(2, 1));
        let expected = H::diagonal(&[0.0, 1.0, 0.0, 0.0], SubsystemShape::bipartite(2, 2)).unwrap();
        assert_eq!(t.max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn tensor_matches_index_loop() {
        let a = random_herm(2, 1);
        let b = random_herm(3, 2);
        let t = tensor(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    for l in 0..3 {
                        let expect = a.entry(i, j) * b.entry(k, l);
                        let got = t.entry(i * 3 + k, j * 3 + l);
                        assert!((expect - got).norm_sqr() < 1e-28);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_bilinear() {
        let a = random_herm(2, 3);
        let b = random_herm(2, 4);
        let cc = random_herm(3, 5);
        let (alpha, beta) = (0.7, -1.3);
        let lhs = tensor(&(&(&a * alpha) + &(&b * beta)), &cc);
        let rhs = &(&tensor(&a, &cc) * alpha) + &(&tensor(&b, &cc) * beta);
        assert!(lhs.max_abs_diff(&rhs) <= 1e-14);
    }

    #[test]
    fn partial_trace_of_product() {
        let rho = &basis_proj(2, 0) * 0.3;
        let sigma = random_herm(3, 7);
        let prod = tensor(&rho, &sigma);
        let out = partial_trace(&prod, &[1]).unwrap();
        assert!(out.max_abs_diff(&(&sigma * rho.trace())) < 1e-14);
    }

    #[test]
    fn partial_trace_of_phi_plus_is_maximally_mixed() {
        for d in 2..5 {
            let out = partial_trace(&phi_plus_op(d), &[1]).unwrap();
            let mm = H::maximally_mixed(SubsystemShape::single(d));
            assert!(out.max_abs_diff(&mm) < 1e-14);
        }
    }

    #[test]
    fn full_trace_is_scalar() {
        let x = random_herm(6, 11).with_shape(SubsystemShape::bipartite(2, 3)).unwrap();
        let t = partial_trace(&x, &[]).unwrap();
        assert_eq!(t.dim(), 1);
        assert_abs_diff_eq!(t.trace(), x.trace(), epsilon = 1e-13);
    }

    #[test]
    fn partial_trace_out_of_range() {
        let x = H::identity(SubsystemShape::bipartite(2, 2));
        assert!(matches!(partial_trace(&x, &[2]), Err(Error::SubsystemIndex { .. })));
        assert!(matches!(partial_transpose(&x, 5), Err(Error::SubsystemIndex { .. })));
    }

    #[test]
    fn partial_trace_associative() {
        let x = random_herm(12, 13).with_shape(SubsystemShape::new(vec![2, 3, 2]).unwrap()).unwrap();
        let once = partial_trace(&x, &[1]).unwrap();
        let twice = partial_trace(&partial_trace(&x, &[1, 2]).unwrap(), &[0]).unwrap();
        assert!(once.max_abs_diff(&twice) < 1e-12);
    }

    #[test]
    fn partial_transpose_of_product() {
        let a = random_herm(2, 21);
        let b = random_herm(2, 22);
        let pt = partial_transpose(&tensor(&a, &b), 0).unwrap();
        let at = H::new(a.matrix().transpose(), a.shape().clone()).unwrap();
        assert!(pt.max_abs_diff(&tensor(&at, &b)) < 1e-14);
    }

    #[test]
    fn phi_plus_partial_transpose_spectrum() {
        let pt = partial_transpose(&phi_plus_op(2), 0).unwrap();
        let ev = pt.eigenvalues();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(min_eigenvalue(pt.matrix()).unwrap(), -0.5, epsilon = 1e-10);
    }

    #[test]
    fn werner_boundary_is_ppt() {
        let p = 1.0 / 3.0;
        let w = &(&phi_plus_op(2) * p) + &H::maximally_mixed(SubsystemShape::bipartite(2, 2)).scaled(1.0 - p);
        let pt = partial_transpose(&w, 0).unwrap();
        assert_abs_diff_eq!(pt.min_eigenvalue(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_transpose_involution_and_trace() {
        let x = random_herm(6, 31).with_shape(SubsystemShape::bipartite(3, 2)).unwrap();
        for sys in 0..2 {
            let once = partial_transpose(&x, sys).unwrap();
            assert_abs_diff_eq!(once.trace(), x.trace(), epsilon = 1e-13);
            assert!(hermitian_defect(once.matrix()) < 1e-14);
            let twice = partial_transpose(&once, sys).unwrap();
            assert_eq!(twice.max_abs_diff(&x), 0.0);
        }
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert_abs_diff_eq!(H::identity(SubsystemShape::single(3)).min_eigenvalue(), 1.0, epsilon = 1e-12);
        let d = H::diagonal(&[3.0, -2.0], SubsystemShape::single(2)).unwrap();
        assert_abs_diff_eq!(d.min_eigenvalue(), -2.0, epsilon = 1e-12);
        let bad = ComplexMatrix::<f64>::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        assert!(matches!(min_eigenvalue(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn hermitian_rejects_asymmetry_but_symmetrizes_roundoff() {
        let m = ComplexMatrix::<f64>::from_row_slice(2, 2, &[cr(1.0), cr(0.5 + 1e-13), cr(0.5), cr(1.0)]);
        let h = H::from_matrix(m).unwrap();
        assert_eq!(hermitian_defect(h.matrix()), 0.0);
        let m = ComplexMatrix::<f64>::from_row_slice(2, 2, &[cr(1.0), cr(0.5 + 1e-6), cr(0.5), cr(1.0)]);
        assert!(H::from_matrix(m).is_err());
    }

    #[test]
    fn bell_basis_qubit_is_standard() {
        let s = 0.5f64.sqrt();
        let expected = [
            [s, 0.0, 0.0, s],  // Φ⁺
            [0.0, s, s, 0.0],  // Ψ⁺
            [s, 0.0, 0.0, -s], // Φ⁻
            [0.0, s, -s, 0.0], // Ψ⁻ (up to phase)
        ];
        let basis = bell_basis::<f64>(2).unwrap();
        for (p, v) in basis.iter().zip(expected) {
            let ket = ket_from_real::<f64>(&v);
            let target = H::projector(&ket, SubsystemShape::bipartite(2, 2)).unwrap();
            assert!(p.max_abs_diff(&target) < 1e-14);
        }
    }

    #[test]
    fn bell_basis_complete_orthogonal_and_maximally_entangled() {
        for d in 2..5 {
            let basis = bell_basis::<f64>(d).unwrap();
            assert_eq!(basis.len(), d * d);
            let mut sum = H::zeros(SubsystemShape::bipartite(d, d));
            for (i, p) in basis.iter().enumerate() {
                sum = &sum + p;
                for (j, q) in basis.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(p.inner(q), expect, epsilon = 1e-12);
                }
                let mm = H::maximally_mixed(SubsystemShape::single(d));
                assert!(partial_trace(p, &[0]).unwrap().max_abs_diff(&mm) < 1e-12);
                assert!(partial_trace(p, &[1]).unwrap().max_abs_diff(&mm) < 1e-12);
            }
            assert!(sum.max_abs_diff(&H::identity(SubsystemShape::bipartite(d, d))) < 1e-12);
        }
        assert!(bell_basis::<f64>(1).is_err());
    }

    #[test]
    fn heisenberg_weyl_unitary() {
        for d in 2..5 {
            for k in 0..d {
                for l in 0..d {
                    assert!(is_unitary(&heisenberg_weyl::<f64>(k, l, d), 1e-12));
                }
            }
        }
    }

    #[test]
    fn single_precision_smoke() {
        let p = HermitianOperator::<f32>::projector(&phi_plus::<f32>(2), SubsystemShape::bipartite(2, 2)).unwrap();
        let pt = partial_transpose(&p, 0).unwrap();
        assert!((pt.min_eigenvalue() + 0.5).abs() < 1e-5);
        let red = partial_trace(&p, &[1]).unwrap();
        assert!((red.entry(0, 0).re - 0.5).abs() < 1e-6);
    }
}

//! Physics of a teleportation experiment: shared states, verifier inputs,
//! Alice's measurement with Bob's corrections, and the resulting assemblage
//! of unnormalised conditional states.

mod classical;
mod json;
mod named;
pub mod random;
mod states;

use crate::error::{Error, Result};
use crate::qlinalg::{
    bell_vectors, hermitian_span_rank, index, is_unitary, phi_plus, tensor, ComplexMatrix, HermitianOperator,
    SubsystemShape,
};
use crate::scalar::Real;

pub use classical::{classical_assemblage, ClassicalStrategy};
pub use json::AssemblageJson;
pub use named::{named_scenario, InputsKind, MeasurementKind, Scenario, SCENARIO_IDS};
pub use states::{noisy_phi_plus_01, standard_qubit_inputs, tiles_inputs, tiles_state, tiles_vectors, werner_state};

/// Verifier inputs `ω_x`, all on the same space.
#[derive(Clone, Debug)]
pub struct InputEnsemble<T: Real> {
    inputs: Vec<HermitianOperator<T>>,
    labels: Vec<String>,
    tomographically_complete: bool,
}

impl<T: Real> InputEnsemble<T> {
    pub fn new(inputs: Vec<HermitianOperator<T>>, labels: Vec<String>) -> Result<Self> {
        let Some(first) = inputs.first() else {
            return Err(Error::InvalidInput("empty input ensemble".into()));
        };
        let d = first.dim();
        if labels.len() != inputs.len() {
            return Err(Error::InvalidInput("one label per input required".into()));
        }
        for (x, w) in inputs.iter().enumerate() {
            if w.dim() != d {
                return Err(Error::Dimension(format!("input {x} has dimension {}, expected {d}", w.dim())));
            }
            if (w.trace() - T::one()).abs() > T::tol(1e-12) {
                return Err(Error::InvalidInput(format!("input {x} has trace {}", w.trace())));
            }
            if !w.is_psd(T::tol(1e-12)) {
                return Err(Error::InvalidInput(format!("input {x} is not PSD")));
            }
        }
        let complete = hermitian_span_rank(&inputs, T::tol(1e-10)) == d * d;
        let inputs = inputs
            .into_iter()
            .map(|w| w.with_shape(SubsystemShape::single(d)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { inputs, labels, tomographically_complete: complete })
    }

    pub fn unlabeled(inputs: Vec<HermitianOperator<T>>) -> Result<Self> {
        let labels = (0..inputs.len()).map(|x| format!("w{x}")).collect();
        Self::new(inputs, labels)
    }

    pub fn inputs(&self) -> &[HermitianOperator<T>] {
        &self.inputs
    }

    pub fn input(&self, x: usize) -> &HermitianOperator<T> {
        &self.inputs[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].dim()
    }

    pub fn is_tomographically_complete(&self) -> bool {
        self.tomographically_complete
    }

    pub fn is_pure(&self, x: usize) -> bool {
        (self.inputs[x].purity() - T::one()).abs() <= T::tol(1e-9)
    }
}

/// Alice's joint measurement on `V ⊗ A` and the correction Bob applies for
/// each outcome (if one is defined).
#[derive(Clone, Debug)]
pub struct Measurement<T: Real> {
    elements: Vec<HermitianOperator<T>>,
    corrections: Vec<Option<ComplexMatrix<T>>>,
    d: usize,
}

impl<T: Real> Measurement<T> {
    pub fn new(elements: Vec<HermitianOperator<T>>, corrections: Vec<Option<ComplexMatrix<T>>>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidInput("measurement without elements".into()));
        };
        let n = first.dim();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::Dimension(format!("measurement on dimension {n} is not V⊗A with d_V = d_A")));
        }
        if corrections.len() != elements.len() {
            return Err(Error::InvalidInput("one correction slot per outcome required".into()));
        }
        let shape = SubsystemShape::bipartite(d, d);
        let mut sum = HermitianOperator::zeros(shape.clone());
        let mut els = Vec::with_capacity(elements.len());
        for (a, m) in elements.into_iter().enumerate() {
            if m.dim() != n {
                return Err(Error::Dimension(format!("element {a} has dimension {}", m.dim())));
            }
            if !m.is_psd(T::tol(1e-12)) {
                return Err(Error::InvalidInput(format!("element {a} is not PSD")));
            }
            let m = m.with_shape(shape.clone())?;
            sum = &sum + &m;
            els.push(m);
        }
        let defect = sum.max_abs_diff(&HermitianOperator::identity(shape));
        if defect > T::tol(1e-12) {
            return Err(Error::InvalidInput(format!("elements do not sum to identity (defect {defect})")));
        }
        for (a, u) in corrections.iter().enumerate() {
            if let Some(u) = u {
                if u.nrows() != d || !is_unitary(u, T::tol(1e-12)) {
                    return Err(Error::InvalidInput(format!("correction {a} is not a {d}x{d} unitary")));
                }
            }
        }
        Ok(Self { elements: els, corrections, d })
    }

    /// The `d²` generalized Bell projectors with Heisenberg–Weyl corrections.
    pub fn full_bsm(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("Bell measurement needs d >= 2, got {d}")));
        }
        let shape = SubsystemShape::bipartite(d, d);
        let mut elements = Vec::new();
        let mut corrections = Vec::new();
        for (v, u) in bell_vectors::<T>(d) {
            elements.push(HermitianOperator::projector(&v, shape.clone())?);
            corrections.push(Some(u));
        }
        Self::new(elements, corrections)
    }

    /// `{Φ⁺, I − Φ⁺}`; only the first outcome carries a correction
    /// (the identity).
    pub fn partial_bsm(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("Bell measurement needs d >= 2, got {d}")));
        }
        let shape = SubsystemShape::bipartite(d, d);
        let phi = HermitianOperator::projector(&phi_plus::<T>(d), shape.clone())?;
        let rest = &HermitianOperator::identity(shape) - &phi;
        Self::new(vec![phi, rest], vec![Some(ComplexMatrix::identity(d, d)), None])
    }

    pub fn elements(&self) -> &[HermitianOperator<T>] {
        &self.elements
    }

    pub fn corrections(&self) -> &[Option<ComplexMatrix<T>>] {
        &self.corrections
    }

    pub fn num_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

/// Table of unnormalised conditional states `σ_{a|ω_x}` on Bob's system.
#[derive(Clone, Debug)]
pub struct Assemblage<T: Real> {
    members: Vec<Vec<HermitianOperator<T>>>,
    d_v: usize,
    d_b: usize,
    ensemble: InputEnsemble<T>,
}

/// No-signalling residual accepted when building an assemblage from
/// external data.
pub const NO_SIGNALLING_ACCEPT: f64 = 1e-8;

impl<T: Real> Assemblage<T> {
    /// `members[a][x]`. Validates positivity, normalization and
    /// no-signalling.
    pub fn new(members: Vec<Vec<HermitianOperator<T>>>, ensemble: InputEnsemble<T>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("assemblage without outcomes".into()));
        }
        let nx = ensemble.len();
        let d_b = members[0].first().map(|m| m.dim()).unwrap_or(0);
        if d_b == 0 {
            return Err(Error::InvalidInput("assemblage without members".into()));
        }
        let shape = SubsystemShape::single(d_b);
        let mut out = Vec::with_capacity(members.len());
        for (a, row) in members.into_iter().enumerate() {
            if row.len() != nx {
                return Err(Error::Dimension(format!("outcome {a} has {} inputs, ensemble has {nx}", row.len())));
            }
            let mut r = Vec::with_capacity(nx);
            for (x, m) in row.into_iter().enumerate() {
                if m.dim() != d_b {
                    return Err(Error::Dimension(format!("member ({a},{x}) has dimension {}", m.dim())));
                }
                if m.min_eigenvalue() < -T::tol(1e-10) {
                    return Err(Error::InvalidInput(format!("member ({a},{x}) is not PSD")));
                }
                r.push(m.with_shape(shape.clone())?);
            }
            out.push(r);
        }
        let asm = Self { members: out, d_v: ensemble.dim(), d_b, ensemble };
        for x in 0..nx {
            let t = (0..asm.num_outcomes()).fold(T::zero(), |s, a| s + asm.members[a][x].trace());
            if (t - T::one()).abs() > T::tol(1e-10) {
                return Err(Error::InvalidInput(format!("members for input {x} have total trace {t}")));
            }
        }
        let res = asm.no_signalling_residual();
        if res > T::tol(NO_SIGNALLING_ACCEPT) {
            return Err(Error::NoSignalling(res.as_f64()));
        }
        Ok(asm)
    }

    pub fn num_outcomes(&self) -> usize {
        self.members.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.ensemble.len()
    }

    pub fn member(&self, a: usize, x: usize) -> &HermitianOperator<T> {
        &self.members[a][x]
    }

    pub fn members(&self) -> &[Vec<HermitianOperator<T>>] {
        &self.members
    }

    /// `(d_V, d_B)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.d_v, self.d_b)
    }

    pub fn ensemble(&self) -> &InputEnsemble<T> {
        &self.ensemble
    }

    pub fn probability(&self, a: usize, x: usize) -> T {
        self.members[a][x].trace()
    }

    fn input_marginal(&self, x: usize) -> HermitianOperator<T> {
        let mut s = HermitianOperator::zeros(SubsystemShape::single(self.d_b));
        for row in &self.members {
            s = &s + &row[x];
        }
        s
    }

    /// Bob's reduced state reconstructed from the data: the x-average of
    /// `Σ_a σ_{a|ω_x}`.
    pub fn bob_marginal(&self) -> HermitianOperator<T> {
        let nx = self.num_inputs();
        let mut s = HermitianOperator::zeros(SubsystemShape::single(self.d_b));
        for x in 0..nx {
            s = &s + &self.input_marginal(x);
        }
        s.scaled(T::one() / T::from_usize_lossy(nx))
    }

    /// `max_x ‖Σ_a σ_{a|ω_x} − ρ^B‖_max` with `ρ^B` the x-average.
    pub fn no_signalling_residual(&self) -> T {
        let rho = self.bob_marginal();
        (0..self.num_inputs()).fold(T::zero(), |acc, x| acc.max(self.input_marginal(x).max_abs_diff(&rho)))
    }

    /// `(σ_{a|ω_x} + r·I/(o_A d_B)) / (1 + r)`.
    pub fn mixed_with_noise(&self, r: T) -> Result<Self> {
        let oa = T::from_usize_lossy(self.num_outcomes());
        let noise = HermitianOperator::maximally_mixed(SubsystemShape::single(self.d_b)).scaled(r / oa);
        let k = T::one() / (T::one() + r);
        let members = self
            .members
            .iter()
            .map(|row| row.iter().map(|m| (m + &noise).scaled(k)).collect())
            .collect();
        Self::new(members, self.ensemble.clone())
    }
}

/// Partial trace of a general (not necessarily Hermitian) square matrix.
fn partial_trace_raw<T: Real>(m: &ComplexMatrix<T>, dims: &[usize], keep: &[usize]) -> ComplexMatrix<T> {
    let n: usize = keep.iter().map(|&k| dims[k]).product();
    let mut out = ComplexMatrix::<T>::zeros(n, n);
    index::for_each_partial_trace_term(dims, keep, |r, c, i, j| out[(r, c)] += m[(i, j)]);
    out
}

fn check_state<T: Real>(rho: &HermitianOperator<T>, meas: &Measurement<T>) -> Result<usize> {
    let d = meas.dim();
    let n = rho.dim();
    if n % d != 0 || n == 0 {
        return Err(Error::Dimension(format!("state of dimension {n} cannot be split as A⊗B with d_A = {d}")));
    }
    Ok(n / d)
}

/// `σ_{a|ω_x} = tr_{VA}[(M_a ⊗ I)(ω_x ⊗ ρ^{AB})]`.
pub fn make_assemblage<T: Real>(rho: &HermitianOperator<T>, meas: &Measurement<T>, ens: &InputEnsemble<T>) -> Result<Assemblage<T>> {
    let d = meas.dim();
    if ens.dim() != d {
        return Err(Error::Dimension(format!("inputs live on dimension {}, measurement expects {d}", ens.dim())));
    }
    let d_b = check_state(rho, meas)?;
    let rho = rho.clone().with_shape(SubsystemShape::bipartite(d, d_b))?;
    let id_b = HermitianOperator::<T>::identity(SubsystemShape::single(d_b));
    let dims = [d, d, d_b];
    let lifted: Vec<ComplexMatrix<T>> = meas.elements().iter().map(|m| tensor(m, &id_b).into_matrix()).collect();
    let mut members = vec![Vec::with_capacity(ens.len()); meas.num_outcomes()];
    for w in ens.inputs() {
        let joint = tensor(w, &rho);
        for (a, m) in lifted.iter().enumerate() {
            let prod = m * joint.matrix();
            let sigma = partial_trace_raw(&prod, &dims, &[2]);
            members[a].push(HermitianOperator::new(sigma, SubsystemShape::single(d_b))?);
        }
    }
    Assemblage::new(members, ens.clone())
}

/// `M_a^{VB} = tr_A[(M_a^{VA} ⊗ I^B)(I^V ⊗ ρ^{AB})]`, evaluated entrywise.
pub fn channel_operators<T: Real>(rho: &HermitianOperator<T>, meas: &Measurement<T>) -> Result<Vec<HermitianOperator<T>>> {
    let d = meas.dim();
    let d_b = check_state(rho, meas)?;
    let shape = SubsystemShape::bipartite(d, d_b);
    let r = rho.matrix();
    let n = d * d_b;
    meas.elements()
        .iter()
        .map(|m| {
            let mm = m.matrix();
            let out = ComplexMatrix::<T>::from_fn(n, n, |row, col| {
                let (v, b) = (row / d_b, row % d_b);
                let (v2, b2) = (col / d_b, col % d_b);
                let mut acc = crate::qlinalg::c(T::zero(), T::zero());
                for a in 0..d {
                    for a2 in 0..d {
                        acc += mm[(v * d + a, v2 * d + a2)] * r[(a2 * d_b + b, a * d_b + b2)];
                    }
                }
                acc
            });
            HermitianOperator::new(out, shape.clone())
        })
        .collect()
}

/// `tr_V[M^{VB}(ω ⊗ I)]`.
pub fn apply_channel_operator<T: Real>(m: &HermitianOperator<T>, omega: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let dv = omega.dim();
    let n = m.dim();
    if n % dv != 0 {
        return Err(Error::Dimension(format!("channel operator of dimension {n} with input dimension {dv}")));
    }
    let d_b = n / dv;
    let id_b = HermitianOperator::<T>::identity(SubsystemShape::single(d_b));
    let prod = m.matrix() * tensor(omega, &id_b).matrix();
    HermitianOperator::new(partial_trace_raw(&prod, &[dv, d_b], &[1]), SubsystemShape::single(d_b))
}

/// `F̄ = (1/|x|) Σ_{a,x} ⟨ω_x| U_a σ_{a|ω_x} U_a† |ω_x⟩` on unnormalised
/// members.
pub fn average_fidelity<T: Real>(asm: &Assemblage<T>, corrections: &[Option<ComplexMatrix<T>>]) -> Result<T> {
    let ens = asm.ensemble();
    if corrections.len() != asm.num_outcomes() {
        return Err(Error::Dimension(format!(
            "{} corrections for {} outcomes",
            corrections.len(),
            asm.num_outcomes()
        )));
    }
    let (d_v, d_b) = asm.dims();
    if d_v != d_b {
        return Err(Error::Dimension("average fidelity needs d_V = d_B".into()));
    }
    for x in 0..ens.len() {
        if !ens.is_pure(x) {
            return Err(Error::MixedInput(x));
        }
    }
    let mut total = T::zero();
    for (a, u) in corrections.iter().enumerate() {
        for x in 0..ens.len() {
            let sigma = asm.member(a, x);
            let Some(u) = u else {
                if sigma.trace() > T::tol(1e-12) {
                    return Err(Error::MissingCorrection(a));
                }
                continue;
            };
            total += ens.input(x).inner(&sigma.conjugate_by(u)?);
        }
    }
    Ok(total / T::from_usize_lossy(ens.len()))
}

//! Random states, POVMs and classical strategies for property tests and
//! negative controls.

use rand::Rng;
use rand_distr::StandardNormal;

use super::ClassicalStrategy;
use crate::qlinalg::{c, ComplexMatrix, HermitianOperator, SubsystemShape};
use crate::scalar::Real;

fn ginibre<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(T::lit(re), T::lit(im))
    })
}

fn gram<T: Real>(g: &ComplexMatrix<T>) -> HermitianOperator<T> {
    let m = g * g.adjoint();
    HermitianOperator::new(m, SubsystemShape::single(g.nrows())).expect("G G† is Hermitian")
}

/// Full-rank density matrix from the induced (Hilbert–Schmidt) measure.
pub fn random_state<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator<T> {
    let p = gram(&ginibre::<T, R>(rng, d));
    let t = p.trace();
    p.scaled(T::one() / t)
}

/// `o`-outcome POVM `S^{-1/2} G_a S^{-1/2}` with `S = Σ_a G_a`.
pub fn random_povm<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize, o: usize) -> Vec<HermitianOperator<T>> {
    let parts: Vec<HermitianOperator<T>> = (0..o).map(|_| gram(&ginibre::<T, R>(rng, d))).collect();
    let mut s = HermitianOperator::zeros(SubsystemShape::single(d));
    for p in &parts {
        s = &s + p;
    }
    let inv_sqrt = s.map_spectrum(|v| T::one() / v.sqrt());
    parts.iter().map(|p| p.conjugate_by(inv_sqrt.matrix()).expect("square")).collect()
}

/// Strategy with `n_lambda` hidden values, random weights, responses and
/// preparations.
pub fn random_strategy<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    d_v: usize,
    d_b: usize,
    outcomes: usize,
    n_lambda: usize,
) -> ClassicalStrategy<T> {
    let raw: Vec<f64> = (0..n_lambda).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<T> = raw.iter().map(|w| T::lit(w / total)).collect();
    // Absorb rounding so the weights sum to one in the working precision.
    let rest = weights[1..].iter().fold(T::zero(), |a, &w| a + w);
    weights[0] = T::one() - rest;
    let responses = (0..n_lambda).map(|_| random_povm(rng, d_v, outcomes)).collect();
    let preparations = (0..n_lambda).map(|_| random_state(rng, d_b)).collect();
    ClassicalStrategy::new(weights, responses, preparations).expect("random strategy is valid")
}

use nalgebra::{Complex, DVector};

use super::InputEnsemble;
use crate::error::{Error, Result};
use crate::qlinalg::{ket, ket_from_complex, ket_from_real, kron_vec, phi_plus, HermitianOperator, SubsystemShape};
use crate::scalar::Real;

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("mixing parameter p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// `p|Φ⁺⟩⟨Φ⁺| + (1 − p)I/4`.
pub fn werner_state<T: Real>(p: f64) -> Result<HermitianOperator<T>> {
    check_p(p)?;
    let shape = SubsystemShape::bipartite(2, 2);
    let phi = HermitianOperator::projector(&phi_plus::<T>(2), shape.clone())?;
    let noise = HermitianOperator::maximally_mixed(shape);
    Ok(&phi.scaled(T::lit(p)) + &noise.scaled(T::lit(1.0 - p)))
}

/// `p|Φ⁺⟩⟨Φ⁺| + (1 − p)|01⟩⟨01|`.
pub fn noisy_phi_plus_01<T: Real>(p: f64) -> Result<HermitianOperator<T>> {
    check_p(p)?;
    let shape = SubsystemShape::bipartite(2, 2);
    let phi = HermitianOperator::projector(&phi_plus::<T>(2), shape.clone())?;
    let v01 = kron_vec(&ket::<T>(2, 0), &ket::<T>(2, 1));
    let noise = HermitianOperator::projector(&v01, shape)?;
    Ok(&phi.scaled(T::lit(p)) + &noise.scaled(T::lit(1.0 - p)))
}

/// The five product vectors of the tiles unextendible product basis on
/// `3 ⊗ 3`.
pub fn tiles_vectors<T: Real>() -> Vec<DVector<Complex<T>>> {
    let k = |i| ket::<T>(3, i);
    let minus01 = ket_from_real::<T>(&[1.0, -1.0, 0.0]);
    let minus12 = ket_from_real::<T>(&[0.0, 1.0, -1.0]);
    let uniform = ket_from_real::<T>(&[1.0, 1.0, 1.0]);
    vec![
        kron_vec(&k(0), &minus01),
        kron_vec(&k(2), &minus12),
        kron_vec(&minus01, &k(2)),
        kron_vec(&minus12, &k(0)),
        kron_vec(&uniform, &uniform),
    ]
}

/// `(I − Σᵢ|φᵢ⟩⟨φᵢ|)/4`, bound entangled.
pub fn tiles_state<T: Real>() -> HermitianOperator<T> {
    let shape = SubsystemShape::bipartite(3, 3);
    let mut rest = HermitianOperator::identity(shape.clone());
    for v in tiles_vectors::<T>() {
        rest = &rest - &HermitianOperator::projector(&v, shape.clone()).expect("9-dim vector");
    }
    rest.scaled(T::lit(0.25))
}

fn pure<T: Real>(v: DVector<Complex<T>>) -> HermitianOperator<T> {
    let d = v.len();
    HermitianOperator::projector(&v, SubsystemShape::single(d)).expect("vector fits its own dimension")
}

/// Eigenstates of X, Y, Z: `|+⟩, |−⟩, |+i⟩, |−i⟩, |0⟩, |1⟩`.
pub fn standard_qubit_inputs<T: Real>() -> InputEnsemble<T> {
    let inputs = vec![
        pure(ket_from_real::<T>(&[1.0, 1.0])),
        pure(ket_from_real::<T>(&[1.0, -1.0])),
        pure(ket_from_complex::<T>(&[(1.0, 0.0), (0.0, 1.0)])),
        pure(ket_from_complex::<T>(&[(1.0, 0.0), (0.0, -1.0)])),
        pure(ket::<T>(2, 0)),
        pure(ket::<T>(2, 1)),
    ];
    let labels = ["+", "-", "+i", "-i", "0", "1"].iter().map(|s| s.to_string()).collect();
    InputEnsemble::new(inputs, labels).expect("standard inputs are valid")
}

/// `|0⟩, |2⟩, (|0⟩−|1⟩)/√2, (|1⟩−|2⟩)/√2, (|0⟩+|1⟩+|2⟩)/√3, I/3`.
pub fn tiles_inputs<T: Real>() -> InputEnsemble<T> {
    let inputs = vec![
        pure(ket::<T>(3, 0)),
        pure(ket::<T>(3, 2)),
        pure(ket_from_real::<T>(&[1.0, -1.0, 0.0])),
        pure(ket_from_real::<T>(&[0.0, 1.0, -1.0])),
        pure(ket_from_real::<T>(&[1.0, 1.0, 1.0])),
        HermitianOperator::maximally_mixed(SubsystemShape::single(3)),
    ];
    let labels = ["0", "2", "0-1", "1-2", "uniform", "mixed"].iter().map(|s| s.to_string()).collect();
    InputEnsemble::new(inputs, labels).expect("tiles inputs are valid")
}

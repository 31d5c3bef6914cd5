//! Certification of teleportation data: witnesses, robustness measures and
//! classical bounds.

mod robustness;
mod witness;

pub use robustness::{
    classical_bound, classical_bound_with, entanglement_random_robustness, entanglement_random_robustness_with,
    teleportation_constraint_residual, teleportation_robustness, teleportation_robustness_dual,
    teleportation_robustness_dual_with, teleportation_robustness_with, Certificate, ClassicalBound, RobustnessResult,
    SolveDiagnostics, WitnessCheck,
};
pub use witness::{
    average_fidelity_witness, builtin_witness_table1, builtin_witness_table2, check_dual_witness, evaluate_witness,
    DetectionDirection, TeleportationWitness, WitnessJson, TILES_EPSILON_MAX,
};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower bound on the teleportation robustness implied by an average
/// fidelity `f_tel` when classical strategies reach at most `f_cl`.
pub fn fidelity_robustness_bound<T: Real>(f_tel: T, f_cl: T, d: usize) -> Result<T> {
    let inv_d = T::one() / T::from_usize_lossy(d);
    if d == 0 || f_cl <= inv_d {
        return Err(Error::InvalidInput(format!("classical fidelity {f_cl} must exceed 1/d = {inv_d}")));
    }
    Ok((f_tel - f_cl) / (f_cl - inv_d))
}

#[cfg(test)]
mod tests;

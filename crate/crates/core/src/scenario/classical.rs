use super::{Assemblage, InputEnsemble};
use crate::error::{Error, Result};
use crate::qlinalg::{tensor, HermitianOperator, SubsystemShape};
use crate::scalar::Real;

/// Shared-randomness scheme: with probability `p_λ` Alice answers with the
/// POVM `{M_{a|λ}}` on the input and Bob prepares `ρ_λ`.
#[derive(Clone, Debug)]
pub struct ClassicalStrategy<T: Real> {
    weights: Vec<T>,
    responses: Vec<Vec<HermitianOperator<T>>>,
    preparations: Vec<HermitianOperator<T>>,
}

impl<T: Real> ClassicalStrategy<T> {
    pub fn new(
        weights: Vec<T>,
        responses: Vec<Vec<HermitianOperator<T>>>,
        preparations: Vec<HermitianOperator<T>>,
    ) -> Result<Self> {
        let n = weights.len();
        if n == 0 || responses.len() != n || preparations.len() != n {
            return Err(Error::InvalidInput("weights, responses and preparations must have equal nonzero length".into()));
        }
        let total = weights.iter().fold(T::zero(), |a, &w| a + w);
        if weights.iter().any(|&w| w < T::zero()) || (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidInput("weights must be a probability distribution".into()));
        }
        let o = responses[0].len();
        let d_v = responses[0].first().map(|m| m.dim()).unwrap_or(0);
        let d_b = preparations[0].dim();
        for (l, povm) in responses.iter().enumerate() {
            if povm.len() != o || o == 0 {
                return Err(Error::InvalidInput(format!("response {l} has the wrong number of outcomes")));
            }
            let mut sum = HermitianOperator::zeros(SubsystemShape::single(d_v));
            for m in povm {
                if m.dim() != d_v || !m.is_psd(T::tol(1e-12)) {
                    return Err(Error::InvalidInput(format!("response {l} is not a POVM")));
                }
                sum = &sum + m;
            }
            if sum.max_abs_diff(&HermitianOperator::identity(SubsystemShape::single(d_v))) > T::tol(1e-12) {
                return Err(Error::InvalidInput(format!("response {l} does not sum to identity")));
            }
        }
        for (l, rho) in preparations.iter().enumerate() {
            if rho.dim() != d_b || !rho.is_psd(T::tol(1e-12)) || (rho.trace() - T::one()).abs() > T::tol(1e-12) {
                return Err(Error::InvalidInput(format!("preparation {l} is not a state")));
            }
        }
        Ok(Self { weights, responses, preparations })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn responses(&self) -> &[Vec<HermitianOperator<T>>] {
        &self.responses
    }

    pub fn preparations(&self) -> &[HermitianOperator<T>] {
        &self.preparations
    }

    pub fn num_outcomes(&self) -> usize {
        self.responses[0].len()
    }

    /// Separable channel operators `Σ_λ p_λ M_{a|λ} ⊗ ρ_λ`.
    pub fn channel_operators(&self) -> Vec<HermitianOperator<T>> {
        (0..self.num_outcomes())
            .map(|a| {
                let mut acc: Option<HermitianOperator<T>> = None;
                for (l, &p) in self.weights.iter().enumerate() {
                    let term = tensor(&self.responses[l][a], &self.preparations[l]).scaled(p);
                    acc = Some(match acc {
                        None => term,
                        Some(s) => &s + &term,
                    });
                }
                acc.expect("at least one λ")
            })
            .collect()
    }
}

/// `σ_{a|ω_x} = Σ_λ p_λ tr[M_{a|λ} ω_x] ρ_λ`.
pub fn classical_assemblage<T: Real>(strategy: &ClassicalStrategy<T>, ens: &InputEnsemble<T>) -> Result<Assemblage<T>> {
    let d_v = strategy.responses[0][0].dim();
    if ens.dim() != d_v {
        return Err(Error::Dimension(format!("strategy acts on dimension {d_v}, inputs on {}", ens.dim())));
    }
    let d_b = strategy.preparations[0].dim();
    let shape = SubsystemShape::single(d_b);
    let members = (0..strategy.num_outcomes())
        .map(|a| {
            ens.inputs()
                .iter()
                .map(|w| {
                    let mut s = HermitianOperator::zeros(shape.clone());
                    for (l, &p) in strategy.weights.iter().enumerate() {
                        let prob = strategy.responses[l][a].inner(w);
                        s = &s + &strategy.preparations[l].scaled(p * prob);
                    }
                    s
                })
                .collect()
        })
        .collect();
    Assemblage::new(members, ens.clone())
}

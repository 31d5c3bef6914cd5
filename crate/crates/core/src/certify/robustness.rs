use serde::{Deserialize, Serialize};

use super::witness::{check_dual_witness, DetectionDirection, TeleportationWitness, WitnessJson};
use crate::error::{Error, Result};
use crate::qlinalg::{HermitianOperator, MatrixJson, SubsystemShape};
use crate::scalar::Real;
use crate::scenario::{apply_channel_operator, Assemblage, InputEnsemble, NO_SIGNALLING_ACCEPT};
use crate::sdp::{solve_with, ConicProgram, HermConstraint, HermExpr, LinExpr, Sense, Solution, SolveOptions, SolveStatus, VarId};
use crate::sepset::{relaxed_operator, SepRelaxation};

/// Solver summary attached to every reported number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub status: SolveStatus,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub num_constraints: usize,
}

impl SolveDiagnostics {
    fn new<T: Real>(sol: &Solution<T>, prog: &ConicProgram<T>) -> Self {
        Self {
            status: sol.status,
            primal_objective: sol.primal_objective.as_f64(),
            dual_objective: sol.dual_objective.as_f64(),
            relative_gap: sol.relative_gap.as_f64(),
            primal_residual: sol.primal_residual.as_f64(),
            dual_residual: sol.dual_residual.as_f64(),
            iterations: sol.iterations,
            num_constraints: prog.num_constraints(),
        }
    }
}

/// Dual feasibility of an extracted witness; both quantities must be
/// nonnegative up to solver accuracy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub scalar_slack: f64,
    pub min_relaxed: Vec<f64>,
}

impl WitnessCheck {
    pub fn holds(&self, scalar_tol: f64, relaxed_tol: f64) -> bool {
        self.scalar_slack >= -scalar_tol && self.min_relaxed.iter().all(|&v| v >= -relaxed_tol)
    }
}

#[derive(Clone, Debug)]
pub enum Certificate<T: Real> {
    /// Noisy channel operators `M̃_a` reproducing the mixed data.
    ChannelOperators(Vec<HermitianOperator<T>>),
    /// Dual witness.
    Witness(TeleportationWitness<T>),
    /// Operator `Σ̃` in the relaxed set with `Σ̃ − t·I/(d_A d_B) = ρ`.
    RelaxedState(HermitianOperator<T>),
}

#[derive(Clone, Debug)]
pub struct RobustnessResult<T: Real> {
    /// Raw optimal value, never clamped.
    pub value: T,
    pub certificate: Certificate<T>,
    pub relaxation: SepRelaxation,
    /// The relaxation coincides with the separable set for these
    /// dimensions; otherwise `value` is a lower bound on the true quantity.
    pub exact: bool,
    pub diagnostics: SolveDiagnostics,
    pub witness_check: Option<WitnessCheck>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CertificateJson {
    ChannelOperators { operators: Vec<MatrixJson> },
    Witness { witness: WitnessJson },
    RelaxedState { operator: MatrixJson },
}

#[derive(Serialize)]
struct ResultJson<'a> {
    value: f64,
    relaxation: String,
    exact: bool,
    diagnostics: &'a SolveDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_check: Option<&'a WitnessCheck>,
    certificate: CertificateJson,
}

impl<T: Real> RobustnessResult<T> {
    pub fn to_json(&self) -> serde_json::Value {
        let certificate = match &self.certificate {
            Certificate::ChannelOperators(ops) => {
                CertificateJson::ChannelOperators { operators: ops.iter().map(HermitianOperator::to_json).collect() }
            }
            Certificate::Witness(w) => CertificateJson::Witness { witness: w.to_json() },
            Certificate::RelaxedState(s) => CertificateJson::RelaxedState { operator: s.to_json() },
        };
        serde_json::to_value(ResultJson {
            value: self.value.as_f64(),
            relaxation: self.relaxation.tag(),
            exact: self.exact,
            diagnostics: &self.diagnostics,
            witness_check: self.witness_check.as_ref(),
            certificate,
        })
        .expect("result serializes")
    }

    pub fn witness(&self) -> Option<&TeleportationWitness<T>> {
        match &self.certificate {
            Certificate::Witness(w) => Some(w),
            _ => None,
        }
    }

    pub fn channel_operators(&self) -> Option<&[HermitianOperator<T>]> {
        match &self.certificate {
            Certificate::ChannelOperators(ops) => Some(ops),
            _ => None,
        }
    }
}

fn require_optimal<T: Real>(sol: &Solution<T>) -> Result<()> {
    match sol.status {
        SolveStatus::Optimal => Ok(()),
        status => Err(Error::Solver { status }),
    }
}

struct RobustnessProgram<T: Real> {
    prog: ConicProgram<T>,
    r: VarId,
    channels: Vec<HermExpr<T>>,
    data_rows: Vec<Vec<HermConstraint>>,
    completeness: HermConstraint,
}

/// `min r` s.t. `tr_V[M̃_a(ω_x ⊗ I)] − r·I/(o_A d_B) = σ_{a|x}`,
/// `Σ_a M̃_a − r·I/d_B = I ⊗ ρ^B`, `M̃_a` relaxed, `r ≥ 0`.
fn robustness_program<T: Real>(asm: &Assemblage<T>, rel: SepRelaxation) -> Result<RobustnessProgram<T>> {
    let residual = asm.no_signalling_residual();
    if residual > T::tol(NO_SIGNALLING_ACCEPT) {
        return Err(Error::NoSignalling(residual.as_f64()));
    }
    let ens = asm.ensemble();
    let (d_v, d_b) = asm.dims();
    let oa = asm.num_outcomes();
    let shape = SubsystemShape::bipartite(d_v, d_b);
    let id_b = HermitianOperator::<T>::identity(SubsystemShape::single(d_b));
    let id_vb = HermitianOperator::<T>::identity(shape.clone());
    let k_data = -T::one() / T::from_usize_lossy(oa * d_b);
    let k_comp = -T::one() / T::from_usize_lossy(d_b);

    let mut prog = ConicProgram::new();
    let r = prog.add_nonneg("r");
    let mut channels = Vec::with_capacity(oa);
    let mut data_rows = Vec::with_capacity(oa);
    let mut sum = HermExpr::zeros(shape.clone());
    for a in 0..oa {
        let m = relaxed_operator(&mut prog, &format!("M{a}"), &shape, rel)?;
        let mut rows = Vec::with_capacity(ens.len());
        for x in 0..ens.len() {
            let mut lhs = m.contract_first(ens.input(x))?;
            lhs.add_scalar_times(r, &id_b, k_data)?;
            rows.push(prog.add_hermitian_equality(&lhs, asm.member(a, x))?);
        }
        sum.add_scaled(&m, T::one())?;
        channels.push(m);
        data_rows.push(rows);
    }
    sum.add_scalar_times(r, &id_vb, k_comp)?;
    let rhs = HermitianOperator::<T>::identity(SubsystemShape::single(d_v)).tensor(&asm.bob_marginal()).with_shape(shape)?;
    let completeness = prog.add_hermitian_equality(&sum, &rhs)?;
    prog.set_objective(LinExpr::var(r), Sense::Minimize);
    Ok(RobustnessProgram { prog, r, channels, data_rows, completeness })
}

/// Random teleportation robustness of the data: the least white-noise
/// weight `r` that makes `(σ + r·I/(o_A d_B))/(1 + r)` classical under the
/// relaxation.
pub fn teleportation_robustness<T: Real>(asm: &Assemblage<T>, rel: SepRelaxation) -> Result<RobustnessResult<T>> {
    teleportation_robustness_with(asm, rel, &SolveOptions::default())
}

pub fn teleportation_robustness_with<T: Real>(
    asm: &Assemblage<T>,
    rel: SepRelaxation,
    opts: &SolveOptions,
) -> Result<RobustnessResult<T>> {
    let rp = robustness_program(asm, rel)?;
    let sol = solve_with(&rp.prog, opts);
    require_optimal(&sol)?;
    let (d_v, d_b) = asm.dims();
    Ok(RobustnessResult {
        value: sol.value(rp.r),
        certificate: Certificate::ChannelOperators(rp.channels.iter().map(|m| sol.herm_value(m)).collect()),
        relaxation: rel,
        exact: rel.is_exact_for(d_v, d_b),
        diagnostics: SolveDiagnostics::new(&sol, &rp.prog),
        witness_check: None,
    })
}

/// Same optimum read from the dual side: the multipliers of the data rows
/// give `F_{a|x}`, minus the completeness multiplier gives `G`. The witness
/// detects through positive values with threshold 0.
pub fn teleportation_robustness_dual<T: Real>(asm: &Assemblage<T>, rel: SepRelaxation) -> Result<RobustnessResult<T>> {
    teleportation_robustness_dual_with(asm, rel, &SolveOptions::default())
}

pub fn teleportation_robustness_dual_with<T: Real>(
    asm: &Assemblage<T>,
    rel: SepRelaxation,
    opts: &SolveOptions,
) -> Result<RobustnessResult<T>> {
    let rp = robustness_program(asm, rel)?;
    let sol = solve_with(&rp.prog, opts);
    require_optimal(&sol)?;
    let (d_v, d_b) = asm.dims();
    let b = SubsystemShape::single(d_b);
    let f = rp
        .data_rows
        .iter()
        .map(|row| row.iter().map(|h| sol.multiplier(h, b.clone())).collect())
        .collect();
    let g = sol.multiplier(&rp.completeness, SubsystemShape::bipartite(d_v, d_b)).scaled(-T::one());
    let w = TeleportationWitness::new(f, g, DetectionDirection::PositiveDetects, T::zero())?;
    let check = check_dual_witness(&w, asm.ensemble(), rel, opts)?;
    Ok(RobustnessResult {
        value: sol.dual_objective,
        certificate: Certificate::Witness(w),
        relaxation: rel,
        exact: rel.is_exact_for(d_v, d_b),
        diagnostics: SolveDiagnostics::new(&sol, &rp.prog),
        witness_check: Some(check),
    })
}

/// Max-abs violation of the linearized robustness equalities by channel
/// operators `M̃_a` at noise level `r`.
pub fn teleportation_constraint_residual<T: Real>(ops: &[HermitianOperator<T>], r: T, asm: &Assemblage<T>) -> Result<T> {
    let (d_v, d_b) = asm.dims();
    if ops.len() != asm.num_outcomes() {
        return Err(Error::Dimension(format!("{} operators for {} outcomes", ops.len(), asm.num_outcomes())));
    }
    let ens = asm.ensemble();
    let shape = SubsystemShape::bipartite(d_v, d_b);
    let noise_b = HermitianOperator::<T>::identity(SubsystemShape::single(d_b))
        .scaled(r / T::from_usize_lossy(asm.num_outcomes() * d_b));
    let mut worst = T::zero();
    let mut sum = HermitianOperator::zeros(shape.clone());
    for (a, m) in ops.iter().enumerate() {
        for x in 0..ens.len() {
            let lhs = apply_channel_operator(m, ens.input(x))?;
            worst = worst.max(lhs.max_abs_diff(&(asm.member(a, x) + &noise_b)));
        }
        sum = &sum + &m.clone().with_shape(shape.clone())?;
    }
    let rhs = HermitianOperator::<T>::identity(SubsystemShape::single(d_v)).tensor(&asm.bob_marginal());
    let noise = HermitianOperator::<T>::identity(shape.clone()).scaled(r / T::from_usize_lossy(d_b));
    Ok(worst.max(sum.max_abs_diff(&(&rhs.with_shape(shape)? + &noise))))
}

/// Random robustness of a bipartite state: least `t` with
/// `(ρ + t·I/(d_A d_B))/(1 + t)` in the relaxed set.
pub fn entanglement_random_robustness<T: Real>(rho: &HermitianOperator<T>, rel: SepRelaxation) -> Result<RobustnessResult<T>> {
    entanglement_random_robustness_with(rho, rel, &SolveOptions::default())
}

pub fn entanglement_random_robustness_with<T: Real>(
    rho: &HermitianOperator<T>,
    rel: SepRelaxation,
    opts: &SolveOptions,
) -> Result<RobustnessResult<T>> {
    let (d_a, d_b) = match rho.shape().dims() {
        [a, b] => (*a, *b),
        _ => return Err(Error::Dimension(format!("expected a bipartite state, got shape {}", rho.shape()))),
    };
    let shape = rho.shape().clone();
    let mut prog = ConicProgram::new();
    let t = prog.add_nonneg("t");
    let mut sigma = relaxed_operator(&mut prog, "Sigma", &shape, rel)?;
    let out = sigma.clone();
    let id = HermitianOperator::<T>::identity(shape);
    sigma.add_scalar_times(t, &id, -T::one() / T::from_usize_lossy(d_a * d_b))?;
    prog.add_hermitian_equality(&sigma, rho)?;
    prog.set_objective(LinExpr::var(t), Sense::Minimize);
    let sol = solve_with(&prog, opts);
    require_optimal(&sol)?;
    Ok(RobustnessResult {
        value: sol.value(t),
        certificate: Certificate::RelaxedState(sol.herm_value(&out)),
        relaxation: rel,
        exact: rel.is_exact_for(d_a, d_b),
        diagnostics: SolveDiagnostics::new(&sol, &prog),
        witness_check: None,
    })
}

#[derive(Clone, Debug)]
pub struct ClassicalBound<T: Real> {
    /// Maximum (positive-detecting witness) or minimum (negative-detecting)
    /// over data produced by relaxed classical channel operators.
    pub value: T,
    pub relaxation: SepRelaxation,
    /// When false the relaxed set is larger than the classical one and the
    /// value is only a bound on the true classical extremum.
    pub exact: bool,
    pub diagnostics: SolveDiagnostics,
}

/// Extremal witness value over classical strategies:
/// `Σ_a tr[M_a Σ_x ω_x⊗F_{a|x}] − tr[G^B ρ^B]` over relaxed `M_a` with
/// `Σ_a M_a = I ⊗ ρ^B`, `tr ρ^B = 1`.
pub fn classical_bound<T: Real>(
    w: &TeleportationWitness<T>,
    ens: &InputEnsemble<T>,
    rel: SepRelaxation,
) -> Result<ClassicalBound<T>> {
    classical_bound_with(w, ens, rel, &SolveOptions::default())
}

pub fn classical_bound_with<T: Real>(
    w: &TeleportationWitness<T>,
    ens: &InputEnsemble<T>,
    rel: SepRelaxation,
    opts: &SolveOptions,
) -> Result<ClassicalBound<T>> {
    w.check_ensemble(ens)?;
    let (d_v, d_b) = w.dims();
    let shape = SubsystemShape::bipartite(d_v, d_b);
    let mut prog = ConicProgram::new();
    let (_, rho_b) = prog.add_hermitian_block("rho_B", SubsystemShape::single(d_b));
    prog.add_constraint(rho_b.trace(), T::one());
    let mut objective = LinExpr::zero();
    let mut sum = HermExpr::zeros(shape.clone());
    for a in 0..w.num_outcomes() {
        let m = relaxed_operator(&mut prog, &format!("M{a}"), &shape, rel)?;
        objective.add_scaled(&m.trace_with(&w.combined(a, ens)?)?, T::one());
        sum.add_scaled(&m, T::one())?;
    }
    objective.add_scaled(&rho_b.trace_with(&w.g_b())?, -T::one());
    sum.add_scaled(&rho_b.identity_tensor(d_v).with_shape(shape.clone())?, -T::one())?;
    prog.add_hermitian_equality(&sum, &HermitianOperator::zeros(shape))?;
    let sense = match w.detection_direction() {
        DetectionDirection::PositiveDetects => Sense::Maximize,
        DetectionDirection::NegativeDetects => Sense::Minimize,
    };
    prog.set_objective(objective.compacted(), sense);
    let sol = solve_with(&prog, opts);
    require_optimal(&sol)?;
    Ok(ClassicalBound {
        value: sol.objective(),
        relaxation: rel,
        exact: rel.is_exact_for(d_v, d_b),
        diagnostics: SolveDiagnostics::new(&sol, &prog),
    })
}

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{paulis, ComplexMatrix, HermitianOperator, MatrixJson, SubsystemShape};
use crate::scalar::Real;
use crate::scenario::{tiles_inputs, Assemblage, InputEnsemble};
use crate::sdp::SolveOptions;
use crate::sepset::{min_over_relaxation_with, SepRelaxation};

/// Largest noise parameter for which the tiles witness stays nonnegative on
/// product states.
pub const TILES_EPSILON_MAX: f64 = 0.02842;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionDirection {
    /// Values above the classical threshold detect.
    PositiveDetects,
    /// Values below the classical threshold detect.
    NegativeDetects,
}

impl fmt::Display for DetectionDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PositiveDetects => "positive_detects",
            Self::NegativeDetects => "negative_detects",
        })
    }
}

/// Linear functional `Σ_{a,x} tr[F_{a|x} σ_{a|x}] − tr[G^B ρ^B]` on
/// teleportation data, with `G^B = tr_V G`.
#[derive(Clone, Debug, PartialEq)]
pub struct TeleportationWitness<T: Real> {
    f: Vec<Vec<HermitianOperator<T>>>,
    g: HermitianOperator<T>,
    detection: DetectionDirection,
    classical_threshold: T,
}

impl<T: Real> TeleportationWitness<T> {
    /// `f[a][x]` on `B`, `g` on `V ⊗ B` (any shape of the right total size
    /// is re-read as bipartite with `d_V = g.dim() / d_B`).
    pub fn new(
        f: Vec<Vec<HermitianOperator<T>>>,
        g: HermitianOperator<T>,
        detection: DetectionDirection,
        classical_threshold: T,
    ) -> Result<Self> {
        let nx = f.first().map_or(0, Vec::len);
        if f.is_empty() || nx == 0 {
            return Err(Error::InvalidInput("witness needs at least one outcome and one input".into()));
        }
        let d_b = f[0][0].dim();
        for (a, row) in f.iter().enumerate() {
            if row.len() != nx {
                return Err(Error::Dimension(format!("outcome {a} has {} inputs, expected {nx}", row.len())));
            }
            if let Some(x) = row.iter().position(|op| op.dim() != d_b) {
                return Err(Error::Dimension(format!("F[{a}][{x}] is not on a {d_b}-dim space")));
            }
        }
        if g.dim() % d_b != 0 {
            return Err(Error::Dimension(format!("G of dimension {} is not V⊗B with d_B = {d_b}", g.dim())));
        }
        let d_v = g.dim() / d_b;
        let g = g.with_shape(SubsystemShape::bipartite(d_v, d_b))?;
        let f = f
            .into_iter()
            .map(|row| row.into_iter().map(|op| op.with_shape(SubsystemShape::single(d_b))).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(Self { f, g, detection, classical_threshold })
    }

    pub fn f(&self, a: usize, x: usize) -> &HermitianOperator<T> {
        &self.f[a][x]
    }

    pub fn f_table(&self) -> &[Vec<HermitianOperator<T>>] {
        &self.f
    }

    pub fn g(&self) -> &HermitianOperator<T> {
        &self.g
    }

    pub fn g_b(&self) -> HermitianOperator<T> {
        self.g.partial_trace(&[1]).expect("G is bipartite")
    }

    pub fn detection_direction(&self) -> DetectionDirection {
        self.detection
    }

    pub fn classical_threshold(&self) -> T {
        self.classical_threshold
    }

    pub fn num_outcomes(&self) -> usize {
        self.f.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.f[0].len()
    }

    /// `(d_V, d_B)`.
    pub fn dims(&self) -> (usize, usize) {
        let d = self.g.shape().dims();
        (d[0], d[1])
    }

    /// True when `value` lies strictly beyond the classical threshold.
    pub fn detects(&self, value: T) -> bool {
        match self.detection {
            DetectionDirection::PositiveDetects => value > self.classical_threshold,
            DetectionDirection::NegativeDetects => value < self.classical_threshold,
        }
    }

    /// `Σ_x ω_x ⊗ F_{a|x}`.
    pub fn combined(&self, a: usize, ens: &InputEnsemble<T>) -> Result<HermitianOperator<T>> {
        self.check_ensemble(ens)?;
        let (d_v, d_b) = self.dims();
        let mut w = HermitianOperator::zeros(SubsystemShape::bipartite(d_v, d_b));
        for (x, f) in self.f[a].iter().enumerate() {
            w = &w + &ens.input(x).tensor(f).with_shape(SubsystemShape::bipartite(d_v, d_b))?;
        }
        Ok(w)
    }

    /// The operators `W_a = −Σ_x ω_x ⊗ F_{a|x} + G` that must be nonnegative
    /// on separable states for a dual-feasible witness.
    pub fn dual_operators(&self, ens: &InputEnsemble<T>) -> Result<Vec<HermitianOperator<T>>> {
        (0..self.num_outcomes()).map(|a| Ok(&self.g - &self.combined(a, ens)?)).collect()
    }

    pub(crate) fn check_ensemble(&self, ens: &InputEnsemble<T>) -> Result<()> {
        let (d_v, _) = self.dims();
        if ens.len() != self.num_inputs() || ens.dim() != d_v {
            return Err(Error::Dimension(format!(
                "witness for {} inputs on dimension {d_v}, ensemble has {} on dimension {}",
                self.num_inputs(),
                ens.len(),
                ens.dim()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            f: self.f.iter().map(|row| row.iter().map(HermitianOperator::to_json).collect()).collect(),
            g: self.g.to_json(),
            detection_direction: self.detection,
            classical_threshold: self.classical_threshold.as_f64(),
        }
    }

    pub fn from_json(j: &WitnessJson) -> Result<Self> {
        let f = j
            .f
            .iter()
            .map(|row| row.iter().map(HermitianOperator::from_json).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Self::new(f, HermitianOperator::from_json(&j.g)?, j.detection_direction, T::lit(j.classical_threshold))
            .map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("witness serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: WitnessJson = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_json(&j)
    }
}

/// Wire form of a witness; `f[a][x]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessJson {
    pub f: Vec<Vec<MatrixJson>>,
    pub g: MatrixJson,
    pub detection_direction: DetectionDirection,
    pub classical_threshold: f64,
}

/// `Σ_{a,x} tr[F_{a|x} σ_{a|x}] − tr[G^B ρ^B]` with `ρ^B` the data's
/// marginal.
pub fn evaluate_witness<T: Real>(w: &TeleportationWitness<T>, asm: &Assemblage<T>) -> Result<T> {
    let (d_v, d_b) = asm.dims();
    if w.num_outcomes() != asm.num_outcomes() || w.num_inputs() != asm.num_inputs() || w.dims() != (d_v, d_b) {
        return Err(Error::Dimension(format!(
            "witness of shape {}x{} on {:?} against data of shape {}x{} on {:?}",
            w.num_outcomes(),
            w.num_inputs(),
            w.dims(),
            asm.num_outcomes(),
            asm.num_inputs(),
            (d_v, d_b)
        )));
    }
    let mut v = T::zero();
    for a in 0..w.num_outcomes() {
        for x in 0..w.num_inputs() {
            v += w.f(a, x).inner(asm.member(a, x));
        }
    }
    Ok(v - w.g_b().inner(&asm.bob_marginal()))
}

fn embed<T: Real>(m: &ComplexMatrix<T>) -> HermitianOperator<T> {
    HermitianOperator::new(m.clone(), SubsystemShape::single(m.nrows())).expect("Hermitian by construction")
}

/// Qubit witness with entries `I/3 ± P` for the Pauli operator `P`
/// matching the input pair (X for `±`, Y for `±i`, Z for `0/1`), in the
/// standard input order and Bell outcome order.
pub fn builtin_witness_table1<T: Real>() -> TeleportationWitness<T> {
    const SIGNS: [[i8; 6]; 4] = [
        [-1, 1, -1, 1, -1, 1],
        [-1, 1, 1, -1, 1, -1],
        [1, -1, 1, -1, -1, 1],
        [1, -1, -1, 1, 1, -1],
    ];
    let p = paulis::<T>();
    let third = HermitianOperator::<T>::identity(SubsystemShape::single(2)).scaled(T::lit(1.0 / 3.0));
    let f = SIGNS
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(x, &s)| &third + &embed(&p[x / 2]).scaled(T::lit(s as f64)))
                .collect()
        })
        .collect();
    TeleportationWitness::new(f, HermitianOperator::zeros(SubsystemShape::bipartite(2, 2)), DetectionDirection::NegativeDetects, T::zero())
        .expect("table is well formed")
}

/// Qutrit witness for the tiles data (partial BSM, tiles inputs): the first
/// outcome carries the tiles projectors and `−3εI`, the second vanishes.
pub fn builtin_witness_table2<T: Real>(epsilon: f64) -> Result<TeleportationWitness<T>> {
    if !(epsilon > 0.0 && epsilon <= TILES_EPSILON_MAX) {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} outside (0, {TILES_EPSILON_MAX}]")));
    }
    let psi = tiles_inputs::<T>();
    let b = SubsystemShape::single(3);
    let mut first: Vec<HermitianOperator<T>> = [2, 3, 1, 0, 4].iter().map(|&i| psi.input(i).clone()).collect();
    first.push(HermitianOperator::identity(b.clone()).scaled(T::lit(-3.0 * epsilon)));
    let second = vec![HermitianOperator::zeros(b); 6];
    TeleportationWitness::new(
        vec![first, second],
        HermitianOperator::zeros(SubsystemShape::bipartite(3, 3)),
        DetectionDirection::NegativeDetects,
        T::zero(),
    )
}

/// `F_{a|x} = U_a† ω_x U_a / |x|`, `G = 0`; its value on data is the average
/// fidelity. Outcomes without a correction get `F = 0`. The threshold is
/// the measure-and-prepare benchmark `2/(d+1)`.
pub fn average_fidelity_witness<T: Real>(
    ens: &InputEnsemble<T>,
    corrections: &[Option<ComplexMatrix<T>>],
    d_b: usize,
) -> Result<TeleportationWitness<T>> {
    let nx = ens.len();
    let k = T::one() / T::from_usize_lossy(nx);
    let b = SubsystemShape::single(d_b);
    let mut f = Vec::with_capacity(corrections.len());
    for u in corrections {
        let row = (0..nx)
            .map(|x| match u {
                Some(u) => {
                    let adj = u.adjoint();
                    Ok(ens.input(x).conjugate_by(&adj)?.scaled(k).with_shape(b.clone())?)
                }
                None => Ok(HermitianOperator::zeros(b.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        f.push(row);
    }
    let d_v = ens.dim();
    let threshold = T::lit(2.0) / T::from_usize_lossy(d_b + 1);
    TeleportationWitness::new(
        f,
        HermitianOperator::zeros(SubsystemShape::bipartite(d_v, d_b)),
        DetectionDirection::PositiveDetects,
        threshold,
    )
}

/// Feasibility of a witness for the robustness dual: the scalar slack
/// `1 + tr ΣF/(o_A d_B) − tr G/d_B` and, per outcome, the minimum of
/// `W_a` over unit-trace operators in the relaxed set.
pub fn check_dual_witness<T: Real>(
    w: &TeleportationWitness<T>,
    ens: &InputEnsemble<T>,
    rel: SepRelaxation,
    opts: &SolveOptions,
) -> Result<super::WitnessCheck> {
    w.check_ensemble(ens)?;
    let (d_v, d_b) = w.dims();
    let oa = T::from_usize_lossy(w.num_outcomes());
    let db = T::from_usize_lossy(d_b);
    let tr_f = w.f_table().iter().flatten().fold(T::zero(), |s, op| s + op.trace());
    let scalar = T::one() + tr_f / (oa * db) - w.g().trace() / db;
    let shape = SubsystemShape::bipartite(d_v, d_b);
    let min_relaxed = w
        .dual_operators(ens)?
        .iter()
        .map(|op| min_over_relaxation_with(op, &shape, rel, opts).map(|v| v.as_f64()))
        .collect::<Result<Vec<_>>>()?;
    Ok(super::WitnessCheck { scalar_slack: scalar.as_f64(), min_relaxed })
}

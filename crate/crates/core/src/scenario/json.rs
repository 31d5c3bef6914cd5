use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Assemblage, InputEnsemble};
use crate::error::{Error, Result};
use crate::qlinalg::{HermitianOperator, MatrixJson};
use crate::scalar::Real;

/// Wire form of an assemblage. Members are keyed `"a,x"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblageJson {
    pub dims: Vec<usize>,
    pub num_outcomes: usize,
    pub inputs: Vec<MatrixJson>,
    pub members: BTreeMap<String, MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn parse_key(k: &str) -> Option<(usize, usize)> {
    let (a, x) = k.split_once(',')?;
    Some((a.trim().parse().ok()?, x.trim().parse().ok()?))
}

impl<T: Real> Assemblage<T> {
    pub fn to_json(&self) -> AssemblageJson {
        let (d_v, d_b) = self.dims();
        let mut members = BTreeMap::new();
        for a in 0..self.num_outcomes() {
            for x in 0..self.num_inputs() {
                members.insert(format!("{a},{x}"), self.member(a, x).to_json());
            }
        }
        AssemblageJson {
            dims: vec![d_v, d_b],
            num_outcomes: self.num_outcomes(),
            inputs: self.ensemble().inputs().iter().map(|w| w.to_json()).collect(),
            members,
            labels: Some(self.ensemble().labels().to_vec()),
        }
    }

    pub fn from_json(j: &AssemblageJson) -> Result<Self> {
        if j.dims.len() != 2 {
            return Err(Error::Schema("\"dims\" must be [d_V, d_B]".into()));
        }
        let inputs = j.inputs.iter().map(HermitianOperator::from_json).collect::<Result<Vec<_>>>()?;
        let nx = inputs.len();
        if inputs.iter().any(|w| w.dim() != j.dims[0]) {
            return Err(Error::Schema("input dimension differs from dims[0]".into()));
        }
        let ens = match &j.labels {
            Some(l) => InputEnsemble::new(inputs, l.clone())?,
            None => InputEnsemble::unlabeled(inputs)?,
        };
        let mut slots: Vec<Vec<Option<HermitianOperator<T>>>> = vec![vec![None; nx]; j.num_outcomes];
        for (k, m) in &j.members {
            let (a, x) = parse_key(k).ok_or_else(|| Error::Schema(format!("member key {k:?} is not \"a,x\"")))?;
            if a >= j.num_outcomes || x >= nx {
                return Err(Error::Schema(format!("member key {k:?} out of range")));
            }
            let op = HermitianOperator::from_json(m)?;
            if op.dim() != j.dims[1] {
                return Err(Error::Schema(format!("member {k:?} has dimension {}, dims[1] = {}", op.dim(), j.dims[1])));
            }
            slots[a][x] = Some(op);
        }
        let members = slots
            .into_iter()
            .enumerate()
            .map(|(a, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(x, m)| m.ok_or_else(|| Error::Schema(format!("missing member \"{a},{x}\""))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Assemblage::new(members, ens)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("assemblage serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: AssemblageJson = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_json(&j)
    }
}

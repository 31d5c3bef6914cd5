use std::fmt;
use std::str::FromStr;

use super::{make_assemblage, noisy_phi_plus_01, standard_qubit_inputs, tiles_inputs, tiles_state, werner_state};
use super::{Assemblage, InputEnsemble, Measurement};
use crate::error::{Error, Result};
use crate::qlinalg::HermitianOperator;
use crate::scalar::Real;

pub const SCENARIO_IDS: [&str; 3] = ["werner", "phi01", "tiles"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementKind {
    FullBsm,
    PartialBsm,
}

impl FromStr for MeasurementKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full-bsm" => Ok(Self::FullBsm),
            "partial-bsm" => Ok(Self::PartialBsm),
            _ => Err(Error::InvalidInput(format!("unknown measurement {s:?}"))),
        }
    }
}

impl fmt::Display for MeasurementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FullBsm => "full-bsm",
            Self::PartialBsm => "partial-bsm",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputsKind {
    Standard,
    Tiles,
}

impl FromStr for InputsKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "tiles" => Ok(Self::Tiles),
            _ => Err(Error::InvalidInput(format!("unknown input set {s:?}"))),
        }
    }
}

/// A fully specified experiment: shared state, measurement, inputs and the
/// data they generate.
#[derive(Clone, Debug)]
pub struct Scenario<T: Real> {
    pub id: String,
    pub state: HermitianOperator<T>,
    pub measurement: Measurement<T>,
    pub assemblage: Assemblage<T>,
}

impl<T: Real> Scenario<T> {
    pub fn ensemble(&self) -> &InputEnsemble<T> {
        self.assemblage.ensemble()
    }
}

/// Builds a named scenario. `werner` and `phi01` are qubit families in `p`
/// defaulting to full BSM with the six Pauli eigenstates; `tiles` is the
/// qutrit bound entangled state with partial BSM and its own inputs (`p` is
/// ignored). `inputs` may override the default ensemble.
pub fn named_scenario<T: Real>(
    id: &str,
    p: f64,
    measurement: Option<MeasurementKind>,
    inputs: Option<InputEnsemble<T>>,
) -> Result<Scenario<T>> {
    let (state, d, default_meas, default_inputs) = match id {
        "werner" => (werner_state::<T>(p)?, 2, MeasurementKind::FullBsm, standard_qubit_inputs::<T>()),
        "phi01" => (noisy_phi_plus_01::<T>(p)?, 2, MeasurementKind::FullBsm, standard_qubit_inputs::<T>()),
        "tiles" => (tiles_state::<T>(), 3, MeasurementKind::PartialBsm, tiles_inputs::<T>()),
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown scenario {id:?} (expected one of {})",
                SCENARIO_IDS.join(", ")
            )))
        }
    };
    let measurement = match measurement.unwrap_or(default_meas) {
        MeasurementKind::FullBsm => Measurement::full_bsm(d)?,
        MeasurementKind::PartialBsm => Measurement::partial_bsm(d)?,
    };
    let ens = inputs.unwrap_or(default_inputs);
    let assemblage = make_assemblage(&state, &measurement, &ens)?;
    Ok(Scenario { id: id.to_string(), state, measurement, assemblage })
}

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;
use telecert::qlinalg::MatrixJson;
use telecert::scenario::{named_scenario, standard_qubit_inputs, tiles_inputs, MeasurementKind};
use telecert::{Assemblage, HermitianOperator, InputEnsemble, Measurement, SepRelaxation, SolveOptions};

#[derive(Args, Debug, Clone)]
pub struct ScenarioArgs {
    /// Named scenario: werner, phi01 or tiles.
    #[arg(long, required_unless_present = "assemblage")]
    pub scenario: Option<String>,
    /// Assemblage JSON file, used instead of a named scenario.
    #[arg(long, conflicts_with = "scenario")]
    pub assemblage: Option<PathBuf>,
    /// Noise parameter of the named families.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// full-bsm or partial-bsm (default depends on the scenario).
    #[arg(long)]
    pub measurement: Option<MeasurementKind>,
    /// standard, tiles or file:PATH (JSON list of operators).
    #[arg(long)]
    pub inputs: Option<String>,
    /// ppt, dpsK or dpsK-ppt.
    #[arg(long, default_value = "ppt")]
    pub relaxation: SepRelaxation,
    /// Solver tolerance on gap and infeasibilities.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

pub struct Built {
    pub label: String,
    pub state: Option<HermitianOperator>,
    pub measurement: Option<Measurement>,
    pub assemblage: Assemblage,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InputsFile {
    List(Vec<MatrixJson>),
    Labeled { inputs: Vec<MatrixJson>, labels: Option<Vec<String>> },
}

pub fn parse_inputs(spec: &str) -> Result<InputEnsemble> {
    match spec {
        "standard" => Ok(standard_qubit_inputs()),
        "tiles" => Ok(tiles_inputs()),
        _ => {
            let Some(path) = spec.strip_prefix("file:") else {
                bail!("unknown input set {spec:?} (expected standard, tiles or file:PATH)");
            };
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let parsed: InputsFile = serde_json::from_str(&text).map_err(|e| telecert::Error::Schema(e.to_string()))?;
            let (ops, labels) = match parsed {
                InputsFile::List(ops) => (ops, None),
                InputsFile::Labeled { inputs, labels } => (inputs, labels),
            };
            let ops = ops.iter().map(HermitianOperator::from_json).collect::<telecert::Result<Vec<_>>>()?;
            Ok(match labels {
                Some(l) => InputEnsemble::new(ops, l)?,
                None => InputEnsemble::unlabeled(ops)?,
            })
        }
    }
}

impl ScenarioArgs {
    pub fn solve_options(&self) -> Result<SolveOptions> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            bail!("--tol must lie in (0, 1), got {}", self.tol);
        }
        Ok(SolveOptions { tol: self.tol, ..SolveOptions::default() })
    }

    pub fn named(&self, id: &str, p: f64) -> Result<Built> {
        let inputs = self.inputs.as_deref().map(parse_inputs).transpose()?;
        let s = named_scenario(id, p, self.measurement, inputs)?;
        Ok(Built {
            label: format!("{id} p={p}"),
            state: Some(s.state),
            measurement: Some(s.measurement),
            assemblage: s.assemblage,
        })
    }

    pub fn build(&self) -> Result<Built> {
        if let Some(path) = &self.assemblage {
            if self.measurement.is_some() || self.inputs.is_some() {
                bail!("--measurement and --inputs apply to named scenarios only");
            }
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let assemblage = Assemblage::from_json_str(&text)?;
            return Ok(Built { label: path.display().to_string(), state: None, measurement: None, assemblage });
        }
        let id = self.scenario.as_deref().expect("clap enforces --scenario or --assemblage");
        self.named(id, self.p)
    }
}

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use telecert::certify::{entanglement_random_robustness_with, fidelity_robustness_bound, teleportation_robustness_with};
use telecert::scenario::average_fidelity;

use crate::format::{csv_table, parse_number};
use crate::setup::ScenarioArgs;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Output {
    TR,
    FTel,
    ER,
    Bound,
}

impl FromStr for Output {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "T_R" => Ok(Self::TR),
            "F_tel" => Ok(Self::FTel),
            "E_R" => Ok(Self::ER),
            "bound" => Ok(Self::Bound),
            _ => Err(format!("unknown output {s:?} (expected T_R, F_tel, E_R or bound)")),
        }
    }
}

impl Output {
    fn column(self) -> &'static str {
        match self {
            Self::TR => "T_R",
            Self::FTel => "F_tel",
            Self::ER => "E_R",
            Self::Bound => "bound",
        }
    }
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Swept parameter (only `p`).
    #[arg(long, default_value = "p")]
    pub param: String,
    #[arg(long, value_parser = parse_number, default_value = "0")]
    pub start: f64,
    #[arg(long, value_parser = parse_number, default_value = "1")]
    pub stop: f64,
    #[arg(long, value_parser = parse_number, default_value = "0.1")]
    pub step: f64,
    /// Explicit grid such as `1/3,0.4,0.5`, replacing start/stop/step.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "T_R,F_tel")]
    pub outputs: Vec<Output>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `start, start + step, …` up to `stop`; empty when `start > stop`.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        bail!("--step must be positive, got {step}");
    }
    if start > stop {
        return Ok(Vec::new());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn trend(values: &[f64]) -> &'static str {
    let tol = 1e-7;
    let up = values.windows(2).all(|w| w[1] >= w[0] - tol);
    let down = values.windows(2).all(|w| w[1] <= w[0] + tol);
    match (up, down) {
        (true, true) => "constant",
        (true, false) => "non-decreasing",
        (false, true) => "non-increasing",
        (false, false) => "not monotone",
    }
}

pub fn run(args: &SweepArgs) -> Result<()> {
    if args.param != "p" {
        bail!("unknown sweep parameter {:?} (only p is supported)", args.param);
    }
    let Some(id) = args.scenario.scenario.as_deref() else {
        bail!("sweeps need a named --scenario");
    };
    let points = match &args.values {
        Some(v) => v.clone(),
        None => grid(args.start, args.stop, args.step)?,
    };
    let opts = args.scenario.solve_options()?;
    let rel = args.scenario.relaxation;
    // Fail fast on an unknown id even when the grid is empty.
    args.scenario.named(id, 1.0)?;
    let rows = points
        .par_iter()
        .map(|&p| -> Result<Vec<f64>> {
            let built = args.scenario.named(id, p)?;
            let mut row = vec![p];
            let (_, d_b) = built.assemblage.dims();
            let fidelity = || -> Result<f64> {
                let m = built.measurement.as_ref().expect("named scenarios carry their measurement");
                average_fidelity(&built.assemblage, m.corrections()).with_context(|| format!("F_tel for {id}"))
            };
            for out in &args.outputs {
                row.push(match out {
                    Output::TR => teleportation_robustness_with(&built.assemblage, rel, &opts)?.value,
                    Output::FTel => fidelity()?,
                    Output::ER => {
                        let rho = built.state.as_ref().expect("named scenarios carry their state");
                        entanglement_random_robustness_with(rho, rel, &opts)?.value
                    }
                    Output::Bound => fidelity_robustness_bound(fidelity()?, 2.0 / (d_b as f64 + 1.0), d_b)?,
                });
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut header = vec!["p"];
    header.extend(args.outputs.iter().map(|o| o.column()));
    let footer = if rows.len() > 1 {
        let parts: Vec<String> = args
            .outputs
            .iter()
            .enumerate()
            .map(|(k, o)| {
                let col: Vec<f64> = rows.iter().map(|r| r[k + 1]).collect();
                format!("{} {}", o.column(), trend(&col))
            })
            .collect();
        vec![format!("monotonicity in p: {}", parts.join(", "))]
    } else {
        Vec::new()
    };
    let csv = csv_table(&header, &rows, &footer)?;
    match &args.out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(grid(0.0, 1.0, 0.5).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(grid(0.0, 1.0, 0.1).unwrap().len(), 11);
        assert!(grid(1.0, 0.0, 0.1).unwrap().is_empty());
        assert!(grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn trends() {
        assert_eq!(trend(&[0.0, 0.0, 1.0]), "non-decreasing");
        assert_eq!(trend(&[2.0, 1.0]), "non-increasing");
        assert_eq!(trend(&[1.0, 2.0, 1.0]), "not monotone");
        assert_eq!(trend(&[1.0, 1.0]), "constant");
    }
}

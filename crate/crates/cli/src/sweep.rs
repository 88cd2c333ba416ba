//! One-parameter sweeps over a base scenario.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::run::{run_scenario, write_atomic, Report};

pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Control amplitude; the perturbation amplitude follows as a third of it.
    Theta,
    /// Control and perturbation exponent.
    R,
    Dim,
    NumProbes,
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "theta" => Ok(Self::Theta),
            "r" => Ok(Self::R),
            "dim" => Ok(Self::Dim),
            "num_probes" => Ok(Self::NumProbes),
            other => Err(CliError::config_msg(
                "param",
                format!("unknown sweep parameter `{other}`; expected theta, r, dim or num_probes"),
            )),
        }
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::Theta => "theta",
            Self::R => "r",
            Self::Dim => "dim",
            Self::NumProbes => "num_probes",
        }
    }

    /// The base config with this parameter set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: &str) -> Result<ScenarioConfig, CliError> {
        let mut cfg = base.clone();
        let float = || {
            value
                .parse::<f64>()
                .map_err(|e| CliError::config("values", format!("`{value}`: {e}")))
        };
        let count = || {
            value
                .parse::<usize>()
                .map_err(|e| CliError::config("values", format!("`{value}`: {e}")))
        };
        let perturbations =
            |cfg: &mut ScenarioConfig, edit: &dyn Fn(&mut crate::config::PerturbationConfig)| {
                edit(&mut cfg.perturbation);
                if let Some(p) = cfg.second_perturbation.as_mut() {
                    edit(p);
                }
            };
        match self {
            Self::Theta => {
                let v = float()?;
                cfg.control.theta = v;
                perturbations(&mut cfg, &|p| p.theta_delta = Some(v / 3.0));
            }
            Self::R => {
                let v = float()?;
                cfg.control.r = v;
                perturbations(&mut cfg, &|p| p.r = Some(v));
            }
            Self::Dim => cfg.algebra.dim = count()?,
            Self::NumProbes => cfg.sampling.num_probes = count()?,
        }
        Ok(cfg)
    }
}

/// Outcome of one sweep value.
#[derive(Debug)]
pub struct SweepRow {
    pub value: String,
    pub dir: PathBuf,
    pub outcome: Result<Report, CliError>,
}

impl SweepRow {
    fn csv(&self, param: SweepParam) -> String {
        let name = param.name();
        match &self.outcome {
            Ok(r) => {
                let ratio = match r.bound.max_ratio {
                    stabilizer_core::ExtReal::Finite(v) => format!("{v:.16e}"),
                    stabilizer_core::ExtReal::Infinite => "inf".into(),
                };
                let uniq = r
                    .uniqueness
                    .as_ref()
                    .map_or(String::new(), |u| u.pass.to_string());
                format!(
                    "{name},{},ok,{:.16e},{:.16e},{ratio},{},{:.16e},{},{},{uniq}",
                    self.value,
                    r.direction.q(),
                    r.direction.lipschitz,
                    r.bound.pass,
                    r.laws.max_defect(),
                    r.laws.pass(),
                    r.cstar.pass,
                )
            }
            Err(e) => format!("{name},{},error:{},,,,,,,,", self.value, e.exit_code()),
        }
    }
}

pub const SWEEP_HEADER: &str = "param,value,status,q,L,max_bound_ratio,bound_pass,max_law_defect,laws_pass,cstar_pass,uniqueness_pass";

/// Runs the base scenario once per value in `out/<param>=<value>/` and
/// writes `sweep.csv`. Failed values are kept as rows with their exit code.
pub fn sweep(
    base: &ScenarioConfig,
    param: SweepParam,
    values: &[String],
    out: &Path,
) -> Result<Vec<SweepRow>, CliError> {
    if values.is_empty() {
        return Err(CliError::config_msg(
            "values",
            "at least one value is required",
        ));
    }
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut rows = Vec::with_capacity(values.len());
    let mut csv = format!("{SWEEP_HEADER}\n");
    for value in values {
        let dir = out.join(format!("{}={value}", param.name()));
        let outcome = param
            .apply(base, value)
            .and_then(|cfg| run_scenario(&cfg, &dir))
            .map(|(report, _)| report);
        let row = SweepRow {
            value: value.clone(),
            dir,
            outcome,
        };
        writeln!(csv, "{}", row.csv(param)).expect("writing to a String");
        rows.push(row);
    }
    write_atomic(&out.join(SWEEP_FILE), csv.as_bytes())?;
    Ok(rows)
}

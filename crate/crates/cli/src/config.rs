//! Scenario configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stabilizer_core::verifier::{LawOptions, ScanOptions};
use stabilizer_core::{
    AlgebraKind, AlgebraSpec, ApproxMap64, ControlFunction64, Element64, InvolutionKind,
    LambdaSampler, Perturbation, PerturbationKind, PerturbationSpec, StabilizerOptions, Twist,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub algebra: AlgebraConfig,
    pub involution: InvolutionConfig,
    pub perturbation: PerturbationConfig,
    /// Second candidate around the same involution, for the uniqueness check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_perturbation: Option<PerturbationConfig>,
    pub control: ControlConfig,
    #[serde(default)]
    pub stabilizer: StabilizerConfig,
    pub sampling: SamplingConfig,
    pub lambda: LambdaConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub kind: AlgebraKind,
    #[serde(default = "one")]
    pub dim: usize,
}

fn one() -> usize {
    1
}

/// Complex entries as parallel real and imaginary arrays, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementConfig {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl ElementConfig {
    fn build(&self, spec: AlgebraSpec, key: &str) -> Result<Element64, CliError> {
        let im = if self.im.is_empty() {
            vec![0.0; self.re.len()]
        } else {
            self.im.clone()
        };
        Element64::from_parts(spec, &self.re, &im).map_err(|e| CliError::config(key, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InvolutionConfig {
    Adjoint,
    TwistedAdjoint { s: ElementConfig },
    Conjugation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub kind: PerturbationKind,
    /// Defaults to a third of the control amplitude.
    #[serde(default)]
    pub theta_delta: Option<f64>,
    /// Defaults to the control exponent.
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub direction_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    PowerSum,
    PowerProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub kind: ControlKind,
    pub theta: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizerConfig {
    pub max_n: usize,
    pub tol_rel: f64,
}

impl Default for StabilizerConfig {
    fn default() -> Self {
        let d = StabilizerOptions::default();
        Self {
            max_n: d.max_n,
            tol_rel: d.tol_rel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub num_probes: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    pub seed: u64,
    /// Probes appended after the sampled ones.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_probes: Vec<ElementConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConfig {
    pub n0: u32,
    pub arc: usize,
    pub circle: usize,
    pub reals: usize,
    pub complex: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub involutive: f64,
    pub laws: f64,
    pub law_pairs_per_probe: usize,
    pub uniqueness: f64,
    pub cstar: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            involutive: 1e-6,
            laws: 1e-6,
            law_pairs_per_probe: 5,
            uniqueness: 1e-6,
            cstar: 1e-8,
        }
    }
}

/// A validated configuration bound to core types.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub spec: AlgebraSpec,
    pub control: ControlFunction64,
    pub map: ApproxMap64,
    pub second_map: Option<ApproxMap64>,
    pub stabilizer: StabilizerOptions,
    pub probes: Vec<Element64>,
    pub lambdas: LambdaSampler,
}

impl Scenario {
    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            stabilizer: self.stabilizer,
            involutive_tol: self.config.tolerances.involutive,
        }
    }

    pub fn law_options(&self) -> LawOptions {
        LawOptions {
            stabilizer: self.stabilizer,
            pairs_per_probe: self.config.tolerances.law_pairs_per_probe,
            tol: self.config.tolerances.laws,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config {
                key: if path == "." { "config".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            key: "config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }

    /// Fills defaulted perturbation fields from the control.
    fn resolve(&self, p: &PerturbationConfig) -> PerturbationSpec<f64> {
        PerturbationSpec {
            kind: p.kind,
            theta_delta: p.theta_delta.unwrap_or(self.control.theta / 3.0),
            r: p.r.unwrap_or(self.control.r),
            direction_seed: p.direction_seed,
        }
    }

    /// Copy with every default made explicit, as echoed in the manifest.
    pub fn resolved(&self) -> Self {
        let fill = |p: &PerturbationConfig| {
            let s = self.resolve(p);
            PerturbationConfig {
                theta_delta: Some(s.theta_delta),
                r: Some(s.r),
                ..*p
            }
        };
        Self {
            perturbation: fill(&self.perturbation),
            second_perturbation: self.second_perturbation.as_ref().map(fill),
            ..self.clone()
        }
    }

    pub fn build(&self) -> Result<Scenario, CliError> {
        let spec = AlgebraSpec::new(self.algebra.kind, self.algebra.dim)
            .map_err(|e| CliError::config("algebra.dim", e))?;

        let involution = match &self.involution {
            InvolutionConfig::Adjoint => InvolutionKind::Adjoint,
            InvolutionConfig::Conjugation => InvolutionKind::Conjugation,
            InvolutionConfig::TwistedAdjoint { s } => {
                let s = s.build(spec, "involution.s")?;
                InvolutionKind::TwistedAdjoint(
                    Twist::new(s).map_err(|e| CliError::config("involution.s", e))?,
                )
            }
        };

        let control = match self.control.kind {
            ControlKind::PowerSum => ControlFunction64::PowerSum {
                theta: self.control.theta,
                r: self.control.r,
            },
            ControlKind::PowerProduct => ControlFunction64::PowerProduct {
                theta: self.control.theta,
                r: self.control.r,
            },
        };
        control
            .validate()
            .map_err(|e| CliError::config("control", e))?;

        let bind = |p: &PerturbationConfig, key: &str| -> Result<ApproxMap64, CliError> {
            let perturbation = Perturbation::from_spec(&self.resolve(p), spec)
                .map_err(|e| CliError::config(key, e))?;
            ApproxMap64::new(spec, involution.clone(), perturbation)
                .map_err(|e| CliError::config("involution.kind", e))
        };
        let map = bind(&self.perturbation, "perturbation")?;
        let second_map = self
            .second_perturbation
            .as_ref()
            .map(|p| bind(p, "second_perturbation"))
            .transpose()?;

        let stabilizer = StabilizerOptions {
            max_n: self.stabilizer.max_n,
            tol_rel: self.stabilizer.tol_rel,
        };
        stabilizer
            .validate()
            .map_err(|e| CliError::config("stabilizer", e))?;

        let sampling = &self.sampling;
        if !(sampling.radius_min > 0.0 && sampling.radius_min.is_finite()) {
            return Err(CliError::config_msg(
                "sampling.radius_min",
                format!("must be finite and > 0, got {}", sampling.radius_min),
            ));
        }
        if !(sampling.radius_max >= sampling.radius_min && sampling.radius_max.is_finite()) {
            return Err(CliError::config_msg(
                "sampling.radius_max",
                format!(
                    "must be finite and >= radius_min, got {}",
                    sampling.radius_max
                ),
            ));
        }
        if sampling.num_probes == 0 && sampling.extra_probes.is_empty() {
            return Err(CliError::config_msg("sampling.num_probes", "must be >= 1"));
        }
        let mut probes = stabilizer_core::sample_probes(
            spec,
            sampling.num_probes,
            (sampling.radius_min, sampling.radius_max),
            sampling.seed,
        )
        .map_err(|e| CliError::config("sampling", e))?;
        for (k, extra) in sampling.extra_probes.iter().enumerate() {
            probes.push(extra.build(spec, &format!("sampling.extra_probes[{k}]"))?);
        }

        let lambdas = LambdaSampler {
            n0: self.lambda.n0,
            arc: self.lambda.arc,
            circle: self.lambda.circle,
            reals: self.lambda.reals,
            complex: self.lambda.complex,
            seed: self.lambda.seed,
        };
        lambdas
            .sample::<f64>()
            .map_err(|e| CliError::config("lambda", e))?;

        let t = &self.tolerances;
        for (key, v) in [
            ("tolerances.involutive", t.involutive),
            ("tolerances.laws", t.laws),
            ("tolerances.uniqueness", t.uniqueness),
            ("tolerances.cstar", t.cstar),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::config_msg(
                    key,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if t.law_pairs_per_probe == 0 {
            return Err(CliError::config_msg(
                "tolerances.law_pairs_per_probe",
                "must be >= 1",
            ));
        }

        Ok(Scenario {
            config: self.resolved(),
            spec,
            control,
            map,
            second_map,
            stabilizer,
            probes,
            lambdas,
        })
    }
}

//! Experiment configuration: one JSON document, every section optional.
//!
//! Unknown keys are rejected at every level. `--set path=value` overrides are
//! applied to the raw JSON before it is typed, so they obey the same rules.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tyc_core::analysis::{Axis, RegionBoundary, Search};
use tyc_core::models::{DimensionalParams, DimensionlessParams, ModelKind, ModelSpec, Params, StateVector};
use tyc_core::ode::IntegratorConfig;
use tyc_core::pde::{Boundary, Profile};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub initial: InitialConfig,
    pub spatial: SpatialConfig,
    pub integrator: IntegratorSettings,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            initial: InitialConfig::default(),
            spatial: SpatialConfig::default(),
            integrator: IntegratorSettings::default(),
            analysis: AnalysisConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Classic3,
    Classic4,
    ModifiedAllee,
    ModifiedNoAllee,
    ExpLogistic3,
}

impl From<ModelName> for ModelKind {
    fn from(n: ModelName) -> Self {
        match n {
            ModelName::Classic3 => ModelKind::Classic3,
            ModelName::Classic4 => ModelKind::Classic4,
            ModelName::ModifiedAllee => ModelKind::ModifiedAllee,
            ModelName::ModifiedNoAllee => ModelKind::ModifiedNoAllee,
            ModelName::ExpLogistic3 => ModelKind::ExpLogistic3,
        }
    }
}

/// Exactly one of `scaled` / `physical` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_kind")]
    pub kind: ModelName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled: Option<ScaledConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalConfig>,
}

fn default_kind() -> ModelName {
    ModelName::Classic3
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelName::Classic3,
            scaled: Some(ScaledConfig::default()),
            physical: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScaledConfig {
    pub r: f64,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allee: Option<f64>,
    pub diffusion: f64,
}

impl Default for ScaledConfig {
    fn default() -> Self {
        Self {
            r: 17.8125,
            gamma: 0.0,
            allee: None,
            diffusion: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    pub beta: f64,
    pub delta: f64,
    pub capacity: f64,
    pub mu: f64,
    #[serde(default)]
    pub diffusion: f64,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec<f64>, CliError> {
        let params = match (&self.scaled, &self.physical) {
            (Some(s), None) => {
                let mut p = DimensionlessParams::new(s.r, s.gamma)?.with_diffusion(s.diffusion)?;
                if let Some(a) = s.allee {
                    p = p.with_allee(a)?;
                }
                Params::Dimensionless(p)
            }
            (None, Some(p)) => Params::Dimensional(
                DimensionalParams::new(p.beta, p.delta, p.capacity, p.mu)?.with_diffusion(p.diffusion)?,
            ),
            _ => {
                return Err(CliError::Config(
                    "model needs exactly one of `scaled` or `physical`".into(),
                ))
            }
        };
        Ok(ModelSpec::new(self.kind.into(), params)?)
    }

    pub fn physical(&self) -> Result<DimensionalParams<f64>, CliError> {
        let p = self
            .physical
            .as_ref()
            .ok_or_else(|| CliError::Config("model.physical (beta, delta, capacity, mu) is required".into()))?;
        Ok(DimensionalParams::new(p.beta, p.delta, p.capacity, p.mu)?.with_diffusion(p.diffusion)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub f: f64,
    pub m: f64,
    pub s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r4: Option<f64>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            f: 0.3,
            m: 0.3,
            s: 0.1,
            r4: None,
        }
    }
}

impl InitialConfig {
    pub fn state(&self) -> StateVector<f64> {
        StateVector {
            f: self.f,
            m: self.m,
            s: self.s,
            r4: self.r4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    Neumann,
    Dirichlet,
}

impl From<BoundaryName> for Boundary {
    fn from(b: BoundaryName) -> Self {
        match b {
            BoundaryName::Neumann => Boundary::NeumannHomogeneous,
            BoundaryName::Dirichlet => Boundary::DirichletHomogeneous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant { value: f64 },
    Parabola,
    ScaledParabola { s_max: f64 },
}

impl From<ProfileConfig> for Profile<f64> {
    fn from(p: ProfileConfig) -> Self {
        match p {
            ProfileConfig::Constant { value } => Profile::Constant(value),
            ProfileConfig::Parabola => Profile::Parabola,
            ProfileConfig::ScaledParabola { s_max } => Profile::ScaledParabola { s_max },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpatialConfig {
    pub n: usize,
    pub boundary: BoundaryName,
    pub f: ProfileConfig,
    pub m: ProfileConfig,
    pub s: ProfileConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r4: Option<ProfileConfig>,
    pub snapshots: Vec<f64>,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        Self {
            n: 199,
            boundary: BoundaryName::Neumann,
            f: ProfileConfig::Constant { value: 0.3 },
            m: ProfileConfig::Constant { value: 0.3 },
            s: ProfileConfig::Constant { value: 0.1 },
            r4: None,
            snapshots: Vec::new(),
        }
    }
}

impl SpatialConfig {
    pub fn profiles(&self) -> Vec<Profile<f64>> {
        let mut v: Vec<Profile<f64>> = vec![self.f.into(), self.m.into(), self.s.into()];
        if let Some(r4) = self.r4 {
            v.push(r4.into());
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub t_end: f64,
    pub blowup_cutoff: f64,
    pub neg_eps: f64,
    pub sample_dt: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        let c = IntegratorConfig::<f64>::default();
        Self {
            abs_tol: c.abs_tol,
            rel_tol: c.rel_tol,
            h_init: c.h_init,
            h_min: c.h_min,
            h_max: c.h_max,
            t_end: c.t_end,
            blowup_cutoff: c.blowup_cutoff,
            neg_eps: c.neg_eps,
            sample_dt: c.sample_dt,
        }
    }
}

impl IntegratorSettings {
    pub fn build(&self) -> Result<IntegratorConfig<f64>, CliError> {
        let c = IntegratorConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            h_init: self.h_init,
            h_min: self.h_min,
            h_max: self.h_max,
            t_end: self.t_end,
            blowup_cutoff: self.blowup_cutoff,
            neg_eps: self.neg_eps,
            sample_dt: self.sample_dt,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    S0,
    Gamma,
}

impl From<AxisName> for Axis {
    fn from(a: AxisName) -> Self {
        match a {
            AxisName::S0 => Axis::InitialSupermale,
            AxisName::Gamma => Axis::IntroductionRate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryChoice {
    #[serde(rename = "R1/2")]
    Region12,
    #[serde(rename = "R2/3")]
    Region23,
}

impl From<BoundaryChoice> for RegionBoundary {
    fn from(b: BoundaryChoice) -> Self {
        match b {
            BoundaryChoice::Region12 => RegionBoundary::Region12,
            BoundaryChoice::Region23 => RegionBoundary::Region23,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub axis: AxisName,
    pub boundary: BoundaryChoice,
    pub f0m0: f64,
    pub range: [f64; 2],
    pub resolution: usize,
    pub bracket: [f64; 2],
    pub tol: f64,
    pub prescan: usize,
    /// Extra models for `compare`; the main model is always included first.
    pub compare: Vec<ModelConfig>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let s = Search::<f64>::default();
        Self {
            axis: AxisName::S0,
            boundary: BoundaryChoice::Region12,
            f0m0: 0.3,
            range: [0.1, 0.5],
            resolution: 9,
            bracket: [s.lo, s.hi],
            tol: s.tol,
            prescan: s.prescan,
            compare: Vec::new(),
        }
    }
}

impl AnalysisConfig {
    pub fn search(&self) -> Search<f64> {
        Search {
            lo: self.bracket[0],
            hi: self.bracket[1],
            tol: self.tol,
            prescan: self.prescan,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("parse error: {e}")))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads `path` (or starts from `{}`), applies the overrides in order and types the result.
    pub fn load(path: Option<&std::path::Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("parse error in {}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }
}

/// Applies `a.b.c=value`. The value is read as JSON when it parses, else as a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("override key `{path}` is malformed")));
    }
    let new = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    for key in &keys[..keys.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override `{path}` descends into a non-object")))?;
        cur = obj
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = cur
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override `{path}` descends into a non-object")))?;
    obj.insert(keys[keys.len() - 1].to_string(), new);
    Ok(())
}

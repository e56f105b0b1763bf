//! TOML run configuration.
//!
//! Sections mirror the model parameters. Every key has a default, so an empty
//! file is a complete configuration. Overrides are applied to the parsed TOML
//! tree before deserialization, which keeps key paths in error messages
//! identical whether a value came from the file or the command line.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use lbra_core::analytic::AnalyticPoint;
use lbra_core::{Axis, DeploymentParams, ExperimentSpec, ModelError, Policy, RadioParams, SpectrumPlan};

use crate::error::CliError;
use crate::output;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioSection {
    /// SIR threshold in dB.
    pub eta_db: f64,
    pub alpha: f64,
}

impl Default for RadioSection {
    fn default() -> Self {
        RadioSection { eta_db: 3.0, alpha: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub r1: u32,
    pub r2: u32,
    pub omega1: u32,
    pub omega2: u32,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            r1: 1800,
            r2: 1800,
            omega1: 30,
            omega2: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeploymentSection {
    pub lambda_d: f64,
    pub lambda_g: f64,
    pub window: f64,
    pub seed: u64,
}

impl Default for DeploymentSection {
    fn default() -> Self {
        DeploymentSection {
            lambda_d: 2e-3,
            lambda_g: 1e-4,
            window: 1000.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    /// Unset runs both policies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<Policy>,
    pub trials: usize,
    pub resolution: usize,
    pub analytic_samples: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            policy: None,
            trials: 200,
            resolution: 256,
            analytic_samples: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            axis: Axis::LambdaD,
            values: vec![0.5e-3, 1e-3, 2e-3, 3e-3, 4e-3, 5e-3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Capacity,
    Outage,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub log_y: bool,
    pub metric: Metric,
}

/// The file as written. `output` is not serialized: it names destinations and
/// does not affect results, so it stays out of embedded metadata.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub radio: RadioSection,
    pub spectrum: SpectrumSection,
    pub deployment: DeploymentSection,
    pub simulation: SimulationSection,
    pub sweep: SweepSection,
    #[serde(skip_serializing)]
    pub output: OutputSection,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub radio: RadioParams,
    pub plan: SpectrumPlan,
    pub deployment: DeploymentParams,
}

impl RunConfig {
    pub fn policies(&self) -> Vec<Policy> {
        match self.file.simulation.policy {
            Some(p) => vec![p],
            None => Policy::ALL.to_vec(),
        }
    }

    pub fn experiment(&self, policy: Policy) -> ExperimentSpec {
        ExperimentSpec {
            deployment: self.deployment,
            radio: self.radio,
            plan: self.plan,
            policy,
            trials: self.file.simulation.trials,
            resolution: self.file.simulation.resolution,
        }
    }

    pub fn analytic_point(&self) -> AnalyticPoint {
        AnalyticPoint {
            radio: self.radio,
            plan: self.plan,
            lambda_d: self.deployment.lambda_d,
            lambda_g: self.deployment.lambda_g,
            window: self.deployment.window,
            samples: self.file.simulation.analytic_samples,
            seed: self.deployment.base_seed,
        }
    }

    pub fn output(&self) -> &OutputSection {
        &self.file.output
    }

    /// The resolved configuration as TOML, without the output section.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.file).expect("configuration serializes")
    }
}

/// A `key.path=value` override. Values are TOML literals; anything that does
/// not parse as one is taken as a string.
pub fn parse_override(raw: &str) -> Result<(String, toml::Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::config(raw, "override must have the form key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::config(raw, "override key is empty"));
    }
    Ok((key.to_string(), literal(value.trim())))
}

fn literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut node = table;
    let mut walked = String::new();
    for part in parts {
        if !walked.is_empty() {
            walked.push('.');
        }
        walked.push_str(part);
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(&walked, "is not a section"))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// Extracts the configuration embedded in an output CSV, if `text` is one.
fn embedded_config(text: &str) -> Option<String> {
    if !text.lines().any(|l| l == output::CSV_HEADER) {
        return None;
    }
    output::parse_csv(text).ok().map(|f| f.config)
}

/// Parses configuration text and applies overrides in order.
pub fn parse_config_str(text: &str, overrides: &[(String, toml::Value)]) -> Result<RunConfig, CliError> {
    let source = embedded_config(text);
    let text = source.as_deref().unwrap_or(text);
    let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::config("<file>", e.message()))?;
    for (key, value) in overrides {
        set_path(&mut table, key, value.clone())?;
    }
    let file: ConfigFile = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(&path, e.into_inner().to_string())
    })?;
    validate(file)
}

/// Reads `path` (or the defaults when `None`) and applies overrides.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, toml::Value)]) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::config(&p.display().to_string(), e.to_string()))?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

fn in_section(section: &str, err: ModelError) -> CliError {
    match err {
        ModelError::Parameter { name, reason } => CliError::config(&format!("{section}.{name}"), reason),
        ModelError::DivergentIntegral { .. } => CliError::config(&format!("{section}.alpha"), err.to_string()),
        other => CliError::config(section, other.to_string()),
    }
}

fn validate(file: ConfigFile) -> Result<RunConfig, CliError> {
    let radio = RadioParams::new(file.radio.eta_db, file.radio.alpha).map_err(|e| in_section("radio", e))?;
    let s = &file.spectrum;
    let plan = SpectrumPlan::new(s.r1, s.r2, s.omega1, s.omega2).map_err(|e| in_section("spectrum", e))?;
    let d = &file.deployment;
    let deployment =
        DeploymentParams::new(d.lambda_d, d.lambda_g, d.window, d.seed).map_err(|e| in_section("deployment", e))?;

    let sim = &file.simulation;
    if sim.trials == 0 {
        return Err(CliError::config("simulation.trials", "at least one trial is required"));
    }
    if sim.resolution < lbra_core::geometry::MIN_RESOLUTION {
        return Err(CliError::config(
            "simulation.resolution",
            format!("must be at least {}", lbra_core::geometry::MIN_RESOLUTION),
        ));
    }
    if sim.analytic_samples == 0 {
        return Err(CliError::config("simulation.analytic_samples", "must be positive"));
    }

    let values = &file.sweep.values;
    if values.is_empty() {
        return Err(CliError::config("sweep.values", "needs at least one value"));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(CliError::config("sweep.values", "values must be positive and finite"));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::config("sweep.values", "values must be strictly increasing"));
    }
    for &v in values {
        let mut probe = deployment;
        file.sweep.axis.apply(&mut probe, v);
        DeploymentParams::new(probe.lambda_d, probe.lambda_g, probe.window, probe.base_seed)
            .map_err(|e| CliError::config("sweep.values", format!("{v}: {e}")))?;
    }

    Ok(RunConfig {
        file,
        radio,
        plan,
        deployment,
    })
}

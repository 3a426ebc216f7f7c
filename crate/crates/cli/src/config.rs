//! JSON run configurations. Parsing is strict: unknown keys are rejected so
//! a typo in a twelve-parameter block cannot silently misconfigure a run.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use hybridward::params::PatientParams;
use hybridward::sim::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub types: Vec<PatientParams>,
    #[serde(default)]
    pub capacity: Option<f64>,
    #[serde(default)]
    pub objective: Objective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "T")]
    TravelTime,
    #[serde(rename = "C")]
    Capacity,
    #[serde(rename = "Gamma")]
    Surcharge,
    #[serde(rename = "x")]
    InitialScore,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>, String> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err("sweep step must be positive".into());
        }
        if self.stop < self.start || self.stop.is_nan() || self.start.is_nan() {
            return Err("sweep range must be increasing".into());
        }
        let mut grid = Vec::new();
        let mut i = 0u64;
        loop {
            let v = self.start + self.step * i as f64;
            if v > self.stop + 1e-12 * self.step {
                break;
            }
            grid.push(v);
            i += 1;
        }
        if grid.is_empty() {
            return Err("sweep range is empty".into());
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub types: Vec<PatientParams>,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub capacity: Option<f64>,
    #[serde(default)]
    pub objective: Objective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyChoice {
    Policy1,
    Policy2,
    #[default]
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub simulation: SimConfig,
    #[serde(default)]
    pub policy: PolicyChoice,
    /// Write the event log of replication 0 next to the output file.
    #[serde(default)]
    pub event_log: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    /// Episode CSV, resolved relative to the config file's directory.
    pub data: PathBuf,
    /// Admission score; required for the on-site and remote fits.
    #[serde(default)]
    pub x: Option<f64>,
    /// Call-in threshold of the observed remote episodes.
    #[serde(default)]
    pub a: Option<f64>,
    /// Restrict to one patient type (the CSV's `type` column).
    #[serde(default)]
    pub patient_type: Option<u32>,
}

pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

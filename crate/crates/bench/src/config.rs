//! Experiment configuration files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use polyqaoa::circuit::GateModel;
use polyqaoa::encoding::{DomainSpec, VarSpec};
use polyqaoa::optimize::{ObjectiveMode, OptimizerConfig};
use polyqaoa::parser::parse_objective;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const PRESETS: &[(&str, &str)] = &[
    ("1d-st", include_str!("../presets/1d-st.toml")),
    ("2d-rb", include_str!("../presets/2d-rb.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Pubo,
    Qubo,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Pubo => "pubo",
            Formulation::Qubo => "qubo",
        })
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pubo" => Ok(Formulation::Pubo),
            "qubo" => Ok(Formulation::Qubo),
            _ => Err(format!("unknown formulation `{s}` (expected pubo or qubo)")),
        }
    }
}

/// One continuous variable; its resolution comes from the sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainEntry {
    pub name: String,
    #[serde(default = "yes")]
    pub signed: bool,
    pub n: u32,
}

fn yes() -> bool {
    true
}

/// The objective together with its variable domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub objective: String,
    pub domain: Vec<DomainEntry>,
}

impl Problem {
    pub fn domain_spec(&self, m: u32) -> Result<DomainSpec, HarnessError> {
        let vars = self
            .domain
            .iter()
            .map(|d| VarSpec {
                name: d.name.clone(),
                signed: d.signed,
                n: d.n,
                m,
            })
            .collect();
        Ok(DomainSpec::new(vars)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let f = parse_objective(&self.objective)?;
        let spec = self.domain_spec(0)?;
        if let Some(v) = f.variables().into_iter().find(|v| spec.get(v).is_none()) {
            return Err(HarnessError::Config(format!("variable `{v}` has no [[domain]] entry")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Exact,
    Sampled,
}

/// The `[optimizer]` table. `shots` is only read in sampled mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
    pub ramp_scale: f64,
    pub mode: ModeName,
    pub shots: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
            initial_step: d.initial_step,
            ramp_scale: d.ramp_scale,
            mode: ModeName::Exact,
            shots: 1024,
        }
    }
}

impl OptimizerSection {
    pub fn to_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            initial_step: self.initial_step,
            ramp_scale: self.ramp_scale,
            mode: match self.mode {
                ModeName::Exact => ObjectiveMode::Exact,
                ModeName::Sampled => ObjectiveMode::Sampled { shots: self.shots },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub bit_resolutions: Vec<u32>,
    pub layers: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: String,
    #[serde(default = "both")]
    pub formulations: Vec<Formulation>,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default)]
    pub gate_model: GateModel,
    pub domain: Vec<DomainEntry>,
    pub sweep: SweepSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn both() -> Vec<Formulation> {
    vec![Formulation::Pubo, Formulation::Qubo]
}

fn default_shots() -> usize {
    1024
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let c: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn preset(name: &str) -> Result<Self, HarnessError> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
            HarnessError::Config(format!("unknown preset `{name}` (available: {})", names.join(", ")))
        })?;
        Self::from_toml(text)
    }

    pub fn problem(&self) -> Problem {
        Problem {
            objective: self.objective.clone(),
            domain: self.domain.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let empty = |what: &str| Err(HarnessError::Config(format!("{what} must not be empty")));
        if self.formulations.is_empty() {
            return empty("formulations");
        }
        if self.sweep.bit_resolutions.is_empty() {
            return empty("sweep.bit_resolutions");
        }
        if self.sweep.layers.is_empty() {
            return empty("sweep.layers");
        }
        if self.sweep.seeds.is_empty() {
            return empty("sweep.seeds");
        }
        if self.sweep.layers.contains(&0) {
            return Err(HarnessError::Config("sweep.layers entries must be at least 1".into()));
        }
        if self.shots == 0 {
            return Err(HarnessError::Config("shots must be at least 1".into()));
        }
        self.optimizer
            .to_config()
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.problem().validate()
    }

    /// Every sweep point in formulation, resolution, layers, seed order.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &formulation in &self.formulations {
            for &bit_resolution in &self.sweep.bit_resolutions {
                for &layers in &self.sweep.layers {
                    for &seed in &self.sweep.seeds {
                        out.push(SweepPoint {
                            formulation,
                            bit_resolution,
                            layers,
                            seed,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn run_settings(&self) -> RunSettings {
        RunSettings {
            shots: self.shots,
            gate_model: self.gate_model,
            optimizer: self.optimizer.clone(),
        }
    }
}

/// Settings shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub shots: usize,
    pub gate_model: GateModel,
    pub optimizer: OptimizerSection,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            shots: default_shots(),
            gate_model: GateModel::Ladder,
            optimizer: OptimizerSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub formulation: Formulation,
    pub bit_resolution: u32,
    pub layers: usize,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load() {
        let st = ExperimentConfig::preset("1d-st").unwrap();
        assert_eq!(st.sweep.bit_resolutions, vec![0, 1, 2, 3]);
        assert_eq!(st.sweep.seeds.len(), 10);
        assert_eq!(st.points().len(), 2 * 4 * 5 * 10);
        let rb = ExperimentConfig::preset("2d-rb").unwrap();
        assert_eq!(rb.domain.len(), 2);
        assert_eq!(rb.sweep.bit_resolutions, vec![0, 1]);
        assert!(ExperimentConfig::preset("3d").is_err());
    }

    #[test]
    fn validation() {
        let base = ExperimentConfig::preset("1d-st").unwrap();
        let mut c = base.clone();
        c.sweep.seeds.clear();
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.objective = "x + z".into();
        assert!(matches!(c.validate(), Err(HarnessError::Config(m)) if m.contains("`z`")));
        let mut c = base.clone();
        c.objective = "x / 2".into();
        assert!(c.validate().is_err());
        let mut c = base;
        c.optimizer.tolerance = -1.0;
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_toml("objective = 1").is_err());
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let c = ExperimentConfig::from_toml(
            r#"
            objective = "x^2"
            [[domain]]
            name = "x"
            n = 1
            [sweep]
            bit_resolutions = [0]
            layers = [1]
            seeds = [3]
            "#,
        )
        .unwrap();
        assert_eq!(c.shots, 1024);
        assert_eq!(c.formulations, vec![Formulation::Pubo, Formulation::Qubo]);
        assert_eq!(c.optimizer.to_config(), OptimizerConfig::default());
        assert!(c.domain[0].signed);
        assert_eq!(c.gate_model, GateModel::Ladder);
    }
}

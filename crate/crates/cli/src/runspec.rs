use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qcc_core::norms::EstimatorConfig;

use crate::output::Format;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Exponents,
    Diagram,
    Jacobian,
    Witness,
    Verify,
    Norms,
    Suite,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("unit variant");
        f.write_str(v.as_str().expect("string"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn empty_params() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

fn default_seed() -> u64 {
    EstimatorConfig::default().seed
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: Command,
    #[serde(default = "empty_params")]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl RunSpec {
    pub fn new(command: Command) -> Self {
        RunSpec { command, params: empty_params(), output: None, seed: default_seed(), tolerance: None }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: RunSpec =
            serde_json::from_str(text).map_err(|e| CliError::invalid(format!("run spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !self.params.is_object() {
            return Err(CliError::invalid("params must be an object"));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::invalid(format!("tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Command parameters, parsed strictly.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        serde_json::from_value(self.params.clone())
            .map_err(|e| CliError::invalid(format!("params for {}: {e}", self.command)))
    }

    pub fn format(&self) -> Format {
        let out = self.output.as_ref();
        out.and_then(|o| o.format)
            .or_else(|| out.and_then(|o| o.path.as_deref()).and_then(Format::from_path))
            .unwrap_or(Format::Json)
    }

    pub fn path(&self) -> Option<&std::path::Path> {
        self.output.as_ref().and_then(|o| o.path.as_deref())
    }

    /// SHA-256 of the canonical JSON of the resolved spec.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serialises");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Classifier settings shared by the commands that estimate norms. The seed
/// always comes from the run spec.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierParams {
    pub slope_threshold: Option<f64>,
    pub min_r2: Option<f64>,
    pub cauchy_tolerance: Option<f64>,
    pub min_level: Option<u32>,
    pub max_level: Option<u32>,
    pub fit_shells: Option<usize>,
    pub samples: Option<usize>,
}

impl ClassifierParams {
    pub fn config(&self, seed: u64) -> Result<EstimatorConfig, CliError> {
        let d = EstimatorConfig::default();
        let cfg = EstimatorConfig {
            slope_threshold: self.slope_threshold.unwrap_or(d.slope_threshold),
            min_r2: self.min_r2.unwrap_or(d.min_r2),
            cauchy_tolerance: self.cauchy_tolerance.unwrap_or(d.cauchy_tolerance),
            min_level: self.min_level.unwrap_or(d.min_level),
            max_level: self.max_level.unwrap_or(d.max_level),
            fit_shells: self.fit_shells.unwrap_or(d.fit_shells),
            samples: self.samples.unwrap_or(d.samples),
            seed,
            execution: d.execution,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

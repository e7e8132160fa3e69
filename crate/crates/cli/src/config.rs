//! Experiment configuration: every subcommand reduces to one of these, and
//! `run --config` reads the same structure from a TOML file.

use serde::{Deserialize, Serialize};

use mbqc_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Verify,
    Compile,
    Gates,
    Qec,
    Bell,
    Tomo,
}

/// Flat description of one reproducible run. Fields that do not apply to
/// the chosen command are left out of the file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<CommandName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    /// Pulse program replacing the compiled one (verify).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulses: Option<String>,
    /// `single` or `two` (gates).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    /// One comma-separated angle list per row (gates).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub angles: Vec<String>,
    /// `branch` or `sample` (gates).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// `kind:strength` applied to every qubit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub bell_only: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidArgument(format!("cannot serialize config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Parse { line: 0, msg: format!("config: {e}") })?;
        if cfg.command.is_none() {
            return Err(Error::InvalidArgument("config has no `command`".into()));
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let cfg = ExperimentConfig {
            command: Some(CommandName::Qec),
            n: vec![1, 3, 5],
            targets: Some("C1,C2".into()),
            p_grid: Some("0:1:21".into()),
            inputs: Some(6),
            seed: Some(7),
            out: Some("atf.csv".into()),
            ..Default::default()
        };
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn unknown_keys_and_missing_command_fail() {
        assert!(ExperimentConfig::from_toml("command = \"bell\"\nfamly = \"LC4\"\n").is_err());
        assert!(ExperimentConfig::from_toml("family = \"LC4\"\n").is_err());
    }
}

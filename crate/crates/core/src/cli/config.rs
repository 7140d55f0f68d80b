//! Run configuration: everything a report needs to be reproduced.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::spec::DistSpec;
use crate::classify::{Thresholds, VerifyOptions};
use crate::error::{Error, Result};

pub const SEED_ENV: &str = "BIGJUMP_SEED";

/// Prefix of the first line of every CSV report.
pub const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub dist: Option<DistSpec>,
    /// Grid spec for positions; a plain list such as `5` or `1,2,3` is a grid too.
    pub x_grid: Option<String>,
    #[serde(rename = "K_grid")]
    pub k_grid: Option<String>,
    pub knot_range: Option<(u64, u64)>,
    pub thresholds: Option<Thresholds>,
    pub seed: u64,
    pub trials: Option<u64>,
    pub n: Option<usize>,
    pub suite: Option<String>,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            dist: None,
            x_grid: None,
            k_grid: None,
            knot_range: None,
            thresholds: None,
            seed: VerifyOptions::default().seed,
            trials: None,
            n: None,
            suite: None,
            format: Format::Csv,
            output: None,
        }
    }
}

impl RunConfig {
    /// Parse a config file: bare JSON, a JSON report (`{"config": ..., "data": ...}`) or a CSV
    /// report whose first line carries the config.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim_start();
        let parse = |s: &str| {
            serde_json::from_str::<RunConfig>(s).map_err(|e| Error::Parse(format!("config: {e}")))
        };
        if let Some(rest) = text.strip_prefix(CONFIG_PREFIX) {
            return parse(rest.lines().next().unwrap_or(""));
        }
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        match v {
            serde_json::Value::Object(ref m) if m.contains_key("config") && m.contains_key("data") => {
                serde_json::from_value(m["config"].clone()).map_err(|e| Error::Parse(format!("config: {e}")))
            }
            other => serde_json::from_value(other).map_err(|e| Error::Parse(format!("config: {e}"))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn header_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Apply `BIGJUMP_SEED` when set.
    pub fn apply_seed_env(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{SEED_ENV} must be an unsigned integer, got `{v}`")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunConfig {
        RunConfig {
            command: "bigjump".into(),
            dist: Some(DistSpec::parse_json(r#"{"kind": "catalog", "name": "ex33", "params": {"alpha": 5.5}}"#).unwrap()),
            k_grid: Some("10:500:10".into()),
            trials: Some(1000),
            ..RunConfig::default()
        }
    }

    #[test]
    fn header_and_report_forms_parse_back() {
        let c = sample();
        let csv = format!("{CONFIG_PREFIX}{}\nK,inf_B\n1,2\n", c.header_json());
        assert_eq!(RunConfig::parse(&csv).unwrap(), c);
        let json = serde_json::json!({"config": c, "data": []}).to_string();
        assert_eq!(RunConfig::parse(&json).unwrap(), c);
        assert_eq!(RunConfig::parse(&c.header_json()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_bad_seeds_are_usage_errors() {
        assert!(matches!(RunConfig::parse(r#"{"sed": 1}"#), Err(Error::Parse(_))));
        let mut c = sample();
        assert!(c.apply_seed_env(Some("x")).is_err());
        c.apply_seed_env(Some(" 42 ")).unwrap();
        assert_eq!(c.seed, 42);
    }
}

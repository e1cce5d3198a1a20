//! Pipeline configuration with flag > config file > default precedence.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vinepd::field::FiltrationKind;
use vinepd::matching::DistanceMetric;

use crate::{CliError, CommonOpts};

pub const DEFAULT_LEVELS: usize = 3;
pub const DEFAULT_TAU_M: f64 = vinepd::vineyard::DEFAULT_MATCH_THRESHOLD;
pub const DEFAULT_TAU_S: f64 = vinepd::vineyard::DEFAULT_STABILITY_THRESHOLD;

/// Optional overrides loaded from a TOML config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub levels: Option<usize>,
    pub metric: Option<String>,
    pub tau_m: Option<f64>,
    pub tau_s: Option<f64>,
    pub filtrations: Option<Vec<String>>,
    pub drop_zero_pers: Option<bool>,
    pub jobs: Option<usize>,
}

/// Fully resolved settings used by every subcommand.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub levels: usize,
    pub metric: DistanceMetric,
    pub tau_m: f64,
    pub tau_s: f64,
    pub filtrations: Vec<FiltrationKind>,
    pub drop_zero_pers: bool,
    pub jobs: usize,
}

/// Echo of the byte-relevant settings recorded in pipeline manifests.
/// `jobs` is deliberately absent: worker count never changes output bytes.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub levels: usize,
    pub metric: String,
    pub tau_m: f64,
    pub tau_s: f64,
    pub filtrations: Vec<String>,
    pub drop_zero_pers: bool,
}

impl PipelineConfig {
    pub fn resolve(opts: &CommonOpts) -> Result<PipelineConfig, CliError> {
        let file = match &opts.config {
            Some(path) => load_config_file(path)?,
            None => ConfigFile::default(),
        };

        let metric_name = opts
            .metric
            .clone()
            .or(file.metric)
            .unwrap_or_else(|| DistanceMetric::RelativePersistence.as_str().to_string());
        let metric = DistanceMetric::parse(&metric_name)
            .ok_or_else(|| CliError::Usage(format!("unknown metric {metric_name:?}")))?;

        let filtration_names = if !opts.filtration.is_empty() {
            opts.filtration.clone()
        } else if let Some(names) = file.filtrations {
            names
        } else {
            FiltrationKind::ALL.iter().map(|f| f.as_str().to_string()).collect()
        };
        let mut filtrations = Vec::new();
        for name in &filtration_names {
            let kind = FiltrationKind::parse(name)
                .ok_or_else(|| CliError::Usage(format!("unknown filtration {name:?}")))?;
            if !filtrations.contains(&kind) {
                filtrations.push(kind);
            }
        }
        filtrations.sort();

        let config = PipelineConfig {
            levels: opts.levels.or(file.levels).unwrap_or(DEFAULT_LEVELS),
            metric,
            tau_m: opts.tau_m.or(file.tau_m).unwrap_or(DEFAULT_TAU_M),
            tau_s: opts.tau_s.or(file.tau_s).unwrap_or(DEFAULT_TAU_S),
            filtrations,
            drop_zero_pers: opts.drop_zero_pers || file.drop_zero_pers.unwrap_or(false),
            jobs: opts.jobs.or(file.jobs).unwrap_or(1),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.tau_m < 0.0 || !self.tau_m.is_finite() {
            return Err(CliError::Usage(format!(
                "--tau-m must be finite and >= 0, got {}",
                self.tau_m
            )));
        }
        if !(0.0..=1.0).contains(&self.tau_s) {
            return Err(CliError::Usage(format!(
                "--tau-s must lie in [0, 1], got {}",
                self.tau_s
            )));
        }
        if self.levels < 1 {
            return Err(CliError::Usage("--levels must be at least 1".to_string()));
        }
        if self.jobs < 1 {
            return Err(CliError::Usage("--jobs must be at least 1".to_string()));
        }
        if self.filtrations.is_empty() {
            return Err(CliError::Usage("at least one filtration is required".to_string()));
        }
        Ok(())
    }

    /// Stabilization tracks across scales, so a single level is unusable.
    pub fn require_stack(&self) -> Result<(), CliError> {
        if self.levels < 2 {
            return Err(CliError::Usage(
                "stabilization needs --levels >= 2".to_string(),
            ));
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            levels: self.levels,
            metric: self.metric.as_str().to_string(),
            tau_m: self.tau_m,
            tau_s: self.tau_s,
            filtrations: self
                .filtrations
                .iter()
                .map(|f| f.as_str().to_string())
                .collect(),
            drop_zero_pers: self.drop_zero_pers,
        }
    }
}

fn load_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    if !path.exists() {
        return Err(CliError::MissingInput(format!(
            "config file {} does not exist",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Other(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Parse(format!("config file {}: {e}", path.display())))
}

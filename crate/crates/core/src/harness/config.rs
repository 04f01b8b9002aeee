//! Run configuration file (TOML, one section per subsystem).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::GridEvalConfig;
use crate::curriculum::NavAclConfig;
use crate::orchestrator::{EnvConfig, TrainingConfig};
use crate::per::PerConfig;
use crate::sac::SacConfig;
use crate::{Error, Result};

/// Output and bookkeeping options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunOptions {
    /// One independent training run per seed.
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// Episodes between checkpoints; 0 writes only the final one.
    pub checkpoint_every: u64,
    pub smoothing_window: usize,
    pub histogram_window: u64,
    pub histogram_bins: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seeds: vec![1, 2, 3],
            out_dir: PathBuf::from("runs"),
            checkpoint_every: 1000,
            smoothing_window: 500,
            histogram_window: 10_000,
            histogram_bins: 7,
        }
    }
}

impl RunOptions {
    fn validate(&self, errors: &mut Vec<String>) {
        if self.seeds.is_empty() {
            errors.push("run.seeds must list at least one seed".into());
        }
        if self.smoothing_window == 0 {
            errors.push("run.smoothing_window must be at least 1".into());
        }
        if self.histogram_window == 0 || self.histogram_bins == 0 {
            errors.push("run.histogram_window and run.histogram_bins must be at least 1".into());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub world: EnvConfig,
    pub sac: SacConfig,
    pub per: PerConfig,
    pub curriculum: NavAclConfig,
    pub training: TrainingConfig,
    pub grid: GridEvalConfig,
    pub run: RunOptions,
}

/// Keys that are valid but absent from the serialized defaults.
const OPTIONAL_KEYS: &[&str] = &["sac.target_entropy", "training.time_limit"];

fn unknown_keys(user: &toml::Table, known: &toml::Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in user {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match known.get(k) {
            None if OPTIONAL_KEYS.contains(&path.as_str()) => {}
            None => out.push(format!("unknown key `{path}`")),
            Some(toml::Value::Table(kt)) => match v {
                toml::Value::Table(ut) => unknown_keys(ut, kt, &path, out),
                _ => out.push(format!("`{path}` must be a table")),
            },
            Some(_) => {}
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        self.world.validate(&mut errors);
        self.sac.validate(&mut errors);
        self.per.validate(&mut errors);
        self.curriculum.validate(&mut errors);
        self.training.validate(&mut errors);
        self.grid.validate(&mut errors);
        self.run.validate(&mut errors);
        errors
    }

    /// Parses and validates, reporting every unknown key and range violation together.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
        let known = toml::Table::try_from(RunConfig::default())
            .map_err(|e| Error::Config(vec![e.to_string()]))?;
        let mut errors = Vec::new();
        unknown_keys(&user, &known, "", &mut errors);
        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        let errors = cfg.validate();
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errors))
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Full effective configuration, parseable by [`from_toml_str`](Self::from_toml_str).
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("configuration always serializes")
    }
}

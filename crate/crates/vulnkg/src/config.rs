//! Run configuration: one TOML file drives the whole pipeline. Unknown keys
//! are rejected; a minimal file gets working defaults (dimension 64, 64
//! negatives, filtered evaluation). The single `seed` feeds every stochastic
//! component — splits, initialization, and negative sampling.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelConfig;
use crate::train::TrainConfig;

pub type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    /// Offline fixture directory (or file) for the CVE source.
    pub fixtures: PathBuf,
    /// Offline CWE catalog document.
    pub cwe_catalog: PathBuf,
    pub raw_cache: PathBuf,
    pub graph: PathBuf,
    pub splits: PathBuf,
    pub checkpoints: PathBuf,
    pub reports: PathBuf,
    pub embedding_cache: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            fixtures: "fixtures/nvd_small".into(),
            cwe_catalog: "fixtures/cwe.xml".into(),
            raw_cache: "out/raw".into(),
            graph: "out/graph".into(),
            splits: "out/splits".into(),
            checkpoints: "out/checkpoints".into(),
            reports: "out/reports".into(),
            embedding_cache: "out/embeddings.bin".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    /// `nvd` or `redhat`; the two universes are never merged.
    pub name: String,
    pub offline: bool,
    /// Live mode: only records modified on/after this date.
    pub since: Option<NaiveDate>,
    /// Live mode override of the API base URL.
    pub url: Option<String>,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            name: "nvd".into(),
            offline: true,
            since: None,
            url: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    /// `transductive` or `inductive`.
    pub mode: String,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub train_cutoff: NaiveDate,
    pub test_cutoff: NaiveDate,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            mode: "transductive".into(),
            valid_fraction: 0.05,
            test_fraction: 0.10,
            train_cutoff: NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
            test_cutoff: NaiveDate::from_ymd_opt(2023, 10, 18).unwrap(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub dim: usize,
    pub rel_layers: usize,
    pub ent_layers: usize,
    pub fusion_hidden: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            dim: 64,
            rel_layers: 6,
            ent_layers: 6,
            fusion_hidden: 800,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub negatives: usize,
    pub epochs: usize,
    pub batches_per_epoch: usize,
    pub batch_size: usize,
    pub augment_inverses: bool,
    pub fusion_enabled: bool,
    pub mask_target_edges: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainSection {
            learning_rate: d.learning_rate,
            negatives: d.negatives,
            epochs: d.epochs,
            batches_per_epoch: d.batches_per_epoch,
            batch_size: d.batch_size,
            augment_inverses: d.augment_inverses,
            fusion_enabled: d.fusion_enabled,
            mask_target_edges: d.mask_target_edges,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbeddingConfig {
    /// `local-fallback` or `remote`.
    pub provider: String,
    pub url: String,
    pub model: String,
    /// Environment variable holding the bearer token for the remote provider.
    pub token_env: String,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            provider: "local-fallback".into(),
            url: "https://api.openai.com/v1/embeddings".into(),
            model: "text-embedding-ada-002".into(),
            token_env: "VULNKG_EMBED_TOKEN".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub filtered: bool,
    /// `both` or `tails-only`.
    pub directions: String,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            filtered: true,
            directions: "both".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub paths: Paths,
    pub source: SourceConfig,
    pub split: SplitConfig,
    pub model: ModelSection,
    pub train: TrainSection,
    pub embedding: EmbeddingConfig,
    pub eval: EvalConfig,
    /// Set from the file bytes at parse time; stamped into every report.
    #[serde(skip)]
    pub checksum: String,
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(42)
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            dim: self.model.dim,
            rel_layers: self.model.rel_layers,
            ent_layers: self.model.ent_layers,
            fusion_hidden: self.model.fusion_hidden,
            text_dim: crate::fusion::TEXT_DIM,
            fusion_enabled: self.train.fusion_enabled,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            negatives: self.train.negatives,
            epochs: self.train.epochs,
            batches_per_epoch: self.train.batches_per_epoch,
            batch_size: self.train.batch_size,
            seed: self.seed(),
            augment_inverses: self.train.augment_inverses,
            fusion_enabled: self.train.fusion_enabled,
            mask_target_edges: self.train.mask_target_edges,
        }
    }

    pub fn validate(&self) -> ConfigResult<()> {
        match self.source.name.as_str() {
            "nvd" | "redhat" => {}
            other => {
                return Err(ConfigError::Invalid(format!(
                    "source.name must be nvd or redhat, got {other:?}"
                )))
            }
        }
        match self.split.mode.as_str() {
            "transductive" | "inductive" => {}
            other => {
                return Err(ConfigError::Invalid(format!(
                    "split.mode must be transductive or inductive, got {other:?}"
                )))
            }
        }
        match self.embedding.provider.as_str() {
            "local-fallback" | "remote" => {}
            other => {
                return Err(ConfigError::Invalid(format!(
                    "embedding.provider must be local-fallback or remote, got {other:?}"
                )))
            }
        }
        match self.eval.directions.as_str() {
            "both" | "tails-only" => {}
            other => {
                return Err(ConfigError::Invalid(format!(
                    "eval.directions must be both or tails-only, got {other:?}"
                )))
            }
        }
        if self.split.mode == "transductive"
            && (self.split.valid_fraction <= 0.0
                || self.split.test_fraction <= 0.0
                || self.split.valid_fraction + self.split.test_fraction >= 1.0)
        {
            return Err(ConfigError::Invalid(
                "transductive fractions must be positive and sum below 1".into(),
            ));
        }
        if self.split.mode == "inductive" && self.split.train_cutoff >= self.split.test_cutoff {
            return Err(ConfigError::Invalid(
                "split.train_cutoff must precede split.test_cutoff".into(),
            ));
        }
        Ok(())
    }
}

/// Parses and validates a config file; unknown keys are rejected with the
/// offending key named.
pub fn parse_config(path: &Path) -> ConfigResult<RunConfig> {
    let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut cfg: RunConfig =
        toml::from_str(&raw).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.checksum = {
        use sha2::{Digest, Sha256};
        Sha256::digest(raw.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let (_d, path) = write_config("seed = 7\n");
        let cfg = parse_config(&path).unwrap();
        assert_eq!(cfg.seed(), 7);
        assert_eq!(cfg.model.dim, 64);
        assert_eq!(cfg.train.negatives, 64);
        assert!(cfg.eval.filtered);
        assert!(!cfg.checksum.is_empty());
    }

    #[test]
    fn misspelled_key_is_named_in_the_error() {
        let (_d, path) = write_config("sean = 7\n");
        let err = parse_config(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sean"), "error should name the key: {msg}");

        let (_d2, path2) = write_config("[train]\nlerning_rate = 0.1\n");
        let err = parse_config(&path2).unwrap_err();
        assert!(err.to_string().contains("lerning_rate"));
    }

    #[test]
    fn two_parses_are_equal() {
        let (_d, path) = write_config("seed = 3\n[model]\ndim = 16\n");
        let a = parse_config(&path).unwrap();
        let b = parse_config(&path).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn type_error_and_bad_enums_rejected() {
        let (_d, path) = write_config("[model]\ndim = \"big\"\n");
        assert!(matches!(parse_config(&path).unwrap_err(), ConfigError::Parse(_)));

        let (_d2, path2) = write_config("[split]\nmode = \"sideways\"\n");
        assert!(matches!(parse_config(&path2).unwrap_err(), ConfigError::Invalid(_)));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            parse_config(Path::new("/no/such/config.toml")).unwrap_err(),
            ConfigError::Io { .. }
        ));
    }
}

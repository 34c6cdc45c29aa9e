//! Run configuration: a strict TOML file (unknown keys rejected) plus a
//! small set of CLI-style overrides. The effective config is hashed so every
//! artifact can be traced back to the exact settings that produced it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{InteractionFormat, RatingScale};
use crate::experiments::ExperimentKind;
use crate::llm::ClientConfig;
use crate::recommenders::{ModelKind, ModelParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config key {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub preprocessing: PreprocessingConfig,
    pub split: SplitConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub models: BTreeMap<String, ModelParamsConfig>,
    #[serde(default)]
    pub llm: Option<LlmConfig>,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub interactions: PathBuf,
    pub format: FormatConfig,
    #[serde(default)]
    pub metadata: Option<PathBuf>,
    #[serde(default)]
    pub rating_scale: Option<RatingScale>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatConfig {
    CsvHeader,
    Tsv,
}

impl From<FormatConfig> for InteractionFormat {
    fn from(f: FormatConfig) -> Self {
        match f {
            FormatConfig::CsvHeader => InteractionFormat::CsvHeader,
            FormatConfig::Tsv => InteractionFormat::Tsv,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessingConfig {
    /// Users with more interactions than this are excluded entirely.
    #[serde(default)]
    pub history_cap: Option<usize>,
    /// Optional n-core style floor filters applied before the cap.
    #[serde(default)]
    pub min_user_interactions: Option<usize>,
    #[serde(default)]
    pub min_item_interactions: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub cutoffs: Vec<usize>,
    pub head_share: f64,
    pub relevance_threshold: f64,
    pub sort_metric: String,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            cutoffs: vec![10, 20, 50],
            head_share: 0.8,
            relevance_threshold: 0.0,
            sort_metric: "nDCG@10".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub list_length: usize,
    pub n_neighbors: usize,
    pub per_neighbor: usize,
    pub exclude_seen_candidates: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::FreeTop50,
            list_length: 50,
            n_neighbors: 10,
            per_neighbor: 5,
            exclude_seen_candidates: false,
        }
    }
}

/// Per-model hyperparameter overrides; anything unset falls back to the
/// defaults in [`ModelParams`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParamsConfig {
    #[serde(default)]
    pub k_neighbors: Option<usize>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ModelParamsConfig {
    pub fn resolve(&self, default_seed: u64) -> ModelParams {
        let defaults = ModelParams::default();
        ModelParams {
            k_neighbors: self.k_neighbors.unwrap_or(defaults.k_neighbors),
            beta: self.beta.unwrap_or(defaults.beta),
            lambda: self.lambda.unwrap_or(defaults.lambda),
            seed: self.seed.unwrap_or(default_seed),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmConfig {
    /// "http" for the live endpoint, or a stub name:
    /// "stub:echo-mostpop", "stub:reverse-candidates", "stub:gibberish".
    pub client: String,
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub token_budget: usize,
    pub response_reserve: usize,
    pub max_retries: u32,
    pub requests_per_minute: u32,
    pub initial_backoff_ms: u64,
    pub api_key_env: String,
    /// Relative paths resolve against the output directory.
    pub cache_dir: PathBuf,
    pub title_match_threshold: f64,
    pub max_failure_fraction: f64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        let client = ClientConfig::default();
        Self {
            client: "stub:echo-mostpop".into(),
            endpoint: client.endpoint,
            model: client.model,
            temperature: client.temperature,
            token_budget: client.token_budget,
            response_reserve: client.response_reserve,
            max_retries: client.max_retries,
            requests_per_minute: client.requests_per_minute,
            initial_backoff_ms: client.initial_backoff_ms,
            api_key_env: client.api_key_env,
            cache_dir: PathBuf::from("cache"),
            title_match_threshold: 0.8,
            max_failure_fraction: 0.2,
        }
    }
}

impl LlmConfig {
    pub fn client_config(&self) -> ClientConfig {
        ClientConfig {
            endpoint: self.endpoint.clone(),
            model: self.model.clone(),
            temperature: self.temperature,
            token_budget: self.token_budget,
            response_reserve: self.response_reserve,
            max_retries: self.max_retries,
            requests_per_minute: self.requests_per_minute,
            initial_backoff_ms: self.initial_backoff_ms,
            api_key_env: self.api_key_env.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

/// Settable from the command line on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub client: Option<String>,
    pub history_cap: Option<usize>,
    pub cutoffs: Option<Vec<usize>>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config: RunConfig = toml::from_str(&raw)?;
        if let Some(seed) = overrides.seed {
            config.split.seed = seed;
        }
        if let Some(dir) = &overrides.output_dir {
            config.output.dir = dir.clone();
        }
        if let Some(client) = &overrides.client {
            config.llm.get_or_insert_with(LlmConfig::default).client = client.clone();
        }
        if let Some(cap) = overrides.history_cap {
            config.preprocessing.history_cap = Some(cap);
        }
        if let Some(cutoffs) = &overrides.cutoffs {
            config.evaluation.cutoffs = cutoffs.clone();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dataset.name.is_empty() {
            return Err(invalid("dataset.name", "must not be empty"));
        }
        if !self.dataset.interactions.exists() {
            return Err(invalid(
                "dataset.interactions",
                format!("file {} does not exist", self.dataset.interactions.display()),
            ));
        }
        if let Some(metadata) = &self.dataset.metadata {
            if !metadata.exists() {
                return Err(invalid(
                    "dataset.metadata",
                    format!("file {} does not exist", metadata.display()),
                ));
            }
        }
        if let Some(RatingScale { min, max }) = self.dataset.rating_scale {
            if !(min < max) {
                return Err(invalid("dataset.rating_scale", "min must be below max"));
            }
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return Err(invalid("split.ratio", "must lie strictly between 0 and 1"));
        }
        if let Some(cap) = self.preprocessing.history_cap {
            if cap == 0 {
                return Err(invalid("preprocessing.history_cap", "must be at least 1"));
            }
        }
        if self.evaluation.cutoffs.is_empty() {
            return Err(invalid("evaluation.cutoffs", "must not be empty"));
        }
        if !self.evaluation.cutoffs.windows(2).all(|w| w[0] < w[1])
            || self.evaluation.cutoffs[0] == 0
        {
            return Err(invalid("evaluation.cutoffs", "must be positive and ascending"));
        }
        if !(self.evaluation.head_share > 0.0 && self.evaluation.head_share < 1.0) {
            return Err(invalid("evaluation.head_share", "must lie strictly between 0 and 1"));
        }
        if self.experiment.list_length == 0 {
            return Err(invalid("experiment.list_length", "must be at least 1"));
        }
        for name in self.models.keys() {
            name.parse::<ModelKind>().map_err(|_| {
                invalid("models", format!("unknown model kind {name:?}"))
            })?;
        }
        if let Some(llm) = &self.llm {
            if !(llm.title_match_threshold > 0.0 && llm.title_match_threshold <= 1.0) {
                return Err(invalid("llm.title_match_threshold", "must lie in (0, 1]"));
            }
            if llm.token_budget <= llm.response_reserve {
                return Err(invalid(
                    "llm.token_budget",
                    "must exceed llm.response_reserve",
                ));
            }
            if !(0.0..=1.0).contains(&llm.max_failure_fraction) {
                return Err(invalid("llm.max_failure_fraction", "must lie in [0, 1]"));
            }
            let known_stub = matches!(
                llm.client.as_str(),
                "http" | "stub:echo-mostpop" | "stub:reverse-candidates" | "stub:gibberish"
            );
            if !known_stub {
                return Err(invalid(
                    "llm.client",
                    format!(
                        "unknown client {:?}; expected \"http\" or one of \
                         stub:echo-mostpop, stub:reverse-candidates, stub:gibberish",
                        llm.client
                    ),
                ));
            }
        }
        Ok(())
    }

    /// The baseline roster with resolved hyperparameters, in kind order.
    pub fn roster(&self) -> Vec<(ModelKind, ModelParams)> {
        let mut roster: Vec<(ModelKind, ModelParams)> = self
            .models
            .iter()
            .map(|(name, params)| {
                let kind: ModelKind = name.parse().expect("validated");
                (kind, params.resolve(self.split.seed))
            })
            .collect();
        roster.sort_by_key(|(kind, _)| *kind);
        roster
    }

    /// SHA-256 over the canonical JSON of the effective config.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(hasher.finalize())
    }

    /// The LLM cache directory, resolved against the output dir.
    pub fn cache_dir(&self) -> Option<PathBuf> {
        self.llm.as_ref().map(|llm| {
            if llm.cache_dir.is_absolute() {
                llm.cache_dir.clone()
            } else {
                self.output.dir.join(&llm.cache_dir)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_files() -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("interactions.csv");
        let mut f = std::fs::File::create(&data).unwrap();
        writeln!(f, "userId,itemId,rating,timestamp").unwrap();
        writeln!(f, "u1,i1,5.0,1").unwrap();
        (dir, data)
    }

    fn minimal_toml(data: &Path, out: &Path) -> String {
        format!(
            r#"
[dataset]
name = "toy"
interactions = "{}"
format = "csv_header"

[split]
ratio = 0.8
seed = 42

[models.MostPop]

[output]
dir = "{}"
"#,
            data.display(),
            out.display()
        )
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let (dir, data) = write_files();
        let path = dir.path().join("config.toml");
        std::fs::write(&path, minimal_toml(&data, dir.path())).unwrap();
        let config = RunConfig::load(&path, &Overrides::default()).unwrap();
        assert_eq!(config.evaluation.cutoffs, vec![10, 20, 50]);
        assert_eq!(config.experiment.list_length, 50);
        assert_eq!(config.roster().len(), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let (dir, data) = write_files();
        let path = dir.path().join("config.toml");
        let mut toml = minimal_toml(&data, dir.path());
        toml.push_str("\n[dataset2]\nx = 1\n");
        std::fs::write(&path, toml).unwrap();
        assert!(matches!(
            RunConfig::load(&path, &Overrides::default()),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn missing_dataset_path_names_the_key() {
        let (dir, data) = write_files();
        let path = dir.path().join("config.toml");
        let toml = minimal_toml(&data, dir.path()).replace("interactions.csv", "nothere.csv");
        std::fs::write(&path, toml).unwrap();
        match RunConfig::load(&path, &Overrides::default()) {
            Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "dataset.interactions"),
            other => panic!("expected invalid key, got {other:?}"),
        }
    }

    #[test]
    fn overrides_change_the_hash() {
        let (dir, data) = write_files();
        let path = dir.path().join("config.toml");
        std::fs::write(&path, minimal_toml(&data, dir.path())).unwrap();
        let base = RunConfig::load(&path, &Overrides::default()).unwrap();
        let tweaked = RunConfig::load(
            &path,
            &Overrides {
                seed: Some(7),
                ..Default::default()
            },
        )
        .unwrap();
        assert_ne!(base.hash(), tweaked.hash());
        assert_eq!(tweaked.split.seed, 7);
    }

    #[test]
    fn bad_model_name_is_rejected() {
        let (dir, data) = write_files();
        let path = dir.path().join("config.toml");
        let toml = minimal_toml(&data, dir.path()).replace("[models.MostPop]", "[models.SVDpp]");
        std::fs::write(&path, toml).unwrap();
        assert!(matches!(
            RunConfig::load(&path, &Overrides::default()),
            Err(ConfigError::Invalid { key: "models", .. })
        ));
    }
}

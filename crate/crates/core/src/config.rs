//! Pipeline configuration file (TOML).
//!
//! Values are resolved in three layers: built-in defaults, then the config
//! file, then command-line flags. A top-level `rng_seed` fills in the
//! `rng_seed` of every section that does not set its own.
//!
//! ```toml
//! rng_seed = 7
//!
//! [paths]
//! output_root = "out"
//!
//! [tables]
//! en = "tables/en.csv"   # languages without an entry use the built-in table
//!
//! [backends.translation]
//! kind = "http"
//! url = "https://mt.example/translate"
//! token_env = "MT_TOKEN"   # name of the variable, never the token itself
//!
//! [masking]
//! threshold = 0.75
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backends::http::EndpointConfig;
use crate::backends::RetryPolicy;
use crate::ces::{MaskingConfig, NerFallback, SubstitutionConfig};
use crate::classifier::{FeatureConfig, TrainConfig};
use crate::experiment::ScheduleConfig;
use crate::lm_gen::GenerationConfig;

/// Sections whose `rng_seed` defaults to the top-level seed.
const SEEDED_SECTIONS: [&str; 4] = ["substitution", "generation", "training", "schedule"];

/// Keys that would put a credential into the file.
const SECRET_KEYS: [&str; 6] = ["token", "api_key", "apikey", "password", "secret", "authorization"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub output_root: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths { output_root: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TranslatorConfig {
    /// Deterministic offline translator; `prefix = ""` makes it the identity.
    Mock {
        #[serde(default = "default_mock_prefix")]
        prefix: String,
    },
    Http(EndpointConfig),
}

fn default_mock_prefix() -> String {
    "t:".into()
}

impl Default for TranslatorConfig {
    fn default() -> Self {
        TranslatorConfig::Mock { prefix: default_mock_prefix() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockGenerationMode {
    #[default]
    Derived,
    Echo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    Mock {
        #[serde(default)]
        mode: MockGenerationMode,
        /// `{"responses": [...]}`; overrides `mode`.
        #[serde(default)]
        fixture: Option<PathBuf>,
    },
    Http(EndpointConfig),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig::Mock { mode: MockGenerationMode::Derived, fixture: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NerConfig {
    /// `{"surfaces": {"Name": "PERSON"}}`
    Mock { fixture: PathBuf },
    Http(EndpointConfig),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Backends {
    pub translation: TranslatorConfig,
    pub generation: GeneratorConfig,
    pub ner: Option<NerConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TranslationSettings {
    pub batch_size: usize,
    pub concurrency: usize,
    pub retry: RetryPolicy,
}

impl Default for TranslationSettings {
    fn default() -> Self {
        TranslationSettings { batch_size: 16, concurrency: 4, retry: RetryPolicy::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub rng_seed: Option<u64>,
    pub paths: Paths,
    /// Entity table file per language code.
    pub tables: BTreeMap<String, PathBuf>,
    pub backends: Backends,
    pub translation: TranslationSettings,
    pub masking: MaskingConfig,
    pub substitution: SubstitutionConfig,
    pub generation: GenerationConfig,
    pub features: FeatureConfig,
    pub training: TrainConfig,
    pub schedule: ScheduleConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.violations.join("; "))
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn one(message: impl Into<String>) -> Self {
        ConfigError { violations: vec![message.into()] }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig, ConfigError> {
        let mut value: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::one(e.to_string()))?;

        let mut secrets = Vec::new();
        find_secret_keys(&value, "", &mut secrets);
        if !secrets.is_empty() {
            return Err(ConfigError {
                violations: secrets
                    .into_iter()
                    .map(|key| format!("{key}: credentials must come from an environment variable (use token_env)"))
                    .collect(),
            });
        }

        if let Some(seed) = value.get("rng_seed").cloned() {
            for section in SEEDED_SECTIONS {
                let entry = value.entry(section).or_insert_with(|| toml::Value::Table(toml::Table::new()));
                if let toml::Value::Table(table) = entry {
                    table.entry("rng_seed").or_insert_with(|| seed.clone());
                }
            }
        }
        toml::Value::Table(value)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::one(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| ConfigError::one(format!("{}: {e}", path.display())))?;
        PipelineConfig::from_toml(&text).map_err(|mut e| {
            for v in &mut e.violations {
                *v = format!("{}: {v}", path.display());
            }
            e
        })
    }

    /// Overrides every seed, as the `--seed` flag does.
    pub fn set_seed(&mut self, seed: u64) {
        self.rng_seed = Some(seed);
        self.substitution.rng_seed = seed;
        self.generation.rng_seed = seed;
        self.training.rng_seed = seed;
        self.schedule.rng_seed = seed;
    }

    /// Checks every section and returns all violations at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut violations = Vec::new();
        let mut push = |section: &str, result: Result<(), String>| {
            if let Err(message) = result {
                violations.push(format!("{section}: {message}"));
            }
        };
        push("masking", self.masking.validate());
        push("features", self.features.validate());
        push("training", self.training.validate());
        if self.substitution.replacement_seed == 0 {
            push("substitution", Err("replacement_seed must be at least 1".into()));
        }
        if self.generation.shots == 0 {
            push("generation", Err("shots must be at least 1".into()));
        }
        if self.generation.max_new_tokens == 0 {
            push("generation", Err("max_new_tokens must be at least 1".into()));
        }
        if self.translation.batch_size == 0 {
            push("translation", Err("batch_size must be at least 1".into()));
        }
        if self.translation.concurrency == 0 {
            push("translation", Err("concurrency must be at least 1".into()));
        }
        if self.masking.ner_fallback == NerFallback::External && self.backends.ner.is_none() {
            push("masking", Err("ner_fallback = \"external\" needs a [backends.ner] section".into()));
        }
        if let Err(problems) = self.schedule.validate() {
            for p in problems {
                push("schedule", Err(p));
            }
        }

        for (lang, path) in &self.tables {
            if !path.is_file() {
                push("tables", Err(format!("{lang}: file {} does not exist", path.display())));
            }
        }
        let endpoints = [
            ("backends.translation", match &self.backends.translation {
                TranslatorConfig::Http(e) => Some(e),
                _ => None,
            }),
            ("backends.generation", match &self.backends.generation {
                GeneratorConfig::Http(e) => Some(e),
                _ => None,
            }),
            ("backends.ner", match &self.backends.ner {
                Some(NerConfig::Http(e)) => Some(e),
                _ => None,
            }),
        ];
        for (section, endpoint) in endpoints {
            if let Some(endpoint) = endpoint {
                push(section, check_endpoint(endpoint));
            }
        }
        if let GeneratorConfig::Mock { fixture: Some(path), .. } = &self.backends.generation {
            if !path.is_file() {
                push("backends.generation", Err(format!("fixture {} does not exist", path.display())));
            }
        }
        if let Some(NerConfig::Mock { fixture }) = &self.backends.ner {
            if !fixture.is_file() {
                push("backends.ner", Err(format!("fixture {} does not exist", fixture.display())));
            }
        }

        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations })
        }
    }
}

fn check_endpoint(endpoint: &EndpointConfig) -> Result<(), String> {
    if !(endpoint.url.starts_with("http://") || endpoint.url.starts_with("https://")) {
        return Err(format!("url must be http(s), got {:?}", endpoint.url));
    }
    if let Some(var) = &endpoint.token_env {
        let valid = !var.is_empty() && var.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(format!("token_env must be an environment variable name, got {var:?}"));
        }
    }
    if endpoint.timeout_secs == 0 {
        return Err("timeout_secs must be at least 1".into());
    }
    Ok(())
}

fn find_secret_keys(table: &toml::Table, prefix: &str, found: &mut Vec<String>) {
    for (key, value) in table {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        if SECRET_KEYS.contains(&key.to_ascii_lowercase().as_str()) {
            found.push(path.clone());
        }
        if let toml::Value::Table(inner) = value {
            find_secret_keys(inner, &path, found);
        }
    }
}

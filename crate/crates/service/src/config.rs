//! Service configuration file (TOML).
//!
//! Relative paths (log directory, default snippet, mock script) resolve
//! against the directory holding the configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use gazeprompt_core::{EditorGeometry, FixationConfig, InteractionMode, ThresholdConfig};
use gazeprompt_llm::BackendConfig;

pub const DEFAULT_BIND: &str = "127.0.0.1:7878";

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionDefaults {
    pub mode: InteractionMode,
    pub language_hint: String,
    /// Code under review when a session does not bring its own.
    pub snippet: Option<PathBuf>,
    pub geometry: EditorGeometry,
}

impl Default for SessionDefaults {
    fn default() -> Self {
        Self {
            mode: InteractionMode::Realtime,
            language_hint: "java".into(),
            snippet: None,
            geometry: EditorGeometry::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub log_dir: PathBuf,
    pub snapshot_period_ms: u64,
    pub thresholds: ThresholdConfig,
    pub fixation: FixationConfig,
    pub backend: BackendConfig,
    pub session: SessionDefaults,
    /// Directory relative paths resolve against; not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: DEFAULT_BIND.into(),
            log_dir: PathBuf::from("sessions"),
            snapshot_period_ms: 500,
            thresholds: ThresholdConfig::default(),
            fixation: FixationConfig::default(),
            backend: BackendConfig::default(),
            session: SessionDefaults::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigFileError> {
        let mut config: ServiceConfig = toml::from_str(text).map_err(|e| ConfigFileError::Parse {
            path: base_dir.to_path_buf(),
            message: e.to_string(),
        })?;
        config.base_dir = base_dir.to_path_buf();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base).map_err(|e| match e {
            ConfigFileError::Parse { message, .. } => ConfigFileError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigFileError> {
        let invalid = |e: gazeprompt_core::ConfigError| ConfigFileError::Invalid(e.to_string());
        self.thresholds.validate().map_err(invalid)?;
        self.fixation.validate().map_err(invalid)?;
        self.session.geometry.validate().map_err(invalid)?;
        if self.snapshot_period_ms == 0 {
            return Err(ConfigFileError::Invalid("snapshot_period_ms must be positive".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn log_dir(&self) -> PathBuf {
        self.resolve(&self.log_dir)
    }
}

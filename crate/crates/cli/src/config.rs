//! The JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use chatsim_core::capture::{CameraIntrinsics, SnapshotSettings};
use chatsim_core::executor::RunConfig;
use chatsim_core::llm::ProviderConfig;
use chatsim_core::worldgen::{ScatterSpec, TerrainParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub terrain: TerrainParams,
    pub scatter: ScatterSpec,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_port() -> u16 {
    8080
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    #[serde(default)]
    pub run: RunConfig,
    pub provider: ProviderConfig,
    #[serde(default)]
    pub world: WorldConfig,
    #[serde(default)]
    pub camera: CameraIntrinsics,
    #[serde(default)]
    pub snapshot: SnapshotSettings,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_port")]
    pub port: u16,
    /// Wall-clock pause between frames while the service is running freely.
    #[serde(default)]
    pub frame_delay_ms: u64,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config at {field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            ConfigError::Io { .. } => None,
        }
    }
}

fn invalid(prefix: &str, (field, message): (&str, String)) -> ConfigError {
    ConfigError::Invalid {
        field: format!("{prefix}.{field}"),
        message,
    }
}

impl AppConfig {
    /// Parses and validates `json`. Relative paths are resolved against
    /// `base_dir`.
    pub fn from_json(json: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(json);
        let mut config: AppConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::Invalid {
                field: if path.is_empty() || path == "." {
                    "$".into()
                } else {
                    path
                },
                message: e.into_inner().to_string(),
            }
        })?;
        config.validate()?;
        config.resolve_paths(base_dir);
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let json = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&json, base)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.run.validate().map_err(|e| invalid("run", e))?;
        self.provider
            .validate()
            .map_err(|e| invalid("provider", e))?;
        self.world
            .terrain
            .validate()
            .map_err(|e| invalid("world.terrain", e))?;
        if self.world.scatter.counts.values().any(|&c| c > 0)
            && self.world.scatter.region.is_degenerate()
        {
            return Err(invalid(
                "world.scatter",
                ("region", "must have positive width and height".into()),
            ));
        }
        self.camera.validate().map_err(|e| invalid("camera", e))?;
        if self.snapshot.width == 0 || self.snapshot.height == 0 {
            return Err(invalid(
                "snapshot",
                ("width", "resolution must be at least 1x1".into()),
            ));
        }
        if self.snapshot.bounds.is_degenerate() {
            return Err(invalid(
                "snapshot",
                ("bounds", "must have positive width and height".into()),
            ));
        }
        if self.port == 0 {
            return Err(ConfigError::Invalid {
                field: "port".into(),
                message: "must be in 1..=65535".into(),
            });
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
        if let ProviderConfig::Replay { fixture } = &mut self.provider {
            if fixture.is_relative() {
                *fixture = base.join(&*fixture);
            }
        }
    }
}

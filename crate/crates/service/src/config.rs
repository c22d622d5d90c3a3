use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use capt_core::detect::SeverityBins;
use capt_core::feedback::Locale;
use serde::{Deserialize, Serialize};

use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    /// Session files live under `<data_dir>/sessions`.
    pub data_dir: PathBuf,
    /// Sentence catalog; the built-in one when absent.
    pub catalog: Option<PathBuf>,
    pub inventory: Option<PathBuf>,
    pub knowledge_base: Option<PathBuf>,
    pub locale: Locale,
    pub severity: SeverityBins,
    pub recognizer: RecognizerConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("capt-data"),
            catalog: None,
            inventory: None,
            knowledge_base: None,
            locale: Locale::En,
            severity: SeverityBins::default(),
            recognizer: RecognizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RecognizerConfig {
    /// Offline recognizer for stub-synthesized audio.
    Mock {
        #[serde(default = "one")]
        fidelity: f64,
        #[serde(default)]
        seed: u64,
    },
    Http {
        url: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_timeout_ms() -> u64 {
    10_000
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        RecognizerConfig::Mock { fidelity: 1.0, seed: 0 }
    }
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ServiceError> {
        let cfg: ServiceConfig = toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        cfg.severity.validate().map_err(|e| ServiceError::Config(e.to_string()))?;
        if let RecognizerConfig::Mock { fidelity, .. } = cfg.recognizer {
            if !(0.0..=1.0).contains(&fidelity) {
                return Err(ServiceError::Config(format!("recognizer fidelity {fidelity} outside [0, 1]")));
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_file() {
        let cfg = ServiceConfig::parse(
            r#"
            bind = "0.0.0.0:9000"
            data_dir = "/tmp/x"
            locale = "hi"
            [recognizer]
            kind = "http"
            url = "http://localhost:5000/recognize"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.bind.port(), 9000);
        assert_eq!(cfg.locale, Locale::Hi);
        assert!(matches!(cfg.recognizer, RecognizerConfig::Http { timeout_ms: 10_000, .. }));
        assert_eq!(ServiceConfig::parse("").unwrap(), ServiceConfig::default());
        assert!(ServiceConfig::parse("port = 1").is_err());
        assert!(ServiceConfig::parse("[severity]\nmoderate = 0.9\nsevere = 0.5").is_err());
    }
}

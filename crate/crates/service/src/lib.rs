//! HTTP practice service: sentence catalog, attempt analysis with feedback,
//! tongue diagrams, self-ratings and their statistics.

mod catalog;
mod config;
mod routes;
mod store;

use std::sync::Arc;
use std::time::Duration;

use capt_core::analysis::AnalysisConfig;
use capt_core::detect::{HttpRecognizer, Recognizer, StubAudioRecognizer};
use capt_core::feedback::KnowledgeBase;
use capt_core::phoneme::{load_inventory, InventorySource, PhonemeInventory};
use thiserror::Error;

pub use catalog::{Catalog, CatalogSentence, FOCUS_PHONEMES};
pub use config::{RecognizerConfig, ServiceConfig};
pub use routes::{router, AttemptRequest, RatingRequest, StatsResponse};
pub use store::{valid_session_id, AttemptRecord, InputKind, RatingRecord, Session, SessionStore};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("catalog: {0}")]
    Catalog(String),
    #[error("session store: {0}")]
    Store(String),
    #[error("startup: {0}")]
    Startup(String),
}

pub struct AppState {
    /// A catalog that failed to load is kept as its diagnostic so the
    /// sentence endpoint can answer 503 instead of the process dying.
    pub catalog: Result<Catalog, String>,
    pub inventory: &'static PhonemeInventory,
    pub knowledge_base: &'static KnowledgeBase,
    pub recognizer: Arc<dyn Recognizer>,
    pub store: SessionStore,
    pub config: ServiceConfig,
}

impl AppState {
    /// Custom inventory or knowledge-base files are loaded once and live for
    /// the rest of the process.
    pub fn from_config(config: ServiceConfig) -> Result<Arc<Self>, ServiceError> {
        let inventory: &'static PhonemeInventory = match &config.inventory {
            None => PhonemeInventory::builtin(),
            Some(p) => Box::leak(Box::new(
                load_inventory(InventorySource::File(p)).map_err(|e| ServiceError::Config(e.to_string()))?,
            )),
        };
        let knowledge_base: &'static KnowledgeBase = match (&config.knowledge_base, &config.inventory) {
            (None, None) => KnowledgeBase::builtin(),
            (path, _) => {
                let kb = match path {
                    Some(p) => KnowledgeBase::load(p, inventory),
                    None => KnowledgeBase::builtin_for(inventory),
                };
                Box::leak(Box::new(kb.map_err(|e| ServiceError::Config(e.to_string()))?))
            }
        };
        let catalog = match &config.catalog {
            None => Catalog::builtin(inventory),
            Some(p) => Catalog::load(p, inventory),
        }
        .map_err(|e| e.to_string())
        .and_then(|c| if c.is_empty() { Err("catalog contains no sentences".to_string()) } else { Ok(c) });
        if let Err(e) = &catalog {
            tracing::warn!(error = %e, "sentence catalog unavailable");
        }
        let recognizer: Arc<dyn Recognizer> = match &config.recognizer {
            RecognizerConfig::Mock { fidelity, seed } => {
                Arc::new(StubAudioRecognizer { fidelity: *fidelity, seed: *seed })
            }
            RecognizerConfig::Http { url, timeout_ms } => {
                Arc::new(HttpRecognizer::new(url.clone(), Duration::from_millis(*timeout_ms)))
            }
        };
        let store = SessionStore::open(&config.data_dir.join("sessions"))?;
        Ok(Arc::new(AppState { catalog, inventory, knowledge_base, recognizer, store, config }))
    }

    pub fn analysis_config(&self) -> AnalysisConfig<'static> {
        AnalysisConfig {
            inventory: self.inventory,
            knowledge_base: self.knowledge_base,
            weights: Default::default(),
            bins: self.config.severity,
            locale: self.config.locale,
        }
    }
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let bind = config.bind;
    let state = AppState::from_config(config)?;
    let listener =
        tokio::net::TcpListener::bind(bind).await.map_err(|e| ServiceError::Startup(format!("bind {bind}: {e}")))?;
    tracing::info!(addr = %bind, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::Startup(e.to_string()))
}

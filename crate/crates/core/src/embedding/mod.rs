//! Text embedding behind a pluggable provider contract.
//!
//! Three providers ship with the engine:
//!
//! * [`RemoteEmbedder`] speaks a minimal embeddings HTTP contract
//!   (`POST {"model", "input": [texts]}` answered with vector arrays).
//! * [`PrecomputedStore`] looks vectors up by the SHA-256 of the text, for
//!   bit-exact offline reproduction of a previous run.
//! * [`DeterministicEmbedder`] derives a unit vector from a ChaCha stream
//!   seeded with the text's SHA-256, for tests that need no model at all.
//!
//! Any provider can be wrapped in a [`CachedEmbedder`].

mod cache;
mod deterministic;
mod remote;
mod store;
mod vector;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cache::CachedEmbedder;
pub use deterministic::DeterministicEmbedder;
pub use remote::RemoteEmbedder;
pub use store::{PrecomputedStore, StoreEntry, StoreFile, STORE_FORMAT};
pub use vector::{cosine, SemanticVector};

/// Dimension of `all-MiniLM-L6-v2` sentence vectors.
pub const DEFAULT_DIMENSION: usize = 384;
pub const DEFAULT_MODEL: &str = "all-MiniLM-L6-v2";

pub const ENV_EMBED_URL: &str = "ENTANGLE_EMBED_URL";
pub const ENV_EMBED_KEY: &str = "ENTANGLE_EMBED_KEY";

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("text not found in precomputed store (sha256 {hash})")]
    NotFound { hash: String },
    #[error("embedding provider unreachable at {endpoint}: {message}")]
    Unreachable { endpoint: String, message: String },
    #[error("embedding provider timed out after {secs}s")]
    Timeout { secs: u64 },
    #[error("embedding provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed embedding response: {0}")]
    Decode(String),
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error("precomputed store {path}: {message}")]
    Store { path: String, message: String },
    #[error("batch element {index}: {source}")]
    Batch {
        index: usize,
        #[source]
        source: Box<EmbedError>,
    },
}

impl EmbedError {
    /// True for transport failures that a caller may retry or report as 502/504.
    pub fn is_transport(&self) -> bool {
        match self {
            EmbedError::Unreachable { .. }
            | EmbedError::Timeout { .. }
            | EmbedError::Http { .. } => true,
            EmbedError::Batch { source, .. } => source.is_transport(),
            _ => false,
        }
    }

    pub fn is_timeout(&self) -> bool {
        match self {
            EmbedError::Timeout { .. } => true,
            EmbedError::Batch { source, .. } => source.is_timeout(),
            _ => false,
        }
    }
}

/// Hex SHA-256 of the UTF-8 text. Key for stores and caches.
pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub(crate) fn check_text(text: &str) -> Result<(), EmbedError> {
    if text.trim().is_empty() {
        Err(EmbedError::EmptyText)
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Remote,
    PrecomputedStore,
    DeterministicTest,
}

/// Maps text to vectors of a fixed dimension. Implementations must be safe
/// for concurrent `embed` calls.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<SemanticVector, EmbedError>;

    /// Order-preserving batch; the first failure is reported with its index.
    fn batch_embed(&self, texts: &[String]) -> Result<Vec<SemanticVector>, EmbedError> {
        texts
            .iter()
            .enumerate()
            .map(|(index, t)| {
                self.embed(t).map_err(|e| EmbedError::Batch {
                    index,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    fn dimension(&self) -> usize;

    fn model_name(&self) -> &str;

    fn kind(&self) -> ProviderKind;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Arc<P> {
    fn embed(&self, text: &str) -> Result<SemanticVector, EmbedError> {
        (**self).embed(text)
    }
    fn batch_embed(&self, texts: &[String]) -> Result<Vec<SemanticVector>, EmbedError> {
        (**self).batch_embed(texts)
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn model_name(&self) -> &str {
        (**self).model_name()
    }
    fn kind(&self) -> ProviderKind {
        (**self).kind()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: Option<String>,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub model_name: String,
    pub dimension: usize,
    pub cache_capacity: usize,
    pub store_path: Option<PathBuf>,
    pub timeout_secs: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::DeterministicTest,
            endpoint: None,
            api_key: None,
            model_name: DEFAULT_MODEL.to_string(),
            dimension: DEFAULT_DIMENSION,
            cache_capacity: 4096,
            store_path: None,
            timeout_secs: 30,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dimension == 0 {
            return Err(EmbedError::Config("dimension must be positive".into()));
        }
        match self.kind {
            ProviderKind::Remote if self.endpoint.as_deref().is_none_or(str::is_empty) => {
                Err(EmbedError::Config(format!(
                    "remote provider requires an endpoint ({ENV_EMBED_URL})"
                )))
            }
            ProviderKind::PrecomputedStore if self.store_path.is_none() => Err(EmbedError::Config(
                "precomputed_store provider requires store_path".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Instantiate the configured provider, wrapped in a cache when
    /// `cache_capacity > 0`.
    pub fn build(&self) -> Result<Arc<dyn EmbeddingProvider>, EmbedError> {
        self.validate()?;
        let inner: Arc<dyn EmbeddingProvider> = match self.kind {
            ProviderKind::DeterministicTest => Arc::new(DeterministicEmbedder::new(self.dimension)),
            ProviderKind::PrecomputedStore => {
                let store = PrecomputedStore::load(self.store_path.as_ref().expect("validated"))?;
                if store.dimension() != self.dimension {
                    return Err(EmbedError::DimensionMismatch {
                        expected: self.dimension,
                        got: store.dimension(),
                    });
                }
                Arc::new(store)
            }
            ProviderKind::Remote => Arc::new(RemoteEmbedder::new(
                self.endpoint.clone().expect("validated"),
                self.model_name.clone(),
                self.dimension,
                self.api_key.clone(),
                self.timeout_secs,
            )),
        };
        if self.cache_capacity > 0 && self.kind != ProviderKind::PrecomputedStore {
            Ok(Arc::new(CachedEmbedder::new(inner, self.cache_capacity)))
        } else {
            Ok(inner)
        }
    }
}

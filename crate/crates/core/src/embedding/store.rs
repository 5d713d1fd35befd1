use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    check_text, content_hash, EmbedError, EmbeddingProvider, ProviderKind, SemanticVector,
};

pub const STORE_FORMAT: &str = "entangle-embeddings/1";

/// One stored vector. `text` is informational; lookups use `hash`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreEntry {
    pub hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreFile {
    pub format: String,
    pub model: String,
    pub dimension: usize,
    pub entries: Vec<StoreEntry>,
}

/// Read-only content-hash → vector table.
#[derive(Debug, Clone)]
pub struct PrecomputedStore {
    model: String,
    dimension: usize,
    vectors: HashMap<String, SemanticVector>,
}

impl PrecomputedStore {
    pub fn new(model: impl Into<String>, dimension: usize) -> Self {
        Self {
            model: model.into(),
            dimension,
            vectors: HashMap::new(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbedError> {
        let path = path.as_ref();
        let store_err = |message: String| EmbedError::Store {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| store_err(e.to_string()))?;
        let file: StoreFile = serde_json::from_str(&text).map_err(|e| store_err(e.to_string()))?;
        Self::from_file(file).map_err(|e| store_err(e.to_string()))
    }

    pub fn from_file(file: StoreFile) -> Result<Self, EmbedError> {
        if file.format != STORE_FORMAT {
            return Err(EmbedError::Decode(format!(
                "unsupported store format {:?}",
                file.format
            )));
        }
        let mut store = Self::new(file.model, file.dimension);
        for entry in file.entries {
            if let Some(text) = &entry.text {
                if content_hash(text) != entry.hash {
                    return Err(EmbedError::Decode(format!(
                        "entry {} does not match the hash of its text",
                        entry.hash
                    )));
                }
            }
            store.insert_hashed(entry.hash, SemanticVector::new(entry.values))?;
        }
        Ok(store)
    }

    pub fn insert(&mut self, text: &str, vector: SemanticVector) -> Result<(), EmbedError> {
        self.insert_hashed(content_hash(text), vector)
    }

    fn insert_hashed(&mut self, hash: String, vector: SemanticVector) -> Result<(), EmbedError> {
        if vector.dim() != self.dimension {
            return Err(EmbedError::DimensionMismatch {
                expected: self.dimension,
                got: vector.dim(),
            });
        }
        self.vectors.insert(hash, vector);
        Ok(())
    }

    /// Embed every text with `provider` and record the results, so a later
    /// run can replay them without the provider.
    pub fn capture(
        provider: &dyn EmbeddingProvider,
        texts: impl IntoIterator<Item = String>,
    ) -> Result<(Self, Vec<String>), EmbedError> {
        let mut store = Self::new(provider.model_name(), provider.dimension());
        let mut texts: Vec<String> = texts.into_iter().collect();
        texts.sort();
        texts.dedup();
        let vectors = provider.batch_embed(&texts)?;
        for (text, v) in texts.iter().zip(vectors) {
            store.insert(text, v)?;
        }
        Ok((store, texts))
    }

    /// Serializable form, entries sorted by hash. `texts` are attached to
    /// their entries when supplied.
    pub fn to_file(&self, texts: &[String]) -> StoreFile {
        let by_hash: HashMap<String, &String> =
            texts.iter().map(|t| (content_hash(t), t)).collect();
        let mut entries: Vec<StoreEntry> = self
            .vectors
            .iter()
            .map(|(hash, v)| StoreEntry {
                hash: hash.clone(),
                text: by_hash.get(hash).map(|t| (*t).clone()),
                values: v.values().to_vec(),
            })
            .collect();
        entries.sort_by(|a, b| a.hash.cmp(&b.hash));
        StoreFile {
            format: STORE_FORMAT.to_string(),
            model: self.model.clone(),
            dimension: self.dimension,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for PrecomputedStore {
    fn embed(&self, text: &str) -> Result<SemanticVector, EmbedError> {
        check_text(text)?;
        let hash = content_hash(text);
        self.vectors
            .get(&hash)
            .cloned()
            .ok_or(EmbedError::NotFound { hash })
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn model_name(&self) -> &str {
        &self.model
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::PrecomputedStore
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::DeterministicEmbedder;

    #[test]
    fn missing_key_names_hash() {
        let store = PrecomputedStore::new("m", 3);
        match store.embed("absent") {
            Err(EmbedError::NotFound { hash }) => assert_eq!(hash, content_hash("absent")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn capture_then_replay_is_bit_exact() {
        let live = DeterministicEmbedder::new(16);
        let texts = vec!["one".to_string(), "two".to_string()];
        let (store, texts) = PrecomputedStore::capture(&live, texts).unwrap();
        let json = serde_json::to_string(&store.to_file(&texts)).unwrap();
        let file: StoreFile = serde_json::from_str(&json).unwrap();
        let replay = PrecomputedStore::from_file(file).unwrap();
        for t in &texts {
            let a = live.embed(t).unwrap();
            let b = replay.embed(t).unwrap();
            let bits =
                |v: &SemanticVector| v.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a), bits(&b));
        }
    }

    #[test]
    fn dimension_enforced() {
        let mut store = PrecomputedStore::new("m", 3);
        assert!(store
            .insert("x", SemanticVector::new(vec![1.0, 2.0]))
            .is_err());
    }

    #[test]
    fn tampered_entry_rejected() {
        let file = StoreFile {
            format: STORE_FORMAT.into(),
            model: "m".into(),
            dimension: 1,
            entries: vec![StoreEntry {
                hash: content_hash("a"),
                text: Some("b".into()),
                values: vec![1.0],
            }],
        };
        assert!(PrecomputedStore::from_file(file).is_err());
    }
}

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, RwLock};

use super::{content_hash, EmbedError, EmbeddingProvider, ProviderKind, SemanticVector};

#[derive(Default)]
struct CacheState {
    map: HashMap<String, SemanticVector>,
    order: VecDeque<String>,
}

/// Content-hash keyed cache in front of another provider. FIFO eviction once
/// `capacity` entries are held.
pub struct CachedEmbedder {
    inner: Arc<dyn EmbeddingProvider>,
    capacity: usize,
    state: RwLock<CacheState>,
}

impl CachedEmbedder {
    pub fn new(inner: Arc<dyn EmbeddingProvider>, capacity: usize) -> Self {
        Self {
            inner,
            capacity,
            state: RwLock::new(CacheState::default()),
        }
    }

    pub fn len(&self) -> usize {
        self.state.read().expect("cache lock").map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn store(&self, key: String, v: &SemanticVector) {
        if self.capacity == 0 {
            return;
        }
        let mut state = self.state.write().expect("cache lock");
        if state.map.contains_key(&key) {
            return;
        }
        while state.map.len() >= self.capacity {
            match state.order.pop_front() {
                Some(old) => {
                    state.map.remove(&old);
                }
                None => break,
            }
        }
        state.order.push_back(key.clone());
        state.map.insert(key, v.clone());
    }
}

impl EmbeddingProvider for CachedEmbedder {
    fn embed(&self, text: &str) -> Result<SemanticVector, EmbedError> {
        let key = content_hash(text);
        if let Some(hit) = self.state.read().expect("cache lock").map.get(&key) {
            return Ok(hit.clone());
        }
        let v = self.inner.embed(text)?;
        self.store(key, &v);
        Ok(v)
    }

    fn batch_embed(&self, texts: &[String]) -> Result<Vec<SemanticVector>, EmbedError> {
        let keys: Vec<String> = texts.iter().map(|t| content_hash(t)).collect();
        let mut out: Vec<Option<SemanticVector>> = {
            let state = self.state.read().expect("cache lock");
            keys.iter().map(|k| state.map.get(k).cloned()).collect()
        };
        let missing: Vec<usize> = (0..texts.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            let batch: Vec<String> = missing.iter().map(|&i| texts[i].clone()).collect();
            let fresh = self.inner.batch_embed(&batch).map_err(|e| match e {
                EmbedError::Batch { index, source } => EmbedError::Batch {
                    index: missing[index],
                    source,
                },
                other => other,
            })?;
            for (&i, v) in missing.iter().zip(fresh) {
                self.store(keys[i].clone(), &v);
                out[i] = Some(v);
            }
        }
        Ok(out.into_iter().map(|v| v.expect("filled")).collect())
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn model_name(&self) -> &str {
        self.inner.model_name()
    }

    fn kind(&self) -> ProviderKind {
        self.inner.kind()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::DeterministicEmbedder;

    #[test]
    fn hit_equals_cold_path() {
        let cold = DeterministicEmbedder::new(32);
        let cached = CachedEmbedder::new(Arc::new(cold.clone()), 8);
        let first = cached.embed("text").unwrap();
        let second = cached.embed("text").unwrap();
        assert_eq!(first, second);
        assert_eq!(second, cold.embed("text").unwrap());
        assert_eq!(cached.len(), 1);
    }

    #[test]
    fn evicts_oldest() {
        let cached = CachedEmbedder::new(Arc::new(DeterministicEmbedder::new(4)), 2);
        for t in ["a", "b", "c"] {
            cached.embed(t).unwrap();
        }
        assert_eq!(cached.len(), 2);
        let state = cached.state.read().unwrap();
        assert!(!state.map.contains_key(&content_hash("a")));
    }

    #[test]
    fn batch_mixes_hits_and_misses() {
        let cold = DeterministicEmbedder::new(4);
        let cached = CachedEmbedder::new(Arc::new(cold.clone()), 16);
        cached.embed("b").unwrap();
        let texts: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let got = cached.batch_embed(&texts).unwrap();
        assert_eq!(got, cold.batch_embed(&texts).unwrap());
        let err = cached
            .batch_embed(&["b".to_string(), "x".to_string(), " ".to_string()])
            .unwrap_err();
        assert!(matches!(err, EmbedError::Batch { index: 2, .. }), "{err}");
    }
}

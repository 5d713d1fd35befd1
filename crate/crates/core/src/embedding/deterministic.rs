use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::{check_text, EmbedError, EmbeddingProvider, ProviderKind, SemanticVector};

/// Pseudo-embedding for offline tests.
///
/// The vector for `text` is `D` standard-normal draws from a `ChaCha8Rng`
/// seeded with `SHA-256(text)`, scaled to unit length. Same text, same vector,
/// in any process; unrelated texts are close to orthogonal.
#[derive(Debug, Clone)]
pub struct DeterministicEmbedder {
    dimension: usize,
}

impl DeterministicEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        Self { dimension }
    }
}

impl EmbeddingProvider for DeterministicEmbedder {
    fn embed(&self, text: &str) -> Result<SemanticVector, EmbedError> {
        check_text(text)?;
        let seed: [u8; 32] = Sha256::digest(text.as_bytes()).into();
        let mut rng = ChaCha8Rng::from_seed(seed);
        let raw: Vec<f64> = (0..self.dimension)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        SemanticVector::new(raw).normalized()
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn model_name(&self) -> &str {
        "deterministic-sha256-chacha8"
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::DeterministicTest
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::cosine;

    #[test]
    fn same_text_same_bits() {
        let p = DeterministicEmbedder::new(384);
        let a = p.embed("a").unwrap();
        let b = p.embed("a").unwrap();
        let bits = |v: &SemanticVector| v.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn unit_norm_and_dimension() {
        let v = DeterministicEmbedder::new(384)
            .embed("If X, then Y.")
            .unwrap();
        assert_eq!(v.dim(), 384);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distinct_texts_nearly_orthogonal() {
        let p = DeterministicEmbedder::new(384);
        let c = cosine(&p.embed("alpha").unwrap(), &p.embed("beta").unwrap()).unwrap();
        assert!(c.abs() < 0.25, "{c}");
    }

    #[test]
    fn rejects_blank_text() {
        assert!(matches!(
            DeterministicEmbedder::new(4).embed(" \n"),
            Err(EmbedError::EmptyText)
        ));
    }
}

use serde::{Deserialize, Serialize};

use super::EmbedError;

/// Dense embedding with its Euclidean norm cached.
///
/// Values are kept exactly as the provider produced them; normalisation only
/// happens inside [`cosine`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct SemanticVector {
    values: Vec<f64>,
    norm: f64,
}

impl SemanticVector {
    pub fn new(values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self { values, norm }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![0.0; dim])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_degenerate(&self) -> bool {
        self.norm.is_nan() || self.norm <= 0.0 || !self.norm.is_finite()
    }

    pub fn dot(&self, other: &SemanticVector) -> Result<f64, EmbedError> {
        check_dims(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn scaled(&self, s: f64) -> SemanticVector {
        SemanticVector::new(self.values.iter().map(|v| v * s).collect())
    }

    /// Additive inverse, used as the vector form of semantic negation.
    pub fn negated(&self) -> SemanticVector {
        SemanticVector {
            values: self.values.iter().map(|v| -v).collect(),
            norm: self.norm,
        }
    }

    /// Unit-length copy. Fails on zero-norm input.
    pub fn normalized(&self) -> Result<SemanticVector, EmbedError> {
        if self.is_degenerate() {
            return Err(EmbedError::ZeroNorm);
        }
        Ok(self.scaled(1.0 / self.norm))
    }

    /// `self += weight * other`
    pub fn add_scaled(&mut self, other: &SemanticVector, weight: f64) -> Result<(), EmbedError> {
        check_dims(self, other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += weight * b;
        }
        self.norm = self.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(())
    }
}

impl From<Vec<f64>> for SemanticVector {
    fn from(values: Vec<f64>) -> Self {
        SemanticVector::new(values)
    }
}

impl From<SemanticVector> for Vec<f64> {
    fn from(v: SemanticVector) -> Self {
        v.values
    }
}

fn check_dims(a: &SemanticVector, b: &SemanticVector) -> Result<(), EmbedError> {
    if a.dim() != b.dim() {
        return Err(EmbedError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Cosine similarity `dot(a, b) / (|a| |b|)`, clamped to [-1, 1].
pub fn cosine(a: &SemanticVector, b: &SemanticVector) -> Result<f64, EmbedError> {
    check_dims(a, b)?;
    if a.is_degenerate() || b.is_degenerate() {
        return Err(EmbedError::ZeroNorm);
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((dot / (a.norm * b.norm)).clamp(-1.0, 1.0))
}

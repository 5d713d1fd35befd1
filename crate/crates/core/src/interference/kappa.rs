use serde::{Deserialize, Serialize};

use super::InterferenceError;
use crate::axiom::Axiom;
use crate::embedding::{cosine, EmbeddingProvider, SemanticVector};

/// Prefix used by [`NegationMode::Textual`].
pub const TEXTUAL_NEGATION_PREFIX: &str = "it is not the case that ";

// tanh(x) rounds to exactly 1.0 in f64 for x above ~19.06
const MAX_TANH_ARGUMENT: f64 = 18.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaScheme {
    /// `kappa_ii = 1`, `kappa_ij = cos(h_i, h_j)`.
    #[default]
    SimilarityBased,
    /// `kappa_ij = tanh(alpha_cal * A - beta_cal * C)` with
    /// `A = cos(action_i, action_j)` and `C = cos(constraint_i, neg(constraint_j))`.
    ActionConstraint,
}

/// How `neg(constraint)` is formed for the contradiction term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegationMode {
    /// Additive inverse of the constraint vector.
    #[default]
    Vector,
    /// Embed `"it is not the case that {precondition}"`.
    Textual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KappaConfig {
    pub scheme: KappaScheme,
    pub alpha_cal: f64,
    pub beta_cal: f64,
    pub negation: NegationMode,
}

impl Default for KappaConfig {
    fn default() -> Self {
        Self {
            scheme: KappaScheme::SimilarityBased,
            alpha_cal: 2.0,
            beta_cal: 1.5,
            negation: NegationMode::Vector,
        }
    }
}

impl KappaConfig {
    pub fn action_constraint() -> Self {
        Self {
            scheme: KappaScheme::ActionConstraint,
            ..Self::default()
        }
    }

    /// Calibration must be finite and small enough that tanh stays strictly
    /// inside (-1, 1) for any `A, C` in [-1, 1].
    pub fn validate(&self) -> Result<(), InterferenceError> {
        if !(self.alpha_cal.is_finite() && self.beta_cal.is_finite()) {
            return Err(InterferenceError::Config(
                "alpha_cal and beta_cal must be finite".into(),
            ));
        }
        if self.alpha_cal.abs() + self.beta_cal.abs() > MAX_TANH_ARGUMENT {
            return Err(InterferenceError::Config(format!(
                "|alpha_cal| + |beta_cal| must not exceed {MAX_TANH_ARGUMENT}"
            )));
        }
        Ok(())
    }
}

/// Action and constraint components of one axiom. The action is the embedded
/// prescription, the constraint the embedded precondition.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaDecomposition {
    pub action: SemanticVector,
    pub constraint: SemanticVector,
    pub negated_constraint: SemanticVector,
}

impl KappaDecomposition {
    /// Decomposition with vector negation.
    pub fn from_vectors(action: SemanticVector, constraint: SemanticVector) -> Self {
        let negated_constraint = constraint.negated();
        Self {
            action,
            constraint,
            negated_constraint,
        }
    }

    pub fn from_axiom(
        axiom: &Axiom,
        provider: &dyn EmbeddingProvider,
        negation: NegationMode,
    ) -> Result<Self, InterferenceError> {
        let action = provider.embed(&axiom.prescription)?;
        let constraint = provider.embed(&axiom.precondition)?;
        Ok(match negation {
            NegationMode::Vector => Self::from_vectors(action, constraint),
            NegationMode::Textual => {
                let negated_constraint =
                    provider.embed(&format!("{TEXTUAL_NEGATION_PREFIX}{}", axiom.precondition))?;
                Self {
                    action,
                    constraint,
                    negated_constraint,
                }
            }
        })
    }
}

pub fn kappa_similarity(
    hi: &SemanticVector,
    hj: &SemanticVector,
    i: usize,
    j: usize,
) -> Result<f64, InterferenceError> {
    if hi.dim() != hj.dim() {
        return Err(crate::embedding::EmbedError::DimensionMismatch {
            expected: hi.dim(),
            got: hj.dim(),
        }
        .into());
    }
    if i == j {
        return Ok(1.0);
    }
    Ok(cosine(hi, hj)?)
}

/// `tanh(alpha_cal * agreement - beta_cal * contradiction)`.
pub fn kappa_from_terms(agreement: f64, contradiction: f64, cfg: &KappaConfig) -> f64 {
    (cfg.alpha_cal * agreement - cfg.beta_cal * contradiction).tanh()
}

pub fn kappa_action_constraint(
    di: &KappaDecomposition,
    dj: &KappaDecomposition,
    cfg: &KappaConfig,
) -> Result<f64, InterferenceError> {
    let agreement = cosine(&di.action, &dj.action)?;
    let contradiction = cosine(&di.constraint, &dj.negated_constraint)?;
    Ok(kappa_from_terms(agreement, contradiction, cfg))
}

//! Activation, interference and composition over an axiom library.
//!
//! * activations: `alpha_i = cos(scenario, h_i)` against each axiom's
//!   precondition embedding (configurable via [`AxiomView`]);
//! * interference: `I_ij = cos(h_i, h_j) * kappa_ij` over full-axiom
//!   embeddings, with `kappa` either similarity based or derived from the
//!   action/constraint decomposition;
//! * composition: `Phi = sum_i alpha_i h_i + sum_{i != j} I_ij mix(h_i, h_j)`.

mod activation;
mod field;
mod graph;
mod kappa;
mod matrix;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axiom::Axiom;
use crate::embedding::EmbedError;

pub use activation::{compute_activations, Activation, ActivationSet};
pub use field::{compose_field, mix, Contribution, FieldVector, LambdaRule, MixConfig, Term};
pub use graph::{export_graph, CompositionGraph, GraphEdge, GraphNode};
pub use kappa::{
    kappa_action_constraint, kappa_from_terms, kappa_similarity, KappaConfig, KappaDecomposition,
    KappaScheme, NegationMode, TEXTUAL_NEGATION_PREFIX,
};
pub use matrix::{build_interference_matrix, InterferenceMatrix, SquareMatrix};

#[derive(Debug, Error)]
pub enum InterferenceError {
    #[error("library is empty")]
    EmptyLibrary,
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("mixing coefficient {0} is outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("activation set and matrix cover different axioms: {0}")]
    IdMismatch(String),
    #[error("no vector supplied for axiom {0:?}")]
    MissingVector(String),
    #[error("top_n must be at least 1")]
    TopNZero,
    #[error("top_n = {top_n} exceeds library size {size}")]
    TopNTooLarge { top_n: usize, size: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Which text of an axiom gets embedded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomView {
    Precondition,
    Prescription,
    FullText,
}

impl AxiomView {
    pub fn text(self, axiom: &Axiom) -> String {
        match self {
            AxiomView::Precondition => axiom.precondition.clone(),
            AxiomView::Prescription => axiom.prescription.clone(),
            AxiomView::FullText => axiom.full_text(),
        }
    }
}

/// Texts embedded for activation and for interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewConfig {
    pub activation: AxiomView,
    pub interference: AxiomView,
}

impl Default for ViewConfig {
    fn default() -> Self {
        Self {
            activation: AxiomView::Precondition,
            interference: AxiomView::FullText,
        }
    }
}

use serde::{Deserialize, Serialize};

use super::{AxiomView, InterferenceError};
use crate::axiom::AxiomLibrary;
use crate::embedding::{cosine, EmbeddingProvider, SemanticVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    pub axiom_id: String,
    pub alpha: f64,
}

/// One activation per library axiom, sorted by descending alpha with
/// ascending id as tiebreak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationSet {
    pub scenario_ref: String,
    pub entries: Vec<Activation>,
}

impl ActivationSet {
    /// Sorts `entries` into canonical order.
    pub fn new(scenario_ref: impl Into<String>, mut entries: Vec<Activation>) -> Self {
        entries.sort_by(|a, b| {
            b.alpha
                .total_cmp(&a.alpha)
                .then_with(|| a.axiom_id.cmp(&b.axiom_id))
        });
        Self {
            scenario_ref: scenario_ref.into(),
            entries,
        }
    }

    pub fn alpha(&self, id: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.axiom_id == id)
            .map(|e| e.alpha)
    }

    /// Ids in rank order.
    pub fn ranking(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.axiom_id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same entries with every alpha multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ActivationSet {
        ActivationSet::new(
            self.scenario_ref.clone(),
            self.entries
                .iter()
                .map(|e| Activation {
                    axiom_id: e.axiom_id.clone(),
                    alpha: e.alpha * factor,
                })
                .collect(),
        )
    }
}

pub fn compute_activations(
    scenario_ref: &str,
    scenario_vec: &SemanticVector,
    lib: &AxiomLibrary,
    provider: &dyn EmbeddingProvider,
    view: AxiomView,
) -> Result<ActivationSet, InterferenceError> {
    if lib.is_empty() {
        return Err(InterferenceError::EmptyLibrary);
    }
    let texts: Vec<String> = lib.iter().map(|a| view.text(a)).collect();
    let vectors = provider.batch_embed(&texts)?;
    let entries = lib
        .iter()
        .zip(&vectors)
        .map(|(a, v)| {
            Ok(Activation {
                axiom_id: a.id.clone(),
                alpha: cosine(scenario_vec, v)?,
            })
        })
        .collect::<Result<Vec<_>, InterferenceError>>()?;
    Ok(ActivationSet::new(scenario_ref, entries))
}

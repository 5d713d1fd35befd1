use serde::{Deserialize, Serialize};

use super::{SelectedHeuristic, SynthesisError};
use crate::axiom::AxiomLibrary;
use crate::interference::ActivationSet;

/// Upper bound on selected heuristics; keeps the matrix section of a prompt
/// at most 256 cells.
pub const MAX_SELECTED: usize = 16;

/// How heuristics are chosen from an activation ranking. A threshold, when
/// set, takes precedence over `top_n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Selector {
    pub top_n: Option<usize>,
    pub threshold: Option<f64>,
}

impl Selector {
    pub fn top_n(n: usize) -> Self {
        Self {
            top_n: Some(n),
            threshold: None,
        }
    }

    pub fn threshold(t: f64) -> Self {
        Self {
            top_n: None,
            threshold: Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub selected: Vec<SelectedHeuristic>,
    pub warnings: Vec<String>,
}

impl Selection {
    pub fn ids(&self) -> Vec<String> {
        self.selected.iter().map(|s| s.axiom.id.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Pick heuristics in activation order (alpha descending, id ascending).
///
/// Top-n larger than the ranking is clamped, as is any selection beyond
/// [`MAX_SELECTED`]; both leave a warning. Threshold mode may return an
/// empty selection.
pub fn select_heuristics(
    act: &ActivationSet,
    lib: &AxiomLibrary,
    selector: Selector,
) -> Result<Selection, SynthesisError> {
    let mut warnings = Vec::new();
    let ranked = act.entries.iter();
    let chosen: Vec<_> = match (selector.threshold, selector.top_n) {
        (Some(t), _) => {
            if !t.is_finite() {
                return Err(SynthesisError::InvalidRequest(format!(
                    "threshold must be finite, got {t}"
                )));
            }
            ranked.filter(|e| e.alpha >= t).collect()
        }
        (None, Some(n)) if n >= 1 => {
            if n > act.len() {
                warnings.push(format!(
                    "top_n {n} exceeds the {} ranked axioms; clamped to {}",
                    act.len(),
                    act.len()
                ));
            }
            ranked.take(n).collect()
        }
        _ => return Err(SynthesisError::NoSelector),
    };
    let mut chosen = chosen;
    if chosen.len() > MAX_SELECTED {
        warnings.push(format!(
            "{} axioms selected; clamped to {MAX_SELECTED}",
            chosen.len()
        ));
        chosen.truncate(MAX_SELECTED);
    }
    let selected = chosen
        .into_iter()
        .map(|e| {
            let axiom = lib.get(&e.axiom_id).ok_or_else(|| {
                SynthesisError::InvalidRequest(format!(
                    "activation for {:?} has no axiom in the library",
                    e.axiom_id
                ))
            })?;
            Ok(SelectedHeuristic {
                axiom: axiom.clone(),
                alpha: e.alpha,
            })
        })
        .collect::<Result<Vec<_>, SynthesisError>>()?;
    Ok(Selection { selected, warnings })
}

use serde::{Deserialize, Serialize};

use super::{
    finish, select_heuristics, CompletionRequest, GenerationConfig, NarrativeHints, PromptPair,
    RequestEcho, SelectedHeuristic, Selector, SynthesisError, SynthesisMode, SynthesisResult,
    TextGenerator,
};
use crate::axiom::AxiomLibrary;
use crate::interference::ActivationSet;
use crate::scenario::SixCProfile;

pub const BASELINE_TOP_N: usize = 3;

/// Concatenation template over prescriptions in activation order:
/// `"For this scenario, apply the following strategic principles: P1.
/// Additionally, P2. Finally, P3."` With two prescriptions the middle clause
/// is dropped; with one only the opening clause remains.
pub fn baseline_text(prescriptions: &[String]) -> String {
    let Some((first, rest)) = prescriptions.split_first() else {
        return String::new();
    };
    let mut out = format!("For this scenario, apply the following strategic principles: {first}.");
    if let Some((last, middle)) = rest.split_last() {
        for p in middle {
            out.push_str(&format!(" Additionally, {p}."));
        }
        out.push_str(&format!(" Finally, {last}."));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRequest {
    pub scenario: SixCProfile,
    pub selected: Vec<SelectedHeuristic>,
    pub generation: GenerationConfig,
}

impl BaselineRequest {
    pub fn prescriptions(&self) -> Vec<String> {
        self.selected
            .iter()
            .map(|s| s.axiom.prescription.clone())
            .collect()
    }

    pub fn prompt(&self) -> PromptPair {
        PromptPair {
            system: self.generation.system_message.clone(),
            user: baseline_text(&self.prescriptions()),
        }
    }
}

/// Rule-ranking baseline: the top three activations, concatenated into the
/// baseline template and sent to the same generator and settings as the
/// entangled path. Smaller libraries are clamped with a warning.
pub fn run_baseline(
    scenario: &SixCProfile,
    act: &ActivationSet,
    lib: &AxiomLibrary,
    generation: &GenerationConfig,
    generator: &dyn TextGenerator,
) -> Result<SynthesisResult, SynthesisError> {
    generation.validate()?;
    let selection = select_heuristics(act, lib, Selector::top_n(BASELINE_TOP_N))?;
    if selection.is_empty() {
        return Err(SynthesisError::EmptySelection);
    }
    let req = BaselineRequest {
        scenario: scenario.clone(),
        selected: selection.selected,
        generation: generation.clone(),
    };
    let prompt = req.prompt();
    let hints = NarrativeHints {
        mode: SynthesisMode::Baseline,
        framing: None,
        prescriptions: req.prescriptions(),
    };
    let completion = generator.complete(&CompletionRequest {
        prompt: &prompt,
        config: &req.generation,
        hints: &hints,
    })?;
    finish(
        &prompt,
        completion,
        SynthesisMode::Baseline,
        RequestEcho::Baseline(req),
        selection.warnings,
    )
}

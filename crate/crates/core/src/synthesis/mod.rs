//! Prompt construction, text generation and the rule-ranking baseline.
//!
//! The entangled path hands the generator a prompt built from the scenario,
//! the selected heuristics with their activations, the interference matrix
//! among them and a framing directive. The baseline path picks the top three
//! activations and concatenates their prescriptions. Both go through the same
//! [`TextGenerator`] with the same [`GenerationConfig`].

mod baseline;
mod framing;
mod generator;
mod prompt;
mod select;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axiom::Axiom;
use crate::embedding::EmbedError;
use crate::interference::InterferenceError;
use crate::scenario::{QualifierBuckets, ScenarioError, SixCProfile};

pub use baseline::{baseline_text, run_baseline, BaselineRequest, BASELINE_TOP_N};
pub use framing::{Framing, FramingKind, Template, TemplateSet};
pub use generator::{
    Completion, CompletionRequest, GenerationError, LlmConfig, MockGenerator, NarrativeHints,
    RemoteGenerator, TextGenerator, ENV_LLM_KEY, ENV_LLM_MODEL, ENV_LLM_URL,
};
pub use prompt::{build_prompt, matrix_section, PromptPair};
pub use select::{select_heuristics, Selection, Selector, MAX_SELECTED};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("unknown framing {0:?} (expected dominant, contrarian or minimalist)")]
    UnknownFraming(String),
    #[error("unknown template {0:?}")]
    UnknownTemplate(String),
    #[error("template error: {0}")]
    Template(String),
    #[error("selection needs top_n >= 1 or a threshold")]
    NoSelector,
    #[error("no heuristic selected")]
    EmptySelection,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Interference(#[from] InterferenceError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Remote,
    DeterministicMock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub temperature: f64,
    pub max_tokens: u32,
    pub system_message: String,
    pub provider_kind: GeneratorKind,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            max_tokens: 512,
            system_message: TemplateSet::default().system.text,
            provider_kind: GeneratorKind::DeterministicMock,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(SynthesisError::InvalidConfig(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(SynthesisError::InvalidConfig(
                "max_tokens must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedHeuristic {
    pub axiom: Axiom,
    pub alpha: f64,
}

/// Everything needed to render the entangled prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRequest {
    pub scenario: SixCProfile,
    #[serde(default)]
    pub buckets: QualifierBuckets,
    pub selected: Vec<SelectedHeuristic>,
    /// Row-major `I_ij` over `selected`, in selection order.
    pub matrix_slice: Vec<f64>,
    pub framing: Framing,
    pub top_n: usize,
    pub generation: GenerationConfig,
}

impl SynthesisRequest {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        let n = self.selected.len();
        if n == 0 {
            return Err(SynthesisError::EmptySelection);
        }
        if n > MAX_SELECTED {
            return Err(SynthesisError::InvalidRequest(format!(
                "{n} heuristics selected, at most {MAX_SELECTED} allowed"
            )));
        }
        if self.matrix_slice.len() != n * n {
            return Err(SynthesisError::InvalidRequest(format!(
                "matrix slice has {} entries, expected {}",
                self.matrix_slice.len(),
                n * n
            )));
        }
        let sorted = self.selected.windows(2).all(|w| {
            w[0].alpha > w[1].alpha || (w[0].alpha == w[1].alpha && w[0].axiom.id < w[1].axiom.id)
        });
        if !sorted {
            return Err(SynthesisError::InvalidRequest(
                "selected heuristics must be sorted by descending activation".into(),
            ));
        }
        self.buckets.validate()?;
        self.generation.validate()
    }

    pub fn prescriptions(&self) -> Vec<String> {
        self.selected
            .iter()
            .map(|s| s.axiom.prescription.clone())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMode {
    Entangled,
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RequestEcho {
    Entangled(SynthesisRequest),
    Baseline(BaselineRequest),
}

impl RequestEcho {
    pub fn generation(&self) -> &GenerationConfig {
        match self {
            RequestEcho::Entangled(r) => &r.generation,
            RequestEcho::Baseline(r) => &r.generation,
        }
    }

    /// Rebuild the exact prompt that produced a result.
    pub fn reconstruct_prompt(
        &self,
        templates: &TemplateSet,
    ) -> Result<PromptPair, SynthesisError> {
        match self {
            RequestEcho::Entangled(r) => prompt::render(r, templates),
            RequestEcho::Baseline(r) => Ok(r.prompt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderMetadata {
    pub provider: String,
    pub model: String,
    pub prompt_tokens: Option<u32>,
    pub completion_tokens: Option<u32>,
    pub retries: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub narrative: String,
    pub mode: SynthesisMode,
    pub request_echo: RequestEcho,
    pub provider_metadata: ProviderMetadata,
    pub prompt_sha256: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// `cos(h_i, Phi)` per selected heuristic, when the field was composed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_alignment: Option<Vec<(String, f64)>>,
}

fn finish(
    prompt: &PromptPair,
    completion: Completion,
    mode: SynthesisMode,
    request_echo: RequestEcho,
    warnings: Vec<String>,
) -> Result<SynthesisResult, SynthesisError> {
    if completion.text.trim().is_empty() {
        return Err(GenerationError::EmptyNarrative.into());
    }
    Ok(SynthesisResult {
        narrative: completion.text,
        mode,
        request_echo,
        provider_metadata: ProviderMetadata {
            provider: completion.provider,
            model: completion.model,
            prompt_tokens: completion.prompt_tokens,
            completion_tokens: completion.completion_tokens,
            retries: completion.retries,
        },
        prompt_sha256: prompt.sha256(),
        warnings,
        field_alignment: None,
    })
}

/// Render the entangled prompt and generate a narrative.
pub fn synthesize(
    req: &SynthesisRequest,
    generator: &dyn TextGenerator,
    templates: &TemplateSet,
) -> Result<SynthesisResult, SynthesisError> {
    req.validate()?;
    let prompt = prompt::render(req, templates)?;
    let hints = NarrativeHints {
        mode: SynthesisMode::Entangled,
        framing: Some(req.framing.kind),
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
        SynthesisMode::Entangled,
        RequestEcho::Entangled(req.clone()),
        Vec::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axiom::AxiomLibrary;

    fn request(n: usize) -> SynthesisRequest {
        let lib = AxiomLibrary::bundled_meta_case();
        let selected: Vec<SelectedHeuristic> = lib
            .iter()
            .take(n)
            .enumerate()
            .map(|(i, a)| SelectedHeuristic {
                axiom: a.clone(),
                alpha: 0.9 - 0.1 * i as f64,
            })
            .collect();
        let mut slice = vec![0.25; n * n];
        for i in 0..n {
            slice[i * n + i] = 1.0;
        }
        SynthesisRequest {
            scenario: SixCProfile::meta_case(),
            buckets: QualifierBuckets::default(),
            selected,
            matrix_slice: slice,
            framing: Framing::builtin(FramingKind::Dominant),
            top_n: n,
            generation: GenerationConfig::default(),
        }
    }

    struct Blank;
    impl TextGenerator for Blank {
        fn complete(&self, _: &CompletionRequest<'_>) -> Result<Completion, GenerationError> {
            Ok(Completion {
                text: "  ".into(),
                provider: "blank".into(),
                model: "blank".into(),
                prompt_tokens: None,
                completion_tokens: None,
                retries: 0,
            })
        }
        fn name(&self) -> &str {
            "blank"
        }
    }

    #[test]
    fn mock_synthesis_echoes_request() {
        let req = request(3);
        let res = synthesize(&req, &MockGenerator, &TemplateSet::default()).unwrap();
        assert_eq!(res.mode, SynthesisMode::Entangled);
        assert_eq!(res.request_echo, RequestEcho::Entangled(req.clone()));
        assert_eq!(
            res.narrative,
            MockGenerator::narrative(
                Some(FramingKind::Dominant),
                SynthesisMode::Entangled,
                &req.prescriptions()
            )
        );
        let rebuilt = res
            .request_echo
            .reconstruct_prompt(&TemplateSet::default())
            .unwrap();
        assert_eq!(rebuilt.sha256(), res.prompt_sha256);
    }

    #[test]
    fn empty_narrative_is_an_error() {
        let err = synthesize(&request(2), &Blank, &TemplateSet::default()).unwrap_err();
        assert!(matches!(
            err,
            SynthesisError::Generation(GenerationError::EmptyNarrative)
        ));
    }

    #[test]
    fn request_validation() {
        let mut r = request(3);
        r.matrix_slice.pop();
        assert!(r.validate().is_err());
        let mut r = request(3);
        r.selected.swap(0, 1);
        assert!(r.validate().is_err());
        let mut r = request(3);
        r.selected.clear();
        assert!(matches!(r.validate(), Err(SynthesisError::EmptySelection)));
        let mut r = request(1);
        r.generation.temperature = -0.1;
        assert!(r.validate().is_err());
        let mut r = request(1);
        r.generation.max_tokens = 0;
        assert!(r.validate().is_err());
    }
}

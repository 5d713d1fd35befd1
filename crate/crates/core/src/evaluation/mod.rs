//! Coverage, coherence and novelty scores for synthesized narratives, plus
//! comparison and radar-chart records built from them.

mod report;
mod sentences;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axiom::Axiom;
use crate::embedding::{cosine, EmbedError, EmbeddingProvider};

pub use report::{
    compare, radar_export, Comparison, MetricDelta, RadarData, RadarSeries, RADAR_AXES,
};
pub use sentences::{split_sentences, ABBREVIATIONS};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no input axioms to evaluate against")]
    EmptyInputs,
    #[error("synthesis text is empty")]
    EmptySynthesis,
    #[error("invalid evaluation config: {0}")]
    Config(String),
    #[error("reports were scored under different settings: {0}")]
    ConfigMismatch(String),
    #[error("no reports given")]
    NoReports,
    #[error("invalid report: {0}")]
    InvalidReport(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceSplitter {
    /// Terminal punctuation followed by whitespace, with an abbreviation guard.
    #[default]
    PunctuationV1,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    /// Best cosine over the synthesis sentences.
    #[default]
    SentenceMax,
    /// Cosine against the whole synthesis text.
    WholeText,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoveltyAggregation {
    /// `1 - mean` of the input similarities.
    #[default]
    Mean,
    /// `1 - max` of the input similarities.
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationConfig {
    pub coverage_threshold: f64,
    pub min_sentences_for_coherence: usize,
    pub sentence_splitter: SentenceSplitter,
    pub coverage_mode: CoverageMode,
    pub novelty_aggregation: NoveltyAggregation,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            coverage_threshold: 0.4,
            min_sentences_for_coherence: 2,
            sentence_splitter: SentenceSplitter::PunctuationV1,
            coverage_mode: CoverageMode::SentenceMax,
            novelty_aggregation: NoveltyAggregation::Mean,
        }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let t = self.coverage_threshold;
        if !(t > 0.0 && t < 1.0) {
            return Err(EvalError::Config(format!(
                "coverage_threshold must be in (0, 1), got {t}"
            )));
        }
        if self.min_sentences_for_coherence < 2 {
            return Err(EvalError::Config(format!(
                "min_sentences_for_coherence must be >= 2, got {}",
                self.min_sentences_for_coherence
            )));
        }
        Ok(())
    }

    pub fn split(&self, text: &str) -> Vec<String> {
        match self.sentence_splitter {
            SentenceSplitter::PunctuationV1 => split_sentences(text),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCoverage {
    pub axiom_id: String,
    /// `None` when the synthesis has no sentence to compare against.
    pub best_similarity: Option<f64>,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub score: f64,
    pub per_axiom: Vec<AxiomCoverage>,
}

fn mean_of_sorted(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Fraction of `inputs` whose full text reaches `coverage_threshold` cosine
/// similarity with the synthesis (per sentence or whole text, by config).
pub fn coverage(
    synthesis: &str,
    inputs: &[Axiom],
    provider: &dyn EmbeddingProvider,
    cfg: &EvaluationConfig,
) -> Result<CoverageResult, EvalError> {
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(EvalError::EmptyInputs);
    }
    let units = match cfg.coverage_mode {
        CoverageMode::SentenceMax => cfg.split(synthesis),
        CoverageMode::WholeText if synthesis.trim().is_empty() => Vec::new(),
        CoverageMode::WholeText => vec![synthesis.trim().to_string()],
    };
    let unit_vecs = if units.is_empty() {
        Vec::new()
    } else {
        provider.batch_embed(&units)?
    };
    let axiom_texts: Vec<String> = inputs.iter().map(Axiom::full_text).collect();
    let axiom_vecs = provider.batch_embed(&axiom_texts)?;
    let mut per_axiom = Vec::with_capacity(inputs.len());
    for (axiom, h) in inputs.iter().zip(&axiom_vecs) {
        let mut best: Option<f64> = None;
        for u in &unit_vecs {
            let c = cosine(h, u)?;
            best = Some(best.map_or(c, |b| b.max(c)));
        }
        per_axiom.push(AxiomCoverage {
            axiom_id: axiom.id.clone(),
            best_similarity: best,
            covered: best.is_some_and(|b| b >= cfg.coverage_threshold),
        });
    }
    let covered = per_axiom.iter().filter(|a| a.covered).count();
    Ok(CoverageResult {
        score: covered as f64 / inputs.len() as f64,
        per_axiom,
    })
}

/// Mean cosine over all unordered sentence pairs; `None` below
/// `min_sentences_for_coherence` sentences.
pub fn coherence(
    synthesis: &str,
    provider: &dyn EmbeddingProvider,
    cfg: &EvaluationConfig,
) -> Result<Option<f64>, EvalError> {
    cfg.validate()?;
    let sentences = cfg.split(synthesis);
    if sentences.len() < cfg.min_sentences_for_coherence {
        return Ok(None);
    }
    let v = provider.batch_embed(&sentences)?;
    let mut pairs = Vec::with_capacity(v.len() * (v.len() - 1) / 2);
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            pairs.push(cosine(&v[i], &v[j])?);
        }
    }
    Ok(Some(mean_of_sorted(pairs)))
}

/// `1 - mean` (or `1 - max`) cosine between the whole synthesis and each
/// input's full text, clamped to `[0, 2]`.
pub fn novelty(
    synthesis: &str,
    inputs: &[Axiom],
    provider: &dyn EmbeddingProvider,
    cfg: &EvaluationConfig,
) -> Result<f64, EvalError> {
    if inputs.is_empty() {
        return Err(EvalError::EmptyInputs);
    }
    if synthesis.trim().is_empty() {
        return Err(EvalError::EmptySynthesis);
    }
    let s = provider.embed(synthesis.trim())?;
    let texts: Vec<String> = inputs.iter().map(Axiom::full_text).collect();
    let sims = provider
        .batch_embed(&texts)?
        .iter()
        .map(|h| cosine(&s, h))
        .collect::<Result<Vec<_>, _>>()?;
    let agg = match cfg.novelty_aggregation {
        NoveltyAggregation::Mean => mean_of_sorted(sims),
        NoveltyAggregation::Max => sims.into_iter().fold(f64::NEG_INFINITY, f64::max),
    };
    Ok((1.0 - agg).clamp(0.0, 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub variant_label: String,
    /// `None` only for reports entered by hand without a coverage score.
    pub coverage: Option<f64>,
    /// `None` when the synthesis is too short to score.
    pub coherence: Option<f64>,
    pub novelty: f64,
    pub per_axiom: Vec<AxiomCoverage>,
    pub sentence_count: usize,
    pub config: EvaluationConfig,
    pub embedding_model: String,
    /// Manually coded strategic depth, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_depth: Option<f64>,
}

impl EvaluationReport {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |what: &str| Err(EvalError::InvalidReport(what.to_string()));
        if let Some(c) = self.coverage {
            if !(0.0..=1.0).contains(&c) {
                return bad("coverage outside [0, 1]");
            }
            if !self.per_axiom.is_empty() {
                let covered = self.per_axiom.iter().filter(|a| a.covered).count();
                let expected = covered as f64 / self.per_axiom.len() as f64;
                if (expected - c).abs() > 1e-12 {
                    return bad("coverage does not match per-axiom detail");
                }
            }
        }
        if self.coherence.is_some_and(|c| !(-1.0..=1.0).contains(&c)) {
            return bad("coherence outside [-1, 1]");
        }
        if !(0.0..=2.0).contains(&self.novelty) {
            return bad("novelty outside [0, 2]");
        }
        if self.human_depth.is_some_and(|d| !d.is_finite() || d < 0.0) {
            return bad("human_depth must be a non-negative number");
        }
        Ok(())
    }
}

/// Score one synthesis against the axioms it was built from.
pub fn evaluate(
    label: &str,
    synthesis: &str,
    inputs: &[Axiom],
    provider: &dyn EmbeddingProvider,
    cfg: &EvaluationConfig,
) -> Result<EvaluationReport, EvalError> {
    cfg.validate()?;
    let cov = coverage(synthesis, inputs, provider, cfg)?;
    Ok(EvaluationReport {
        variant_label: label.to_string(),
        coverage: Some(cov.score),
        coherence: coherence(synthesis, provider, cfg)?,
        novelty: novelty(synthesis, inputs, provider, cfg)?,
        per_axiom: cov.per_axiom,
        sentence_count: cfg.split(synthesis).len(),
        config: cfg.clone(),
        embedding_model: provider.model_name().to_string(),
        human_depth: None,
    })
}

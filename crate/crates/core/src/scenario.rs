//! Six-dimension ("6C") strategic profiles and their encoding into the
//! embedding space.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbedError, EmbeddingProvider, SemanticVector};

pub const DEFAULT_SCALE_MAX: f64 = 5.0;

const META_PROFILE: &str = include_str!("../data/meta_scenario.json");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{dimension} = {value} is outside [0, {max}]")]
    OutOfRange {
        dimension: Dimension,
        value: f64,
        max: f64,
    },
    #[error("scenario label must not be empty")]
    EmptyLabel,
    #[error("scale upper bound must be finite and positive, got {0}")]
    InvalidScale(f64),
    #[error("qualifier bucket edges must be increasing, got {0:?}")]
    InvalidBuckets([f64; 3]),
    #[error("cannot read scenario file {path}: {message}")]
    Io { path: String, message: String },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("weighted encoding needs at least one non-zero dimension or a narrative context")]
    Degenerate,
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    OffensiveStrength,
    DefensiveStrength,
    RelationalCapacity,
    PotentialEnergy,
    TemporalAvailability,
    ContextualFit,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::OffensiveStrength,
        Dimension::DefensiveStrength,
        Dimension::RelationalCapacity,
        Dimension::PotentialEnergy,
        Dimension::TemporalAvailability,
        Dimension::ContextualFit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::OffensiveStrength => "Offensive Strength",
            Dimension::DefensiveStrength => "Defensive Strength",
            Dimension::RelationalCapacity => "Relational Capacity",
            Dimension::PotentialEnergy => "Potential Energy",
            Dimension::TemporalAvailability => "Temporal Availability",
            Dimension::ContextualFit => "Contextual Fit",
        }
    }

    /// Descriptor embedded by the weighted per-dimension encoder.
    pub fn descriptor(self) -> &'static str {
        match self {
            Dimension::OffensiveStrength => {
                "Offensive Strength: the capacity to take the initiative and press an advantage against rivals."
            }
            Dimension::DefensiveStrength => {
                "Defensive Strength: the capacity to absorb attacks and protect existing positions."
            }
            Dimension::RelationalCapacity => {
                "Relational Capacity: the ability to build alliances and influence stakeholders."
            }
            Dimension::PotentialEnergy => {
                "Potential Energy: latent resources and options that can be mobilised when needed."
            }
            Dimension::TemporalAvailability => {
                "Temporal Availability: how much time is available before a decision must be made."
            }
            Dimension::ContextualFit => {
                "Contextual Fit: how well current capabilities match the demands of the environment."
            }
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    label: String,
    offensive_strength: f64,
    defensive_strength: f64,
    relational_capacity: f64,
    potential_energy: f64,
    temporal_availability: f64,
    contextual_fit: f64,
    #[serde(default)]
    narrative_context: Option<String>,
    #[serde(default = "default_scale")]
    scale_max: f64,
}

fn default_scale() -> f64 {
    DEFAULT_SCALE_MAX
}

fn is_default_scale(v: &f64) -> bool {
    *v == DEFAULT_SCALE_MAX
}

/// A scenario scored on six dimensions, each in `[0, scale_max]`.
///
/// Construction validates ranges; values are never clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct SixCProfile {
    label: String,
    offensive_strength: f64,
    defensive_strength: f64,
    relational_capacity: f64,
    potential_energy: f64,
    temporal_availability: f64,
    contextual_fit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    narrative_context: Option<String>,
    #[serde(skip_serializing_if = "is_default_scale")]
    scale_max: f64,
}

impl TryFrom<RawProfile> for SixCProfile {
    type Error = ScenarioError;
    fn try_from(r: RawProfile) -> Result<Self, Self::Error> {
        SixCProfile::with_scale(
            r.label,
            [
                r.offensive_strength,
                r.defensive_strength,
                r.relational_capacity,
                r.potential_energy,
                r.temporal_availability,
                r.contextual_fit,
            ],
            r.narrative_context,
            r.scale_max,
        )
    }
}

impl SixCProfile {
    /// Values in [`Dimension::ALL`] order on the default 0–5 scale.
    pub fn new(label: impl Into<String>, values: [f64; 6]) -> Result<Self, ScenarioError> {
        Self::with_scale(label, values, None, DEFAULT_SCALE_MAX)
    }

    pub fn with_scale(
        label: impl Into<String>,
        values: [f64; 6],
        narrative_context: Option<String>,
        scale_max: f64,
    ) -> Result<Self, ScenarioError> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(ScenarioError::EmptyLabel);
        }
        if !(scale_max.is_finite() && scale_max > 0.0) {
            return Err(ScenarioError::InvalidScale(scale_max));
        }
        for (dimension, value) in Dimension::ALL.into_iter().zip(values) {
            if !(0.0..=scale_max).contains(&value) {
                return Err(ScenarioError::OutOfRange {
                    dimension,
                    value,
                    max: scale_max,
                });
            }
        }
        let narrative_context = narrative_context.filter(|s| !s.trim().is_empty());
        Ok(Self {
            label,
            offensive_strength: values[0],
            defensive_strength: values[1],
            relational_capacity: values[2],
            potential_energy: values[3],
            temporal_availability: values[4],
            contextual_fit: values[5],
            narrative_context,
            scale_max,
        })
    }

    pub fn with_narrative(mut self, context: impl Into<String>) -> Self {
        let context = context.into();
        self.narrative_context = (!context.trim().is_empty()).then_some(context);
        self
    }

    /// The Meta vs. FTC case profile.
    pub fn meta_case() -> Self {
        Self::from_json_str(META_PROFILE, "bundled:meta_scenario.json").expect("bundled profile")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn from_json_str(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn narrative_context(&self) -> Option<&str> {
        self.narrative_context.as_deref()
    }

    pub fn scale_max(&self) -> f64 {
        self.scale_max
    }

    pub fn value(&self, d: Dimension) -> f64 {
        match d {
            Dimension::OffensiveStrength => self.offensive_strength,
            Dimension::DefensiveStrength => self.defensive_strength,
            Dimension::RelationalCapacity => self.relational_capacity,
            Dimension::PotentialEnergy => self.potential_energy,
            Dimension::TemporalAvailability => self.temporal_availability,
            Dimension::ContextualFit => self.contextual_fit,
        }
    }

    pub fn values(&self) -> [f64; 6] {
        Dimension::ALL.map(|d| self.value(d))
    }
}

/// Bucket edges turning a value into a qualifier: `low` below the first edge,
/// `moderate` below the second, `high` below the third, `very high` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualifierBuckets {
    pub low_below: f64,
    pub moderate_below: f64,
    pub high_below: f64,
}

impl Default for QualifierBuckets {
    fn default() -> Self {
        Self {
            low_below: 2.0,
            moderate_below: 3.5,
            high_below: 4.5,
        }
    }
}

impl QualifierBuckets {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let e = [self.low_below, self.moderate_below, self.high_below];
        if e.iter().all(|x| x.is_finite()) && e[0] < e[1] && e[1] < e[2] {
            Ok(())
        } else {
            Err(ScenarioError::InvalidBuckets(e))
        }
    }

    pub fn qualifier(&self, value: f64) -> &'static str {
        if value < self.low_below {
            "low"
        } else if value < self.moderate_below {
            "moderate"
        } else if value < self.high_below {
            "high"
        } else {
            "very high"
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioEncoding {
    /// Embed the rendered profile text once.
    #[default]
    CompositeText,
    /// Weighted average of per-dimension descriptor vectors, weights being
    /// `value / scale_max`; a narrative context joins with weight 1.
    WeightedDimensions,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub buckets: QualifierBuckets,
    pub encoding: ScenarioEncoding,
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// One clause per dimension, `"{name} is {qualifier} ({value:.2} of {max})"`,
/// joined by `"; "` and closed with a period, then the narrative context.
pub fn render_scenario_text(p: &SixCProfile, buckets: &QualifierBuckets) -> String {
    let clauses: Vec<String> = Dimension::ALL
        .iter()
        .map(|&d| {
            let v = round2(p.value(d));
            format!(
                "{} is {} ({:.2} of {})",
                d.name(),
                buckets.qualifier(v),
                v,
                p.scale_max
            )
        })
        .collect();
    let mut text = format!("{}.", clauses.join("; "));
    if let Some(ctx) = &p.narrative_context {
        text.push(' ');
        text.push_str(ctx.trim());
    }
    text
}

pub fn embed_scenario(
    p: &SixCProfile,
    provider: &dyn EmbeddingProvider,
    cfg: &ScenarioConfig,
) -> Result<SemanticVector, ScenarioError> {
    match cfg.encoding {
        ScenarioEncoding::CompositeText => {
            Ok(provider.embed(&render_scenario_text(p, &cfg.buckets))?)
        }
        ScenarioEncoding::WeightedDimensions => {
            let mut acc = SemanticVector::zeros(provider.dimension());
            let mut total = 0.0;
            for d in Dimension::ALL {
                let w = p.value(d) / p.scale_max;
                if w > 0.0 {
                    acc.add_scaled(&provider.embed(d.descriptor())?.normalized()?, w)?;
                    total += w;
                }
            }
            if let Some(ctx) = &p.narrative_context {
                acc.add_scaled(&provider.embed(ctx)?.normalized()?, 1.0)?;
                total += 1.0;
            }
            if total == 0.0 {
                return Err(ScenarioError::Degenerate);
            }
            Ok(acc.scaled(1.0 / total))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::DeterministicEmbedder;

    #[test]
    fn meta_profile_rendering() {
        let p = SixCProfile::meta_case();
        assert_eq!(p.values(), [3.88, 4.42, 4.15, 4.90, 3.70, 4.55]);
        let text = render_scenario_text(&p, &QualifierBuckets::default());
        assert!(
            text.contains("Potential Energy is very high (4.90 of 5)"),
            "{text}"
        );
        assert!(
            text.contains("Offensive Strength is high (3.88 of 5)"),
            "{text}"
        );
        assert_eq!(text, render_scenario_text(&p, &QualifierBuckets::default()));
    }

    #[test]
    fn all_zero_profile() {
        let p = SixCProfile::new("zero", [0.0; 6]).unwrap();
        let text = render_scenario_text(&p, &QualifierBuckets::default());
        assert_eq!(text.matches("is low (0.00 of 5)").count(), 6, "{text}");
    }

    #[test]
    fn bucket_edges() {
        let b = QualifierBuckets::default();
        assert_eq!(b.qualifier(1.99), "low");
        assert_eq!(b.qualifier(2.0), "moderate");
        assert_eq!(b.qualifier(3.5), "high");
        assert_eq!(b.qualifier(4.5), "very high");
        assert!(QualifierBuckets {
            low_below: 3.0,
            moderate_below: 2.0,
            high_below: 4.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn out_of_range_rejected_not_clamped() {
        let err = SixCProfile::new("x", [1.0, 2.0, 5.01, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(
            err,
            ScenarioError::OutOfRange {
                dimension: Dimension::RelationalCapacity,
                ..
            }
        ));
        assert!(SixCProfile::new("x", [-0.1, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(SixCProfile::new("x", [f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(matches!(
            SixCProfile::new(" ", [0.0; 6]),
            Err(ScenarioError::EmptyLabel)
        ));
        let json = r#"{"label":"x","offensive_strength":6,"defensive_strength":0,"relational_capacity":0,"potential_energy":0,"temporal_availability":0,"contextual_fit":0}"#;
        assert!(SixCProfile::from_json_str(json, "mem").is_err());
    }

    #[test]
    fn configurable_scale() {
        let p = SixCProfile::with_scale("ten", [9.5, 0.0, 0.0, 0.0, 0.0, 0.0], None, 10.0).unwrap();
        let text = render_scenario_text(&p, &QualifierBuckets::default());
        assert!(
            text.starts_with("Offensive Strength is very high (9.50 of 10)"),
            "{text}"
        );
    }

    #[test]
    fn narrative_context_appended() {
        let p = SixCProfile::new("x", [1.0; 6])
            .unwrap()
            .with_narrative("Regulators are circling.");
        let text = render_scenario_text(&p, &QualifierBuckets::default());
        assert!(text.ends_with("of 5). Regulators are circling."), "{text}");
    }

    #[test]
    fn embedding_matches_rendered_text() {
        let provider = DeterministicEmbedder::new(384);
        let p = SixCProfile::meta_case();
        let v = embed_scenario(&p, &provider, &ScenarioConfig::default()).unwrap();
        assert_eq!(v.dim(), 384);
        let text = render_scenario_text(&p, &QualifierBuckets::default());
        assert_eq!(v, provider.embed(&text).unwrap());
        let again = SixCProfile::meta_case();
        assert_eq!(
            v,
            embed_scenario(&again, &provider, &ScenarioConfig::default()).unwrap()
        );
    }

    #[test]
    fn weighted_encoder() {
        let provider = DeterministicEmbedder::new(64);
        let cfg = ScenarioConfig {
            encoding: ScenarioEncoding::WeightedDimensions,
            ..Default::default()
        };
        let one = SixCProfile::new("x", [5.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let v = embed_scenario(&one, &provider, &cfg).unwrap();
        let expected = provider
            .embed(Dimension::OffensiveStrength.descriptor())
            .unwrap();
        for (a, b) in v.values().iter().zip(expected.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = SixCProfile::new("z", [0.0; 6]).unwrap();
        assert!(matches!(
            embed_scenario(&zero, &provider, &cfg),
            Err(ScenarioError::Degenerate)
        ));
    }

    #[test]
    fn json_round_trip() {
        let p = SixCProfile::meta_case();
        let json = serde_json::to_string(&p).unwrap();
        assert!(!json.contains("scale_max"));
        assert_eq!(SixCProfile::from_json_str(&json, "mem").unwrap(), p);
    }
}

//! Fixtures and independent reference computations shared by test targets.
#![allow(dead_code)]

use std::collections::HashMap;

use entangle_core::axiom::{Axiom, AxiomLibrary, Strategist, Tradition};
use entangle_core::embedding::{EmbedError, EmbeddingProvider, ProviderKind, SemanticVector};
use entangle_core::engine::{
    selected_ids, Engine, EngineConfig, EvaluateDescriptor, SynthesizeDescriptor,
};
use entangle_core::synthesis::FramingKind;
use serde_json::json;

pub fn axiom(id: &str, precondition: &str, prescription: &str) -> Axiom {
    Axiom {
        id: id.to_string(),
        strategist: Strategist::Martin,
        tradition: Tradition::Corporate,
        precondition: precondition.to_string(),
        prescription: prescription.to_string(),
        tags: Vec::new(),
        theme: None,
    }
}

const WORDS: [&str; 16] = [
    "market",
    "rival",
    "alliance",
    "supply",
    "brand",
    "pricing",
    "talent",
    "regulator",
    "platform",
    "capital",
    "channel",
    "patent",
    "region",
    "cost",
    "trust",
    "tempo",
];

/// `n` axioms with distinct texts derived from `seed`.
pub fn library(n: usize, seed: u64) -> AxiomLibrary {
    let axioms = (0..n)
        .map(|k| {
            let w = |off: u64| {
                WORDS[((seed.wrapping_mul(31).wrapping_add(k as u64 * 7 + off)) % 16) as usize]
            };
            axiom(
                &format!("a{k:02}"),
                &format!("the {} shifts near {} {seed} {k}", w(0), w(3)),
                &format!("secure the {} before the {} {seed} {k}", w(5), w(11)),
            )
        })
        .collect();
    AxiomLibrary::from_axioms(axioms, Vec::new()).expect("generated library is valid")
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}

/// Reference interference under the similarity scheme: 1 on the diagonal,
/// squared cosine elsewhere.
pub fn similarity_matrix_oracle(h: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = h.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = if i == j {
                1.0
            } else {
                let c = cos(&h[i], &h[j]);
                c * c
            };
        }
    }
    out
}

/// Reference field: `sum_i a_i h_i + sum_{i != j, |I_ij| >= floor} I_ij (l h_i + (1 - l) h_j)`.
pub fn field_oracle(
    h: &[Vec<f64>],
    alpha: &[f64],
    interference: &[Vec<f64>],
    lambda: impl Fn(f64, f64) -> f64,
    floor: f64,
) -> Vec<f64> {
    let d = h[0].len();
    let mut phi = vec![0.0; d];
    for i in 0..h.len() {
        for k in 0..d {
            phi[k] += alpha[i] * h[i][k];
        }
    }
    for i in 0..h.len() {
        for j in 0..h.len() {
            if i == j || interference[i][j].abs() < floor {
                continue;
            }
            let l = lambda(alpha[i], alpha[j]);
            for k in 0..d {
                phi[k] += interference[i][j] * (l * h[i][k] + (1.0 - l) * h[j][k]);
            }
        }
    }
    phi
}

/// Wraps a provider and multiplies every vector by a constant.
pub struct Scaled<P> {
    pub inner: P,
    pub factor: f64,
}

impl<P: EmbeddingProvider> EmbeddingProvider for Scaled<P> {
    fn embed(&self, text: &str) -> Result<SemanticVector, EmbedError> {
        Ok(self.inner.embed(text)?.scaled(self.factor))
    }
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn model_name(&self) -> &str {
        "scaled"
    }
    fn kind(&self) -> ProviderKind {
        ProviderKind::DeterministicTest
    }
}

pub fn vectors_by_id(
    lib: &AxiomLibrary,
    provider: &dyn EmbeddingProvider,
) -> HashMap<String, SemanticVector> {
    lib.iter()
        .map(|a| (a.id.clone(), provider.embed(&a.full_text()).unwrap()))
        .collect()
}

/// Every artefact of one pipeline run, as (file name, pretty JSON).
pub fn run_pipeline() -> Vec<(String, String)> {
    let engine = Engine::new(EngineConfig::default()).unwrap();
    let mut out = Vec::new();
    let mut variants: Vec<(String, SynthesizeDescriptor)> = FramingKind::ALL
        .iter()
        .map(|&framing| {
            let name = serde_json::to_value(framing)
                .unwrap()
                .as_str()
                .unwrap()
                .to_string();
            (
                name,
                SynthesizeDescriptor {
                    framing,
                    top_n: Some(8),
                    ..Default::default()
                },
            )
        })
        .collect();
    variants.push((
        "baseline".into(),
        SynthesizeDescriptor {
            baseline: true,
            ..Default::default()
        },
    ));
    for (name, d) in variants {
        let synthesis = engine.synthesize(&d).unwrap();
        let report = engine
            .evaluate(&EvaluateDescriptor {
                synthesis: synthesis.narrative.clone(),
                inputs: selected_ids(&synthesis.request_echo),
                label: Some(name.clone()),
                human_depth: None,
            })
            .unwrap();
        let doc = json!({"synthesis": synthesis, "report": report});
        out.push((
            format!("{name}.json"),
            serde_json::to_string_pretty(&doc).unwrap() + "\n",
        ));
    }
    let run = engine
        .comparison_run(&SynthesizeDescriptor::default())
        .unwrap();
    out.push((
        "comparison.json".into(),
        serde_json::to_string_pretty(&run).unwrap() + "\n",
    ));
    out
}

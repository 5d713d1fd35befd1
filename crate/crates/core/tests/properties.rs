mod common;

use proptest::prelude::*;

use common::{cos, library};
use entangle_core::axiom::AxiomLibrary;
use entangle_core::embedding::{DeterministicEmbedder, EmbeddingProvider, SemanticVector};
use entangle_core::evaluation::{coherence, coverage, novelty, EvaluationConfig};
use entangle_core::interference::{
    build_interference_matrix, kappa_from_terms, mix, AxiomView, KappaConfig, KappaScheme,
};

const SENTENCES: [&str; 8] = [
    "Hold the high ground.",
    "Let rivals overextend.",
    "Keep every option reversible.",
    "Court the regulator early.",
    "Move before the market settles.",
    "Spend nothing you cannot recover.",
    "Make the alliance look inevitable.",
    "Strike where attention is thin.",
];

fn with_threshold(t: f64) -> EvaluationConfig {
    EvaluationConfig {
        coverage_threshold: t,
        ..EvaluationConfig::default()
    }
}

fn text(picks: &[usize]) -> String {
    picks
        .iter()
        .map(|&i| SENTENCES[i])
        .collect::<Vec<_>>()
        .join(" ")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrix_symmetric_unit_diagonal_cos_squared(n in 2usize..=12, seed in any::<u64>()) {
        let p = DeterministicEmbedder::new(32);
        let lib = library(n, seed);
        let m = build_interference_matrix(&lib, &p, &KappaConfig::default(), AxiomView::FullText).unwrap();
        let h: Vec<SemanticVector> = lib.iter().map(|a| p.embed(&a.full_text()).unwrap()).collect();
        for i in 0..n {
            prop_assert_eq!(m.get(i, i), 1.0);
            for j in 0..n {
                prop_assert!((m.get(i, j) - m.get(j, i)).abs() <= 1e-9);
                if i != j {
                    let c = cos(h[i].values(), h[j].values());
                    prop_assert!((0.0..=1.0).contains(&m.get(i, j)));
                    prop_assert!((m.get(i, j) - c * c).abs() <= 1e-9);
                }
            }
        }
        prop_assert!(m.check_invariants().is_ok());
    }

    #[test]
    fn action_constraint_matrix_is_symmetric(n in 2usize..=8, seed in any::<u64>()) {
        let p = DeterministicEmbedder::new(32);
        let lib = library(n, seed);
        let m = build_interference_matrix(&lib, &p, &KappaConfig::action_constraint(), AxiomView::FullText).unwrap();
        prop_assert_eq!(m.scheme.scheme, KappaScheme::ActionConstraint);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((m.get(i, j) - m.get(j, i)).abs() <= 1e-9);
                prop_assert!(m.get(i, j).abs() < 1.0 || i == j);
            }
        }
    }

    #[test]
    fn kappa_bounded(a in -1.0f64..=1.0, c in -1.0f64..=1.0, alpha in 0.0f64..=9.0, beta in 0.0f64..=9.0) {
        let cfg = KappaConfig { alpha_cal: alpha, beta_cal: beta, ..KappaConfig::action_constraint() };
        prop_assert!(cfg.validate().is_ok());
        let k = kappa_from_terms(a, c, &cfg);
        prop_assert!(k > -1.0 && k < 1.0, "{}", k);
    }

    #[test]
    fn mix_is_convex(
        pair in (1usize..10).prop_flat_map(|d| (
            prop::collection::vec(-5.0f64..5.0, d),
            prop::collection::vec(-5.0f64..5.0, d),
        )),
        lambda in 0.0f64..=1.0,
    ) {
        let (a, b) = pair;
        let m = mix(&SemanticVector::new(a.clone()), &SemanticVector::new(b.clone()), lambda).unwrap();
        for (k, x) in m.values().iter().enumerate() {
            let (lo, hi) = (a[k].min(b[k]), a[k].max(b[k]));
            prop_assert!(*x >= lo - 1e-12 && *x <= hi + 1e-12);
        }
    }

    #[test]
    fn coverage_monotone_in_threshold(
        picks in prop::collection::vec(0usize..8, 1..6),
        t1 in 0.01f64..0.99,
        t2 in 0.01f64..0.99,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let p = DeterministicEmbedder::new(64);
        let lib = AxiomLibrary::bundled_meta_case();
        let s = text(&picks);
        let a = coverage(&s, lib.axioms(), &p, &with_threshold(lo)).unwrap().score;
        let b = coverage(&s, lib.axioms(), &p, &with_threshold(hi)).unwrap().score;
        prop_assert!(a >= b);
    }

    #[test]
    fn verbatim_axiom_is_covered(
        picks in prop::collection::vec(0usize..8, 0..4),
        which in 0usize..12,
        t in 0.01f64..0.99,
    ) {
        let p = DeterministicEmbedder::new(64);
        let lib = AxiomLibrary::bundled_meta_case();
        let axiom = &lib.axioms()[which];
        let mut s = text(&picks);
        s.push(' ');
        s.push_str(&axiom.full_text());
        let r = coverage(&s, std::slice::from_ref(axiom), &p, &with_threshold(t)).unwrap();
        prop_assert!(r.per_axiom[0].covered);
        prop_assert_eq!(r.score, 1.0);
    }

    #[test]
    fn identical_sentences_fully_coherent(which in 0usize..8, k in 2usize..7) {
        let p = DeterministicEmbedder::new(64);
        let s = vec![SENTENCES[which]; k].join(" ");
        let c = coherence(&s, &p, &EvaluationConfig::default()).unwrap().unwrap();
        prop_assert!((c - 1.0).abs() <= 1e-12, "{}", c);
    }

    #[test]
    fn coherence_order_invariant(picks in prop::collection::vec(0usize..8, 2..7), rot in 0usize..7) {
        let p = DeterministicEmbedder::new(64);
        let mut shuffled = picks.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        shuffled.reverse();
        let cfg = EvaluationConfig::default();
        let a = coherence(&text(&picks), &p, &cfg).unwrap();
        let b = coherence(&text(&shuffled), &p, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn novelty_identity_is_zero(which in 0usize..12) {
        let p = DeterministicEmbedder::new(64);
        let lib = AxiomLibrary::bundled_meta_case();
        let axiom = &lib.axioms()[which];
        let n = novelty(&axiom.full_text(), std::slice::from_ref(axiom), &p, &EvaluationConfig::default()).unwrap();
        prop_assert!(n.abs() <= 1e-9, "{}", n);
    }

    #[test]
    fn novelty_input_order_invariant(picks in prop::collection::vec(0usize..8, 1..5), rot in 0usize..12) {
        let p = DeterministicEmbedder::new(64);
        let lib = AxiomLibrary::bundled_meta_case();
        let mut inputs = lib.axioms().to_vec();
        let forward = novelty(&text(&picks), &inputs, &p, &EvaluationConfig::default()).unwrap();
        inputs.rotate_left(rot);
        inputs.reverse();
        let back = novelty(&text(&picks), &inputs, &p, &EvaluationConfig::default()).unwrap();
        prop_assert_eq!(forward, back);
        prop_assert!((0.0..=2.0).contains(&forward));
    }
}

#[test]
fn single_sentence_has_no_coherence() {
    let p = DeterministicEmbedder::new(64);
    let cfg = EvaluationConfig::default();
    assert_eq!(coherence("Hold the high ground.", &p, &cfg).unwrap(), None);
    assert_eq!(coherence("", &p, &cfg).unwrap(), None);
}

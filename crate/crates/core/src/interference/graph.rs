use serde::{Deserialize, Serialize};

use super::{ActivationSet, InterferenceError, InterferenceMatrix};
use crate::format::fixed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: String,
    pub target: String,
    pub interference: f64,
}

/// Complete weighted graph over the top-n activated axioms. Nodes follow the
/// activation ranking; edges are every unordered pair, source ranked first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl CompositionGraph {
    /// Graphviz rendering with activation and interference labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph composition {\n");
        for n in &self.nodes {
            out.push_str(&format!(
                "  \"{}\" [label=\"{}\\nα={}\"];\n",
                n.id,
                n.id,
                fixed(n.alpha, 3)
            ));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [label=\"{}\"];\n",
                e.source,
                e.target,
                fixed(e.interference, 3)
            ));
        }
        out.push_str("}\n");
        out
    }
}

pub fn export_graph(
    act: &ActivationSet,
    m: &InterferenceMatrix,
    top_n: usize,
) -> Result<CompositionGraph, InterferenceError> {
    if top_n == 0 {
        return Err(InterferenceError::TopNZero);
    }
    if top_n > act.len() {
        return Err(InterferenceError::TopNTooLarge {
            top_n,
            size: act.len(),
        });
    }
    let nodes: Vec<GraphNode> = act.entries[..top_n]
        .iter()
        .map(|e| GraphNode {
            id: e.axiom_id.clone(),
            alpha: e.alpha,
        })
        .collect();
    let mut edges = Vec::with_capacity(top_n * (top_n - 1) / 2);
    for (a, source) in nodes.iter().enumerate() {
        for target in &nodes[a + 1..] {
            let interference = m
                .between(&source.id, &target.id)
                .ok_or_else(|| InterferenceError::IdMismatch(target.id.clone()))?;
            edges.push(GraphEdge {
                source: source.id.clone(),
                target: target.id.clone(),
                interference,
            });
        }
    }
    Ok(CompositionGraph { nodes, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axiom::{AxiomFilter, AxiomLibrary};
    use crate::embedding::DeterministicEmbedder;
    use crate::interference::{
        build_interference_matrix, compute_activations, AxiomView, KappaConfig,
    };
    use crate::scenario::{embed_scenario, ScenarioConfig, SixCProfile};

    fn setup(lib: &AxiomLibrary) -> (ActivationSet, InterferenceMatrix) {
        let p = DeterministicEmbedder::new(384);
        let s = embed_scenario(&SixCProfile::meta_case(), &p, &ScenarioConfig::default()).unwrap();
        let act = compute_activations("meta", &s, lib, &p, AxiomView::Precondition).unwrap();
        let m = build_interference_matrix(lib, &p, &KappaConfig::default(), AxiomView::FullText)
            .unwrap();
        (act, m)
    }

    #[test]
    fn edge_counts() {
        let lib = AxiomLibrary::bundled_meta_case();
        let (act, m) = setup(&lib);
        let g = export_graph(&act, &m, 3).unwrap();
        assert_eq!((g.nodes.len(), g.edges.len()), (3, 3));
        let g = export_graph(&act, &m, 1).unwrap();
        assert_eq!((g.nodes.len(), g.edges.len()), (1, 0));
        assert!(matches!(
            export_graph(&act, &m, 0),
            Err(InterferenceError::TopNZero)
        ));
        assert!(export_graph(&act, &m, 13).is_err());

        let martin = lib.filter(&AxiomFilter::Strategist(crate::axiom::Strategist::Martin));
        let (act, m) = setup(&martin);
        let g = export_graph(&act, &m, 8).unwrap();
        assert_eq!((g.nodes.len(), g.edges.len()), (8, 28));
        assert_eq!(
            g.nodes.iter().map(|n| n.id.as_str()).collect::<Vec<_>>(),
            act.ranking()
        );
        assert!(g.to_dot().starts_with("graph composition {"));
    }
}

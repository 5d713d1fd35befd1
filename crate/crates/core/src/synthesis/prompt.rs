use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{SynthesisError, SynthesisRequest, TemplateSet};
use crate::format::fixed;
use crate::scenario::render_scenario_text;

/// System and user messages for one generation call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPair {
    pub system: String,
    pub user: String,
}

impl PromptPair {
    /// Hex SHA-256 over both messages, separated by a NUL byte.
    pub fn sha256(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.system.as_bytes());
        h.update([0u8]);
        h.update(self.user.as_bytes());
        hex::encode(h.finalize())
    }
}

/// Render the prompt with the built-in templates.
pub fn build_prompt(req: &SynthesisRequest) -> Result<PromptPair, SynthesisError> {
    render(req, &TemplateSet::default())
}

pub(crate) fn render(
    req: &SynthesisRequest,
    templates: &TemplateSet,
) -> Result<PromptPair, SynthesisError> {
    req.validate()?;
    let n = req.selected.len();
    let mut user = String::new();

    user.push_str("Scenario:\n");
    user.push_str(&render_scenario_text(&req.scenario, &req.buckets));
    user.push_str("\n\n");

    user.push_str("Activated heuristics, strongest first:\n");
    for (k, h) in req.selected.iter().enumerate() {
        user.push_str(&format!(
            "{}. {} (activation {})\n",
            k + 1,
            h.axiom.full_text(),
            fixed(h.alpha, 2)
        ));
    }
    user.push('\n');

    let ids: Vec<&str> = req.selected.iter().map(|h| h.axiom.id.as_str()).collect();
    user.push_str(&format!(
        "Interference matrix (rows and columns: {}):\n",
        ids.join(", ")
    ));
    for row in req.matrix_slice.chunks(n) {
        let cells: Vec<String> = row.iter().map(|v| fixed(*v, 2)).collect();
        user.push_str(&cells.join(" "));
        user.push('\n');
    }
    user.push('\n');

    user.push_str(templates.directive(&req.framing)?);
    user.push_str("\n\n");
    user.push_str(&templates.output_contract.text);
    user.push('\n');

    Ok(PromptPair {
        system: req.generation.system_message.clone(),
        user,
    })
}

/// Lines of the matrix section of a rendered user prompt, without its header.
pub fn matrix_section(user: &str) -> Vec<&str> {
    user.lines()
        .skip_while(|l| !l.starts_with("Interference matrix"))
        .skip(1)
        .take_while(|l| !l.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axiom::AxiomLibrary;
    use crate::scenario::{QualifierBuckets, SixCProfile};
    use crate::synthesis::{Framing, FramingKind, GenerationConfig, SelectedHeuristic};

    fn request(ids: &[&str], framing: FramingKind) -> SynthesisRequest {
        let lib = AxiomLibrary::bundled_meta_case();
        let n = ids.len();
        let selected = ids
            .iter()
            .enumerate()
            .map(|(k, id)| SelectedHeuristic {
                axiom: lib.get(id).unwrap().clone(),
                alpha: 0.8 - 0.05 * k as f64,
            })
            .collect();
        let matrix_slice = (0..n * n)
            .map(|c| if c / n == c % n { 1.0 } else { 0.123 })
            .collect();
        SynthesisRequest {
            scenario: SixCProfile::meta_case(),
            buckets: QualifierBuckets::default(),
            selected,
            matrix_slice,
            framing: Framing::builtin(framing),
            top_n: n,
            generation: GenerationConfig::default(),
        }
    }

    #[test]
    fn dominant_directive_present() {
        let p = build_prompt(&request(&["m1", "m2"], FramingKind::Dominant)).unwrap();
        assert!(p.user.contains("proactive positioning"));
        assert_eq!(p.system, GenerationConfig::default().system_message);
    }

    #[test]
    fn single_axiom_matrix_is_one_cell() {
        let p = build_prompt(&request(&["m1"], FramingKind::Minimalist)).unwrap();
        assert_eq!(matrix_section(&p.user), ["1.00"]);
    }

    #[test]
    fn sections_in_order() {
        let req = request(&["m3", "m1", "m2"], FramingKind::Contrarian);
        let p = build_prompt(&req).unwrap();
        let at = |needle: &str| p.user.find(needle).unwrap_or_else(|| panic!("{needle}"));
        let order = [
            at("Scenario:"),
            at("1. If "),
            at("2. If "),
            at("3. If "),
            at("Interference matrix (rows and columns: m3, m1, m2)"),
            at("Contrarian framing"),
            at("Do not output a list"),
        ];
        assert!(order.windows(2).all(|w| w[0] < w[1]), "{order:?}");
        assert!(p.user.contains("(activation 0.80)"));
        assert_eq!(
            matrix_section(&p.user),
            ["1.00 0.12 0.12", "0.12 1.00 0.12", "0.12 0.12 1.00"]
        );
    }

    #[test]
    fn deterministic() {
        let req = request(&["m1", "m2", "m4"], FramingKind::Dominant);
        assert_eq!(build_prompt(&req).unwrap(), build_prompt(&req).unwrap());
        assert_eq!(build_prompt(&req).unwrap().sha256().len(), 64);
    }
}

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{ActivationSet, InterferenceError, InterferenceMatrix};
use crate::embedding::{cosine, EmbedError, SemanticVector};

/// `lambda * h_i + (1 - lambda) * h_j`, elementwise.
pub fn mix(
    hi: &SemanticVector,
    hj: &SemanticVector,
    lambda: f64,
) -> Result<SemanticVector, InterferenceError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(InterferenceError::LambdaOutOfRange(lambda));
    }
    if hi.dim() != hj.dim() {
        return Err(EmbedError::DimensionMismatch {
            expected: hi.dim(),
            got: hj.dim(),
        }
        .into());
    }
    Ok(SemanticVector::new(
        hi.values()
            .iter()
            .zip(hj.values())
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    /// `lambda_ij = 0.5`.
    #[default]
    SymmetricHalf,
    /// `lambda_ij = a_i / (a_i + a_j)` over the positive parts of the
    /// activations, 0.5 when both are non-positive.
    ActivationWeighted,
}

impl LambdaRule {
    pub fn lambda(self, alpha_i: f64, alpha_j: f64) -> f64 {
        match self {
            LambdaRule::SymmetricHalf => 0.5,
            LambdaRule::ActivationWeighted => {
                let (a, b) = (alpha_i.max(0.0), alpha_j.max(0.0));
                if a + b > 0.0 {
                    a / (a + b)
                } else {
                    0.5
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixConfig {
    pub lambda_rule: LambdaRule,
    /// Cross terms with `|I_ij| < floor` are left out of the field.
    pub floor: f64,
}

impl Default for MixConfig {
    fn default() -> Self {
        Self {
            lambda_rule: LambdaRule::SymmetricHalf,
            floor: 0.0,
        }
    }
}

impl MixConfig {
    pub fn validate(&self) -> Result<(), InterferenceError> {
        if (0.0..=1.0).contains(&self.floor) {
            Ok(())
        } else {
            Err(InterferenceError::Config(format!(
                "mix floor {} is outside [0, 1]",
                self.floor
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Activation { axiom_id: String },
    Cross { i: String, j: String, lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub term: Term,
    pub weight: f64,
}

/// The composed field together with its two partial sums and the ledger of
/// terms that went into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    pub values: SemanticVector,
    pub activation_sum: SemanticVector,
    pub cross_sum: SemanticVector,
    pub contributions: Vec<Contribution>,
}

impl FieldVector {
    /// `cos(h_i, Phi)` for each supplied axiom vector, sorted descending
    /// (id tiebreak). Empty when the field is the zero vector.
    pub fn alignment(
        &self,
        ids: &[String],
        vecs: &HashMap<String, SemanticVector>,
    ) -> Result<Vec<(String, f64)>, InterferenceError> {
        if self.values.is_degenerate() {
            return Ok(Vec::new());
        }
        let mut out = ids
            .iter()
            .map(|id| {
                let h = vecs
                    .get(id)
                    .ok_or_else(|| InterferenceError::MissingVector(id.clone()))?;
                Ok((id.clone(), cosine(h, &self.values)?))
            })
            .collect::<Result<Vec<_>, InterferenceError>>()?;
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }
}

/// `Phi = sum_i alpha_i h_i + sum_{i != j, |I_ij| >= floor} I_ij mix(h_i, h_j, lambda_ij)`.
///
/// Terms are accumulated in the matrix's axiom order, so the result is
/// independent of the activation ranking.
pub fn compose_field(
    act: &ActivationSet,
    m: &InterferenceMatrix,
    vecs: &HashMap<String, SemanticVector>,
    cfg: &MixConfig,
) -> Result<FieldVector, InterferenceError> {
    cfg.validate()?;
    let act_ids: HashSet<&str> = act.entries.iter().map(|e| e.axiom_id.as_str()).collect();
    let m_ids: HashSet<&str> = m.axiom_ids.iter().map(String::as_str).collect();
    if act_ids != m_ids || act_ids.len() != act.len() {
        let mut diff: Vec<&str> = act_ids.symmetric_difference(&m_ids).copied().collect();
        diff.sort_unstable();
        return Err(InterferenceError::IdMismatch(diff.join(", ")));
    }
    if m.is_empty() {
        return Err(InterferenceError::EmptyLibrary);
    }
    let h: Vec<&SemanticVector> = m
        .axiom_ids
        .iter()
        .map(|id| {
            vecs.get(id)
                .ok_or_else(|| InterferenceError::MissingVector(id.clone()))
        })
        .collect::<Result<_, _>>()?;
    let alpha: Vec<f64> = m
        .axiom_ids
        .iter()
        .map(|id| act.alpha(id).expect("ids checked"))
        .collect();

    let dim = h[0].dim();
    let mut activation_sum = SemanticVector::zeros(dim);
    let mut cross_sum = SemanticVector::zeros(dim);
    let mut contributions = Vec::new();
    for (i, id) in m.axiom_ids.iter().enumerate() {
        activation_sum.add_scaled(h[i], alpha[i])?;
        contributions.push(Contribution {
            term: Term::Activation {
                axiom_id: id.clone(),
            },
            weight: alpha[i],
        });
    }
    for i in 0..m.len() {
        for j in 0..m.len() {
            if i == j {
                continue;
            }
            let weight = m.get(i, j);
            if weight.abs() < cfg.floor {
                continue;
            }
            let lambda = cfg.lambda_rule.lambda(alpha[i], alpha[j]);
            cross_sum.add_scaled(&mix(h[i], h[j], lambda)?, weight)?;
            contributions.push(Contribution {
                term: Term::Cross {
                    i: m.axiom_ids[i].clone(),
                    j: m.axiom_ids[j].clone(),
                    lambda,
                },
                weight,
            });
        }
    }
    let mut values = activation_sum.clone();
    values.add_scaled(&cross_sum, 1.0)?;
    Ok(FieldVector {
        values,
        activation_sum,
        cross_sum,
        contributions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::{Activation, KappaConfig, SquareMatrix};

    fn v(xs: &[f64]) -> SemanticVector {
        SemanticVector::new(xs.to_vec())
    }

    #[test]
    fn mix_examples() {
        let (a, b) = (v(&[1.0, 0.0]), v(&[0.0, 1.0]));
        assert_eq!(mix(&a, &b, 1.0).unwrap(), a);
        assert_eq!(mix(&a, &b, 0.5).unwrap().values(), &[0.5, 0.5]);
        assert_eq!(
            mix(&v(&[4.0, 0.0]), &v(&[0.0, 4.0]), 0.25)
                .unwrap()
                .values(),
            &[1.0, 3.0]
        );
        assert!(matches!(
            mix(&a, &b, 1.5),
            Err(InterferenceError::LambdaOutOfRange(_))
        ));
        assert!(mix(&a, &v(&[1.0]), 0.5).is_err());
    }

    #[test]
    fn lambda_rules() {
        assert_eq!(LambdaRule::SymmetricHalf.lambda(0.9, 0.1), 0.5);
        assert!((LambdaRule::ActivationWeighted.lambda(0.3, 0.1) - 0.75).abs() < 1e-12);
        assert_eq!(LambdaRule::ActivationWeighted.lambda(0.4, -0.2), 1.0);
        assert_eq!(LambdaRule::ActivationWeighted.lambda(-0.4, -0.2), 0.5);
        assert_eq!(LambdaRule::ActivationWeighted.lambda(0.0, 0.0), 0.5);
    }

    fn matrix(ids: &[&str], values: Vec<Vec<f64>>) -> InterferenceMatrix {
        let m = SquareMatrix::try_from(values).unwrap();
        InterferenceMatrix {
            axiom_ids: ids.iter().map(|s| s.to_string()).collect(),
            kappa: m.clone(),
            interference: m,
            scheme: KappaConfig::default(),
        }
    }

    fn activations(pairs: &[(&str, f64)]) -> ActivationSet {
        ActivationSet::new(
            "s",
            pairs
                .iter()
                .map(|(id, a)| Activation {
                    axiom_id: id.to_string(),
                    alpha: *a,
                })
                .collect(),
        )
    }

    #[test]
    fn single_axiom_field_is_the_axiom() {
        let h = v(&[0.3, -0.7, 0.2]);
        let vecs = HashMap::from([("a".to_string(), h.clone())]);
        let f = compose_field(
            &activations(&[("a", 1.0)]),
            &matrix(&["a"], vec![vec![1.0]]),
            &vecs,
            &MixConfig::default(),
        )
        .unwrap();
        assert_eq!(f.values, h);
        assert_eq!(f.contributions.len(), 1);
    }

    #[test]
    fn vanishing_weights_give_zero_field() {
        let vecs = HashMap::from([
            ("a".to_string(), v(&[1.0, 2.0])),
            ("b".to_string(), v(&[3.0, -1.0])),
        ]);
        let f = compose_field(
            &activations(&[("a", 0.0), ("b", 0.0)]),
            &matrix(&["a", "b"], vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            &vecs,
            &MixConfig::default(),
        )
        .unwrap();
        assert!(f.values.values().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn floor_prunes_cross_terms() {
        let vecs = HashMap::from([
            ("a".to_string(), v(&[1.0, 0.0])),
            ("b".to_string(), v(&[0.0, 1.0])),
        ]);
        let m = matrix(&["a", "b"], vec![vec![1.0, 0.2], vec![0.2, 1.0]]);
        let act = activations(&[("a", 0.5), ("b", 0.5)]);
        let all = compose_field(&act, &m, &vecs, &MixConfig::default()).unwrap();
        assert_eq!(all.contributions.len(), 4);
        let pruned = compose_field(
            &act,
            &m,
            &vecs,
            &MixConfig {
                floor: 0.3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(pruned.contributions.len(), 2);
        assert!(pruned.cross_sum.values().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn id_mismatch_rejected() {
        let vecs = HashMap::from([("a".to_string(), v(&[1.0]))]);
        let err = compose_field(
            &activations(&[("a", 1.0), ("b", 0.5)]),
            &matrix(&["a"], vec![vec![1.0]]),
            &vecs,
            &MixConfig::default(),
        )
        .unwrap_err();
        assert!(
            matches!(err, InterferenceError::IdMismatch(ref s) if s == "b"),
            "{err}"
        );
        let err = compose_field(
            &activations(&[("a", 1.0)]),
            &matrix(&["a"], vec![vec![1.0]]),
            &HashMap::new(),
            &MixConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, InterferenceError::MissingVector(_)));
    }
}

use serde::{Deserialize, Serialize};

use super::kappa::{kappa_action_constraint, kappa_similarity, KappaDecomposition};
use super::{AxiomView, InterferenceError, KappaConfig, KappaScheme, NegationMode};
use crate::axiom::AxiomLibrary;
use crate::embedding::{cosine, EmbeddingProvider};
use crate::format::fixed;

/// Row-major square matrix, serialized as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

impl From<SquareMatrix> for Vec<Vec<f64>> {
    fn from(m: SquareMatrix) -> Self {
        (0..m.n).map(|i| m.row(i).to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SquareMatrix {
    type Error = String;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(format!("matrix is not square ({n} rows)"));
        }
        Ok(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }
}

/// Pairwise interference among the axioms of a library, with the `kappa`
/// coefficients it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceMatrix {
    pub axiom_ids: Vec<String>,
    pub kappa: SquareMatrix,
    pub interference: SquareMatrix,
    pub scheme: KappaConfig,
}

impl InterferenceMatrix {
    pub fn len(&self) -> usize {
        self.axiom_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axiom_ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.axiom_ids.iter().position(|a| a == id)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.interference.get(i, j)
    }

    pub fn between(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.get(self.index_of(a)?, self.index_of(b)?))
    }

    /// Row-major `I` restricted to `ids`, in the order given.
    pub fn slice<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<f64>, InterferenceError> {
        let idx = ids
            .iter()
            .map(|id| {
                self.index_of(id.as_ref())
                    .ok_or_else(|| InterferenceError::MissingVector(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect())
    }

    /// Violations of the structural invariants for this scheme, if any.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.len();
        if self.kappa.n() != n || self.interference.n() != n {
            return Err("matrix size does not match id list".into());
        }
        for (name, m) in [("kappa", &self.kappa), ("interference", &self.interference)] {
            let asym = m.max_asymmetry();
            if asym >= 1e-9 {
                return Err(format!("{name} asymmetric by {asym:e}"));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let (k, v) = (self.kappa.get(i, j), self.get(i, j));
                match self.scheme.scheme {
                    KappaScheme::SimilarityBased => {
                        if i == j && v != 1.0 {
                            return Err(format!("I[{i}][{i}] = {v}, expected 1"));
                        }
                        if i != j && !(0.0..=1.0).contains(&v) {
                            return Err(format!("I[{i}][{j}] = {v} outside [0, 1]"));
                        }
                    }
                    KappaScheme::ActionConstraint => {
                        if !(k > -1.0 && k < 1.0) {
                            return Err(format!("kappa[{i}][{j}] = {k} outside (-1, 1)"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// CSV with the axiom ids as header row and first column, cells to six
    /// decimals.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.axiom_ids.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (i, id) in self.axiom_ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(self.interference.row(i).iter().map(|v| fixed(*v, 6)));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Build `I_ij = cos(h_i, h_j) * kappa_ij` over the library, with `h`
/// embedded from `view` (full axiom text by default).
///
/// Entries are computed for `i <= j` and mirrored. Under textual negation the
/// contradiction term is not symmetric, so `kappa_ij` is the mean of both
/// directions.
pub fn build_interference_matrix(
    lib: &AxiomLibrary,
    provider: &dyn EmbeddingProvider,
    cfg: &KappaConfig,
    view: AxiomView,
) -> Result<InterferenceMatrix, InterferenceError> {
    cfg.validate()?;
    if lib.is_empty() {
        return Err(InterferenceError::EmptyLibrary);
    }
    let n = lib.len();
    let texts: Vec<String> = lib.iter().map(|a| view.text(a)).collect();
    let h = provider.batch_embed(&texts)?;
    let decompositions = match cfg.scheme {
        KappaScheme::SimilarityBased => None,
        KappaScheme::ActionConstraint => Some(
            lib.iter()
                .map(|a| KappaDecomposition::from_axiom(a, provider, cfg.negation))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };

    let mut kappa = SquareMatrix::zeros(n);
    let mut interference = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let k = match &decompositions {
                None => kappa_similarity(&h[i], &h[j], i, j)?,
                Some(d) => {
                    let forward = kappa_action_constraint(&d[i], &d[j], cfg)?;
                    if cfg.negation == NegationMode::Textual && i != j {
                        0.5 * (forward + kappa_action_constraint(&d[j], &d[i], cfg)?)
                    } else {
                        forward
                    }
                }
            };
            let similarity = if i == j { 1.0 } else { cosine(&h[i], &h[j])? };
            let v = similarity * k;
            kappa.set(i, j, k);
            kappa.set(j, i, k);
            interference.set(i, j, v);
            interference.set(j, i, v);
        }
    }
    Ok(InterferenceMatrix {
        axiom_ids: lib.ids(),
        kappa,
        interference,
        scheme: *cfg,
    })
}

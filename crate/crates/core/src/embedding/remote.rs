use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{check_text, EmbedError, EmbeddingProvider, ProviderKind, SemanticVector};

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

/// Accepts both `{"data": [{"embedding": [..], "index": i}]}` and
/// `{"embeddings": [[..], ..]}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum EmbedResponse {
    Data { data: Vec<DataItem> },
    Plain { embeddings: Vec<Vec<f64>> },
}

#[derive(Deserialize)]
struct DataItem {
    embedding: Vec<f64>,
    #[serde(default)]
    index: Option<usize>,
}

/// HTTP client for an embeddings endpoint.
pub struct RemoteEmbedder {
    endpoint: String,
    model: String,
    dimension: usize,
    api_key: Option<String>,
    timeout_secs: u64,
    // Built on first use: blocking clients must not be created on an async runtime thread.
    client: OnceLock<reqwest::blocking::Client>,
}

impl RemoteEmbedder {
    pub fn new(
        endpoint: String,
        model: String,
        dimension: usize,
        api_key: Option<String>,
        timeout_secs: u64,
    ) -> Self {
        Self {
            endpoint,
            model,
            dimension,
            api_key,
            timeout_secs,
            client: OnceLock::new(),
        }
    }

    fn client(&self) -> &reqwest::blocking::Client {
        self.client.get_or_init(|| {
            reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(self.timeout_secs))
                .build()
                .expect("http client")
        })
    }

    fn request(&self, texts: &[String]) -> Result<Vec<SemanticVector>, EmbedError> {
        let mut req = self.client().post(&self.endpoint).json(&EmbedRequest {
            model: &self.model,
            input: texts,
        });
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                EmbedError::Timeout {
                    secs: self.timeout_secs,
                }
            } else {
                EmbedError::Unreachable {
                    endpoint: self.endpoint.clone(),
                    message: e.to_string(),
                }
            }
        })?;
        let status = resp.status();
        let body = resp.text().map_err(|e| EmbedError::Decode(e.to_string()))?;
        if !status.is_success() {
            return Err(EmbedError::Http {
                status: status.as_u16(),
                body: body.chars().take(500).collect(),
            });
        }
        let parsed: EmbedResponse =
            serde_json::from_str(&body).map_err(|e| EmbedError::Decode(e.to_string()))?;
        let rows = match parsed {
            EmbedResponse::Plain { embeddings } => embeddings,
            EmbedResponse::Data { mut data } => {
                if data.iter().all(|d| d.index.is_some()) {
                    data.sort_by_key(|d| d.index);
                }
                data.into_iter().map(|d| d.embedding).collect()
            }
        };
        if rows.len() != texts.len() {
            return Err(EmbedError::Decode(format!(
                "expected {} vectors, got {}",
                texts.len(),
                rows.len()
            )));
        }
        rows.into_iter()
            .map(|values| {
                if values.len() != self.dimension {
                    return Err(EmbedError::DimensionMismatch {
                        expected: self.dimension,
                        got: values.len(),
                    });
                }
                Ok(SemanticVector::new(values))
            })
            .collect()
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn embed(&self, text: &str) -> Result<SemanticVector, EmbedError> {
        check_text(text)?;
        let mut v = self.request(&[text.to_string()])?;
        Ok(v.remove(0))
    }

    fn batch_embed(&self, texts: &[String]) -> Result<Vec<SemanticVector>, EmbedError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        for (index, t) in texts.iter().enumerate() {
            check_text(t).map_err(|e| EmbedError::Batch {
                index,
                source: Box::new(e),
            })?;
        }
        self.request(texts)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn model_name(&self) -> &str {
        &self.model
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::Remote
    }
}

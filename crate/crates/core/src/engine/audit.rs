use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{io_error, EngineConfig, EngineError};
use crate::synthesis::{SynthesisResult, TemplateSet};

/// What one command consumed and produced. For syntheses the exact prompt
/// is included, rebuilt from the request echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub id: String,
    pub timestamp: String,
    pub command: String,
    /// SHA-256 over the library fingerprint and the canonical input JSON.
    pub inputs_sha256: String,
    pub library_sha256: String,
    pub inputs: Value,
    pub config: Value,
    pub outputs: Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prompts: Vec<Value>,
}

fn synthesis_prompts(outputs: &Value, templates: &TemplateSet) -> Vec<Value> {
    let candidates: Vec<&Value> = match outputs {
        Value::Object(map) if map.contains_key("request_echo") => vec![outputs],
        Value::Object(map) => ["entangled", "baseline"]
            .iter()
            .filter_map(|k| map.get(*k))
            .collect(),
        _ => Vec::new(),
    };
    candidates
        .into_iter()
        .filter_map(|v| serde_json::from_value::<SynthesisResult>(v.clone()).ok())
        .filter_map(|r| r.request_echo.reconstruct_prompt(templates).ok())
        .filter_map(|p| serde_json::to_value(p).ok())
        .collect()
}

impl AuditRecord {
    pub fn new(
        command: &str,
        library_sha256: &str,
        inputs: &impl Serialize,
        config: &EngineConfig,
        outputs: &impl Serialize,
        templates: &TemplateSet,
    ) -> Self {
        let inputs = serde_json::to_value(inputs).unwrap_or(Value::Null);
        let outputs = serde_json::to_value(outputs).unwrap_or(Value::Null);
        let mut h = Sha256::new();
        h.update(library_sha256.as_bytes());
        h.update([0u8]);
        h.update(serde_json::to_vec(&inputs).unwrap_or_default());
        Self {
            id: uuid::Uuid::new_v4().to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            command: command.to_string(),
            inputs_sha256: hex::encode(h.finalize()),
            library_sha256: library_sha256.to_string(),
            prompts: synthesis_prompts(&outputs, templates),
            inputs,
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            outputs,
        }
    }
}

/// Write `record` as `<dir>/<timestamp>-<command>-<id>.json`.
pub fn write_audit(dir: &Path, record: &AuditRecord) -> Result<PathBuf, EngineError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let stamp: String = record
        .timestamp
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect();
    let command: String = record
        .command
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect();
    let path = dir.join(format!("{stamp}-{command}-{}.json", &record.id[..8]));
    let body = serde_json::to_string_pretty(record).expect("audit record serializes");
    std::fs::write(&path, body + "\n").map_err(|e| io_error(&path, e))?;
    Ok(path)
}

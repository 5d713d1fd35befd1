use std::path::Path;

use serde_json::Value;

use entangle_core::engine::{EngineConfig, EngineError};

/// Recursively overlay `top` onto `base`. Tables merge key by key; any
/// other value replaces.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Environment first, then the TOML file on top. Command-line flags are
/// applied by the caller afterwards.
pub fn resolve(
    file: Option<&Path>,
    env: impl Fn(&str) -> Option<String>,
) -> Result<EngineConfig, EngineError> {
    let mut cfg = EngineConfig::default();
    cfg.apply_env(env);
    let Some(path) = file else {
        return Ok(cfg);
    };
    let text = std::fs::read_to_string(path).map_err(|e| EngineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let table: toml::Table = toml::from_str(&text)
        .map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))?;
    let overlay = serde_json::to_value(table).expect("toml maps to json");

    // Keys are never serialized, so carry them over by hand.
    let embed_key = cfg.embedding.api_key.take();
    let llm_key = cfg.llm.api_key.take();
    let mut merged = serde_json::to_value(&cfg).expect("config serializes");
    merge(&mut merged, overlay);
    let mut out: EngineConfig = serde_json::from_value(merged)
        .map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))?;
    if out.embedding.api_key.is_none() {
        out.embedding.api_key = embed_key;
    }
    if out.llm.api_key.is_none() {
        out.llm.api_key = llm_key;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use entangle_core::embedding::ProviderKind;
    use entangle_core::interference::KappaScheme;

    #[test]
    fn file_overrides_env_and_keeps_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("entangle.toml");
        std::fs::write(
            &path,
            "service_bind = \"127.0.0.1:9999\"\n[kappa]\nscheme = \"action_constraint\"\n[embedding]\nkind = \"deterministic_test\"\ndimension = 64\n",
        )
        .unwrap();
        let env = |k: &str| match k {
            "ENTANGLE_EMBED_URL" => Some("http://embed".to_string()),
            "ENTANGLE_EMBED_KEY" => Some("k".to_string()),
            "ENTANGLE_BIND" => Some("0.0.0.0:1".to_string()),
            _ => None,
        };
        let cfg = resolve(Some(&path), env).unwrap();
        assert_eq!(cfg.service_bind, "127.0.0.1:9999");
        assert_eq!(cfg.kappa.scheme, KappaScheme::ActionConstraint);
        assert_eq!(cfg.kappa.alpha_cal, 2.0);
        assert_eq!(cfg.embedding.kind, ProviderKind::DeterministicTest);
        assert_eq!(cfg.embedding.dimension, 64);
        assert_eq!(cfg.embedding.endpoint.as_deref(), Some("http://embed"));
        assert_eq!(cfg.embedding.api_key.as_deref(), Some("k"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "colour = \"blue\"\n").unwrap();
        let err = resolve(Some(&path), |_| None).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }
}

use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use entangle_core::engine::{Engine, EngineConfig};
use entangle_core::scenario::SixCProfile;
use entangle_service::router;

fn cli(audit: &Path, args: &[&str]) -> Value {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_entangle"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("ENTANGLE_")) {
        cmd.env_remove(k);
    }
    let o = cmd
        .arg("--audit-dir")
        .arg(audit)
        .args(args)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

async fn http(method: &str, uri: &str, body: Option<String>) -> Value {
    let engine = Arc::new(Engine::new(EngineConfig::default()).unwrap());
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let resp = router(engine).oneshot(req).await.unwrap();
    assert!(resp.status().is_success(), "{uri}: {}", resp.status());
    serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap()
}

#[tokio::test]
async fn activate_matches_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let profile = serde_json::to_string(&SixCProfile::meta_case()).unwrap();
    let path = dir.path().join("profile.json");
    std::fs::write(&path, &profile).unwrap();
    let from_cli = cli(
        dir.path(),
        &[
            "activate",
            "--profile",
            path.to_str().unwrap(),
            "--format",
            "json",
        ],
    );
    assert_eq!(from_cli, http("POST", "/activations", Some(profile)).await);
}

#[tokio::test]
async fn matrix_matches_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let from_cli = cli(dir.path(), &["matrix", "--format", "json"]);
    assert_eq!(from_cli, http("GET", "/matrix", None).await);
    let from_cli = cli(
        dir.path(),
        &["matrix", "--format", "json", "--ids", "m2,sun_tzu_1"],
    );
    assert_eq!(
        from_cli,
        http("GET", "/matrix?ids=m2,sun_tzu_1", None).await
    );
}

#[tokio::test]
async fn evaluate_matches_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let text = "Reposition swiftly. Reframe the crisis as opportunity. Keep every move reversible.";
    let path = dir.path().join("synthesis.txt");
    std::fs::write(&path, text).unwrap();
    let from_cli = cli(
        dir.path(),
        &[
            "evaluate",
            "--synthesis",
            path.to_str().unwrap(),
            "--inputs",
            "m5,m8,clausewitz_1",
            "--label",
            "probe",
        ],
    );
    let body = json!({"synthesis": text, "inputs": ["m5", "m8", "clausewitz_1"], "label": "probe"});
    assert_eq!(
        from_cli,
        http("POST", "/evaluate", Some(body.to_string())).await
    );
}

//! Full pipeline snapshots over the bundled Meta library and profile with
//! mock providers. Set `UPDATE_GOLDEN=1` to rewrite the files.

use std::path::PathBuf;
use std::time::{Duration, Instant};

mod common;

use common::run_pipeline;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn pipeline_is_byte_stable_and_matches_golden() {
    let start = Instant::now();
    let first = run_pipeline();
    let second = run_pipeline();
    assert!(
        start.elapsed() < Duration::from_secs(1),
        "took {:?}",
        start.elapsed()
    );
    assert_eq!(first, second);

    let dir = golden_dir();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(&dir).unwrap();
        for (name, text) in &first {
            std::fs::write(dir.join(name), text).unwrap();
        }
        return;
    }
    for (name, text) in &first {
        let path = dir.join(name);
        let want = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{}: {e} (run with UPDATE_GOLDEN=1)", path.display()));
        assert_eq!(text, &want, "{name} drifted from its golden file");
    }
}

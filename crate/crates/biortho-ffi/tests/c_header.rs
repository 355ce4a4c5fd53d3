//! Compiles and runs `tests/smoke.c` against the static library, proving
//! the hand-written header matches the ABI.

use std::path::PathBuf;
use std::process::Command;

fn static_lib_path() -> Option<PathBuf> {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let mut candidates = Vec::new();
    if let Ok(dir) = std::env::var("CARGO_TARGET_DIR") {
        candidates.push(PathBuf::from(dir).join(profile));
    }
    candidates.push(manifest.join("../../target").join(profile));
    candidates
        .into_iter()
        .map(|dir| dir.join("libbiortho_ffi.a"))
        .find(|p| p.exists())
        .map(|p| p.parent().unwrap().to_path_buf())
}

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let Some(lib_dir) = static_lib_path() else {
        // The staticlib is produced by `cargo build`/`cargo test` of this
        // crate; only exotic target-dir layouts land here.
        eprintln!("skipping: libbiortho_ffi.a not found");
        return;
    };
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let out_dir = tempfile::tempdir().unwrap();
    let binary = out_dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lbiortho_ffi")
        .args(["-lm", "-pthread", "-ldl"])
        .arg("-o")
        .arg(&binary)
        .status()
        .expect("compiler invocation");
    assert!(status.success(), "C compilation failed");
    let output = Command::new(&binary).output().expect("smoke binary runs");
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(String::from_utf8_lossy(&output.stdout).contains("c smoke ok"));
}

//! Runs the `jetlift` binary against the fixture corpus.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs `jetlift args...` from the fixture directory, so file arguments are
/// bare fixture names and reports do not depend on the checkout path.
pub fn jetlift(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_jetlift"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("jetlift runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn json(run: &Run) -> serde_json::Value {
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", run.stdout))
}

/// Compares `actual` with `golden/<name>.json`; `UPDATE_GOLDEN=1` rewrites it.
pub fn golden_matches(name: &str, actual: &str) -> Result<(), String> {
    let path = fixtures().join("golden").join(format!("{name}.json"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected =
        std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!(
            "{name}: output differs from {}\n--- expected\n{expected}\n--- actual\n{actual}",
            path.display()
        ))
    }
}

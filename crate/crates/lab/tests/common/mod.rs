#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

/// A small experiment (L = 10, h = 0.2) on a bundled configuration, written
/// into `dir`; `extra` is appended verbatim.
pub fn small_experiment(dir: &Path, configuration: &str, extra: &str) -> PathBuf {
    let text = format!(
        r#"[experiment]
configuration = "{cfg}"
output = "{out}"
seed = 3

[grid]
L = 10.0
h = 0.2

[spectrum]
radii = [3.0, 6.0, 8.0]

[nodal]
truncation = 7.0
direction = 0.2

[coloring]
trials = 500
{extra}"#,
        cfg = configs_dir().join(configuration).display(),
        out = dir.join("out").display(),
    );
    let path = dir.join("experiment.toml");
    std::fs::write(&path, text).unwrap();
    path
}

//! Bundled golden scenarios.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::ScenarioError;

/// `crates/cli/golden` in the source tree.
pub fn default_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/golden"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenEntry {
    pub name: String,
    pub description: String,
    pub path: PathBuf,
}

#[derive(Deserialize)]
struct Header {
    name: String,
    #[serde(default)]
    description: String,
}

/// Every `*.json` scenario in `dir`, sorted by file name.
pub fn list_golden(dir: &Path) -> Result<Vec<GoldenEntry>, ScenarioError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(ScenarioError::io(dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).map_err(ScenarioError::io(path.display()))?;
            let header: Header = serde_json::from_str(&text).map_err(|e| ScenarioError::Json {
                line: e.line(),
                column: e.column(),
                message: format!("{}: {e}", path.display()),
            })?;
            Ok(GoldenEntry {
                name: header.name,
                description: header.description,
                path,
            })
        })
        .collect()
}

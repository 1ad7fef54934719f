//! The JSON record written next to every run's outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputEntry {
    pub path: String,
    pub role: String,
    /// `distance` or `similarity` for matrix outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Colour scale bounds of a heatmap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub artifact_version: String,
    pub subcommand: String,
    pub seed: u64,
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_file: Option<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<OutputEntry>,
    pub duration_secs: f64,
}

/// Collects outputs during a run and writes the manifest last.
pub struct Recorder {
    started: Instant,
    pub manifest: RunManifest,
    dir: PathBuf,
    stem: String,
}

impl Recorder {
    pub fn new(subcommand: &str, seed: u64, dir: &Path, stem: &str, config_file: Option<&Path>) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Recorder {
            started: Instant::now(),
            manifest: RunManifest {
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                subcommand: subcommand.to_string(),
                seed,
                params: Map::new(),
                config_file: config_file.map(|p| p.display().to_string()),
                inputs: Vec::new(),
                outputs: Vec::new(),
                duration_secs: 0.0,
            },
            dir: dir.to_path_buf(),
            stem: stem.to_string(),
        })
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.manifest.params.insert(key.to_string(), value.into());
    }

    pub fn input(&mut self, path: &Path) {
        self.manifest.inputs.push(path.display().to_string());
    }

    /// `<dir>/<stem>.<suffix>`
    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}.{suffix}", self.stem))
    }

    pub fn output(&mut self, path: &Path, role: &str, kind: Option<&str>, scale: Option<[f64; 2]>) {
        self.manifest.outputs.push(OutputEntry {
            path: path.display().to_string(),
            role: role.to_string(),
            kind: kind.map(str::to_string),
            scale,
        });
    }

    pub fn write_text(&mut self, suffix: &str, role: &str, text: &str) -> Result<PathBuf> {
        let path = self.path(suffix);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.output(&path, role, None, None);
        Ok(path)
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.manifest.duration_secs = self.started.elapsed().as_secs_f64();
        let path = self.path("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// The manifest written alongside `matrix_path`, if any output entry names it.
pub fn find_entry(matrix_path: &Path) -> Option<(RunManifest, OutputEntry)> {
    let dir = matrix_path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let target = std::fs::canonicalize(matrix_path).ok()?;
    for entry in std::fs::read_dir(dir).ok()?.flatten() {
        let p = entry.path();
        if !p.to_string_lossy().ends_with(".manifest.json") {
            continue;
        }
        let Ok(text) = std::fs::read_to_string(&p) else { continue };
        let Ok(m) = serde_json::from_str::<RunManifest>(&text) else { continue };
        let hit = m
            .outputs
            .iter()
            .find(|o| std::fs::canonicalize(&o.path).ok().as_deref() == Some(target.as_path()))
            .cloned();
        if let Some(o) = hit {
            return Some((m, o));
        }
    }
    None
}

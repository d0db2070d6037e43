//! On-disk description of a slicing run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SliceRun, SliceSpec, SlicerError};
use crate::ntparse::StreamCounters;

pub const MANIFEST_FILE: &str = "manifest.json";
/// Wall-clock data lives apart from the manifest so manifests stay reproducible.
pub const TIMINGS_FILE: &str = "timings.json";

/// One produced slice. `path` is relative to the manifest's directory and
/// absent for count-only slices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceManifest {
    pub selector: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<String>,
    pub path: Option<String>,
    pub triple_count: u64,
    pub byte_count: u64,
    /// SHA-256 of the file content, hex.
    pub checksum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    /// `slices` for plan runs, `identifiers` for labelled extraction.
    pub kind: String,
    pub input: StreamCounters,
    pub plan: Vec<SliceSpec>,
    pub slices: Vec<SliceManifest>,
    pub residual: SliceManifest,
}

impl RunManifest {
    pub fn new(kind: &str, plan: &[SliceSpec], run: &SliceRun) -> Self {
        RunManifest {
            schema_version: crate::SCHEMA_VERSION,
            kind: kind.to_owned(),
            input: run.counters,
            plan: plan.to_vec(),
            slices: run.slices.clone(),
            residual: run.residual.clone(),
        }
    }

    pub fn by_selector(&self, key: &str) -> Option<&SliceManifest> {
        self.slices.iter().find(|m| m.selector == key)
    }

    pub fn by_label(&self, label: &str) -> Option<&SliceManifest> {
        self.slices.iter().find(|m| m.label.as_deref() == Some(label))
    }

    pub fn total_triples(&self) -> u64 {
        self.slices.iter().map(|m| m.triple_count).sum::<u64>() + self.residual.triple_count
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceTiming {
    pub selector: String,
    pub expected_count: u64,
    pub write_micros: u64,
}

/// Writes `manifest.json` and `timings.json` into `dir`.
pub fn write_manifest(dir: &Path, manifest: &RunManifest, run: &SliceRun) -> Result<PathBuf, SlicerError> {
    let path = dir.join(MANIFEST_FILE);
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source| SlicerError::Sink { path, source }
    };
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(&path, json + "\n").map_err(io_err(&path))?;
    let timings: Vec<SliceTiming> = run
        .slices
        .iter()
        .zip(&run.timings)
        .map(|(m, t)| SliceTiming {
            selector: m.selector.clone(),
            expected_count: m.expected_count.unwrap_or(0),
            write_micros: t.as_micros() as u64,
        })
        .collect();
    let tpath = dir.join(TIMINGS_FILE);
    let json = serde_json::to_string_pretty(&timings).expect("timings serialize");
    std::fs::write(&tpath, json + "\n").map_err(io_err(&tpath))?;
    Ok(path)
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, SlicerError> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| SlicerError::Manifest { path: path.clone(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| SlicerError::Manifest { path, message: e.to_string() })
}

//! Bit-stable output files: CSV tables, JSON summaries and the run manifest.
//!
//! Numbers are written with at most nine significant digits using the `.`
//! decimal separator, and every CSV uses LF line endings, so identical runs
//! produce byte-identical files.

mod report;
mod trace;

pub use report::{
    cell_rows, read_grid_csv, stat_rows, write_cells_csv, write_grid_csv, write_stats_csv, CellRow, Metric, StatRow,
    GRID_COLUMNS,
};
pub use trace::{demo_summary, trace_csv, write_trace_csv, DemoSummary, PolicySummary, TRACE_COLUMNS};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Format `v` rounded to nine significant digits, in the shortest form that
/// round-trips the rounded value.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub(crate) fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Everything needed to reproduce an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sets: Option<u32>,
    /// Command options that are not part of the configuration.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    /// Full resolved configuration, as TOML text.
    pub config: String,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, sets: Option<u32>, config: String) -> Self {
        RunManifest {
            tool: "arbiter".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            sets,
            params: BTreeMap::new(),
            config,
            files: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }
}

/// Collects output files and writes the manifest last.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    manifest: RunManifest,
}

impl OutputDir {
    pub fn create(root: &Path, manifest: RunManifest) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), manifest })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes)?;
        self.manifest.files.push(FileEntry {
            name: name.into(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(path)
    }

    pub fn finish(self) -> Result<RunManifest> {
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        fs::write(self.root.join(MANIFEST_FILE), text)?;
        Ok(self.manifest)
    }
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

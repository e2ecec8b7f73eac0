//! Result files. Every CSV row carries the config hash and tool version;
//! every JSON file carries them in its metadata block.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const TOOL: &str = "topoloc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    /// Wall-clock start; the only field that differs between identical runs.
    pub created: String,
    pub config: ExperimentConfig,
    pub tables: Vec<PathBuf>,
}

impl Metadata {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Metadata {
            tool: TOOL,
            version: VERSION,
            command: command.into(),
            config_hash: config.hash(),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: config.clone(),
            tables: Vec::new(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Document<'a, T: Serialize> {
    metadata: &'a Metadata,
    #[serde(flatten)]
    body: T,
}

/// CSV table with the hash and version appended to every row.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { header: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path, meta: &Metadata) -> Result<()> {
        ensure_parent(path)?;
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        let extra = ["config_hash", "tool_version"];
        w.write_record(self.header.iter().map(String::as_str).chain(extra)).map_err(|e| csv_err(path, e))?;
        for row in &self.rows {
            let tail = [meta.config_hash.as_str(), meta.version];
            w.write_record(row.iter().map(String::as_str).chain(tail)).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

/// Shortest round-trip form; empty for a missing value.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Metadata, body: T) -> Result<()> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(&Document { metadata: meta, body }).expect("result serializes");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        _ => Ok(()),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// A CSV table; cells are already formatted.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# key: value` lines after the manifest.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    fn render(&self, manifest: &RunManifest) -> String {
        let mut out = manifest.csv_header();
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory write");
        out.push_str(std::str::from_utf8(&body).expect("utf-8 cells"));
        out
    }
}

/// One artifact in both renderings.
pub struct Artifact {
    pub kind: &'static str,
    pub json: serde_json::Value,
    pub table: Table,
}

impl Artifact {
    pub fn render(&self, manifest: &RunManifest, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = serde_json::json!({
                    "schema": format!("blockmerge/{}/v1", self.kind),
                    "manifest": manifest,
                    "result": self.json,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => self.table.render(manifest),
        }
    }
}

/// Where results go: a directory (with a manifest file beside each artifact) or stdout.
pub struct Sink {
    pub dir: Option<PathBuf>,
    pub format: Format,
}

impl Sink {
    pub fn emit(&self, manifest: &RunManifest, artifact: &Artifact) -> std::io::Result<()> {
        let text = artifact.render(manifest, self.format);
        match &self.dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(format!("{}.{}", manifest.command, self.format.extension()));
                fs::write(&path, text)?;
                let mpath = manifest_path(dir, &manifest.command);
                let mut m = serde_json::to_string_pretty(manifest).expect("serializable");
                m.push('\n');
                fs::write(&mpath, m)?;
                eprintln!("wrote {} and {}", path.display(), mpath.display());
                Ok(())
            }
            None => std::io::stdout().lock().write_all(text.as_bytes()),
        }
    }

    /// Writes a secondary CSV file next to the main artifact, or to `path` if given.
    pub fn emit_extra(&self, manifest: &RunManifest, path: &Path, table: &Table) -> std::io::Result<()> {
        let path = match (&self.dir, path.is_absolute()) {
            (Some(dir), false) => dir.join(path),
            _ => path.to_path_buf(),
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, table.render(manifest))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

pub fn manifest_path(dir: &Path, command: &str) -> PathBuf {
    dir.join(format!("{command}.manifest.json"))
}

use std::path::Path;

use serde::{Deserialize, Serialize};

pub const MANIFEST_SCHEMA: &str = "blockmerge/manifest/v1";

/// Everything needed to regenerate an output artifact.
///
/// `flags` holds the fully resolved subcommand options, defaults included.
/// The output location and job count are not recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub flags: serde_json::Value,
    pub mode: Option<String>,
    pub seeds: Vec<u64>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, flags: serde_json::Value, mode: Option<String>, seeds: Vec<u64>) -> Self {
        RunManifest {
            schema: MANIFEST_SCHEMA.to_string(),
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            flags,
            mode,
            seeds,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let m: RunManifest =
            serde_json::from_str(&text).map_err(|e| format!("{}: not a manifest: {e}", path.display()))?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(format!("unsupported manifest schema {:?}", m.schema));
        }
        Ok(m)
    }

    /// `# key: value` lines for CSV headers.
    pub fn csv_header(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema: {}\n", self.schema));
        out.push_str(&format!("# tool: {} {}\n", self.tool, self.version));
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# flags: {}\n", self.flags));
        if let Some(mode) = &self.mode {
            out.push_str(&format!("# mode: {mode}\n"));
        }
        if !self.seeds.is_empty() {
            let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
            out.push_str(&format!("# seeds: {}\n", seeds.join(",")));
        }
        out.push_str(&format!("# timestamp: {}\n", self.timestamp));
        out
    }
}

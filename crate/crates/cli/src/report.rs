//! Run reports, written as `report.txt` and `report.json` side by side.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub name: String,
    pub text: String,
    pub data: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: u64,
    pub status: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub sections: Vec<Section>,
    pub artifacts: Vec<String>,
    /// The only field that differs between identical runs.
    pub wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn new(subcommand: &str, config: String, seed: u64) -> Self {
        Self {
            tool: "lfe",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config_sha256: sha256_hex(config.as_bytes()),
            config,
            seed,
            status: "running".into(),
            exit_code: 0,
            error: None,
            sections: Vec::new(),
            artifacts: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn push<T: Serialize>(&mut self, name: &str, text: String, data: &T) {
        let data = serde_json::to_value(data).unwrap_or_else(|e| Value::String(format!("unserializable: {e}")));
        self.sections.push(Section { name: name.to_string(), text, data });
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "lfe {} {}\nstatus: {} (exit {})\nconfig sha256: {}\nseed: {:#x}\n",
            self.version, self.subcommand, self.status, self.exit_code, self.config_sha256, self.seed
        );
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        for s in &self.sections {
            out.push_str(&format!("\n== {} ==\n{}", s.name, s.text));
            if !s.text.ends_with('\n') {
                out.push('\n');
            }
        }
        if !self.artifacts.is_empty() {
            out.push_str(&format!("\nartifacts: {}\n", self.artifacts.join(", ")));
        }
        out.push_str(&format!("\nwall clock: {:.3} s\n\n== config ==\n{}", self.wall_clock_seconds, self.config));
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
        fs::write(dir.join("report.txt"), self.to_text()).map_err(io)?;
        let json = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        fs::write(dir.join("report.json"), json + "\n").map_err(io)
    }
}

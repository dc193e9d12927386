use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Sibling metadata written next to every CSV.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub seed: u64,
    pub code: Option<String>,
    pub parameters: Value,
    pub git_describe: String,
    pub outputs: Vec<String>,
    /// What the table shows, by role.
    pub target: String,
}

pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

pub struct Emitter {
    pub out: PathBuf,
    pub seed: u64,
    pub argv: Vec<String>,
}

impl Emitter {
    /// Writes `rows` (with `header`) to `<out>/<stem>.csv` and the manifest to
    /// `<out>/<stem>.manifest.json`; returns the CSV path.
    pub fn emit<R: Serialize>(
        &self,
        stem: &str,
        rows: &[R],
        code: Option<&str>,
        parameters: Value,
        target: &str,
    ) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out)?;
        let csv_path = self.out.join(format!("{stem}.csv"));
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&csv_path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        let manifest = RunManifest {
            command_line: self.argv.clone(),
            seed: self.seed,
            code: code.map(str::to_string),
            parameters,
            git_describe: git_describe(),
            outputs: vec![file_name(&csv_path)],
            target: target.to_string(),
        };
        fs::write(self.out.join(format!("{stem}.manifest.json")), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(csv_path)
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

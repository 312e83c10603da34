use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{Command, Format};

pub const OUT_DIR_VAR: &str = "GEDANKEN_OUT_DIR";
const CSV_PREFIX: &str = "# manifest: ";

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration.
    Usage(String),
    Io(std::io::Error),
    /// The run completed but an internal check failed.
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Invariant(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<gedanken_core::Error> for CliError {
    fn from(e: gedanken_core::Error) -> Self {
        match e {
            gedanken_core::Error::Io(io) => CliError::Io(io),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Value,
    pub format: Format,
    pub seed: Option<u64>,
    pub generator: Option<String>,
    pub version: String,
    /// Seconds since the epoch, taken from `SOURCE_DATE_EPOCH`.
    pub timestamp: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &Command, format: Format) -> Result<Self, CliError> {
        let tagged = serde_json::to_value(command).map_err(|e| usage(e.to_string()))?;
        let timestamp = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok());
        Ok(Self {
            subcommand: command.name().to_owned(),
            params: tagged.get("params").cloned().unwrap_or(Value::Null),
            format,
            seed: command.seed(),
            generator: command.seed().map(|_| gedanken_core::rng::GENERATOR_ID.to_owned()),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp,
        })
    }

    pub fn command(&self) -> Result<Command, CliError> {
        let tagged = serde_json::json!({ "subcommand": self.subcommand, "params": self.params });
        serde_json::from_value(tagged).map_err(|e| usage(format!("manifest does not describe a run: {e}")))
    }

    /// Reads the manifest back from a JSON or CSV output.
    pub fn extract(text: &str) -> Result<Self, CliError> {
        let bad = |e: serde_json::Error| usage(format!("no readable manifest: {e}"));
        if let Some(rest) = text.strip_prefix(CSV_PREFIX) {
            let line = rest.lines().next().unwrap_or_default();
            return serde_json::from_str(line).map_err(bad);
        }
        let doc: Value = serde_json::from_str(text).map_err(bad)?;
        serde_json::from_value(doc.get("manifest").cloned().unwrap_or(Value::Null)).map_err(bad)
    }

    pub fn csv_header(&self) -> String {
        format!("{CSV_PREFIX}{}\n", serde_json::to_string(self).expect("manifest serializes"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

pub fn check(name: impl Into<String>, passed: bool) -> Check {
    Check { name: name.into(), passed }
}

/// What a subcommand produced, before rendering.
pub struct Outcome {
    pub result: Value,
    pub csv: String,
    pub checks: Vec<Check>,
    /// Extra files requested by flags such as `--trials-csv`.
    pub side_files: Vec<(PathBuf, String)>,
}

impl Outcome {
    pub fn new(result: impl Serialize, csv: String, checks: Vec<Check>) -> Self {
        Self {
            result: serde_json::to_value(result).expect("results serialize"),
            csv,
            checks,
            side_files: Vec::new(),
        }
    }

    pub fn render(&self, manifest: &RunManifest) -> String {
        match manifest.format {
            Format::Json => {
                let doc = serde_json::json!({
                    "manifest": manifest,
                    "result": self.result,
                    "checks": self.checks,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("output serializes");
                s.push('\n');
                s
            }
            Format::Csv => manifest.csv_header() + &self.csv,
        }
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// `--out`, else the default output directory, else stdout (`None`).
pub fn destination(out: Option<&Path>, subcommand: &str, format: Format) -> Option<PathBuf> {
    if let Some(p) = out {
        return Some(p.to_path_buf());
    }
    let dir = std::env::var_os(OUT_DIR_VAR).filter(|d| !d.is_empty())?;
    Some(PathBuf::from(dir).join(format!("{subcommand}.{}", format.extension())))
}

pub fn write_to(dest: Option<&Path>, text: &str) -> Result<(), CliError> {
    match dest {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, text)?;
        }
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

//! Output files and the manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, Settings};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_FAILURE: u8 = 3;

pub enum Failure {
    Config(ConfigError),
    /// Errors from the computations.
    Numeric(surface_heights::Error),
    Io(std::io::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<surface_heights::Error> for Failure {
    fn from(e: surface_heights::Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Numeric(e.into())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Numeric(e.into())
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        use surface_heights::Error as E;
        match self {
            Failure::Config(_) | Failure::Io(_) => EXIT_CONFIG,
            Failure::Numeric(e) => match e {
                // invalid geometry or parameters
                E::Domain(_) | E::Precondition(_) | E::Topology(_) | E::Mesh(_) | E::Parse { .. } | E::Io(_) => {
                    EXIT_CONFIG
                }
                _ => EXIT_FAILURE,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_CONFIG => "config",
            _ => "numeric",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "{e}"),
            Failure::Numeric(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

/// Everything a command produces, flushed to disk as it goes.
pub struct Record {
    dir: PathBuf,
    command: String,
    config: BTreeMap<String, String>,
    config_hash: String,
    warnings: Vec<String>,
    results: BTreeMap<String, Value>,
    outputs: BTreeMap<String, String>,
    /// Names of invariants that did not hold.
    violations: Vec<String>,
}

pub fn to_json_bytes(v: &impl Serialize) -> Result<Vec<u8>, serde_json::Error> {
    // through `Value`, whose maps are sorted
    let v = serde_json::to_value(v)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

impl Record {
    pub fn open(dir: &str) -> std::io::Result<Self> {
        let dir = PathBuf::from(dir);
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            command: String::new(),
            config: BTreeMap::new(),
            config_hash: String::new(),
            warnings: Vec::new(),
            results: BTreeMap::new(),
            outputs: BTreeMap::new(),
            violations: Vec::new(),
        })
    }

    pub fn begin(&mut self, command: &str, settings: &Settings) {
        self.command = command.to_string();
        self.config = settings.values().clone();
        self.config_hash = settings.hash(command);
        self.warnings = settings.warnings.clone();
    }

    pub fn result(&mut self, name: &str, value: impl Serialize) -> Result<(), Failure> {
        self.results.insert(name.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.outputs.insert(name.to_string(), format!("{:x}", Sha256::digest(bytes)));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let bytes = to_json_bytes(value)?;
        self.write(name, &bytes)
    }

    /// Records an invariant check; a failed one makes the run exit with 3.
    pub fn invariant(&mut self, name: &str, holds: bool, detail: String) {
        if !holds {
            eprintln!("invariant failed: {name}: {detail}");
            self.violations.push(format!("{name}: {detail}"));
        }
    }

    /// Writes the manifest and returns the exit code.
    pub fn finish(mut self, outcome: Result<(), Failure>) -> u8 {
        let (code, errors, partial) = match &outcome {
            Ok(()) if self.violations.is_empty() => (EXIT_OK, Vec::new(), false),
            Ok(()) => (EXIT_FAILURE, Vec::new(), false),
            Err(f) => {
                eprintln!("error: {f}");
                (f.exit_code(), vec![json!({"kind": f.kind(), "message": f.to_string()})], true)
            }
        };
        let status = match code {
            EXIT_OK => "ok",
            EXIT_CONFIG => "config_error",
            _ => "failed",
        };
        let manifest = json!({
            "command": self.command,
            "config": self.config,
            "config_hash": self.config_hash,
            "versions": {
                "surface_heights": surface_heights::VERSION,
                "surface_heights_cli": env!("CARGO_PKG_VERSION"),
            },
            "status": status,
            "exit_code": code,
            "partial": partial,
            "results": self.results,
            "errors": errors,
            "invariant_failures": self.violations,
            "warnings": self.warnings,
            "outputs": self.outputs,
        });
        let written = to_json_bytes(&manifest)
            .map_err(|e| e.to_string())
            .and_then(|b| std::fs::write(self.dir.join("manifest.json"), b).map_err(|e| e.to_string()));
        if let Err(e) = written {
            eprintln!("error: cannot write manifest: {e}");
            self.violations.push("manifest".into());
            return code.max(EXIT_CONFIG);
        }
        code
    }
}

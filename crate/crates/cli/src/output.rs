//! Artifact collection, the MANIFEST and error reports.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Exit code for an unreadable or invalid graph.
pub const EXIT_INVALID_GRAPH: i32 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: 1,
            kind,
            message: message.into(),
        }
    }

    pub fn invalid_graph(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID_GRAPH,
            kind: "invalid-graph",
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", message)
    }

    pub fn report(&self) -> Value {
        json!({"error": {"kind": self.kind, "message": self.message, "exit_code": self.code}})
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<graphnls::Error> for CliError {
    fn from(e: graphnls::Error) -> Self {
        use graphnls::Error as E;
        let kind = match &e {
            E::InvalidGraph(_) => return Self::invalid_graph(e.to_string()),
            E::Parse { .. } => "parse",
            E::InvalidPoint(_) => "invalid-point",
            E::Empty(_) | E::EmptyCore => "empty",
            E::InvalidArgument(_) => "invalid-argument",
            E::Hypothesis(_) => "hypothesis",
            E::StepUnderflow { .. } | E::TooManySteps(_) => "integrator",
            E::NoSolution(_) => "no-solution",
            E::Bracket(_) => "bracket",
            E::NonCompact => "non-compact",
            E::Schema(_) => "schema",
            E::Barrier(_) => "barrier",
            E::ContinuationFailed => "continuation",
            E::InsufficientSamples(_) => "insufficient-samples",
            E::Io(_) => "io",
            _ => "numerical",
        };
        Self::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new("io", e.to_string())
    }
}

pub type CliResult = Result<Value, CliError>;

/// Global options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub out: PathBuf,
    pub dry_run: bool,
    pub gnuplot: bool,
}

impl Ctx {
    /// The plan printed by `--dry-run`.
    pub fn plan(&self, command: &str, inputs: Value, outputs: &[&str]) -> Value {
        let files: Vec<String> = outputs
            .iter()
            .map(|f| self.out.join(f).display().to_string())
            .chain(std::iter::once(self.out.join("MANIFEST").display().to_string()))
            .collect();
        json!({"dry_run": true, "command": command, "inputs": inputs, "outputs": files})
    }

    pub fn artifacts(&self) -> Artifacts {
        Artifacts {
            dir: self.out.clone(),
            files: Vec::new(),
        }
    }
}

/// Files produced by one command, kept in memory and written in one pass.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.retain(|(n, _)| n != name);
        self.files.push((name.to_string(), bytes));
    }

    pub fn csv<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> graphnls::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn records<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        self.csv(name, |w| graphnls::io::write_records(rows, w))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::new("serialize", e.to_string()))?;
        text.push('\n');
        self.add(name, text.into_bytes());
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: String) {
        self.add(name, text.into_bytes());
    }

    /// Write every file and the MANIFEST. Returns `summary` with the written
    /// files attached.
    pub fn finish(mut self, mut summary: Value) -> CliResult {
        fs::create_dir_all(&self.dir)?;
        self.files.sort_by(|a, b| a.0.cmp(&b.0));
        let mut manifest = String::new();
        for (name, bytes) in &self.files {
            fs::write(self.dir.join(name), bytes)?;
            manifest.push_str(&format!("{}  {name}\n", sha256_hex(bytes)));
        }
        fs::write(self.dir.join("MANIFEST"), &manifest)?;
        if let Value::Object(map) = &mut summary {
            let names: Vec<&str> = self.files.iter().map(|f| f.0.as_str()).collect();
            map.insert("files".into(), json!(names));
            map.insert("out".into(), json!(self.dir.display().to_string()));
        }
        Ok(summary)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}


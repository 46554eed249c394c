//! Report emission: provenance headers, config hashes, table rendering and the
//! failure classes behind the exit codes.

use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code when an internal assertion or checked property fails.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit code for malformed input.
pub const EXIT_INPUT: i32 = 2;

/// Rendering of tabular outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Why a subcommand did not succeed.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Malformed or inconsistent input; exit code 2.
    Input(String),
    /// A checked property failed; exit code 1.
    Violation(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => EXIT_INPUT,
            Self::Violation(_) => EXIT_VIOLATION,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) => write!(f, "input error: {m}"),
            Self::Violation(m) => write!(f, "violation: {m}"),
        }
    }
}

impl From<expost_core::Error> for Failure {
    fn from(e: expost_core::Error) -> Self {
        use expost_core::Error as E;
        match e {
            E::Precondition(_) | E::Bracket(_) | E::UnderDetermined(_) | E::Unidentified(_) => {
                Self::Violation(e.to_string())
            }
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}

/// Lowercase hex SHA-256 of the canonical JSON text of `config`.
///
/// `serde_json` maps keep their keys sorted, so equal configs hash equally.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(config).expect("JSON values serialize");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// The subcommand, seed and config hash attached to every report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub subcommand: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(subcommand: &str, seed: u64, effective_config: &Value) -> Self {
        Self { subcommand: subcommand.to_string(), seed, config_hash: config_hash(effective_config) }
    }

    /// Comment line opening a CSV report.
    pub fn header(&self) -> String {
        format!("# subcommand={} seed={} config_hash={}", self.subcommand, self.seed, self.config_hash)
    }

    fn fields(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("subcommand".into(), json!(self.subcommand));
        m.insert("seed".into(), json!(self.seed));
        m.insert("config_hash".into(), json!(self.config_hash));
        m
    }
}

/// Rows of string cells with a fixed column list and optional `key=value` notes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), ..Self::default() }
    }

    pub fn note(&mut self, key: &str, value: impl fmt::Display) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Renders as CSV (header comment, note comments, column row, data) or as a JSON document.
    pub fn render(&self, prov: &Provenance, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = prov.header();
                out.push('\n');
                for (k, v) in &self.notes {
                    out.push_str(&format!("# {k}={v}\n"));
                }
                let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
                w.write_record(&self.columns).expect("in-memory write");
                for r in &self.rows {
                    w.write_record(r).expect("in-memory write");
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 cells"));
                out
            }
            Format::Json => {
                let mut m = prov.fields();
                let notes: Map<String, Value> = self.notes.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
                m.insert("notes".into(), Value::Object(notes));
                m.insert("columns".into(), json!(self.columns));
                m.insert("rows".into(), json!(self.rows));
                render_value(&Value::Object(m))
            }
        }
    }
}

/// Puts the provenance fields at the top level of a JSON object body.
pub fn render_json(prov: &Provenance, body: Value) -> String {
    let mut m = prov.fields();
    if let Value::Object(b) = body {
        m.extend(b);
    } else {
        m.insert("body".into(), body);
    }
    render_value(&Value::Object(m))
}

fn render_value(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// One emitted document and where it goes; `None` means standard output.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub path: Option<PathBuf>,
    pub text: String,
}

/// Everything a subcommand produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub emitted: Vec<Emitted>,
    /// Machine-readable descriptions of failed checks; any entry makes the exit code 1.
    pub violations: Vec<Value>,
    /// Short human-readable lines printed to standard error.
    pub summary: Vec<String>,
}

impl Outcome {
    pub fn emit(&mut self, path: Option<PathBuf>, text: String) {
        self.emitted.push(Emitted { path, text });
    }
}

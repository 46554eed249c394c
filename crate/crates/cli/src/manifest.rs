//! Run manifests: a JSON description of one subcommand invocation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::report::{Failure, Format, EXIT_INPUT};
use crate::{execute, Cli, Command};

/// One subcommand invocation.
///
/// `config` goes to the subcommand's structured input flag (`--scenario`, `--rep`,
/// `--family` or `--config`). `params` and `tolerances` become scalar flags and
/// `outputs` become output flags, with underscores in keys turned into hyphens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub subcommand: String,
    #[serde(default)]
    pub config: Option<String>,
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub outputs: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::Input(format!("manifest: {e}")))
    }

    /// Reads a manifest; relative config and output paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read manifest {}: {e}", path.display())))?;
        let mut m = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(c) = &m.config {
            if !c.starts_with("builtin:") && !is_keyword(&m.subcommand, c) && Path::new(c).is_relative() {
                m.config = Some(base.join(c).to_string_lossy().into_owned());
            }
        }
        for p in m.outputs.values_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(m)
    }
}

fn is_keyword(subcommand: &str, config: &str) -> bool {
    matches!((subcommand, config), ("identify", "id-small-1") | ("elicit", "default"))
}

fn config_flag(subcommand: &str) -> Result<&'static str, Failure> {
    Ok(match subcommand {
        "solve" => "--scenario",
        "identify" => "--rep",
        "elicit" => "--family",
        "tariff" | "project" | "sticky" => "--config",
        other => return Err(Failure::Input(format!("subcommand `{other}` takes no config file"))),
    })
}

fn flag(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

/// Command-line arguments equivalent to a manifest, starting with the program name.
pub fn manifest_args(m: &RunManifest) -> Result<Vec<String>, Failure> {
    let mut args = vec!["expost".to_string(), m.subcommand.clone(), "--seed".into(), m.seed.to_string()];
    if let Some(c) = &m.config {
        args.push(config_flag(&m.subcommand)?.into());
        args.push(c.clone());
    }
    for (k, v) in &m.params {
        match v {
            Value::Bool(true) => args.push(flag(k)),
            Value::Bool(false) => {}
            Value::Number(n) => args.extend([flag(k), n.to_string()]),
            Value::String(s) => args.extend([flag(k), s.clone()]),
            _ => return Err(Failure::Input(format!("parameter `{k}` must be a scalar"))),
        }
    }
    for (k, v) in &m.tolerances {
        args.extend([flag(k), v.to_string()]);
    }
    for (k, p) in &m.outputs {
        args.extend([flag(k), p.to_string_lossy().into_owned()]);
    }
    if let Some(f) = m.format {
        args.extend(["--format".into(), if f == Format::Csv { "csv" } else { "json" }.into()]);
    }
    Ok(args)
}

/// Runs a manifest and returns the exit code.
pub fn dispatch(manifest: &RunManifest) -> i32 {
    let args = match manifest_args(manifest) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("error: {}", f);
            return f.exit_code();
        }
    };
    match Cli::try_parse_from(args) {
        Ok(Cli { command: Command::Run { .. } }) => {
            eprintln!("error: a manifest cannot run another manifest");
            EXIT_INPUT
        }
        Ok(cli) => execute(&cli.command),
        Err(e) => {
            let _ = e.print();
            EXIT_INPUT
        }
    }
}

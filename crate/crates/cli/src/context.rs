use std::fmt;
use std::path::{Path, PathBuf};

use hedose_core::io::{read_text, write_text, InputDigest, Report};
use hedose_core::{Error, Fluence, ModelParams};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Cli, Units};

/// A core error plus the input it came from.
#[derive(Debug)]
pub struct Failure {
    pub error: Error,
    pub context: Option<String>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, context: None }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.context {
            Some(c) => write!(f, "{c}: {}", self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_numerical() {
            2
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.error.kind(), "message": self.to_string() }).to_string()
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for hedose_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|error| Failure { error, context: Some(what()) })
    }
}

/// Global options shared by every subcommand.
pub struct Ctx {
    pub params: ModelParams,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub units: Units,
    pub json: bool,
    inputs: Vec<PathBuf>,
}

impl Ctx {
    pub fn new(cli: &Cli) -> CliResult<Self> {
        let mut inputs = Vec::new();
        let params = match &cli.params {
            Some(path) => {
                let p = ModelParams::from_toml_str(&read_text(path)?).context(|| path.display().to_string())?;
                inputs.push(path.clone());
                p
            }
            None => ModelParams::published(),
        };
        Ok(Ctx { params, out: cli.out.clone(), seed: cli.seed, units: cli.units, json: cli.json, inputs })
    }

    /// Records a file whose digest goes into the report.
    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    /// A command-line fluence in ions/nm^2.
    pub fn fluence(&self, field: &'static str, value: f64) -> CliResult<f64> {
        let f = match self.units {
            Units::Nm2 => Fluence::new(value),
            Units::Cm2 => Fluence::from_per_cm2(value),
        };
        Ok(f.context(|| format!("--{field}"))?.per_nm2())
    }

    /// Writes the report and any extra files under `--out`, then prints.
    pub fn finish(&self, command: &str, seed: Option<u64>, outcome: Outcome) -> CliResult<()> {
        if let Some(dir) = &self.out {
            let mut inputs = Vec::new();
            for p in &self.inputs {
                inputs.push(InputDigest::of_file(p)?);
            }
            let report = Report::new(command, seed, inputs, outcome.result.clone(), outcome.warnings.clone());
            write_text(&dir.join("report.json"), &report.to_json())?;
            for (name, text) in &outcome.files {
                write_text(&dir.join(name), text)?;
            }
        }
        if self.json {
            let body = json!({ "result": outcome.result, "warnings": outcome.warnings });
            println!("{}", serde_json::to_string_pretty(&body).expect("json value serialises"));
        } else {
            for line in &outcome.summary {
                println!("{line}");
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(dir) = &self.out {
                for (name, _) in &outcome.files {
                    println!("wrote {}", dir.join(name).display());
                }
            }
        }
        Ok(())
    }
}

/// What a subcommand produced.
#[derive(Default)]
pub struct Outcome {
    pub result: Value,
    pub warnings: Vec<String>,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
    /// Extra files for `--out`, relative names.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn new(result: impl Serialize) -> Self {
        Outcome { result: serde_json::to_value(result).expect("result serialises"), ..Outcome::default() }
    }

    pub fn line(mut self, s: impl Into<String>) -> Self {
        self.summary.push(s.into());
        self
    }

    pub fn warn(mut self, w: impl IntoIterator<Item = String>) -> Self {
        self.warnings.extend(w);
        self
    }

    pub fn file(mut self, name: &str, text: String) -> Self {
        self.files.push((name.to_string(), text));
        self
    }
}

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] flatwire::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Input(_) => 2,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct ConfigRef {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: Option<ConfigRef>,
    parameters: &'a BTreeMap<String, String>,
    outputs: &'a [String],
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects the files of one run and writes its manifest.
pub struct Run {
    dir: PathBuf,
    command: &'static str,
    config: Option<(String, String)>,
    pub parameters: BTreeMap<String, String>,
    outputs: Vec<String>,
    csv_stdout: bool,
}

impl Run {
    pub fn new(dir: PathBuf, command: &'static str, csv_stdout: bool) -> CliResult<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self {
            dir,
            command,
            config: None,
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
            csv_stdout,
        })
    }

    pub fn set_config(&mut self, path: &Path, text: &str) {
        self.config = Some((path.display().to_string(), sha256_hex(text.as_bytes())));
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn csv_stdout(&self) -> bool {
        self.csv_stdout
    }

    /// Write `rows` under `header` to `name`; with `primary` the table is also
    /// echoed to stdout when CSV output was requested.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>], primary: bool) -> CliResult<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Input(format!("CSV encoding failed: {e}"));
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Input(format!("CSV encoding failed: {e}")))?;
        std::fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;
        if primary && self.csv_stdout {
            std::io::stdout().write_all(&bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn finish(self) -> CliResult<()> {
        let config = self.config.map(|(path, sha256)| ConfigRef { path, sha256 });
        let m = Manifest {
            tool: "flatwire",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config,
            parameters: &self.parameters,
            outputs: &self.outputs,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&m).expect("manifest serialises");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

/// Fixed-point formatting used for every CSV cell.
pub fn fx(v: f64, decimals: usize) -> String {
    format!("{v:.decimals$}")
}

/// Scientific formatting with a fixed number of significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.9e}")
}

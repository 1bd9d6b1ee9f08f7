//! Output files, run manifests and exit-code mapping.

use serde::Serialize;
use ssta_core::Error;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_CAP: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Invalid flag value; the message names the flag.
    Usage(String),
    Core(Error),
    Io(PathBuf, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(..) => EXIT_IO,
            CliError::Core(e) => match e {
                Error::Parse { .. }
                | Error::Cycle { .. }
                | Error::DuplicateEdge { .. }
                | Error::EmptyInput => EXIT_INPUT,
                Error::PathExplosion { .. } => EXIT_CAP,
                _ => EXIT_USAGE,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Provenance record written next to every command's outputs. Kept in its
/// own file so the data files carry no timestamps.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    pub timestamp: String,
    pub outputs: Vec<String>,
}

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(root.to_path_buf(), e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Writes `name` through `body`, recording it for the manifest.
    pub fn write<F>(&mut self, name: &str, body: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        let path = self.root.join(name);
        let io_err = |e| CliError::Io(path.clone(), e);
        let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
        body(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    /// Writes `{stem}_manifest.json` and lists the outputs on stdout.
    pub fn finish<P: Serialize>(
        mut self,
        command: &str,
        stem: &str,
        parameters: &P,
        seed: Option<u64>,
    ) -> CliResult<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters).expect("parameters serialize"),
            seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: self.written.clone(),
        };
        let name = format!("{stem}_manifest.json");
        self.write_json(&name, &manifest)?;
        for f in &self.written {
            println!("{}", self.root.join(f).display());
        }
        Ok(())
    }
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

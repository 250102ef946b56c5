//! Number formatting, CSV assembly and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Bumped whenever a CSV or JSON layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// `%.9g`: nine significant digits, trailing zeros dropped.
pub fn fmt_g(v: f64) -> String {
    fmt_sig(v, 9)
}

pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV text with a header row; fields never contain separators.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut csv = Self {
            text: String::new(),
        };
        csv.row(header);
        csv
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line: Vec<&str> = fields.iter().map(|f| f.as_ref()).collect();
        self.text.push_str(&line.join(","));
        self.text.push_str("\r\n");
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn unix_millis() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Everything needed to reproduce a run and verify its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: String,
    pub config: serde_json::Value,
    pub base_seed: Option<u64>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub wall_time_seconds: f64,
    pub files: Vec<FileDigest>,
}

/// Writes data files and records their digests.
pub struct Sink {
    dir: Option<PathBuf>,
    started: u128,
    files: Vec<FileDigest>,
}

impl Sink {
    /// Files land in `dir` (created if missing).
    pub fn new(dir: Option<&Path>) -> Result<Self, CliError> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            started: unix_millis(),
            files: Vec::new(),
        })
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` inside the sink directory, or at `name` itself when the
    /// sink has none.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = match &self.dir {
            Some(d) => d.join(name),
            None => PathBuf::from(name),
        };
        self.write_at(&path, contents)?;
        Ok(path)
    }

    pub fn write_at(&mut self, path: &Path, contents: &[u8]) -> Result<(), CliError> {
        fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
        let shown = match &self.dir {
            Some(d) => path.strip_prefix(d).unwrap_or(path),
            None => path,
        };
        self.files.push(FileDigest {
            path: shown.display().to_string(),
            bytes: contents.len() as u64,
            sha256: hex::encode(Sha256::digest(contents)),
        });
        Ok(())
    }

    /// Writes `manifest.json` into the sink directory, if there is one.
    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        base_seed: Option<u64>,
    ) -> Result<(), CliError> {
        let Some(dir) = self.dir else {
            return Ok(());
        };
        let finished = unix_millis();
        let manifest = RunManifest {
            tool: "greedybins",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            base_seed,
            started_unix_ms: self.started,
            finished_unix_ms: finished,
            wall_time_seconds: finished.saturating_sub(self.started) as f64 / 1000.0,
            files: self.files,
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}

//! Report envelopes and file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::serde_ext::full_precision;
use crate::simulator::GENERATOR_NAME;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub command: String,
    pub config_hash: String,
    pub crate_version: String,
    pub generator: String,
}

/// Every JSON report: metadata, the effective config and the command's result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report<T> {
    pub meta: ReportMeta,
    pub config: ExperimentConfig,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, config: &ExperimentConfig, result: T) -> Self {
        Report {
            meta: ReportMeta {
                command: command.to_string(),
                config_hash: config.hash(),
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                generator: GENERATOR_NAME.to_string(),
            },
            config: config.clone(),
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes via a sibling temp file and a rename so readers never see partial output.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(contents).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// In-memory CSV table.
pub struct Csv {
    w: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Csv { w: csv::Writer::from_writer(Vec::new()) };
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        self.w.write_record(fields.into_iter().collect::<Vec<_>>()).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.w.into_inner().expect("in-memory flush")
    }
}

pub fn num(x: f64) -> String {
    full_precision(x)
}

pub fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

/// Timestamps live here, never in the reports, so reports stay byte-reproducible.
#[derive(Debug, Serialize)]
struct RunMeta<'a> {
    command: &'a str,
    config_hash: &'a str,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    files: Vec<String>,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

pub fn write_run_meta(out: &Path, command: &str, config_hash: &str, started: u128, files: &[PathBuf]) -> Result<()> {
    let meta = RunMeta {
        command,
        config_hash,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        files: files.iter().map(|f| f.strip_prefix(out).unwrap_or(f).display().to_string()).collect(),
    };
    let mut s = serde_json::to_string_pretty(&meta).expect("run meta serializes");
    s.push('\n');
    write_atomic(&out.join("run_meta.json"), s.as_bytes())
}

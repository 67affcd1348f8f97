//! The JSON run report and atomic file output.

use std::io::Write;
use std::path::Path;

use gkh_core::theorems::TheoremReport;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 2,
            Status::Error => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub format_version: u32,
    pub library_version: &'static str,
    pub config_hash: String,
    pub config: Value,
    pub task: String,
    pub status: Status,
    pub checks: Vec<TheoremReport>,
    pub results: Value,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunReport {
    pub fn new(config: &Value, task: &str) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            library_version: gkh_core::VERSION,
            config_hash: config_hash(config),
            config: canonical(config),
            task: task.into(),
            status: Status::Pass,
            checks: Vec::new(),
            results: Value::Null,
            artifacts: Vec::new(),
            warnings: Vec::new(),
            error: None,
            timing: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// The same document with object keys sorted at every level.
pub fn canonical(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for k in keys {
                out.insert(k.clone(), canonical(&m[k]));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        other => other.clone(),
    }
}

/// SHA-256 of the compact canonical serialization, in hex.
pub fn config_hash(v: &Value) -> String {
    let bytes = serde_json::to_vec(&canonical(v)).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        FileDigest { path: path.display().to_string(), sha256: lexicorp::short_digest(bytes) }
    }
}

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub parallel: bool,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub warnings: Vec<String>,
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: "lexicorp",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            config_hash: None,
            seed: None,
            parallel: cfg!(feature = "parallel"),
            started_unix: now(),
            finished_unix: 0,
            warnings: Vec::new(),
        }
    }

    pub fn finalize(&mut self) -> String {
        self.finished_unix = now();
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// `<path>.<suffix>`, e.g. `dict.tsv.manifest.json`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

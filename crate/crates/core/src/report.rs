//! Run manifests and line-delimited reports.
//!
//! A manifest pins everything that determines simulated results: the
//! normalized command line, the full configuration, the seed and crate
//! versions. Its hash is embedded in every report record, and wall-clock
//! times live only in the manifest, so re-running a manifest reproduces the
//! report files byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.jsonl";
pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the subcommand, normalized: the seed is explicit and
    /// output flags are dropped.
    pub args: Vec<String>,
    pub config: Value,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    /// Milliseconds since the Unix epoch.
    pub started_ms: u128,
    pub finished_ms: u128,
    pub outputs: Vec<PathBuf>,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([(env!("CARGO_PKG_NAME").to_string(), env!("CARGO_PKG_VERSION").to_string())])
}

impl RunManifest {
    pub fn new(command: impl Into<String>, args: Vec<String>, config: Value, seed: u64) -> Self {
        Self {
            command: command.into(),
            args,
            config,
            seed,
            versions: versions(),
            started_ms: now_ms(),
            finished_ms: 0,
            outputs: Vec::new(),
        }
    }

    /// SHA-256 over the fields that determine results. Wall-clock times and
    /// output paths are excluded.
    pub fn hash(&self) -> String {
        let pinned = serde_json::json!({
            "command": self.command,
            "args": self.args,
            "config": self.config,
            "seed": self.seed,
            "versions": self.versions,
        });
        // serde_json maps are sorted, so this rendering is canonical
        hex::encode(Sha256::digest(pinned.to_string().as_bytes()))
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

/// Collects report records and a human summary for one run.
#[derive(Debug)]
pub struct Report {
    hash: String,
    records: Vec<Value>,
    summary: Vec<String>,
    transcript: Vec<u8>,
}

impl Report {
    pub fn new(manifest: &RunManifest) -> Self {
        Self { hash: manifest.hash(), records: Vec::new(), summary: Vec::new(), transcript: Vec::new() }
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// Append a record tagged with `kind` and the manifest hash.
    pub fn record(&mut self, kind: &str, body: Value) {
        let mut obj = match body {
            Value::Object(m) => m,
            other => {
                let mut m = serde_json::Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        obj.insert("record".into(), Value::from(kind));
        obj.insert("manifest".into(), Value::from(self.hash.clone()));
        self.records.push(Value::Object(obj));
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.summary.push(text.into());
    }

    pub fn transcript_sink(&mut self) -> &mut Vec<u8> {
        &mut self.transcript
    }

    pub fn records(&self) -> &[Value] {
        &self.records
    }

    pub fn summary(&self) -> &[String] {
        &self.summary
    }

    pub fn render_records(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn render_summary(&self) -> String {
        let mut out = self.summary.join("\n");
        out.push('\n');
        out
    }

    /// Write report, transcript, summary and manifest into `dir`.
    pub fn write_dir(&self, dir: &Path, manifest: &mut RunManifest) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut outputs = vec![dir.join(REPORT_FILE), dir.join(SUMMARY_FILE)];
        fs::write(&outputs[0], self.render_records())?;
        fs::write(&outputs[1], self.render_summary())?;
        if !self.transcript.is_empty() {
            let p = dir.join(TRANSCRIPT_FILE);
            fs::File::create(&p)?.write_all(&self.transcript)?;
            outputs.push(p);
        }
        manifest.finished_ms = now_ms();
        manifest.outputs = outputs;
        let text = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
        fs::write(dir.join(MANIFEST_FILE), text + "\n")
    }
}

/// Compare two report directories, ignoring the manifest (which holds the
/// wall-clock fields). Returns the names of files that differ.
pub fn diff_dirs(a: &Path, b: &Path) -> io::Result<Vec<String>> {
    let mut differing = Vec::new();
    for name in [REPORT_FILE, TRANSCRIPT_FILE, SUMMARY_FILE] {
        let x = fs::read(a.join(name)).ok();
        let y = fs::read(b.join(name)).ok();
        if x != y {
            differing.push(name.to_string());
        }
    }
    Ok(differing)
}

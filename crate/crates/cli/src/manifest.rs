//! One manifest per invocation: what ran, with which seed, and checksums of
//! everything it wrote.

use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    /// File path, or `-` for standard output.
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

impl OutputDigest {
    pub fn new(path: &str, data: &[u8]) -> Self {
        OutputDigest { path: path.to_string(), bytes: data.len(), sha256: format!("{:x}", Sha256::digest(data)) }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Command line as given, program name excluded.
    pub args: Vec<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub elapsed_s: f64,
    pub exit_code: i32,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(subcommand: &str, args: Vec<String>, seed: u64, threads: Option<usize>, started: DateTime<Utc>) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            args,
            seed,
            threads,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished: String::new(),
            elapsed_s: 0.0,
            exit_code: 0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self, started: DateTime<Utc>, exit_code: i32) {
        let now = Utc::now();
        self.finished = now.to_rfc3339_opts(SecondsFormat::Millis, true);
        self.elapsed_s = (now - started).num_milliseconds() as f64 / 1000.0;
        self.exit_code = exit_code;
    }

    pub fn write(&self, path: Option<&Path>) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        match path {
            Some(p) => std::fs::write(p, text + "\n"),
            None => {
                eprintln!("{}", serde_json::to_string(self).expect("manifest serializes"));
                Ok(())
            }
        }
    }
}

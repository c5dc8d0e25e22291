//! Run manifests and JSON emission.

use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    pub version: &'static str,
    pub inputs: Vec<InputDigest>,
    pub duration_ms: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects input digests while a command runs.
pub struct Run {
    command: String,
    params: Value,
    seed: u64,
    inputs: Vec<InputDigest>,
    started: Instant,
}

impl Run {
    pub fn new(command: &str, params: Value, seed: u64) -> Self {
        Run {
            command: command.into(),
            params,
            seed,
            inputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn read_input(&mut self, path: &str) -> covertime_core::Result<String> {
        let bytes = std::fs::read(path)?;
        self.inputs.push(InputDigest {
            path: path.into(),
            sha256: sha256_hex(&bytes),
        });
        String::from_utf8(bytes).map_err(|e| covertime_core::Error::Parse {
            line: 0,
            msg: format!("{path} is not UTF-8: {e}"),
        })
    }

    pub fn finish(self, result: Value) -> Value {
        let manifest = RunManifest {
            command: self.command,
            params: self.params,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            inputs: self.inputs,
            duration_ms: self.started.elapsed().as_secs_f64() * 1e3,
        };
        serde_json::json!({ "manifest": manifest, "result": result })
    }
}

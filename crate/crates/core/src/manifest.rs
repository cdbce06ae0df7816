//! Run manifests referenced by every result file.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seed: u64,
    /// sha256 of the input files in the order given.
    pub inputs_hash: String,
    /// sha256 of subcommand, config, seed and inputs hash. Timings are not
    /// hashed, so the value is a pure function of the run's inputs.
    pub hash: String,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value, seed: u64, inputs: &[&[u8]]) -> Self {
        let mut h = Sha256::new();
        for i in inputs {
            h.update((i.len() as u64).to_le_bytes());
            h.update(i);
        }
        let inputs_hash = hex::encode(h.finalize());
        let key = serde_json::json!({
            "subcommand": subcommand,
            "config": config,
            "seed": seed,
            "inputs_hash": inputs_hash,
        });
        RunManifest {
            subcommand: subcommand.to_string(),
            hash: sha256_hex(key.to_string().as_bytes()),
            config,
            seed,
            inputs_hash,
            timings: BTreeMap::new(),
        }
    }

    /// Runs `f` and records its duration under `label`.
    pub fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings.insert(label.to_string(), t.elapsed().as_secs_f64());
        out
    }
}

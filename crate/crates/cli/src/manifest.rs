use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to the outputs of every run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub wall_clock_seconds: f64,
    /// Output file name to SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest fields are plain values")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

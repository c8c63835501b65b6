//! Run manifest: config hash, versions, timing, environment and outputs.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::report::{CSV_COLUMNS, CSV_SCHEMA, JSON_SCHEMA};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionTiming {
    pub condition: String,
    pub records: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub os: &'static str,
    pub arch: &'static str,
    pub available_threads: usize,
    /// Requested with `--threads`; scans run on one thread.
    pub threads_requested: Option<usize>,
    pub cache_dir: Option<String>,
}

impl Environment {
    pub fn capture(threads_requested: Option<usize>) -> Self {
        Environment {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            available_threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            threads_requested,
            cache_dir: std::env::var(crate::cache::CACHE_ENV).ok(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact: &'static str,
    pub artifact_version: &'static str,
    pub csv_schema: &'static str,
    pub csv_columns: [&'static str; 17],
    pub json_schema: &'static str,
    pub config_path: String,
    pub config_sha256: String,
    pub scenario: String,
    pub operation: String,
    pub model: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub model_build_seconds: f64,
    pub timing: Vec<SectionTiming>,
    pub total_seconds: f64,
    pub flagged_records: usize,
    pub environment: Environment,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(config_path: String, config_bytes: &[u8]) -> Self {
        RunManifest {
            artifact: env!("CARGO_PKG_NAME"),
            artifact_version: env!("CARGO_PKG_VERSION"),
            csv_schema: CSV_SCHEMA,
            csv_columns: CSV_COLUMNS,
            json_schema: JSON_SCHEMA,
            config_path,
            config_sha256: sha256_hex(config_bytes),
            scenario: String::new(),
            operation: String::new(),
            model: String::new(),
            seed: 0,
            tolerance_scale: 1.0,
            model_build_seconds: 0.0,
            timing: Vec::new(),
            total_seconds: 0.0,
            flagged_records: 0,
            environment: Environment::capture(None),
            outputs: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}

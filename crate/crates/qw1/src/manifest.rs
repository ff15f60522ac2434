//! Run manifests tying every output file to its inputs and configuration.
//!
//! The manifest hash covers the command name, the SHA-256 of every input
//! file and the configuration record, so identical runs share a hash. Wall
//! clock times are kept only in the sidecar `<output>.manifest.json`, never in
//! the output itself, which keeps outputs byte-identical across runs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use qw1_core::digest::sha256_hex;

use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
    pub value: Value,
}

/// Reads and parses a JSON input, recording its digest.
pub fn read_input(path: &Path) -> Result<InputFile, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::input(format!("{}: malformed JSON: {e}", path.display())))?;
    Ok(InputFile {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
        value,
    })
}

#[derive(Clone, Debug)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<(String, String)>,
    pub config: Value,
    pub started_unix: f64,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(command: &str, inputs: &[&InputFile], config: Value) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs: inputs.iter().map(|i| (i.path.clone(), i.sha256.clone())).collect(),
            config,
            started_unix: now(),
        }
    }

    fn identity(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs.iter().map(|(_, h)| h.clone()).collect::<Vec<_>>(),
            "config": self.config,
        })
    }

    /// SHA-256 of the command, input digests and configuration. Input paths
    /// are excluded so that moving a file does not change the hash.
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(&self.identity()).expect("manifest serializes"))
    }

    pub fn to_value(&self, outputs: &[PathBuf]) -> Value {
        json!({
            "hash": self.hash(),
            "command": self.command,
            "inputs": self
                .inputs
                .iter()
                .map(|(p, h)| json!({"path": p, "sha256": h}))
                .collect::<Vec<_>>(),
            "config": self.config,
            "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "started_unix": self.started_unix,
            "finished_unix": now(),
        })
    }

    pub fn sidecar_path(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write_sidecar(&self, output: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(&self.to_value(&[output.to_path_buf()])).expect("manifest serializes");
        std::fs::write(Self::sidecar_path(output), text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_paths_and_time() {
        let a = InputFile {
            path: "a.json".into(),
            sha256: "00".into(),
            value: Value::Null,
        };
        let mut b = a.clone();
        b.path = "elsewhere/a.json".into();
        let m1 = RunManifest::new("w1", &[&a], json!({"tol": 1e-5}));
        let mut m2 = RunManifest::new("w1", &[&b], json!({"tol": 1e-5}));
        m2.started_unix += 10.0;
        assert_eq!(m1.hash(), m2.hash());
        let m3 = RunManifest::new("w1", &[&a], json!({"tol": 1e-6}));
        assert_ne!(m1.hash(), m3.hash());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            RunManifest::sidecar_path(Path::new("out/cert.json")),
            PathBuf::from("out/cert.json.manifest.json")
        );
    }
}

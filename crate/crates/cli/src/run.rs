//! Shared plumbing for subcommands: typed failures with stable exit codes,
//! the run manifest, config resolution, and artifact emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Exit codes: 0 ok, 2 config/usage, 3 domain error, 1 internal.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_INTERNAL: i32 = 1;

/// A command failure carrying a machine-readable code and an exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: String,
    pub message: String,
    pub exit: i32,
}

impl Failure {
    pub fn usage(code: &str, message: impl Into<String>) -> Failure {
        Failure { code: code.to_string(), message: message.into(), exit: EXIT_USAGE }
    }

    pub fn domain(code: &str, message: impl Into<String>) -> Failure {
        Failure { code: code.to_string(), message: message.into(), exit: EXIT_DOMAIN }
    }

    pub fn internal(message: impl Into<String>) -> Failure {
        Failure { code: "internal".to_string(), message: message.into(), exit: EXIT_INTERNAL }
    }

    pub fn input_not_found(path: &str) -> Failure {
        Failure::usage("input-not-found", format!("no such input: {path}"))
    }

    pub fn config_invalid(message: impl Into<String>) -> Failure {
        Failure::usage("config-invalid", message)
    }

    /// The single-line JSON printed to stderr before exiting.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.code, "message": self.message }).to_string()
    }
}

/// Record of one run: what ran, under which resolved config and seed, over
/// which inputs, producing which outputs and counters. Identical
/// (command, config, seed, inputs) yield identical counters and artifacts.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 hex digest of the resolved (defaults + overrides) config JSON.
    pub config_hash: String,
    pub seed: u64,
    pub inputs: Vec<String>,
    /// Artifact file names, relative to the output directory.
    pub outputs: Vec<String>,
    pub counters: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(command: &str, resolved_config: &str, seed: u64) -> RunManifest {
        let mut hasher = Sha256::new();
        hasher.update(resolved_config.as_bytes());
        let digest = hasher.finalize();
        let mut hash = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hash, "{byte:02x}");
        }
        RunManifest {
            command: command.to_string(),
            config_hash: hash,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            counters: BTreeMap::new(),
        }
    }

    pub fn count(&mut self, key: &str, value: u64) {
        self.counters.insert(key.to_string(), value);
    }

    pub fn to_pretty(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}

/// Parse `--config` JSON into the subcommand's typed config; absent means
/// defaults. Unknown or ill-typed fields fail with the serde field message.
pub fn parse_config<T: Default + DeserializeOwned>(raw: Option<&str>) -> Result<T, Failure> {
    match raw {
        None => Ok(T::default()),
        Some(text) => serde_json::from_str(text)
            .map_err(|e| Failure::config_invalid(format!("--config: {e}"))),
    }
}

/// The resolved-config JSON that gets hashed into the manifest.
pub fn resolved_json<T: Serialize>(config: &T) -> String {
    serde_json::to_string(config).expect("config serializes")
}

/// Require that an input path exists before handing it to a pipeline.
pub fn require_input(path: &str) -> Result<(), Failure> {
    if Path::new(path).exists() {
        Ok(())
    } else {
        Err(Failure::input_not_found(path))
    }
}

/// Write artifacts and the manifest into the output directory, or print the
/// manifest as a final stdout line when no directory was requested.
pub fn finish(
    output: Option<&PathBuf>,
    mut manifest: RunManifest,
    artifacts: &[(&str, &str)],
) -> Result<(), Failure> {
    match output {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| Failure::internal(format!("create {}: {e}", dir.display())))?;
            for (name, content) in artifacts {
                let path = dir.join(name);
                fs::write(&path, content)
                    .map_err(|e| Failure::internal(format!("write {}: {e}", path.display())))?;
                manifest.outputs.push((*name).to_string());
            }
            let path = dir.join("manifest.json");
            fs::write(&path, manifest.to_pretty())
                .map_err(|e| Failure::internal(format!("write {}: {e}", path.display())))?;
            log::info!("wrote {} artifacts to {}", artifacts.len() + 1, dir.display());
        }
        None => println!("{}", manifest.to_json_line()),
    }
    Ok(())
}

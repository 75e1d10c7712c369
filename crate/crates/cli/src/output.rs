//! Output plumbing: every artifact embeds the tool version, a hash of the
//! resolved configuration, and the seed, so identical invocations produce
//! byte-identical files and any result can be traced back to its run.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The resolved run configuration. Keys are kept sorted so serialization —
/// and therefore the config hash — is stable.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(subcommand: &str, seed: u64, format: OutputFormat) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            params: BTreeMap::new(),
            seed,
            format,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn hash(&self) -> String {
        let blob = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&blob);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Wrap a serializable result with provenance and emit it.
pub fn emit_json<T: Serialize>(config: &RunConfig, result: &T, out: Option<&Path>) -> Result<()> {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        version: &'a str,
        config_hash: String,
        seed: u64,
        config: &'a RunConfig,
        result: &'a T,
    }
    let body = serde_json::to_string_pretty(&Envelope {
        version: VERSION,
        config_hash: config.hash(),
        seed: config.seed,
        config,
        result,
    })?;
    write_out(out, &(body + "\n"))
}

/// Emit CSV rows under a provenance comment header.
pub fn emit_csv(config: &RunConfig, rows: &str, out: Option<&Path>) -> Result<()> {
    let body = format!(
        "# ivlab version={} config_hash={} seed={}\n{rows}",
        VERSION,
        config.hash(),
        config.seed
    );
    write_out(out, &body)
}

/// Resolve the output path: relative paths land in $IVLAB_OUT_DIR when set.
pub fn resolve_out(path: Option<PathBuf>) -> Option<PathBuf> {
    let path = path?;
    if path.is_absolute() {
        return Some(path);
    }
    match std::env::var_os("IVLAB_OUT_DIR") {
        Some(dir) => Some(PathBuf::from(dir).join(path)),
        None => Some(path),
    }
}

fn write_out(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .with_context(|| format!("creating {}", parent.display()))?;
                }
            }
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

//! File writers. Every file carries the format version and the SHA-256 of the
//! resolved config; the only wall-clock value is `metadata.generated_at` in JSON.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::FORMAT_VERSION;
use crate::error::CliError;

/// Hex SHA-256 of the config's compact JSON form.
pub fn config_hash<C: Serialize>(config: &C) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub struct Sink {
    dir: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, B: Serialize> {
    format: u32,
    config_hash: &'a str,
    config: &'a C,
    #[serde(flatten)]
    body: B,
    metadata: Metadata,
}

#[derive(Serialize)]
struct Metadata {
    generated_at: u64,
    version: &'static str,
}

impl Sink {
    pub fn new<C: Serialize>(dir: &Path, config: &C) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: config_hash(config),
            written: Vec::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    /// CSV with a `# format=.. config_hash=..` comment line before the header.
    pub fn csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
        let mut buf = format!("# format={FORMAT_VERSION} config_hash={}\n", self.hash).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in rows {
                w.serialize(row).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
            }
            w.flush().map_err(|e| CliError::io(&self.dir.join(name), e))?;
        }
        self.write(name, &buf)
    }

    /// JSON object: `format`, `config_hash`, `config`, the body's fields, `metadata`.
    pub fn json<C: Serialize, B: Serialize>(&mut self, name: &str, config: &C, body: B) -> Result<(), CliError> {
        let generated_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let env = Envelope {
            format: FORMAT_VERSION,
            config_hash: &self.hash,
            config,
            body,
            metadata: Metadata {
                generated_at,
                version: env!("CARGO_PKG_VERSION"),
            },
        };
        let mut bytes = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }
}

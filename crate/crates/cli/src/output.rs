use std::cell::RefCell;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::schema::{self, Row};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    /// Hashes the canonical JSON of `(command, config, seed)`.
    pub fn new(command: &str, config: &impl Serialize, seed: u64) -> CliResult<Self> {
        let canonical = serde_json::to_string(&(command, config, seed))?;
        Ok(Provenance {
            tool: "yrast",
            version: VERSION,
            command: command.to_owned(),
            config_sha256: sha256(canonical.as_bytes()),
            seed,
        })
    }

    pub fn header(&self) -> String {
        format!(
            "# {} {}\n# command {}\n# config_sha256 {}\n# seed {}\n",
            self.tool, self.version, self.command, self.config_sha256, self.seed
        )
    }
}

pub fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    /// CSV columns, or `["json"]`.
    pub columns: Vec<String>,
    pub sha256: String,
}

/// Writes artifacts into one directory, stamping each with the provenance.
pub struct Output {
    dir: PathBuf,
    provenance: Provenance,
    written: RefCell<Vec<Artifact>>,
}

impl Output {
    pub fn new(dir: &Path, provenance: Provenance) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Output {
            dir: dir.to_path_buf(),
            provenance,
            written: RefCell::new(Vec::new()),
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn csv<T: Row>(&self, name: &str, rows: &[T]) -> CliResult<PathBuf> {
        let text = self.provenance.header() + &schema::render(rows)?;
        self.put(
            name,
            T::HEADER.iter().map(|s| s.to_string()).collect(),
            text,
        )
    }

    /// Objects gain a `provenance` field; other values are wrapped.
    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        let p = serde_json::to_value(&self.provenance)?;
        match v.as_object_mut() {
            Some(obj) => {
                obj.insert("provenance".into(), p);
            }
            None => v = serde_json::json!({ "value": v, "provenance": p }),
        }
        let text = serde_json::to_string_pretty(&v)? + "\n";
        self.put(name, vec!["json".into()], text)
    }

    fn put(&self, name: &str, columns: Vec<String>, text: String) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, &text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.written.borrow_mut().push(Artifact {
            file: name.to_owned(),
            columns,
            sha256: sha256(text.as_bytes()),
        });
        Ok(path)
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        self.written.borrow().clone()
    }
}

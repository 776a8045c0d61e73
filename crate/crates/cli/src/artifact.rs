use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Version of every JSON document and CSV header written by this tool.
pub const SCHEMA_VERSION: u32 = 1;

/// Provenance stamped on every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub schema_version: u32,
    pub manifest_sha256: String,
    pub seed: u64,
}

impl Stamp {
    pub fn of_bytes(bytes: &[u8], seed: u64) -> Self {
        Self { schema_version: SCHEMA_VERSION, manifest_sha256: sha256_hex(bytes), seed }
    }

    /// For subcommands without a manifest file the effective arguments are hashed.
    pub fn of_args<T: Serialize>(args: &T, seed: u64) -> CliResult<Self> {
        Ok(Self::of_bytes(&serde_json::to_vec(args)?, seed))
    }

    pub fn csv_header(&self) -> Vec<String> {
        vec![
            format!("schema_version={}", self.schema_version),
            format!("manifest_sha256={}", self.manifest_sha256),
            format!("seed={}", self.seed),
        ]
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with the stamp fields first.
pub fn stamped_json<T: Serialize>(stamp: &Stamp, body: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(&Stamped { stamp, body })?;
    text.push('\n');
    Ok(text)
}

/// Writes to `path`, or stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn create(path: &Path) -> CliResult<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    let f = fs::File::create(path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

pub fn ensure_dir(dir: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn stamp_leads_the_document() {
        #[derive(Serialize)]
        struct Body {
            value: u8,
        }
        let text = stamped_json(&Stamp::of_bytes(b"x", 7), &Body { value: 3 }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["seed"], 7);
        assert_eq!(v["value"], 3);
        assert!(text.find("schema_version").unwrap() < text.find("value").unwrap());
    }
}

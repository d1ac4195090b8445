//! Run manifests: the parsed command, seeds and hashes of every input and
//! output, enough to replay a run and check it byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::Cli;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub command: Cli,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileHash>,
    /// Output files, relative to the output directory.
    pub outputs: Vec<FileHash>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> std::io::Result<FileHash> {
    Ok(FileHash { path: path.display().to_string(), sha256: sha256_hex(&std::fs::read(path)?) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}

//! Run manifests: what was run, when, and digests of what it wrote.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use ergofpp::ExperimentConfig;

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(name: &str, contents: &[u8]) -> Self {
        Self {
            name: name.to_string(),
            bytes: contents.len() as u64,
            sha256: hex::encode(Sha256::digest(contents)),
        }
    }
}

/// Everything needed to reproduce a run. Timestamps are the only fields that
/// differ between reruns of one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Configuration entries in file order.
    pub config_entries: Vec<(String, String)>,
    /// The configuration after defaults were applied.
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
    pub files: Vec<FileDigest>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        fs::write(dir.join("manifest.json"), s)
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        let d = FileDigest::of("x", b"");
        assert_eq!(
            d.sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(d.bytes, 0);
    }
}

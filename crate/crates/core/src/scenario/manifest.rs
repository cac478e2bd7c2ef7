//! Run manifest: plain-text `key = value` lines with an inventory of every
//! output file and its SHA-256 digest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";
const FILE_PREFIX: &str = "file.";

/// Metadata and file inventory of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    /// Ordered metadata entries (scenario, status, dt, DoFs, timings, …).
    pub entries: Vec<(String, String)>,
    /// `(path relative to the run directory, hex SHA-256)`.
    pub files: Vec<(String, String)>,
}

/// Hex SHA-256 of a file.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Hashes `dir/relative` into the inventory.
    pub fn add_file(&mut self, dir: &Path, relative: &str) -> Result<()> {
        let digest = sha256_file(&dir.join(relative))?;
        self.files.retain(|(f, _)| f != relative);
        self.files.push((relative.to_string(), digest));
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (f, d) in &self.files {
            let _ = writeln!(s, "{FILE_PREFIX}{f} = sha256:{d}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Manifest::default();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once(" = ") else {
                return Err(Error::Parse {
                    path: MANIFEST_FILE.into(),
                    line: k + 1,
                    message: format!("expected `key = value`, found {line:?}"),
                });
            };
            match (key.strip_prefix(FILE_PREFIX), value.strip_prefix("sha256:")) {
                (Some(file), Some(digest)) => m.files.push((file.to_string(), digest.to_string())),
                _ => m.entries.push((key.to_string(), value.to_string())),
            }
        }
        Ok(m)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_text()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::parse(&text)
    }

    /// Files that are missing or whose digest no longer matches.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter_map(|(f, d)| match sha256_file(&dir.join(f)) {
                Ok(actual) if &actual == d => None,
                Ok(_) => Some(format!("{f}: checksum mismatch")),
                Err(_) => Some(format!("{f}: missing")),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_input() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("abc.txt"), "abc").unwrap();
        assert_eq!(
            sha256_file(&dir.path().join("abc.txt")).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn round_trip_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.csv"), "time_s,x\n").unwrap();
        let mut m = Manifest::default();
        m.set("scenario", "demo");
        m.set("status", "running");
        m.set("status", "complete");
        m.add_file(dir.path(), "a.csv").unwrap();
        m.write(dir.path()).unwrap();
        let back = Manifest::read(dir.path()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get("status"), Some("complete"));
        assert!(back.verify(dir.path()).is_empty());
        std::fs::write(dir.path().join("a.csv"), "changed").unwrap();
        assert_eq!(back.verify(dir.path()), vec!["a.csv: checksum mismatch".to_string()]);
    }
}

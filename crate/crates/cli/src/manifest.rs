//! Provenance sidecars: `<output>.manifest`, one `key=value` per line.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    /// Starts with the tool version, the command and the hash of its
    /// canonical input description.
    pub fn new(command: &str, spec: &str) -> Self {
        let mut m = Manifest {
            entries: Vec::new(),
        };
        m.set("version", VERSION);
        m.set("command", command);
        m.set("spec_hash", sha256_hex(spec.as_bytes()));
        m
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn write_for(&self, output: &Path) -> Result<()> {
        let path = sidecar_path(output);
        std::fs::write(&path, self.render()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read_for(output: &Path) -> Result<Manifest> {
        let path = sidecar_path(output);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Ok(Manifest { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_in_insertion_order() {
        let mut m = Manifest::new("generate", "abc");
        m.set("seed", 3).set("seed", 4);
        let text = m.render();
        assert!(text.starts_with(&format!("version={VERSION}\ncommand=generate\nspec_hash=")));
        assert!(text.ends_with("seed=4\n"));
        assert_eq!(
            m.get("spec_hash").unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn sidecar_sits_next_to_output() {
        assert_eq!(
            sidecar_path(Path::new("out/data.csv")),
            PathBuf::from("out/data.csv.manifest")
        );
    }
}

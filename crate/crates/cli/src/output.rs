//! Output directory layout, atomic file writes and run manifests.

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const OUT_DIR_ENV: &str = "SOFTSENSE_OUT_DIR";

/// First 16 hex chars of the SHA-256 of the raw config file; embedded in
/// every artifact so results from different configs cannot be mixed silently.
pub fn config_hash(raw: &str) -> String {
    let digest = Sha256::digest(raw.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..16].to_string()
}

#[derive(Debug, Clone)]
pub struct OutRoot {
    pub root: PathBuf,
}

impl OutRoot {
    /// Precedence: --out flag, then the config file, then the environment,
    /// then `./softsense-out`.
    pub fn resolve(flag: Option<&Path>, from_config: Option<&Path>) -> Self {
        let root = flag
            .map(Path::to_path_buf)
            .or_else(|| from_config.map(Path::to_path_buf))
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("softsense-out"));
        Self { root }
    }

    pub fn subdir(&self, name: &str) -> Result<PathBuf> {
        let dir = self.root.join(name);
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    pub fn data(&self) -> Result<PathBuf> {
        self.subdir("data")
    }
    pub fn traces(&self) -> Result<PathBuf> {
        self.subdir("traces")
    }
    pub fn reports(&self) -> Result<PathBuf> {
        self.subdir("reports")
    }
    pub fn plots(&self) -> Result<PathBuf> {
        self.subdir("plots")
    }
}

/// Write via a temp file in the same directory plus rename, so readers never
/// observe a half-written artifact.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().context("output path has no parent")?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, &text)
}

/// What a command produced, written next to its artifacts.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn write(&self, out: &OutRoot) -> Result<()> {
        let path = out.root.join(format!("manifest_{}.json", self.command));
        std::fs::create_dir_all(&out.root)?;
        write_json(&path, self)
    }
}

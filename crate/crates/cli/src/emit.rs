//! Output directory bookkeeping: every file written through an [`Emitter`]
//! is listed with its SHA-256 in `summary.txt`.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use mqg_core::io::fmt_f64;
use sha2::{Digest, Sha256};

pub struct Emitter {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Emitter {
    pub fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Emitter { dir, files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push((name.to_owned(), hex::encode(Sha256::digest(bytes))));
        Ok(())
    }

    /// Writes `summary.txt`: the JSON block, then one `<sha256>  <file>` line
    /// per emitted file.
    pub fn finish(self, summary: &serde_json::Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(summary)?;
        text.push_str("\n\nfiles:\n");
        for (name, digest) in &self.files {
            text.push_str(&format!("{digest}  {name}\n"));
        }
        let path = self.dir.join("summary.txt");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Rows of comma-separated cells under a header.
pub fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s.into_bytes()
}

/// JSON has no infinities; write them as strings instead of `null`.
pub fn num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::json!(fmt_f64(x))
    }
}

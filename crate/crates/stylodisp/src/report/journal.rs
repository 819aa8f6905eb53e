//! Append-only run journal: one JSON object per line recording the config
//! snapshot, stage boundaries with timings, provider calls, decision flags,
//! and a checksum for every artifact written.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::RunError;

pub fn sha256_file(path: &Path) -> Result<String, RunError> {
    let bytes = std::fs::read(path)
        .map_err(|source| RunError::Io { path: path.display().to_string(), source })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub struct Journal {
    writer: BufWriter<File>,
    path: PathBuf,
    seq: u64,
    run_started: Instant,
}

impl Journal {
    pub fn create(out_dir: &Path, config_toml: &str) -> Result<Self, RunError> {
        let path = out_dir.join("journal.jsonl");
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|source| RunError::Io { path: path.display().to_string(), source })?;
        let mut journal =
            Self { writer: BufWriter::new(file), path, seq: 0, run_started: Instant::now() };
        journal.event("run", "run_start", json!({ "config_toml": config_toml }))?;
        Ok(journal)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn event(
        &mut self,
        stage: &str,
        event: &str,
        payload: serde_json::Value,
    ) -> Result<(), RunError> {
        self.seq += 1;
        let line = json!({
            "seq": self.seq,
            "elapsed_ms": self.run_started.elapsed().as_millis() as u64,
            "stage": stage,
            "event": event,
            "payload": payload,
        });
        writeln!(self.writer, "{line}")
            .and_then(|()| self.writer.flush())
            .map_err(|source| RunError::Io { path: self.path.display().to_string(), source })
    }

    /// Records an interpretation or methodology flag for the run.
    pub fn decision(&mut self, stage: &str, what: &str) -> Result<(), RunError> {
        self.event(stage, "decision", json!({ "note": what }))
    }

    /// Records an artifact with its checksum; every emitted number should be
    /// traceable to one of these entries plus the stage inputs.
    pub fn artifact(&mut self, stage: &str, path: &Path) -> Result<(), RunError> {
        let checksum = sha256_file(path)?;
        self.event(stage, "artifact", json!({ "path": path.display().to_string(), "sha256": checksum }))
    }

    pub fn serializable<T: Serialize>(
        &mut self,
        stage: &str,
        event: &str,
        value: &T,
    ) -> Result<(), RunError> {
        self.event(stage, event, serde_json::to_value(value).expect("journal values serialize"))
    }
}

/// Exclusive ownership of an output directory for the duration of a run.
/// The lock file records the owning pid and disappears on drop.
pub struct OutDirLock {
    path: PathBuf,
}

impl OutDirLock {
    pub fn acquire(out_dir: &Path) -> Result<Self, RunError> {
        std::fs::create_dir_all(out_dir)
            .map_err(|source| RunError::Io { path: out_dir.display().to_string(), source })?;
        let path = out_dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                let _ = writeln!(file, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(RunError::OutputLocked(out_dir.display().to_string()))
            }
            Err(source) => Err(RunError::Io { path: path.display().to_string(), source }),
        }
    }
}

impl Drop for OutDirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

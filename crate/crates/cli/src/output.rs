//! Artifact writing under a locked output directory.
//!
//! Csv tables start with a `#` provenance line; json artifacts wrap their
//! payload as `{"meta": ..., "data": ...}`. Wall-clock times only ever go to
//! `run_meta.json`, so everything else is reproducible byte for byte.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const LOCK_FILE: &str = ".trimeasure.lock";
pub const RUN_META: &str = "run_meta.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub version: String,
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    meta: Meta,
    data: T,
}

struct Lock(PathBuf);

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub struct Output {
    dir: PathBuf,
    config_hash: String,
    seed: Option<u64>,
    written: Vec<String>,
    _lock: Lock,
}

fn seed_text(seed: Option<u64>) -> String {
    seed.map_or_else(|| "none".to_string(), |s| s.to_string())
}

impl Output {
    pub fn open(dir: &Path, config_hash: String, seed: Option<u64>) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let lock_path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => return Err(CliError::Locked(dir.to_path_buf())),
            Err(e) => return Err(CliError::io(&lock_path, e)),
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            config_hash,
            seed,
            written: Vec::new(),
            _lock: Lock(lock_path),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn meta(&self, command: &str) -> Meta {
        Meta {
            command: command.to_string(),
            config_hash: self.config_hash.clone(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn header(&self, command: &str) -> String {
        format!(
            "# trimeasure {command} config_hash={} seed={}",
            self.config_hash,
            seed_text(self.seed)
        )
    }

    pub fn write_text(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.path(name);
        let mut f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        f.write_all(content.as_bytes()).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `table` under the provenance header; also used for toml, where
    /// the header is a comment.
    pub fn write_csv(&mut self, name: &str, command: &str, table: &str) -> Result<()> {
        let content = format!("{}\n{table}", self.header(command));
        self.write_text(name, &content)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, command: &str, data: &T) -> Result<()> {
        let envelope = Envelope {
            meta: self.meta(command),
            data,
        };
        let mut text = serde_json::to_string_pretty(&envelope).expect("artifact serializes");
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Payload of a json artifact, `None` when the file does not exist.
    pub fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<Option<T>> {
        read_artifact(&self.dir, name).map(|o| o.map(|(_, data)| data))
    }

    /// Writes the timing sidecar; the only file that differs between runs.
    pub fn write_run_meta(&mut self, command: &str, threads: usize, started: std::time::SystemTime) -> Result<()> {
        let stamp = |t: std::time::SystemTime| {
            let d = t.duration_since(std::time::UNIX_EPOCH).unwrap_or_default();
            chrono::DateTime::from_timestamp(d.as_secs() as i64, d.subsec_nanos())
                .map(|dt| dt.to_rfc3339())
                .unwrap_or_default()
        };
        let finished = std::time::SystemTime::now();
        let meta = serde_json::json!({
            "command": command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "threads": threads,
            "started": stamp(started),
            "finished": stamp(finished),
            "elapsed_seconds": finished.duration_since(started).unwrap_or_default().as_secs_f64(),
            "artifacts": self.written,
        });
        let path = self.path(RUN_META);
        fs::write(&path, format!("{meta:#}\n")).map_err(|e| CliError::io(&path, e))
    }
}

/// Reads a json artifact from `dir` without taking the lock.
pub fn read_artifact<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<Option<(Meta, T)>> {
    let path = dir.join(name);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(CliError::io(&path, e)),
    };
    let env: Envelope<T> = serde_json::from_str(&text).map_err(|e| {
        CliError::Core(trimeasure::Error::InvalidInput(format!(
            "{}: unreadable artifact: {e}",
            path.display()
        )))
    })?;
    Ok(Some((env.meta, env.data)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_excludes_second_writer_and_is_released() {
        let dir = tempfile::tempdir().unwrap();
        let a = Output::open(dir.path(), "h".into(), Some(1)).unwrap();
        assert!(matches!(
            Output::open(dir.path(), "h".into(), Some(1)),
            Err(CliError::Locked(_))
        ));
        drop(a);
        assert!(Output::open(dir.path(), "h".into(), Some(1)).is_ok());
    }

    #[test]
    fn artifacts_carry_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::open(dir.path(), "abc".into(), Some(7)).unwrap();
        out.write_csv("t.csv", "rf-cv", "a,b\n1,2\n").unwrap();
        out.write_json("t.json", "events", &vec![1, 2]).unwrap();
        let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(csv.starts_with("# trimeasure rf-cv config_hash=abc seed=7\na,b\n"));
        let (meta, data): (Meta, Vec<i32>) = read_artifact(dir.path(), "t.json").unwrap().unwrap();
        assert_eq!(meta.command, "events");
        assert_eq!(data, vec![1, 2]);
        assert!(out.read_json::<Vec<i32>>("absent.json").unwrap().is_none());
    }
}

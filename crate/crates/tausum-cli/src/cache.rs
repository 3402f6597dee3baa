//! Checkpoint-table cache for summation runs.
//!
//! Entries are keyed by a content hash over everything that affects the
//! computed values (command, kind with its parameters, x, checkpoint grid,
//! crate version) — and deliberately not over worker count or output format,
//! which cannot change values.  Each entry stores the checkpoint rows as
//! JSON, including the original run's wall-clock column, so a cache hit
//! replays the original output byte for byte.
//!
//! Writes go through a `create_new` lock file (single writer); a concurrent
//! writer simply skips persisting.  Unreadable or unparsable entries are
//! reported as a warning and recomputed.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tausum::sums::Checkpoint;

/// What a run recorded about its cache interaction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CacheNote {
    pub key: String,
    pub hit: bool,
}

/// Content hash of a serializable payload, hex-encoded.
pub fn cache_key<T: Serialize>(payload: &T) -> String {
    let bytes = serde_json::to_vec(payload).expect("cache key payloads always serialize");
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

fn entry_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

/// Load a cached checkpoint table; `None` means absent or corrupted (the
/// latter warns on stderr and the caller recomputes).
pub fn load(dir: &Path, key: &str) -> Option<Vec<Checkpoint>> {
    let path = entry_path(dir, key);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return None,
        Err(e) => {
            eprintln!("warning: unreadable cache entry {}: {e}; recomputing", path.display());
            return None;
        }
    };
    match serde_json::from_slice(&bytes) {
        Ok(rows) => Some(rows),
        Err(e) => {
            eprintln!("warning: corrupted cache entry {}: {e}; recomputing", path.display());
            None
        }
    }
}

/// Persist a checkpoint table.  Returns `false` when another writer holds
/// the lock (the entry is simply not persisted this time).
pub fn store(dir: &Path, key: &str, rows: &[Checkpoint]) -> io::Result<bool> {
    fs::create_dir_all(dir)?;
    let lock = dir.join(format!("{key}.lock"));
    match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
        Ok(_) => {}
        Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Ok(false),
        Err(e) => return Err(e),
    }
    let payload = serde_json::to_vec_pretty(rows)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let tmp = dir.join(format!("{key}.json.tmp"));
    let result = fs::write(&tmp, payload).and_then(|()| fs::rename(&tmp, entry_path(dir, key)));
    let _ = fs::remove_file(&lock);
    result.map(|()| true)
}

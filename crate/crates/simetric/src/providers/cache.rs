//! Content-addressed response cache: an append-only `key\tvalue` log with
//! an in-memory index. Values are JSON so replays are bit-identical.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub struct ResponseCache {
    path: PathBuf,
    index: RwLock<HashMap<String, String>>,
    writer: Mutex<BufWriter<File>>,
}

/// Cache key: content hash of (slot, provider id, provider version, inputs).
/// The version tag makes a provider upgrade invalidate stale entries.
pub fn cache_key(slot: &str, provider_id: &str, version: &str, inputs: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for part in [slot, provider_id, version].iter().copied().chain(inputs.iter().copied()) {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

impl ResponseCache {
    /// Open (or create) the log at `path`, loading any existing entries.
    /// Later duplicate keys win, matching append-order replay.
    pub fn open(path: &Path) -> Result<Self> {
        let mut index = HashMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if let Some((key, value)) = line.split_once('\t') {
                    index.insert(key.to_string(), value.to_string());
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(ResponseCache {
            path: path.to_path_buf(),
            index: RwLock::new(index),
            writer: Mutex::new(BufWriter::new(file)),
        })
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.index.read().unwrap().get(key).cloned()
    }

    pub fn put(&self, key: &str, value: &str) -> Result<()> {
        {
            let mut w = self.writer.lock().unwrap();
            writeln!(w, "{key}\t{value}").map_err(|e| Error::io(&self.path, e))?;
            w.flush().map_err(|e| Error::io(&self.path, e))?;
        }
        self.index
            .write()
            .unwrap()
            .insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.index.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_get_round_trip_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.log");
        let cache = ResponseCache::open(&path).unwrap();
        assert!(cache.get("k1").is_none());
        cache.put("k1", "[1.0,2.0]").unwrap();
        assert_eq!(cache.get("k1").as_deref(), Some("[1.0,2.0]"));
        drop(cache);

        let reopened = ResponseCache::open(&path).unwrap();
        assert_eq!(reopened.get("k1").as_deref(), Some("[1.0,2.0]"));
        assert_eq!(reopened.len(), 1);
    }

    #[test]
    fn last_writer_wins_on_duplicate_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.log");
        let cache = ResponseCache::open(&path).unwrap();
        cache.put("k", "old").unwrap();
        cache.put("k", "new").unwrap();
        assert_eq!(cache.get("k").as_deref(), Some("new"));
        drop(cache);
        let reopened = ResponseCache::open(&path).unwrap();
        assert_eq!(reopened.get("k").as_deref(), Some("new"));
    }

    #[test]
    fn keys_separate_slots_versions_and_inputs() {
        let base = cache_key("embed", "p", "1", &["text"]);
        assert_ne!(base, cache_key("perplexity", "p", "1", &["text"]));
        assert_ne!(base, cache_key("embed", "p", "2", &["text"]));
        assert_ne!(base, cache_key("embed", "q", "1", &["text"]));
        assert_ne!(base, cache_key("embed", "p", "1", &["other"]));
        // length framing keeps concatenations from colliding
        assert_ne!(
            cache_key("similarity", "p", "1", &["ab", "c"]),
            cache_key("similarity", "p", "1", &["a", "bc"])
        );
        assert_eq!(base, cache_key("embed", "p", "1", &["text"]));
    }
}

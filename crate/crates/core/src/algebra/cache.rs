//! Read-mostly caches for field moduli and subgroup lattices.
//!
//! Entries are content-addressed: the file name is the SHA-256 of the
//! canonical JSON of `(kind, key)`. A file that fails to parse or validate is
//! recomputed and overwritten with a warning.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use parking_lot::RwLock;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable overriding the on-disk cache directory.
pub const CACHE_DIR_ENV: &str = "DRINFELD_CACHE_DIR";

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    kind: String,
    key: serde_json::Value,
    value: serde_json::Value,
}

/// A cache entry as listed by [`Cache::inspect`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryInfo {
    pub kind: String,
    pub key: serde_json::Value,
    pub file: Option<String>,
}

#[derive(Debug, Default)]
pub struct Cache {
    dir: RwLock<Option<PathBuf>>,
    memory: RwLock<HashMap<String, Entry>>,
}

static GLOBAL: OnceLock<Cache> = OnceLock::new();

/// Process-wide cache; persisted when a directory is configured or the
/// environment variable is set.
pub fn global() -> &'static Cache {
    GLOBAL.get_or_init(|| {
        let c = Cache::default();
        if let Ok(d) = std::env::var(CACHE_DIR_ENV) {
            if !d.is_empty() {
                *c.dir.write() = Some(PathBuf::from(d));
            }
        }
        c
    })
}

fn address(kind: &str, key: &serde_json::Value) -> String {
    let canon = serde_json::to_string(&(kind, key)).expect("serializable key");
    hex::encode(Sha256::digest(canon.as_bytes()))
}

impl Cache {
    pub fn set_dir(&self, dir: Option<PathBuf>) {
        *self.dir.write() = dir;
    }

    pub fn dir(&self) -> Option<PathBuf> {
        self.dir.read().clone()
    }

    fn file_for(&self, addr: &str) -> Option<PathBuf> {
        self.dir.read().as_ref().map(|d| d.join(format!("{addr}.json")))
    }

    pub fn get_or_compute<K, V>(
        &self,
        kind: &str,
        key: &K,
        validate: impl Fn(&V) -> bool,
        compute: impl FnOnce() -> V,
    ) -> V
    where
        K: Serialize,
        V: Serialize + DeserializeOwned,
    {
        let key = serde_json::to_value(key).expect("serializable key");
        let addr = address(kind, &key);
        if let Some(e) = self.memory.read().get(&addr) {
            if let Ok(v) = serde_json::from_value::<V>(e.value.clone()) {
                return v;
            }
        }
        if let Some(path) = self.file_for(&addr) {
            if path.exists() {
                match load::<V>(&path, kind, &key) {
                    Some(v) if validate(&v) => {
                        self.remember(addr, kind, key, &v);
                        return v;
                    }
                    _ => log::warn!("corrupt cache entry {}; rebuilding", path.display()),
                }
            }
        }
        let v = compute();
        if let Some(path) = self.file_for(&addr) {
            let entry = Entry {
                kind: kind.to_string(),
                key: key.clone(),
                value: serde_json::to_value(&v).expect("serializable value"),
            };
            if let Some(parent) = path.parent() {
                let _ = fs::create_dir_all(parent);
            }
            // write-then-rename keeps concurrent readers from seeing partial files
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            if fs::write(&tmp, serde_json::to_vec(&entry).unwrap()).is_ok() {
                let _ = fs::rename(&tmp, &path);
            }
        }
        self.remember(addr, kind, key, &v);
        v
    }

    fn remember<V: Serialize>(&self, addr: String, kind: &str, key: serde_json::Value, v: &V) {
        self.memory.write().insert(
            addr,
            Entry {
                kind: kind.to_string(),
                key,
                value: serde_json::to_value(v).expect("serializable value"),
            },
        );
    }

    /// Lists entries from memory and disk, sorted by `(kind, key)`.
    pub fn inspect(&self) -> Vec<EntryInfo> {
        let mut out: HashMap<String, EntryInfo> = HashMap::new();
        for (addr, e) in self.memory.read().iter() {
            out.insert(
                addr.clone(),
                EntryInfo {
                    kind: e.kind.clone(),
                    key: e.key.clone(),
                    file: None,
                },
            );
        }
        if let Some(dir) = self.dir() {
            if let Ok(rd) = fs::read_dir(&dir) {
                for f in rd.flatten() {
                    let path = f.path();
                    if path.extension().and_then(|s| s.to_str()) != Some("json") {
                        continue;
                    }
                    let name = path.file_stem().unwrap().to_string_lossy().to_string();
                    match fs::read(&path).ok().and_then(|b| serde_json::from_slice::<Entry>(&b).ok()) {
                        Some(e) => {
                            out.insert(
                                name.clone(),
                                EntryInfo {
                                    kind: e.kind,
                                    key: e.key,
                                    file: Some(path.display().to_string()),
                                },
                            );
                        }
                        None => log::warn!("unreadable cache file {}", path.display()),
                    }
                }
            }
        }
        let mut v: Vec<EntryInfo> = out.into_values().collect();
        v.sort_by(|a, b| (&a.kind, a.key.to_string()).cmp(&(&b.kind, b.key.to_string())));
        v
    }

    /// Drops all entries, in memory and on disk. Returns the number of files removed.
    pub fn clear(&self) -> usize {
        self.memory.write().clear();
        let mut removed = 0;
        if let Some(dir) = self.dir() {
            if let Ok(rd) = fs::read_dir(&dir) {
                for f in rd.flatten() {
                    let path = f.path();
                    if path.extension().and_then(|s| s.to_str()) == Some("json")
                        && fs::remove_file(&path).is_ok()
                    {
                        removed += 1;
                    }
                }
            }
        }
        removed
    }
}

fn load<V: DeserializeOwned>(path: &Path, kind: &str, key: &serde_json::Value) -> Option<V> {
    let bytes = fs::read(path).ok()?;
    let e: Entry = serde_json::from_slice(&bytes).ok()?;
    if e.kind != kind || &e.key != key {
        return None;
    }
    serde_json::from_value(e.value).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupt_file_is_rebuilt() {
        let dir = std::env::temp_dir().join(format!("drinfeld-cache-test-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let c = Cache::default();
        c.set_dir(Some(dir.clone()));
        let v: u64 = c.get_or_compute("test", &(1, 2), |_| true, || 42);
        assert_eq!(v, 42);
        let entries = c.inspect();
        assert_eq!(entries.len(), 1);
        let file = entries[0].file.clone().unwrap();
        fs::write(&file, b"{not json").unwrap();
        let c2 = Cache::default();
        c2.set_dir(Some(dir.clone()));
        let v: u64 = c2.get_or_compute("test", &(1, 2), |_| true, || 42);
        assert_eq!(v, 42);
        assert_eq!(c2.clear(), 1);
        let _ = fs::remove_dir_all(&dir);
    }
}

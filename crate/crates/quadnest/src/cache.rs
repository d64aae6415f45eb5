//! Content-addressed artifact cache with atomic stores.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

/// Environment variable overriding the cache root.
pub const CACHE_ENV: &str = "QUADNEST_CACHE_DIR";
pub const ENGINE_VERSION: &str = concat!("quadnest-", env!("CARGO_PKG_VERSION"));
const MAGIC: &str = "quadnest-cache 1";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey {
    /// Artifact kind, e.g. "nest".
    pub kind: String,
    /// Parameter as an exact decimal or fraction.
    pub a: String,
    pub level: usize,
    /// Engine version plus anything else the artifact depends on.
    pub version: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

impl CacheKey {
    pub fn new(kind: &str, a: &str, level: usize, version: &str) -> Self {
        CacheKey { kind: kind.into(), a: a.into(), level, version: version.into() }
    }

    pub fn digest(&self) -> String {
        sha256_hex(format!("{}\n{}\n{}\n{}", self.kind, self.a, self.level, self.version).as_bytes())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lookup {
    Hit(Vec<u8>),
    Miss,
    /// The entry failed its checksum; callers treat it as a miss.
    Corrupt(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stored {
    Written,
    /// Another writer stored the key first; its entry is kept.
    AlreadyPresent,
}

#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    /// Root from the environment variable, else `configured`, else
    /// `.quadnest-cache` in the working directory.
    pub fn resolve(configured: Option<&Path>) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(p) if !p.is_empty() => Cache::new(p),
            _ => Cache::new(configured.map_or_else(|| PathBuf::from(".quadnest-cache"), Path::to_path_buf)),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        let d = key.digest();
        self.root.join(&d[..2]).join(&d)
    }

    pub fn lookup(&self, key: &CacheKey) -> io::Result<Lookup> {
        let path = self.path(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Lookup::Miss),
            Err(e) => return Err(e),
        };
        let Some(nl) = bytes.iter().position(|&b| b == b'\n') else { return Ok(Lookup::Corrupt(path)) };
        let header = String::from_utf8_lossy(&bytes[..nl]);
        let payload = &bytes[nl + 1..];
        match header.strip_prefix(MAGIC).map(str::trim) {
            Some(sum) if sum == sha256_hex(payload) => Ok(Lookup::Hit(payload.to_vec())),
            _ => Ok(Lookup::Corrupt(path)),
        }
    }

    /// Write to a temporary file in the target directory, then link it into
    /// place without replacing an existing entry.
    pub fn store(&self, key: &CacheKey, payload: &[u8]) -> io::Result<Stored> {
        let path = self.path(key);
        let dir = path.parent().expect("digest directory");
        fs::create_dir_all(dir)?;
        let mut tmp = NamedTempFile::new_in(dir)?;
        writeln!(tmp, "{MAGIC} {}", sha256_hex(payload))?;
        tmp.write_all(payload)?;
        tmp.as_file().sync_all()?;
        match tmp.persist_noclobber(&path) {
            Ok(_) => Ok(Stored::Written),
            Err(e) if e.error.kind() == io::ErrorKind::AlreadyExists => {
                // a corrupt survivor would block every later store
                if let Lookup::Corrupt(_) = self.lookup(key)? {
                    e.file.persist(&path).map_err(|e| e.error)?;
                    return Ok(Stored::Written);
                }
                Ok(Stored::AlreadyPresent)
            }
            Err(e) => Err(e.error),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_then_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let key = CacheKey::new("nest", "1.7", 3, ENGINE_VERSION);
        assert_eq!(cache.lookup(&key).unwrap(), Lookup::Miss);
        assert_eq!(cache.store(&key, b"payload\nbytes").unwrap(), Stored::Written);
        assert_eq!(cache.lookup(&key).unwrap(), Lookup::Hit(b"payload\nbytes".to_vec()));
        assert_eq!(cache.store(&key, b"other").unwrap(), Stored::AlreadyPresent);
        let bumped = CacheKey { version: "quadnest-9.9.9".into(), ..key.clone() };
        assert_eq!(cache.lookup(&bumped).unwrap(), Lookup::Miss);
    }

    #[test]
    fn corrupt_entry_is_reported_and_replaced() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let key = CacheKey::new("stats", "1.75", 2, ENGINE_VERSION);
        cache.store(&key, b"good").unwrap();
        let path = cache.path(&key);
        let mut bytes = fs::read(&path).unwrap();
        *bytes.last_mut().unwrap() ^= 1;
        fs::write(&path, bytes).unwrap();
        assert!(matches!(cache.lookup(&key).unwrap(), Lookup::Corrupt(_)));
        assert_eq!(cache.store(&key, b"good").unwrap(), Stored::Written);
        assert_eq!(cache.lookup(&key).unwrap(), Lookup::Hit(b"good".to_vec()));
    }
}

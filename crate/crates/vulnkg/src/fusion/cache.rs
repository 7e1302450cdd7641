//! Disk-backed embedding cache: binary records keyed by content hash,
//! format version 1.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{FusionError, FusionResult, TEXT_DIM};

const MAGIC: &[u8] = b"VKGEMB1\n";

/// In-memory map persisted to a single append-only file. Lookups after a
/// miss-then-fetch return the fetched vector unchanged.
#[derive(Debug, Default)]
pub struct EmbeddingCache {
    entries: BTreeMap<String, Vec<f64>>,
    path: Option<PathBuf>,
}

impl EmbeddingCache {
    pub fn in_memory() -> Self {
        EmbeddingCache::default()
    }

    /// Opens (or creates) a cache file and loads every record.
    pub fn open(path: &Path) -> FusionResult<Self> {
        let mut cache = EmbeddingCache {
            entries: BTreeMap::new(),
            path: Some(path.to_path_buf()),
        };
        if !path.exists() {
            return Ok(cache);
        }
        let mut file = fs::File::open(path).map_err(|source| FusionError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut magic = [0u8; 8];
        file.read_exact(&mut magic)
            .map_err(|_| FusionError::BadCache("missing header".into()))?;
        if magic != MAGIC {
            return Err(FusionError::BadCache("wrong magic/version".into()));
        }
        let mut key = [0u8; 64];
        loop {
            match file.read_exact(&mut key) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
                Err(source) => {
                    return Err(FusionError::Io {
                        path: path.display().to_string(),
                        source,
                    })
                }
            }
            let mut buf = vec![0u8; TEXT_DIM * 8];
            file.read_exact(&mut buf)
                .map_err(|_| FusionError::BadCache("truncated record".into()))?;
            let vector: Vec<f64> = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let key_str = String::from_utf8(key.to_vec())
                .map_err(|_| FusionError::BadCache("non-utf8 key".into()))?;
            cache.entries.insert(key_str, vector);
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&Vec<f64>> {
        self.entries.get(key)
    }

    /// Inserts and appends to the backing file when one is attached.
    pub fn put(&mut self, key: String, vector: Vec<f64>) -> FusionResult<()> {
        debug_assert_eq!(vector.len(), TEXT_DIM);
        debug_assert_eq!(key.len(), 64);
        if self.entries.contains_key(&key) {
            return Ok(());
        }
        if let Some(path) = &self.path {
            let fresh = !path.exists();
            let mut file = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|source| FusionError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            let mut write = |bytes: &[u8]| -> FusionResult<()> {
                file.write_all(bytes).map_err(|source| FusionError::Io {
                    path: path.display().to_string(),
                    source,
                })
            };
            if fresh {
                write(MAGIC)?;
            }
            write(key.as_bytes())?;
            for v in &vector {
                write(&v.to_le_bytes())?;
            }
        }
        self.entries.insert(key, vector);
        Ok(())
    }
}

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{EntailmentOracle, EntailmentQuery, OracleError, Verdict};

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    entailed: bool,
    premise_chars: usize,
}

type Slot = Arc<Mutex<Option<Verdict>>>;

/// Verdicts by query key, optionally persisted as an append-only JSONL file
/// of `{"key", "entailed", "premise_chars"}` records.
pub struct VerdictCache {
    slots: Mutex<HashMap<String, Slot>>,
    log: Option<(PathBuf, Mutex<File>)>,
}

impl VerdictCache {
    pub fn in_memory() -> Self {
        VerdictCache { slots: Mutex::new(HashMap::new()), log: None }
    }

    /// Loads existing records (first record per key wins) and appends new
    /// verdicts to the same file.
    pub fn open(path: &Path) -> Result<Self, OracleError> {
        let io = |source| OracleError::CacheIo { path: path.to_path_buf(), source };
        let mut slots = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(io)?;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord =
                    serde_json::from_str(line).map_err(|e| OracleError::CacheFormat {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                slots
                    .entry(rec.key)
                    .or_insert_with(|| Arc::new(Mutex::new(Some(Verdict::from(rec.entailed)))));
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok(VerdictCache {
            slots: Mutex::new(slots),
            log: Some((path.to_path_buf(), Mutex::new(file))),
        })
    }

    pub fn get(&self, key: &str) -> Option<Verdict> {
        let slot = self.slots.lock().unwrap().get(key).cloned()?;
        let v = *slot.lock().unwrap();
        v
    }

    pub fn len(&self) -> usize {
        let slots = self.slots.lock().unwrap();
        slots.values().filter(|s| s.lock().unwrap().is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slot(&self, key: &str) -> Slot {
        self.slots
            .lock()
            .unwrap()
            .entry(key.to_string())
            .or_default()
            .clone()
    }

    fn persist(&self, query: &EntailmentQuery, verdict: Verdict) -> Result<(), OracleError> {
        let Some((path, file)) = &self.log else {
            return Ok(());
        };
        let rec = CacheRecord {
            key: query.key.clone(),
            entailed: verdict.is_entailed(),
            premise_chars: query.premise.chars().count(),
        };
        let mut line = serde_json::to_string(&rec).expect("cache record serializes");
        line.push('\n');
        file.lock()
            .unwrap()
            .write_all(line.as_bytes())
            .map_err(|source| OracleError::CacheIo { path: path.clone(), source })
    }
}

/// Answers repeated queries from a [`VerdictCache`]. Concurrent callers
/// asking the same uncached query wait for a single backend call.
pub struct CachedOracle<O> {
    inner: O,
    cache: VerdictCache,
    backend_calls: AtomicUsize,
}

impl<O> CachedOracle<O> {
    pub fn new(inner: O, cache: VerdictCache) -> Self {
        CachedOracle { inner, cache, backend_calls: AtomicUsize::new(0) }
    }

    /// Number of queries forwarded to the wrapped oracle.
    pub fn backend_calls(&self) -> usize {
        self.backend_calls.load(Ordering::SeqCst)
    }

    pub fn cache(&self) -> &VerdictCache {
        &self.cache
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: EntailmentOracle> EntailmentOracle for CachedOracle<O> {
    fn judge(&self, query: &EntailmentQuery) -> Result<Verdict, OracleError> {
        let slot = self.cache.slot(&query.key);
        let mut guard = slot.lock().unwrap();
        if let Some(v) = *guard {
            return Ok(v);
        }
        self.backend_calls.fetch_add(1, Ordering::SeqCst);
        let v = self.inner.judge(query)?;
        self.cache.persist(query, v)?;
        *guard = Some(v);
        Ok(v)
    }
}

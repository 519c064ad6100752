//! File-backed persistence for sessions, scans and scan inventories.
//!
//! Layout under the data directory:
//!
//! ```text
//! sessions/<id>.json
//! scans/<id>.json            scan outcome
//! scans/<id>.inventory.json  inventory built from the scan, with confirmations
//! ```
//!
//! Every write goes to a uniquely named temporary file in the same directory,
//! is flushed to disk and then renamed over the target, so readers only ever
//! see a complete old or complete new document. Leftover temporaries from an
//! interrupted write are removed when the store is opened.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use camm_core::engine::{create_session, AssessmentSession};
use camm_core::inventory::{CryptoInventory, ScanOutcome};
use camm_core::model::MaturityModel;
use camm_core::EngineError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const TMP_SUFFIX: &str = ".tmp";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid id `{0}`")]
    InvalidId(String),
    #[error("session {0} not found")]
    SessionNotFound(String),
    #[error("scan {0} not found")]
    ScanNotFound(String),
    #[error("revision conflict: expected {expected}, stored revision is {current}")]
    Conflict { expected: u64, current: u64 },
    #[error("stored document {path} is unreadable: {message}")]
    Corrupt { path: String, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Inventory(#[from] camm_core::InventoryError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// Where a persist can be interrupted by a [`FaultInjector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PersistStage {
    /// Half of the document has been written to the temporary file.
    MidWrite,
    /// The temporary file is complete but not yet renamed into place.
    BeforeRename,
}

/// Test hook that can abort a persist part-way, leaving the temporary file
/// behind exactly as a crash would.
pub trait FaultInjector: Send + Sync {
    fn check(&self, stage: PersistStage) -> io::Result<()>;
}

struct NoFaults;

impl FaultInjector for NoFaults {
    fn check(&self, _: PersistStage) -> io::Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub subject: String,
    pub revision: u64,
    pub model_version: String,
}

pub struct SessionStore {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    faults: Arc<dyn FaultInjector>,
}

impl std::fmt::Debug for SessionStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionStore").field("root", &self.root).finish_non_exhaustive()
    }
}

fn valid_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty() && id.len() <= 128 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // A panic while holding a lock cannot leave a half-written file, so the
    // guarded state is still consistent.
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl SessionStore {
    /// Open (creating if needed) a store rooted at `dir` and discard any
    /// temporaries left by interrupted writes.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        Self::with_faults(dir, Arc::new(NoFaults))
    }

    pub fn with_faults(dir: impl Into<PathBuf>, faults: Arc<dyn FaultInjector>) -> Result<Self, StoreError> {
        let root = dir.into();
        for sub in ["sessions", "scans"] {
            fs::create_dir_all(root.join(sub))?;
        }
        let store = Self { root, locks: Mutex::new(HashMap::new()), faults };
        store.remove_stale_temporaries()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Delete leftover temporary files. Returns how many were removed.
    pub fn remove_stale_temporaries(&self) -> Result<usize, StoreError> {
        let mut removed = 0;
        for sub in ["sessions", "scans"] {
            for entry in fs::read_dir(self.root.join(sub))? {
                let path = entry?.path();
                if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(TMP_SUFFIX)) {
                    fs::remove_file(&path)?;
                    removed += 1;
                }
            }
        }
        Ok(removed)
    }

    pub fn session_path(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{id}.json"))
    }

    fn scan_path(&self, id: &str) -> PathBuf {
        self.root.join("scans").join(format!("{id}.json"))
    }

    fn inventory_path(&self, id: &str) -> PathBuf {
        self.root.join("scans").join(format!("{id}.inventory.json"))
    }

    fn lock_for(&self, key: &str) -> Arc<Mutex<()>> {
        lock(&self.locks).entry(key.to_string()).or_default().clone()
    }

    fn write_atomic(&self, path: &Path, contents: &str) -> Result<(), StoreError> {
        let dir = path.parent().expect("store paths have a parent");
        let name = path.file_name().and_then(|n| n.to_str()).expect("store file names are UTF-8");
        let tmp = dir.join(format!(".{name}.{}{TMP_SUFFIX}", uuid::Uuid::new_v4().simple()));
        let bytes = contents.as_bytes();
        let mut file = File::create(&tmp)?;
        let half = bytes.len() / 2;
        file.write_all(&bytes[..half])?;
        self.faults.check(PersistStage::MidWrite)?;
        file.write_all(&bytes[half..])?;
        file.sync_all()?;
        drop(file);
        self.faults.check(PersistStage::BeforeRename)?;
        fs::rename(&tmp, path)?;
        // Make the rename itself durable.
        File::open(dir)?.sync_all()?;
        Ok(())
    }

    fn read_session(&self, model: &MaturityModel, id: &str) -> Result<AssessmentSession, StoreError> {
        let path = self.session_path(id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::SessionNotFound(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        let session = AssessmentSession::from_json(&text)
            .map_err(|e| StoreError::Corrupt { path: path.display().to_string(), message: e.to_string() })?;
        session.check_against(model)?;
        if session.session_id != id {
            return Err(StoreError::Corrupt {
                path: path.display().to_string(),
                message: format!("file holds session {}", session.session_id),
            });
        }
        Ok(session)
    }

    pub fn create(&self, model: &MaturityModel, subject: &str) -> Result<AssessmentSession, StoreError> {
        let session = create_session(model, subject)?;
        self.write_atomic(&self.session_path(&session.session_id), &session.to_json())?;
        Ok(session)
    }

    /// Store an externally created session (e.g. imported from a CLI file).
    pub fn import(&self, model: &MaturityModel, session: &AssessmentSession) -> Result<(), StoreError> {
        valid_id(&session.session_id)?;
        session.check_against(model)?;
        let key = format!("session/{}", session.session_id);
        let guard = self.lock_for(&key);
        let _held = lock(&guard);
        self.write_atomic(&self.session_path(&session.session_id), &session.to_json())
    }

    pub fn load(&self, model: &MaturityModel, id: &str) -> Result<AssessmentSession, StoreError> {
        valid_id(id)?;
        self.read_session(model, id)
    }

    /// Apply `change` to the stored session if its revision still equals
    /// `expected_revision`. Writers to the same session are serialized, so of
    /// two writers holding the same revision exactly one succeeds.
    pub fn update(
        &self,
        model: &MaturityModel,
        id: &str,
        expected_revision: u64,
        change: impl FnOnce(&mut AssessmentSession) -> Result<(), EngineError>,
    ) -> Result<AssessmentSession, StoreError> {
        valid_id(id)?;
        let guard = self.lock_for(&format!("session/{id}"));
        let _held = lock(&guard);
        let mut session = self.read_session(model, id)?;
        if session.revision != expected_revision {
            return Err(StoreError::Conflict { expected: expected_revision, current: session.revision });
        }
        change(&mut session)?;
        self.write_atomic(&self.session_path(id), &session.to_json())?;
        Ok(session)
    }

    /// Sessions sorted by ID. Unreadable files are skipped.
    pub fn list(&self, model: &MaturityModel) -> Result<Vec<SessionSummary>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join("sessions"))? {
            let path = entry?.path();
            let Some(id) = path.file_name().and_then(|n| n.to_str()).and_then(|n| n.strip_suffix(".json")) else {
                continue;
            };
            if valid_id(id).is_err() {
                continue;
            }
            if let Ok(s) = self.read_session(model, id) {
                out.push(SessionSummary {
                    session_id: s.session_id,
                    subject: s.subject,
                    revision: s.revision,
                    model_version: s.model_version,
                });
            }
        }
        out.sort_by(|a, b| a.session_id.cmp(&b.session_id));
        Ok(out)
    }

    pub fn save_scan(&self, outcome: &ScanOutcome) -> Result<String, StoreError> {
        let id = uuid::Uuid::new_v4().to_string();
        self.write_atomic(&self.scan_path(&id), &camm_core::to_json_pretty(outcome))?;
        Ok(id)
    }

    pub fn load_scan(&self, id: &str) -> Result<ScanOutcome, StoreError> {
        valid_id(id)?;
        let path = self.scan_path(id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::ScanNotFound(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        serde_json::from_str(&text).map_err(|e| StoreError::Corrupt { path: path.display().to_string(), message: e.to_string() })
    }

    /// The scan's inventory, built on first access from `build` and stored.
    pub fn scan_inventory(
        &self,
        id: &str,
        build: impl FnOnce(&ScanOutcome) -> Result<CryptoInventory, StoreError>,
    ) -> Result<CryptoInventory, StoreError> {
        self.modify_inventory(id, build, |_| Ok(()))
    }

    /// Load (building if needed), modify and persist a scan's inventory.
    pub fn modify_inventory(
        &self,
        id: &str,
        build: impl FnOnce(&ScanOutcome) -> Result<CryptoInventory, StoreError>,
        change: impl FnOnce(&mut CryptoInventory) -> Result<(), StoreError>,
    ) -> Result<CryptoInventory, StoreError> {
        let scan = self.load_scan(id)?;
        let guard = self.lock_for(&format!("scan/{id}"));
        let _held = lock(&guard);
        let path = self.inventory_path(id);
        let (mut inventory, fresh) = match fs::read_to_string(&path) {
            Ok(text) => (CryptoInventory::from_json(&text)?, false),
            Err(e) if e.kind() == io::ErrorKind::NotFound => (build(&scan)?, true),
            Err(e) => return Err(e.into()),
        };
        let before = inventory.clone();
        change(&mut inventory)?;
        if fresh || inventory != before {
            self.write_atomic(&path, &inventory.to_json())?;
        }
        Ok(inventory)
    }
}

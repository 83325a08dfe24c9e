//! Revisioned task store: immutable snapshots, one serialized writer,
//! single-file persistence and change notifications.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use clinitime_core::deadline::{Completion, TaskError};
use clinitime_core::domain::TaskId;
use clinitime_core::{
    ClinicalState, EngineSettings, EntityBatch, EntityCounts, IngestError, Profession,
    TaskInstance, TimeInstant,
};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

pub const SNAPSHOT_FILE: &str = "store.json";
const EVENT_CAPACITY: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("snapshot {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("snapshot {path} is corrupt: {source}")]
    Corrupt {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// One consistent view of the store.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: ClinicalState,
    pub revision: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeKind {
    TaskValidated,
    DataIngested,
}

impl ChangeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::TaskValidated => "task-validated",
            ChangeKind::DataIngested => "data-ingested",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChangeEvent {
    #[serde(rename = "type")]
    pub kind: ChangeKind,
    pub entity_id: String,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestReceipt {
    pub batch_id: String,
    pub revision: u64,
    pub counts: EntityCounts,
    pub tasks: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct PersistedStore {
    revision: u64,
    entities: EntityBatch,
    completions: BTreeMap<TaskId, Completion>,
}

pub struct Store {
    settings: EngineSettings,
    current: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    events: broadcast::Sender<ChangeEvent>,
    path: Option<PathBuf>,
}

impl Store {
    /// A store that lives only in memory.
    pub fn in_memory(settings: EngineSettings) -> Store {
        Store::with_snapshot(settings, ClinicalState::new(), 0, None)
    }

    /// Opens (or starts) the snapshot file in `data_dir`. Tasks are
    /// regenerated from the configured rules; stored completions are
    /// re-attached by task id.
    pub fn open(settings: EngineSettings, data_dir: &Path) -> Result<Store, StoreError> {
        let path = data_dir.join(SNAPSHOT_FILE);
        let (state, revision) = match fs::read(&path) {
            Ok(bytes) => {
                let persisted: PersistedStore =
                    serde_json::from_slice(&bytes).map_err(|source| StoreError::Corrupt {
                        path: path.clone(),
                        source,
                    })?;
                let state =
                    ClinicalState::restore(persisted.entities, persisted.completions, &settings)?;
                (state, persisted.revision)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => (ClinicalState::new(), 0),
            Err(source) => return Err(StoreError::Io { path, source }),
        };
        Ok(Store::with_snapshot(settings, state, revision, Some(path)))
    }

    fn with_snapshot(
        settings: EngineSettings,
        state: ClinicalState,
        revision: u64,
        path: Option<PathBuf>,
    ) -> Store {
        let (events, _) = broadcast::channel(EVENT_CAPACITY);
        Store {
            settings,
            current: RwLock::new(Arc::new(Snapshot { state, revision })),
            writer: Mutex::new(()),
            events,
            path,
        }
    }

    pub fn settings(&self) -> &EngineSettings {
        &self.settings
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn revision(&self) -> u64 {
        self.snapshot().revision
    }

    /// Receives every event published after this call.
    pub fn subscribe(&self) -> broadcast::Receiver<ChangeEvent> {
        self.events.subscribe()
    }

    pub fn ingest(&self, batch: EntityBatch) -> Result<IngestReceipt, StoreError> {
        let _w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let base = self.snapshot();
        let (state, summary) = base.state.ingest(batch, &self.settings)?;
        let revision = base.revision + 1;
        let batch_id = format!("batch-{revision}");
        self.commit(
            Snapshot { state, revision },
            ChangeKind::DataIngested,
            batch_id.clone(),
        )?;
        Ok(IngestReceipt {
            batch_id,
            revision,
            counts: summary.counts,
            tasks: summary.tasks,
        })
    }

    pub fn validate_task(
        &self,
        id: &TaskId,
        actor: Profession,
        at: TimeInstant,
    ) -> Result<(TaskInstance, u64), StoreError> {
        let _w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let base = self.snapshot();
        let mut state = base.state.clone();
        let task = state.validate_task(id, actor, at)?;
        let revision = base.revision + 1;
        self.commit(
            Snapshot { state, revision },
            ChangeKind::TaskValidated,
            id.to_string(),
        )?;
        Ok((task, revision))
    }

    /// Persists, publishes the snapshot, then notifies. Caller holds the
    /// writer lock.
    fn commit(
        &self,
        next: Snapshot,
        kind: ChangeKind,
        entity_id: String,
    ) -> Result<(), StoreError> {
        if let Some(path) = &self.path {
            persist(path, &next)?;
        }
        let revision = next.revision;
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        tracing::info!(revision, kind = kind.as_str(), %entity_id, "store mutated");
        // no subscribers is fine
        let _ = self.events.send(ChangeEvent {
            kind,
            entity_id,
            revision,
        });
        Ok(())
    }
}

fn persist(path: &Path, snap: &Snapshot) -> Result<(), StoreError> {
    let io = |source| StoreError::Io {
        path: path.to_owned(),
        source,
    };
    let doc = PersistedStore {
        revision: snap.revision,
        entities: snap.state.to_batch(),
        completions: snap.state.completions(),
    };
    let bytes = serde_json::to_vec_pretty(&doc).expect("store document serializes");
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension("json.tmp");
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(&bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}

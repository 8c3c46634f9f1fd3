use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock, RwLockReadGuard};
use std::time::{Duration, Instant};

use matspace_core::{Dataspace, Result};
use serde_json::Value;
use tokio::sync::Notify;

use crate::ops::{execute, Action};

/// Settings of a running gateway.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ApiConfig {
    pub bind: String,
    pub data_dir: Option<PathBuf>,
    /// Ingest requests without an explicit `strict` flag use this.
    pub strict_ingest: bool,
    pub cors_origins: Vec<String>,
    /// Shared secret for mutating routes.
    pub token: Option<String>,
}

/// The dataspace behind a lock plus the trigger worker's wake-up signal.
pub struct Gateway {
    ds: RwLock<Dataspace>,
    pub config: ApiConfig,
    wake: Notify,
}

impl Gateway {
    pub fn new(ds: Dataspace, config: ApiConfig) -> Arc<Self> {
        Arc::new(Gateway { ds: RwLock::new(ds), config, wake: Notify::new() })
    }

    /// Opens the configured data directory, or an in-memory dataspace.
    pub fn open(config: ApiConfig) -> Result<Arc<Self>> {
        let ds = match &config.data_dir {
            Some(dir) => Dataspace::open(dir)?,
            None => Dataspace::new(),
        };
        Ok(Self::new(ds, config))
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Dataspace> {
        // a panic while holding the lock leaves the dataspace usable: every
        // core operation commits only after validation
        self.ds.read().unwrap_or_else(|e| e.into_inner())
    }

    /// Runs a mutation under the write lock and persists on success. Runs it
    /// may have queued are left to the worker.
    pub fn apply(&self, action: Action) -> Result<Value> {
        let wake = action.may_trigger();
        let out = {
            let mut ds = self.ds.write().unwrap_or_else(|e| e.into_inner());
            let out = execute(&mut ds, action)?;
            ds.save()?;
            out
        };
        if wake {
            self.wake.notify_one();
        }
        Ok(out)
    }

    /// Fetches the connector's catalog without holding the lock, then syncs.
    pub fn sync_connector(&self, id: &str) -> Result<Value> {
        let spec = self.read().connector(id)?.clone();
        let bytes = spec.fetch()?;
        self.apply(Action::SyncCatalog(id.to_string(), bytes))
    }

    /// Drains queued triggered runs once; returns how many ran.
    pub fn drain_once(&self) -> Result<usize> {
        let mut ds = self.ds.write().unwrap_or_else(|e| e.into_inner());
        if ds.pending_runs() == 0 {
            return Ok(0);
        }
        let n = ds.drain().len();
        ds.save()?;
        Ok(n)
    }

    /// Executes triggered runs whenever a mutation may have queued some.
    pub async fn trigger_worker(self: Arc<Self>) {
        loop {
            self.wake.notified().await;
            let me = self.clone();
            match tokio::task::spawn_blocking(move || me.drain_once()).await {
                Ok(Ok(n)) if n > 0 => tracing::info!("executed {n} triggered run(s)"),
                Ok(Ok(_)) => {}
                Ok(Err(e)) => tracing::error!("trigger worker: {e}"),
                Err(e) => tracing::error!("trigger worker panicked: {e}"),
            }
            // runs may have annotated their outputs and queued more
            if self.read().pending_runs() > 0 {
                self.wake.notify_one();
            }
        }
    }

    /// Syncs connectors whose poll interval has elapsed; checks once a second.
    pub async fn connector_poller(self: Arc<Self>) {
        let mut last: BTreeMap<String, Instant> = BTreeMap::new();
        let mut tick = tokio::time::interval(Duration::from_secs(1));
        loop {
            tick.tick().await;
            let due: Vec<String> = self
                .read()
                .connectors()
                .into_iter()
                .filter(|c| c.interval > 0)
                .filter(|c| last.get(&c.id).is_none_or(|t| t.elapsed() >= Duration::from_secs(c.interval)))
                .map(|c| c.id.clone())
                .collect();
            for id in due {
                last.insert(id.clone(), Instant::now());
                let me = self.clone();
                let sync_id = id.clone();
                let res = tokio::task::spawn_blocking(move || me.sync_connector(&sync_id)).await;
                match res {
                    Ok(Ok(report)) => tracing::info!("connector {id} synced: {report}"),
                    Ok(Err(e)) => tracing::warn!("connector {id}: {e}"),
                    Err(e) => tracing::error!("connector {id} panicked: {e}"),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use matspace_core::fixtures::{self, TensileSpecimen};
    use matspace_core::KType;

    use crate::ops::{IngestRequest, NewKItem};

    #[test]
    fn apply_persists_and_drain_runs_queued_work() {
        let dir = tempfile::tempdir().unwrap();
        let gw = Gateway::open(ApiConfig { data_dir: Some(dir.path().into()), ..Default::default() }).unwrap();
        let k = KType { id: "dataset".into(), name: "Dataset".into(), description: String::new(), form: None };
        gw.apply(Action::CreateKType(k)).unwrap();
        gw.apply(Action::RegisterApp(fixtures::tensile_eval_app())).unwrap();
        let item = gw.apply(Action::CreateKItem(NewKItem { ktype: "dataset".into(), name: "x".into(), summary: String::new() })).unwrap();
        let id = item["id"].as_str().unwrap().to_string();
        let bytes = TensileSpecimen::dx56d().csv().into_bytes();
        gw.apply(Action::Attach { id: id.clone(), filename: "t.csv".into(), bytes, media_type: "text/csv".into() }).unwrap();
        let req = IngestRequest {
            attachment: "t.csv".into(),
            mapping: fixtures::tensile_mapping_json(),
            mapping_format: matspace_core::ingest::MappingFormat::Structured,
            config: fixtures::tensile_config(),
        };
        gw.apply(Action::Ingest(id, req)).unwrap();
        assert_eq!(gw.read().pending_runs(), 1);
        assert_eq!(gw.drain_once().unwrap(), 1);
        assert_eq!(gw.drain_once().unwrap(), 0);
        assert_eq!(Dataspace::open(dir.path()).unwrap().runs().len(), 1);
    }

    #[test]
    fn failed_mutation_is_not_saved() {
        let dir = tempfile::tempdir().unwrap();
        let gw = Gateway::open(ApiConfig { data_dir: Some(dir.path().into()), ..Default::default() }).unwrap();
        assert!(gw.apply(Action::DeleteKType("missing".into())).is_err());
        assert!(!dir.path().join("state.json").exists());
    }
}

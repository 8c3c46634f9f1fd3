//! On-disk layout of a dataspace directory:
//!
//! ```text
//! state.json            items, k-types, vocabulary, forms, apps, runs, connectors
//! store/index.json      named graphs as Turtle, one file each
//! store/graphs/*.ttl
//! blobs/<item>/<file>   attachment bytes, file names percent-encoded
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use matspace_rdf::QuadStore;

use super::{Dataspace, State};
use crate::ingest::read_container;
use crate::ns;
use crate::search::SearchIndex;
use crate::units::UnitTable;
use crate::Result;

impl Dataspace {
    /// Opens the dataspace stored in `dir`, or a fresh one when `dir` holds
    /// no state yet. [`Dataspace::save`] writes back to the same directory.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let state_path = dir.join("state.json");
        if !state_path.exists() {
            let mut ds = Dataspace::new();
            ds.data_dir = Some(dir.to_path_buf());
            return Ok(ds);
        }
        let state: State = serde_json::from_slice(&fs::read(&state_path)?)?;
        let store = QuadStore::load(&dir.join("store"))?;
        let mut blobs: BTreeMap<String, BTreeMap<String, Vec<u8>>> = BTreeMap::new();
        for item in state.items.values() {
            for a in &item.attachments {
                let path = dir.join("blobs").join(&item.id).join(ns::encode_segment(&a.filename));
                blobs.entry(item.id.clone()).or_default().insert(a.filename.clone(), fs::read(path)?);
            }
        }
        let mut ds = Dataspace {
            store,
            units: UnitTable::seeded(),
            state,
            blobs,
            containers: BTreeMap::new(),
            index: SearchIndex::default(),
            data_dir: Some(dir.to_path_buf()),
        };
        let ids: Vec<String> = ds.state.items.keys().cloned().collect();
        for id in &ids {
            if let Some(name) = ds.state.items[id].container.clone() {
                let container = read_container(ds.attachment_bytes(id, &name)?)?;
                ds.containers.insert(id.clone(), container);
            }
            ds.reindex(id);
        }
        Ok(ds)
    }

    pub fn data_dir(&self) -> Option<&PathBuf> {
        self.data_dir.as_ref()
    }

    /// Writes everything to the directory given to [`Dataspace::open`];
    /// a no-op for in-memory dataspaces.
    pub fn save(&self) -> Result<()> {
        let Some(dir) = &self.data_dir else { return Ok(()) };
        self.save_to(dir)
    }

    pub fn save_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.store.save(&dir.join("store"))?;
        let blobs = dir.join("blobs");
        if blobs.exists() {
            fs::remove_dir_all(&blobs)?;
        }
        for (item, files) in &self.blobs {
            let d = blobs.join(item);
            fs::create_dir_all(&d)?;
            for (name, bytes) in files {
                fs::write(d.join(ns::encode_segment(name)), bytes)?;
            }
        }
        // state last: a reader never sees state that references missing blobs
        let tmp = dir.join("state.json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(&self.state)?)?;
        fs::rename(tmp, dir.join("state.json"))?;
        Ok(())
    }
}

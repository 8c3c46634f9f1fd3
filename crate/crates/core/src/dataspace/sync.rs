//! Connector registry and catalog sync.

use std::collections::BTreeMap;

use matspace_rdf::{Literal, Triple};

use super::{p, ConnectorState, Dataspace, KItemPatch};
use crate::connectors::{parse_catalog, ConnectorSpec, ExternalDataset, SyncReport};
use crate::ingest::{MetaValue, MetadataRecord, Origin};
use crate::knowledge::KType;
use crate::ns;
use crate::{CoreError, Result};

impl Dataspace {
    /// Registers a connector; its k-type is created when missing.
    pub fn add_connector(&mut self, spec: ConnectorSpec) -> Result<ConnectorSpec> {
        spec.check()?;
        if self.state.connectors.contains_key(&spec.id) {
            return Err(CoreError::Conflict(format!("connector '{}' exists", spec.id)));
        }
        if !self.state.ktypes.contains_key(&spec.ktype) {
            self.create_ktype(KType { id: spec.ktype.clone(), name: spec.ktype.clone(), description: String::new(), form: None })?;
        }
        self.state.connectors.insert(spec.id.clone(), ConnectorState { spec: spec.clone(), items: BTreeMap::new() });
        Ok(spec)
    }

    pub fn connectors(&self) -> Vec<&ConnectorSpec> {
        self.state.connectors.values().map(|c| &c.spec).collect()
    }

    pub fn connector(&self, id: &str) -> Result<&ConnectorSpec> {
        self.state.connectors.get(id).map(|c| &c.spec).ok_or_else(|| CoreError::not_found("connector", id))
    }

    /// Item id mirrored for an external dataset id.
    pub fn external_item(&self, connector: &str, external_id: &str) -> Option<&str> {
        self.state.connectors.get(connector)?.items.get(external_id).map(|(i, _)| i.as_str())
    }

    /// Fetches the connector's catalog and syncs it.
    pub fn sync_connector(&mut self, id: &str) -> Result<SyncReport> {
        let bytes = self.connector(id)?.fetch()?;
        self.sync_catalog(id, &bytes)
    }

    /// Upserts every dataset of a catalog by external id. Resource bytes
    /// are never fetched; only their URLs are recorded.
    pub fn sync_catalog(&mut self, id: &str, catalog: &[u8]) -> Result<SyncReport> {
        let ktype = self.connector(id)?.ktype.clone();
        let datasets = parse_catalog(catalog)?;
        let mut report = SyncReport::default();
        for d in datasets {
            let fingerprint = d.fingerprint();
            let known = self.state.connectors[id].items.get(&d.id).cloned();
            let outcome = match known {
                Some((_, fp)) if fp == fingerprint => {
                    report.unchanged += 1;
                    continue;
                }
                Some((item, _)) => self.update_external(&item, &d).map(|_| {
                    report.updated += 1;
                    item
                }),
                None => self.create_external(&ktype, &d).inspect(|_| report.created += 1),
            };
            match outcome {
                Ok(item) => {
                    let state = self.state.connectors.get_mut(id).expect("checked above");
                    state.items.insert(d.id.clone(), (item, fingerprint));
                }
                Err(e) => report.failures.push(format!("{}: {e}", d.id)),
            }
        }
        Ok(report)
    }

    fn create_external(&mut self, ktype: &str, d: &ExternalDataset) -> Result<String> {
        let name = if d.title.trim().is_empty() { d.id.clone() } else { d.title.clone() };
        let item = self.create_kitem(ktype, &name, &d.description)?;
        self.annotate_quiet(&item.id, &p(ns::EXTERNAL_REFERENCE))?;
        self.store
            .insert(&item.graph_iri, Triple::new(item.iri(), p(ns::EXTERNAL_ID), Literal::string(&d.id)));
        self.write_resources(&item.id, d);
        Ok(item.id)
    }

    fn update_external(&mut self, item: &str, d: &ExternalDataset) -> Result<()> {
        let name = if d.title.trim().is_empty() { d.id.clone() } else { d.title.clone() };
        self.patch_kitem(item, &KItemPatch { name: Some(name), summary: Some(d.description.clone()) })?;
        self.remove_nodes(item, ns::HAS_METADATUM, |t| {
            Self::has_value(t, ns::ORIGIN, &matspace_rdf::Term::Iri(p(ns::CONNECTOR_ORIGIN)))
        });
        self.write_resources(item, d);
        self.touch(item);
        Ok(())
    }

    fn write_resources(&mut self, item: &str, d: &ExternalDataset) {
        for (i, r) in d.resources.iter().enumerate() {
            let record = MetadataRecord {
                key: if r.format.is_empty() { format!("resource {}", i + 1) } else { format!("resource {} ({})", i + 1, r.format) },
                concept: p(ns::RESOURCE_URL),
                value: MetaValue::Text(r.url.clone()),
                text: r.url.clone(),
                unit: None,
                original_unit: None,
                term_value: None,
            };
            self.write_record(item, &record, Origin::Connector);
        }
        self.reindex(item);
    }
}

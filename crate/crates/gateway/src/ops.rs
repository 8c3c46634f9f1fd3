//! Mutations shared by the REST routes and the CLI. Both surfaces build an
//! [`Action`] and hand it to [`execute`], so a walkthrough driven through
//! either one runs the same dataspace calls in the same order.

use std::collections::BTreeMap;

use matspace_core::connectors::ConnectorSpec;
use matspace_core::dataspace::KItemPatch;
use matspace_core::form::FormSchema;
use matspace_core::ingest::{parse_mapping, IngestConfig, MappingFormat};
use matspace_core::material::CardTemplate;
use matspace_core::workflow::AppSpec;
use matspace_core::{CoreError, Dataspace, KType, Result};
use matspace_rdf::Iri;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

fn default_format() -> MappingFormat {
    MappingFormat::Structured
}

/// Ingest parameters; the mapping travels as text in either mapping format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRequest {
    pub attachment: String,
    pub mapping: String,
    #[serde(default = "default_format")]
    pub mapping_format: MappingFormat,
    pub config: IngestConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRequest {
    pub namespace: String,
    pub label: String,
    #[serde(default)]
    pub parent: Option<Iri>,
    #[serde(default)]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewKItem {
    pub ktype: String,
    pub name: String,
    #[serde(default)]
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRequest {
    pub target: String,
    #[serde(default)]
    pub relation: Option<Iri>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub settings: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    CreateKType(KType),
    DeleteKType(String),
    CreateKItem(NewKItem),
    PatchKItem(String, KItemPatch),
    DeleteKItem(String),
    Link(String, LinkRequest),
    Annotate(String, Iri),
    Attach { id: String, filename: String, bytes: Vec<u8>, media_type: String },
    Ingest(String, IngestRequest),
    ExpandColumns(String),
    AttachForm(FormSchema),
    SubmitForm { id: String, schema: String, values: BTreeMap<String, Value> },
    AddTerm(TermRequest),
    ImportVocabulary(String),
    RegisterApp(AppSpec),
    RunApp(String, RunRequest),
    ExportCard(String, CardTemplate),
    AddConnector(ConnectorSpec),
    /// Catalog bytes fetched beforehand, outside any lock.
    SyncCatalog(String, Vec<u8>),
    Drain,
}

impl Action {
    /// Whether the action can queue triggered runs.
    pub fn may_trigger(&self) -> bool {
        matches!(
            self,
            Action::Annotate(..) | Action::Attach { .. } | Action::Ingest(..) | Action::RegisterApp(_) | Action::RunApp(..) | Action::ExportCard(..)
        )
    }
}

fn to_json<T: Serialize>(v: T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

/// Applies one mutation and returns its JSON result.
pub fn execute(ds: &mut Dataspace, action: Action) -> Result<Value> {
    match action {
        Action::CreateKType(k) => to_json(ds.create_ktype(k)?),
        Action::DeleteKType(id) => {
            ds.delete_ktype(&id)?;
            Ok(json!({ "deleted": id }))
        }
        Action::CreateKItem(n) => to_json(ds.create_kitem(&n.ktype, &n.name, &n.summary)?),
        Action::PatchKItem(id, patch) => to_json(ds.patch_kitem(&id, &patch)?),
        Action::DeleteKItem(id) => {
            ds.delete_kitem(&id)?;
            Ok(json!({ "deleted": id }))
        }
        Action::Link(id, l) => to_json(ds.link(&id, &l.target, l.relation, l.label)?),
        Action::Annotate(id, iri) => to_json(ds.annotate(&id, &iri)?),
        Action::Attach { id, filename, bytes, media_type } => to_json(ds.attach(&id, &filename, bytes, &media_type)?),
        Action::Ingest(id, req) => {
            let mapping = parse_mapping(req.mapping.as_bytes(), req.mapping_format)?;
            to_json(ds.ingest(&id, &req.attachment, &mapping, &req.config)?)
        }
        Action::ExpandColumns(id) => Ok(json!({ "triples": ds.expand_columns(&id)? })),
        Action::AttachForm(schema) => to_json(ds.attach_form(schema)?),
        Action::SubmitForm { id, schema, values } => Ok(json!({ "nodes": ds.submit_form(&id, &schema, &values)? })),
        Action::AddTerm(t) => to_json(ds.register_term(&t.namespace, &t.label, t.parent.as_ref(), t.description.as_deref())?),
        Action::ImportVocabulary(text) => Ok(json!({ "imported": ds.import_vocabulary(&text)? })),
        Action::RegisterApp(spec) => to_json(ds.register_app(spec)?),
        Action::RunApp(app, req) => to_json(ds.run_app(&app, &req.inputs, req.settings)?),
        Action::ExportCard(card, template) => to_json(ds.export_card(&card, template)?),
        Action::AddConnector(spec) => to_json(ds.add_connector(spec)?),
        Action::SyncCatalog(id, bytes) => to_json(ds.sync_catalog(&id, &bytes)?),
        Action::Drain => to_json(ds.drain()),
    }
}

/// K-item detail: item fields plus metadata rows, level and associated apps.
pub fn kitem_view(ds: &Dataspace, id: &str) -> Result<Value> {
    let item = ds.kitem(id)?;
    let mut v = to_json(item)?;
    let obj = v.as_object_mut().ok_or_else(|| CoreError::Invalid("k-item is not an object".into()))?;
    obj.insert("metadata".into(), to_json(ds.metadata_rows(id)?)?);
    obj.insert("level".into(), to_json(ds.integration_level(id)?)?);
    obj.insert("apps".into(), to_json(ds.associated_apps(id)?)?);
    if let Ok(c) = ds.container(id) {
        obj.insert("columns".into(), to_json(c.manifest().columns)?);
    }
    Ok(v)
}

pub fn parse_template(s: &str) -> Result<CardTemplate> {
    serde_json::from_value(Value::String(s.into()))
        .map_err(|_| CoreError::Invalid(format!("unknown card template '{s}' (hs-analytic, tabulated-plasticity)")))
}

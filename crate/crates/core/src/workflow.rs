//! Apps, trigger rules, run records and PROV provenance.

use std::collections::BTreeMap;

use matspace_rdf::vocab::{prov, rdf};
use matspace_rdf::{BlankNode, Iri, Literal, Triple};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::form::FormSchema;
use crate::ns::{self, iri};
use crate::{CoreError, Result};

/// Fires on uploads whose filename matches `glob` and whose item carries
/// every annotation in `annotations`. An empty rule never fires.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigger {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glob: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<Iri>,
}

impl Trigger {
    pub fn is_empty(&self) -> bool {
        self.glob.is_none() && self.annotations.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = &self.glob {
            glob::Pattern::new(g).map_err(|e| CoreError::Invalid(format!("bad glob '{g}': {e}")))?;
        }
        Ok(())
    }

    pub fn matches(&self, filename: &str, annotations: &[Iri]) -> bool {
        if self.is_empty() {
            return false;
        }
        let glob_ok = match &self.glob {
            Some(g) => glob::Pattern::new(g).is_ok_and(|p| p.matches(filename)),
            None => true,
        };
        glob_ok && self.annotations.iter().all(|a| annotations.contains(a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// Tensile curve evaluation producing a material card.
    TensileEval,
    /// Material card export to a solver key file.
    CardExport,
}

impl Builtin {
    pub fn id(self) -> &'static str {
        match self {
            Builtin::TensileEval => "tensile-eval",
            Builtin::CardExport => "card-export",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Builtin(Builtin),
    /// External program, invoked as
    /// `<program> <args…> <settings.json> <output dir> <input files…>`.
    Command {
        program: String,
        #[serde(default)]
        args: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppSpec {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub trigger: Trigger,
    pub operation: Operation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings_schema: Option<FormSchema>,
    /// Settings applied to triggered runs.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub default_settings: BTreeMap<String, Value>,
    /// K-type of items created by command operations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_ktype: Option<String>,
}

impl AppSpec {
    pub fn check(&self) -> Result<()> {
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(CoreError::Invalid(format!("app id '{}' must be a slug", self.id)));
        }
        if let Operation::Command { program, .. } = &self.operation {
            if program.trim().is_empty() {
                return Err(CoreError::Invalid("command operation without a program".into()));
            }
        }
        self.trigger.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub app: String,
    pub inputs: Vec<String>,
    /// Generated entities: k-item or attachment IRIs.
    pub outputs: Vec<Iri>,
    pub settings: BTreeMap<String, Value>,
    pub status: RunStatus,
    pub started: String,
    pub ended: String,
    pub log: String,
    /// Upload event that triggered the run, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UploadEvent {
    pub id: u64,
    pub kitem: String,
    pub filename: String,
}

/// Settings as literals; strings stay strings, everything else keeps its
/// JSON spelling with a matching datatype.
pub fn setting_literal(v: &Value) -> Literal {
    match v {
        Value::String(s) => Literal::string(s),
        Value::Bool(b) => Literal::boolean(*b),
        Value::Number(n) if n.is_i64() => Literal::integer(n.as_i64().expect("checked")),
        Value::Number(n) => Literal::double(n.as_f64().unwrap_or(f64::NAN)),
        other => Literal::string(other.to_string()),
    }
}

/// Provenance of one run: activity, agent, used inputs plus settings entity,
/// and (on success) generated outputs. Settings parameters hang off blank
/// nodes `p<i>`.
pub fn provenance_triples(run: &RunRecord) -> Vec<Triple> {
    let activity = ns::activity_iri(&run.id);
    let agent = ns::app_iri(&run.app);
    let settings = ns::settings_iri(&run.id);
    let mut t = vec![
        Triple::new(activity.clone(), iri(rdf::TYPE), iri(prov::ACTIVITY)),
        Triple::new(activity.clone(), iri(prov::WAS_ASSOCIATED_WITH), agent.clone()),
        Triple::new(agent, iri(rdf::TYPE), iri(prov::SOFTWARE_AGENT)),
        Triple::new(settings.clone(), iri(rdf::TYPE), iri(prov::ENTITY)),
        Triple::new(settings.clone(), iri(rdf::TYPE), iri(ns::SETTINGS)),
        Triple::new(activity.clone(), iri(prov::USED), settings.clone()),
    ];
    for (i, (k, v)) in run.settings.iter().enumerate() {
        let p = BlankNode::new(format!("p{i}")).expect("valid label");
        t.push(Triple::new(settings.clone(), iri(ns::HAS_PARAMETER), p.clone()));
        t.push(Triple::new(p.clone(), iri(ns::PARAMETER_NAME), Literal::string(k)));
        t.push(Triple::new(p, iri(ns::VALUE), setting_literal(v)));
    }
    for input in &run.inputs {
        let e = ns::kitem_iri(input);
        t.push(Triple::new(e.clone(), iri(rdf::TYPE), iri(prov::ENTITY)));
        t.push(Triple::new(activity.clone(), iri(prov::USED), e));
    }
    match run.status {
        RunStatus::Succeeded => {
            for out in &run.outputs {
                t.push(Triple::new(out.clone(), iri(rdf::TYPE), iri(prov::ENTITY)));
                t.push(Triple::new(out.clone(), iri(prov::WAS_GENERATED_BY), activity.clone()));
                for input in &run.inputs {
                    t.push(Triple::new(out.clone(), iri(prov::WAS_DERIVED_FROM), ns::kitem_iri(input)));
                }
            }
        }
        RunStatus::Failed => t.push(Triple::new(activity, iri(ns::RUN_STATUS), iri(ns::FAILED))),
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Entity,
    Activity,
    Settings,
}

/// Backward provenance tree: entities point to their generating activity,
/// activities to the entities they used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNode {
    pub iri: Iri,
    pub kind: TraceKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TraceNode>,
}

impl TraceNode {
    /// Every root-to-source path, root included.
    pub fn chains(&self) -> Vec<Vec<Iri>> {
        if self.children.is_empty() {
            return vec![vec![self.iri.clone()]];
        }
        let mut out = Vec::new();
        for c in &self.children {
            for mut chain in c.chains() {
                chain.insert(0, self.iri.clone());
                out.push(chain);
            }
        }
        out
    }

    /// The path that follows data inputs and skips settings entities; when an
    /// activity used several items the first in IRI order is taken.
    pub fn primary_chain(&self) -> Vec<Iri> {
        let mut out = vec![self.iri.clone()];
        let mut node = self;
        while let Some(next) = node.children.iter().find(|c| c.kind != TraceKind::Settings) {
            out.push(next.iri.clone());
            node = next;
        }
        out
    }

    /// Settings entities used by the activity `activity` anywhere in the tree.
    pub fn settings_of(&self, activity: &Iri) -> Vec<Iri> {
        if &self.iri == activity {
            return self.children.iter().filter(|c| c.kind == TraceKind::Settings).map(|c| c.iri.clone()).collect();
        }
        self.children.iter().flat_map(|c| c.settings_of(activity)).collect()
    }
}

/// Source of provenance edges for [`trace`].
pub trait ProvenanceSource {
    fn generated_by(&self, entity: &Iri) -> Vec<Iri>;
    fn used(&self, activity: &Iri) -> Vec<Iri>;
    fn is_settings(&self, entity: &Iri) -> bool;
}

/// Backward closure from `root` over wasGeneratedBy and used. Fails on a
/// cycle or on an entity with more than one generating activity.
pub fn trace(root: &Iri, source: &impl ProvenanceSource) -> Result<TraceNode> {
    let mut path = Vec::new();
    trace_entity(root, source, &mut path)
}

fn trace_entity(entity: &Iri, source: &impl ProvenanceSource, path: &mut Vec<Iri>) -> Result<TraceNode> {
    if path.contains(entity) {
        return Err(CoreError::ProvenanceCycle(entity.as_str().into()));
    }
    let kind = if source.is_settings(entity) { TraceKind::Settings } else { TraceKind::Entity };
    let generators = source.generated_by(entity);
    if generators.len() > 1 {
        return Err(CoreError::Invalid(format!("<{entity}> has {} generating activities", generators.len())));
    }
    path.push(entity.clone());
    let mut children = Vec::new();
    if let Some(activity) = generators.first() {
        if path.contains(activity) {
            return Err(CoreError::ProvenanceCycle(activity.as_str().into()));
        }
        path.push(activity.clone());
        let mut used = source.used(activity);
        used.sort();
        let mut inputs = Vec::new();
        for u in &used {
            inputs.push(trace_entity(u, source, path)?);
        }
        // data inputs before settings
        inputs.sort_by_key(|n| n.kind == TraceKind::Settings);
        path.pop();
        children.push(TraceNode { iri: activity.clone(), kind: TraceKind::Activity, children: inputs });
    }
    path.pop();
    Ok(TraceNode { iri: entity.clone(), kind, children })
}

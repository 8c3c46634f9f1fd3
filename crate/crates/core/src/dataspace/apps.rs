//! App registry, trigger dispatch, run execution and provenance queries.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use matspace_rdf::store::Scope;
use matspace_rdf::vocab::{prov, qudt, rdf};
use matspace_rdf::{Iri, Literal, QuadStore, Subject, Term, Triple};
use serde_json::Value;

use super::{now, p, Dataspace, MATERIAL_CARD_KTYPE};
use crate::form;
use crate::ingest::{MetaValue, MetadataRecord, Origin};
use crate::material::{
    derive_curve, export_card, fit_hockett_sherby, mechanical_properties, report, to_true_plastic, CardData,
    CardTemplate, HockettSherby, MechanicalProperties, SpecimenGeometry, MIN_PLASTIC_POINTS,
};
use crate::ns;
use crate::vocabulary::steel;
use crate::workflow::{self, provenance_triples, AppSpec, Builtin, Operation, ProvenanceSource, RunRecord, RunStatus, TraceNode};
use crate::{CoreError, Result};

/// Upper bound on runs executed by one [`Dataspace::drain`] call, so that
/// apps whose outputs keep triggering apps cannot loop forever.
pub const DRAIN_LIMIT: usize = 1000;

const MPA: &str = "http://qudt.org/vocab/unit/MegaPA";

/// Provenance edges as stored in the provenance graph.
pub struct ProvenanceView<'a>(pub &'a QuadStore);

impl ProvenanceView<'_> {
    fn objects(&self, s: &Iri, pred: &str) -> Vec<Iri> {
        let g = p(ns::PROVENANCE_GRAPH);
        self.0
            .triples_matching(Scope::Graph(&g), Some(&Subject::Iri(s.clone())), Some(&p(pred)), None)
            .into_iter()
            .filter_map(|t| t.object.as_iri().cloned())
            .collect()
    }
}

impl ProvenanceSource for ProvenanceView<'_> {
    fn generated_by(&self, entity: &Iri) -> Vec<Iri> {
        self.objects(entity, prov::WAS_GENERATED_BY)
    }

    fn used(&self, activity: &Iri) -> Vec<Iri> {
        self.objects(activity, prov::USED)
    }

    fn is_settings(&self, entity: &Iri) -> bool {
        entity.as_str().starts_with("dsms://activity/") && entity.as_str().ends_with("/settings")
    }
}

/// What a successful operation wants written; computed before anything is
/// committed so a failing operation leaves no trace besides its run record.
enum Plan {
    Card {
        name: String,
        sources: Vec<String>,
        props: MechanicalProperties<f64>,
        model: Option<HockettSherby<f64>>,
        max_plastic_strain: Option<f64>,
        report: String,
    },
    Export {
        card: String,
        filename: String,
        text: String,
    },
    Files {
        ktype: String,
        files: Vec<(String, Vec<u8>)>,
    },
}

fn program_exists(program: &str) -> bool {
    if program.contains('/') {
        return Path::new(program).is_file();
    }
    std::env::var_os("PATH")
        .map(|paths| std::env::split_paths(&paths).any(|d| d.join(program).is_file()))
        .unwrap_or(false)
}

fn setting_str<'a>(settings: &'a BTreeMap<String, Value>, key: &str) -> Option<&'a str> {
    settings.get(key).and_then(Value::as_str).filter(|s| !s.is_empty())
}

impl Dataspace {
    pub fn register_app(&mut self, spec: AppSpec) -> Result<AppSpec> {
        spec.check()?;
        if self.state.apps.contains_key(&spec.id) {
            return Err(CoreError::Conflict(format!("app '{}' exists", spec.id)));
        }
        if let Operation::Command { program, .. } = &spec.operation {
            if !program_exists(program) {
                return Err(CoreError::Invalid(format!("unknown operation: program '{program}' not found")));
            }
        }
        if let Some(schema) = &spec.settings_schema {
            schema.check(&self.state.registry, &self.units)?;
            let violations = form::validate(schema, &spec.default_settings);
            if let Some(v) = violations.first() {
                return Err(CoreError::Invalid(format!("default setting '{}': {}", v.key, v.message)));
            }
        }
        if let Some(k) = &spec.output_ktype {
            self.ktype(k)?;
        }
        self.state.apps.insert(spec.id.clone(), spec.clone());
        Ok(spec)
    }

    pub fn apps(&self) -> Vec<&AppSpec> {
        self.state.apps.values().collect()
    }

    pub fn app(&self, id: &str) -> Result<&AppSpec> {
        self.state.apps.get(id).ok_or_else(|| CoreError::not_found("app", id))
    }

    /// Apps whose trigger matches an upload of `filename` to the item, in id order.
    pub fn match_triggers(&self, kitem: &str, filename: &str) -> Result<Vec<&AppSpec>> {
        let item = self.kitem(kitem)?;
        Ok(self.state.apps.values().filter(|a| a.trigger.matches(filename, &item.annotations)).collect())
    }

    /// Apps whose trigger currently matches any upload of the item.
    pub fn associated_apps(&self, kitem: &str) -> Result<Vec<String>> {
        let item = self.kitem(kitem)?;
        Ok(self
            .state
            .apps
            .values()
            .filter(|a| {
                item.attachments
                    .iter()
                    .any(|f| !f.derived && a.trigger.matches(&f.filename, &item.annotations))
            })
            .map(|a| a.id.clone())
            .collect())
    }

    /// Queues every (upload event, app) pair of the item whose trigger now
    /// matches and that was never queued before.
    pub(super) fn reevaluate_triggers(&mut self, kitem: &str) {
        let Some(item) = self.state.items.get(kitem) else { return };
        let mut fresh = Vec::new();
        for e in self.state.events.iter().filter(|e| e.kitem == kitem) {
            for a in self.state.apps.values() {
                let key = (e.id, a.id.clone());
                if a.trigger.matches(&e.filename, &item.annotations) && !self.state.dispatched.contains(&key) {
                    fresh.push(key);
                }
            }
        }
        for key in fresh {
            self.state.dispatched.insert(key.clone());
            self.state.queue.push_back(key);
        }
    }

    pub fn pending_runs(&self) -> usize {
        self.state.queue.len()
    }

    /// Executes queued triggered runs until the queue is empty (or
    /// [`DRAIN_LIMIT`] runs were made) and returns their records.
    pub fn drain(&mut self) -> Vec<RunRecord> {
        let mut out = Vec::new();
        while out.len() < DRAIN_LIMIT {
            let Some((event_id, app_id)) = self.state.queue.pop_front() else { break };
            let Some(event) = self.state.events.iter().find(|e| e.id == event_id).cloned() else { continue };
            if !self.state.items.contains_key(&event.kitem) || !self.state.apps.contains_key(&app_id) {
                continue;
            }
            let settings = self.state.apps[&app_id].default_settings.clone();
            match self.start_run(&app_id, &[event.kitem.clone()], settings, Some(event_id)) {
                Ok(r) => out.push(r),
                Err(e) => {
                    // validation failures of a triggered run still leave a record
                    let r = self.finish_run(&app_id, vec![event.kitem], BTreeMap::new(), Some(event_id), now(), Err(e));
                    out.push(r);
                }
            }
        }
        out
    }

    pub fn runs(&self) -> &[RunRecord] {
        &self.state.runs
    }

    pub fn run(&self, id: &str) -> Result<&RunRecord> {
        self.state.runs.iter().find(|r| r.id == id).ok_or_else(|| CoreError::not_found("run", id))
    }

    /// Runs an app by hand. Validation errors are returned; operation
    /// failures produce a failed run record.
    pub fn run_app(&mut self, app: &str, inputs: &[String], settings: BTreeMap<String, Value>) -> Result<RunRecord> {
        self.start_run(app, inputs, settings, None)
    }

    fn start_run(&mut self, app_id: &str, inputs: &[String], settings: BTreeMap<String, Value>, event: Option<u64>) -> Result<RunRecord> {
        let app = self.app(app_id)?.clone();
        if inputs.is_empty() {
            return Err(CoreError::Invalid("a run needs at least one input k-item".into()));
        }
        for i in inputs {
            self.kitem(i)?;
        }
        let mut merged = app.default_settings.clone();
        merged.extend(settings);
        if let Some(schema) = &app.settings_schema {
            let violations = form::validate(schema, &merged);
            if !violations.is_empty() {
                let text: Vec<String> = violations.iter().map(|v| format!("{}: {}", v.key, v.message)).collect();
                return Err(CoreError::Invalid(format!("settings: {}", text.join("; "))));
            }
        }
        let started = now();
        let run_id = format!("run-{}", self.state.counters.runs + 1);
        let plan = self.plan(&app, inputs, &merged, &run_id);
        Ok(self.finish_run(app_id, inputs.to_vec(), merged, event, started, plan))
    }

    fn finish_run(
        &mut self,
        app: &str,
        inputs: Vec<String>,
        settings: BTreeMap<String, Value>,
        event: Option<u64>,
        started: String,
        plan: Result<Plan>,
    ) -> RunRecord {
        self.state.counters.runs += 1;
        let id = format!("run-{}", self.state.counters.runs);
        let (status, outputs, log) = match plan.and_then(|plan| self.commit(plan, &inputs)) {
            Ok((outputs, log)) => (RunStatus::Succeeded, outputs, log),
            Err(e) => (RunStatus::Failed, Vec::new(), e.to_string()),
        };
        let record = RunRecord {
            id,
            app: app.into(),
            inputs,
            outputs,
            settings,
            status,
            started,
            ended: now(),
            log,
            event,
        };
        let triples = self.store.relabel_blanks(provenance_triples(&record));
        self.store.insert_graph(&p(ns::PROVENANCE_GRAPH), triples);
        self.state.runs.push(record.clone());
        // outputs may themselves satisfy triggers
        for out in &record.outputs {
            if let Some(id) = ns::kitem_id(out) {
                let id = id.to_string();
                self.reevaluate_triggers(&id);
            }
        }
        record
    }

    fn plan(&self, app: &AppSpec, inputs: &[String], settings: &BTreeMap<String, Value>, run_id: &str) -> Result<Plan> {
        match &app.operation {
            Operation::Builtin(Builtin::TensileEval) => self.plan_tensile(inputs, settings),
            Operation::Builtin(Builtin::CardExport) => {
                let [card] = inputs else {
                    return Err(CoreError::Operation("card export takes exactly one card".into()));
                };
                let template: CardTemplate = setting_str(settings, "template").unwrap_or("hs-analytic").parse()?;
                let data = self.card_data(card)?;
                let text = export_card(&data, template)?;
                Ok(Plan::Export {
                    card: card.clone(),
                    filename: format!("{run_id}-{}", template.filename(&data.name)),
                    text,
                })
            }
            Operation::Command { program, args } => self.plan_command(app, program, args, inputs, settings),
        }
    }

    /// A numeric metadata value of the item converted to `unit`.
    fn quantity(&self, item: &str, concept: &str, unit: &str) -> Result<f64> {
        let row = self
            .metadata_rows(item)?
            .into_iter()
            .find(|r| r.concept.as_ref().is_some_and(|c| c.as_str() == concept) && r.value.is_number())
            .ok_or_else(|| CoreError::Operation(format!("k-item {item} has no numeric <{concept}>")))?;
        let v = row.value.as_f64().expect("checked number");
        match row.unit {
            Some(sym) => self.units.convert(v, &sym, unit),
            None => Ok(v),
        }
    }

    fn curve_column(&self, item: &str, concept: &str, by_name: Option<&str>, unit: &str) -> Result<Vec<f64>> {
        let container = self.container(item).map_err(|_| CoreError::Operation(format!("k-item {item} has no column container")))?;
        let col = match by_name {
            Some(name) => container.column(name),
            None => container.columns.iter().find(|c| c.concept.as_ref().is_some_and(|c| c.as_str() == concept)),
        }
        .ok_or_else(|| CoreError::Operation(format!("k-item {item} has no <{concept}> column")))?;
        let Some(u) = &col.unit else { return Ok(col.values.clone()) };
        let from = self.units.by_iri(u).ok_or_else(|| CoreError::UnknownUnit(u.as_str().into()))?;
        col.values.iter().map(|v| self.units.convert(*v, &from.symbol, unit)).collect()
    }

    fn plan_tensile(&self, inputs: &[String], settings: &BTreeMap<String, Value>) -> Result<Plan> {
        let mut props = Vec::new();
        let (mut eps, mut sig) = (Vec::new(), Vec::new());
        for input in inputs {
            let force = self.curve_column(input, steel::STANDARD_FORCE, setting_str(settings, "force_column"), "N")?;
            let ext = self.curve_column(input, steel::EXTENSION, setting_str(settings, "extension_column"), "mm")?;
            let geom = SpecimenGeometry::new(
                self.quantity(input, steel::ORIGINAL_GAUGE_LENGTH, "mm")?,
                self.quantity(input, steel::SPECIMEN_THICKNESS, "mm")?,
                self.quantity(input, steel::SPECIMEN_WIDTH, "mm")?,
            )?;
            let curve = derive_curve(&force, &ext, &geom)?;
            let (pr, _) = mechanical_properties(&curve)?;
            match to_true_plastic(&curve, pr.e) {
                Ok((e, s)) => {
                    eps.extend(e);
                    sig.extend(s);
                }
                Err(CoreError::EmptyPlasticRegion) => {}
                Err(e) => return Err(e),
            }
            props.push(pr);
        }
        let n = props.len() as f64;
        let mean = |f: fn(&MechanicalProperties<f64>) -> f64| props.iter().map(f).sum::<f64>() / n;
        let props = MechanicalProperties { e: mean(|p| p.e), rp02: mean(|p| p.rp02), rm: mean(|p| p.rm), ag: mean(|p| p.ag) };
        let (model, max_plastic_strain) = if eps.len() >= MIN_PLASTIC_POINTS {
            let mut pairs: Vec<(f64, f64)> = eps.into_iter().zip(sig).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (e, s): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let max = e.last().copied();
            (Some(fit_hockett_sherby(&e, &s)?), max)
        } else {
            (None, None)
        };
        let source_names: Vec<String> = inputs.iter().map(|i| self.state.items[i].name.clone()).collect();
        let name = setting_str(settings, "name").map(str::to_string).unwrap_or_else(|| format!("{} card", source_names.join(" + ")));
        let settings_text: Vec<(String, String)> = settings
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())))
            .collect();
        Ok(Plan::Card {
            name,
            sources: inputs.to_vec(),
            report: report(&source_names.join(", "), &props, model.as_ref(), &settings_text),
            props,
            model,
            max_plastic_strain,
        })
    }

    fn plan_command(&self, app: &AppSpec, program: &str, args: &[String], inputs: &[String], settings: &BTreeMap<String, Value>) -> Result<Plan> {
        let op_err = |e: std::io::Error| CoreError::Operation(e.to_string());
        let dir = tempfile::tempdir().map_err(op_err)?;
        let (in_dir, out_dir) = (dir.path().join("in"), dir.path().join("out"));
        std::fs::create_dir_all(&out_dir).map_err(op_err)?;
        let settings_path = dir.path().join("settings.json");
        std::fs::write(&settings_path, serde_json::to_vec_pretty(settings)?).map_err(op_err)?;
        let mut files = Vec::new();
        for input in inputs {
            let item = &self.state.items[input];
            let target = in_dir.join(input);
            std::fs::create_dir_all(&target).map_err(op_err)?;
            for a in item.attachments.iter().filter(|a| !a.derived) {
                let path = target.join(&a.filename);
                std::fs::write(&path, self.attachment_bytes(input, &a.filename)?).map_err(op_err)?;
                files.push(path);
            }
        }
        let out = Command::new(program)
            .args(args)
            .arg(&settings_path)
            .arg(&out_dir)
            .args(&files)
            .output()
            .map_err(|e| CoreError::Operation(format!("{program}: {e}")))?;
        let log = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
        if !out.status.success() {
            return Err(CoreError::Operation(format!("{program} exited with {}: {}", out.status, log.trim())));
        }
        let mut produced = Vec::new();
        for entry in std::fs::read_dir(&out_dir).map_err(op_err)? {
            let entry = entry.map_err(op_err)?;
            if entry.file_type().map_err(op_err)?.is_file() {
                let name = entry.file_name().to_string_lossy().into_owned();
                produced.push((name, std::fs::read(entry.path()).map_err(op_err)?));
            }
        }
        if produced.is_empty() {
            return Err(CoreError::Operation(format!("{program} wrote no output files")));
        }
        produced.sort();
        let ktype = app.output_ktype.clone().unwrap_or_else(|| self.state.items[&inputs[0]].ktype.clone());
        Ok(Plan::Files { ktype, files: produced })
    }

    /// Writes a plan; returns the generated entity IRIs and a log line.
    fn commit(&mut self, plan: Plan, inputs: &[String]) -> Result<(Vec<Iri>, String)> {
        match plan {
            Plan::Card { name, sources, props, model, max_plastic_strain, report } => {
                let summary = format!("Material card evaluated from {} tensile test(s)", sources.len());
                let card = self.create_kitem(MATERIAL_CARD_KTYPE, &name, &summary)?;
                self.write_card(&card.id, &props, model.as_ref(), max_plastic_strain);
                // material and grade terms of the sources carry over to the card
                let mut terms = Vec::new();
                for s in &sources {
                    for row in self.metadata_rows(s)? {
                        if let Some(t) = row.term_value.filter(|t| self.state.registry.contains(t)) {
                            terms.push(t);
                        }
                    }
                }
                terms.sort();
                terms.dedup();
                for t in terms {
                    self.annotate_quiet(&card.id, &t)?;
                }
                self.store_attachment(&card.id, "report.txt", report.into_bytes(), "text/plain", true, true)?;
                for s in &sources {
                    self.link(s, &card.id, Some(p(ns::IS_INPUT_FOR)), None)?;
                }
                Ok((vec![card.iri()], format!("created material card {}", card.id)))
            }
            Plan::Export { card, filename, text } => {
                self.store_attachment(&card, &filename, text.into_bytes(), "text/plain", true, true)?;
                Ok((vec![ns::attachment_iri(&card, &filename)], format!("exported {filename}")))
            }
            Plan::Files { ktype, files } => {
                let name = format!("{} output run-{}", inputs.join("+"), self.state.counters.runs);
                let item = self.create_kitem(&ktype, &name, "")?;
                let count = files.len();
                for (f, bytes) in files {
                    self.store_attachment(&item.id, &f, bytes, "application/octet-stream", true, false)?;
                }
                for i in inputs {
                    self.link(i, &item.id, Some(p(ns::IS_INPUT_FOR)), None)?;
                }
                Ok((vec![item.iri()], format!("stored {count} output file(s) on {}", item.id)))
            }
        }
    }

    fn write_card(&mut self, id: &str, props: &MechanicalProperties<f64>, model: Option<&HockettSherby<f64>>, max_plastic_strain: Option<f64>) {
        let quantities = [
            ("E", steel::ELASTIC_MODULUS, props.e, true),
            ("Rp02", steel::YIELD_STRENGTH, props.rp02, true),
            ("Rm", steel::TENSILE_STRENGTH, props.rm, true),
            ("Ag", steel::UNIFORM_ELONGATION, props.ag, false),
        ];
        for (key, concept, v, mpa) in quantities {
            let record = MetadataRecord {
                key: key.into(),
                concept: p(concept),
                value: MetaValue::Number { number: v, integer: false },
                text: v.to_string(),
                unit: mpa.then(|| p(MPA)),
                original_unit: None,
                term_value: None,
            };
            self.write_record(id, &record, Origin::App);
        }
        let Some(m) = model else { return };
        let item = ns::kitem_iri(id);
        let block = self.blank();
        let mut t = vec![
            Triple::new(item, p(ns::HAS_MODEL), block.clone()),
            Triple::new(block.clone(), p(rdf::TYPE), p(ns::HOCKETT_SHERBY)),
        ];
        let mut params = vec![
            ("sigma_i", m.sigma_i, true),
            ("sigma_sat", m.sigma_sat, true),
            ("a", m.a, false),
            ("p", m.p, false),
            ("rms", m.rms, true),
        ];
        if let Some(x) = max_plastic_strain {
            params.push(("max_plastic_strain", x, false));
        }
        for (name, v, mpa) in params {
            let node = self.blank();
            t.push(Triple::new(block.clone(), p(ns::HAS_PARAMETER), node.clone()));
            t.push(Triple::new(node.clone(), p(ns::PARAMETER_NAME), Literal::string(name)));
            t.push(Triple::new(node.clone(), p(ns::VALUE), Literal::double(v)));
            if mpa {
                t.push(Triple::new(node, p(qudt::UNIT), p(MPA)));
            }
        }
        self.store.insert_graph(&ns::kitem_iri(id), t);
    }

    /// Card content read back from a card item's graph.
    pub fn card_data(&self, id: &str) -> Result<CardData> {
        let item = self.kitem(id)?;
        let rows = self.metadata_rows(id)?;
        let get = |concept: &str| -> Result<f64> {
            rows.iter()
                .find(|r| r.concept.as_ref().is_some_and(|c| c.as_str() == concept))
                .and_then(|r| r.value.as_f64())
                .ok_or_else(|| CoreError::Invalid(format!("k-item {id} is not a material card: no <{concept}>")))
        };
        let properties = MechanicalProperties {
            e: get(steel::ELASTIC_MODULUS)?,
            rp02: get(steel::YIELD_STRENGTH)?,
            rm: get(steel::TENSILE_STRENGTH)?,
            ag: get(steel::UNIFORM_ELONGATION)?,
        };
        let g = &item.graph_iri;
        let block = self
            .store
            .triples_matching(Scope::Graph(g), Some(&Subject::Iri(g.clone())), Some(&p(ns::HAS_MODEL)), None)
            .into_iter()
            .filter_map(|t| t.object.to_subject())
            .find(|b| self.store.contains(g, &Triple::new(b.clone(), p(rdf::TYPE), p(ns::HOCKETT_SHERBY))));
        let mut params = BTreeMap::new();
        if let Some(b) = &block {
            for t in self.store.triples_matching(Scope::Graph(g), Some(b), Some(&p(ns::HAS_PARAMETER)), None) {
                let Some(node) = t.object.to_subject() else { continue };
                let one = |pred: &str| {
                    self.store
                        .triples_matching(Scope::Graph(g), Some(&node), Some(&p(pred)), None)
                        .into_iter()
                        .next()
                        .and_then(|t| t.object.as_literal().cloned())
                };
                if let (Some(n), Some(v)) = (one(ns::PARAMETER_NAME), one(ns::VALUE).and_then(|l| l.as_f64())) {
                    params.insert(n.lexical().to_string(), v);
                }
            }
        }
        let model = match (params.get("sigma_i"), params.get("sigma_sat"), params.get("a"), params.get("p")) {
            (Some(&si), Some(&ss), Some(&a), Some(&pp)) => Some(HockettSherby {
                sigma_i: si,
                sigma_sat: ss,
                a,
                p: pp,
                rms: params.get("rms").copied().unwrap_or(0.0),
            }),
            _ => None,
        };
        Ok(CardData {
            name: item.name.clone(),
            properties,
            model,
            max_plastic_strain: params.get("max_plastic_strain").copied(),
        })
    }

    /// Exports a card through the first registered card-export app.
    pub fn export_card(&mut self, card: &str, template: CardTemplate) -> Result<RunRecord> {
        let app = self
            .state
            .apps
            .values()
            .find(|a| a.operation == Operation::Builtin(Builtin::CardExport))
            .map(|a| a.id.clone())
            .ok_or_else(|| CoreError::not_found("app with operation", "card-export"))?;
        let mut settings = BTreeMap::new();
        settings.insert("template".to_string(), Value::String(template.id().into()));
        self.run_app(&app, &[card.to_string()], settings)
    }

    /// Backward provenance from a k-item id or an entity IRI.
    pub fn trace(&self, target: &str) -> Result<TraceNode> {
        let root = if self.state.items.contains_key(target) {
            ns::kitem_iri(target)
        } else {
            let iri = Iri::new(target).map_err(|_| CoreError::not_found("entity", target))?;
            let known = self.in_provenance(&iri)
                || target
                    .strip_prefix("dsms://kitem/")
                    .and_then(|r| r.split_once("/attachment/"))
                    .is_some_and(|(item, file)| {
                        self.state.items.get(item).is_some_and(|i| i.attachment(&ns::decode_segment(file)).is_some())
                    });
            if !known {
                return Err(CoreError::not_found("entity", target));
            }
            iri
        };
        workflow::trace(&root, &ProvenanceView(&self.store))
    }

    /// Whether the activity of a run carries the failure marker.
    pub fn run_failed_in_graph(&self, run: &str) -> bool {
        self.store.contains(
            &p(ns::PROVENANCE_GRAPH),
            &Triple::new(ns::activity_iri(run), p(ns::RUN_STATUS), Term::Iri(p(ns::FAILED))),
        )
    }
}

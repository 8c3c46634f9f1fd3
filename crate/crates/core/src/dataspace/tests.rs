use super::*;
use crate::fixtures::{self, TensileSpecimen};
use crate::search::SearchQuery;
use crate::material::CardTemplate;
use crate::workflow::{RunStatus, TraceKind};

fn ds_with(ktype: &str) -> Dataspace {
    let mut ds = Dataspace::new();
    ds.create_ktype(KType { id: ktype.into(), name: ktype.into(), description: String::new(), form: None }).unwrap();
    ds
}

fn steel(s: &str) -> Iri {
    p(&format!("{}{s}", steel::NS))
}

/// Item with the tensile file attached and ingested.
fn tensile_item(ds: &mut Dataspace, name: &str, spec: &TensileSpecimen) -> String {
    let item = ds.create_kitem("dataset", name, "").unwrap();
    ds.attach(&item.id, "test.csv", spec.csv().into_bytes(), "text/csv").unwrap();
    ds.ingest(&item.id, "test.csv", &fixtures::tensile_mapping(), &fixtures::tensile_config()).unwrap();
    item.id
}

#[test]
fn kitem_ids_are_deterministic() {
    let mut a = ds_with("dataset");
    let mut b = ds_with("dataset");
    let x = a.create_kitem("dataset", "same", "").unwrap();
    let y = b.create_kitem("dataset", "same", "").unwrap();
    assert_eq!(x.id, y.id);
    // same name twice still yields distinct items
    let z = a.create_kitem("dataset", "same", "").unwrap();
    assert_ne!(x.id, z.id);
}

#[test]
fn create_kitem_validates() {
    let mut ds = ds_with("dataset");
    assert!(matches!(ds.create_kitem("nope", "x", ""), Err(CoreError::NotFound { .. })));
    assert!(matches!(ds.create_kitem("dataset", "  ", ""), Err(CoreError::Invalid(_))));
    assert!(ds.create_ktype(KType { id: "Bad Id".into(), name: "x".into(), description: String::new(), form: None }).is_err());
    assert!(matches!(
        ds.create_ktype(KType { id: "dataset".into(), name: "x".into(), description: String::new(), form: None }),
        Err(CoreError::Conflict(_))
    ));
}

#[test]
fn ktype_in_use_cannot_be_deleted() {
    let mut ds = ds_with("dataset");
    let item = ds.create_kitem("dataset", "a", "").unwrap();
    assert!(matches!(ds.delete_ktype("dataset"), Err(CoreError::Conflict(_))));
    ds.delete_kitem(&item.id).unwrap();
    ds.delete_ktype("dataset").unwrap();
}

#[test]
fn delete_removes_inbound_links() {
    let mut ds = ds_with("dataset");
    let a = ds.create_kitem("dataset", "a", "").unwrap();
    let b = ds.create_kitem("dataset", "b", "").unwrap();
    ds.link(&a.id, &b.id, None, Some("uses".into())).unwrap();
    assert_eq!(ds.kitem(&a.id).unwrap().links.len(), 1);
    ds.delete_kitem(&b.id).unwrap();
    assert!(ds.kitem(&a.id).unwrap().links.is_empty());
    let dangling = ds.store().triples_matching(Scope::Union, None, None, Some(&Term::Iri(b.iri())));
    assert!(dangling.is_empty());
    assert!(ds.reconcile().is_empty());
}

#[test]
fn annotate_requires_registered_concept() {
    let mut ds = ds_with("dataset");
    let a = ds.create_kitem("dataset", "a", "").unwrap();
    assert!(ds.annotate(&a.id, &p("https://example.org/Unknown")).is_err());
    ds.annotate(&a.id, &steel("TensileTest")).unwrap();
    ds.annotate(&a.id, &steel("TensileTest")).unwrap();
    assert_eq!(ds.kitem(&a.id).unwrap().annotations.len(), 1);
}

#[test]
fn tensile_ingest_reaches_level_four() {
    let mut ds = ds_with("dataset");
    let id = tensile_item(&mut ds, "DX56D", &TensileSpecimen::dx56d());
    assert_eq!(ds.integration_level(&id).unwrap(), IntegrationLevel::Level(4));
    let rows = ds.metadata_rows(&id).unwrap();
    assert_eq!(rows.len(), fixtures::TENSILE_METADATA_COUNT);
    let thickness = rows.iter().find(|r| r.key == "Probendicke").unwrap();
    assert_eq!(thickness.unit.as_deref(), Some("mm"));
    let grade = rows.iter().find(|r| r.key == "Werkstoff").unwrap();
    assert_eq!(grade.term_value.as_ref().map(Iri::as_str), Some("https://w3id.org/steel/ProcessOntology/DX56D"));
    assert_eq!(ds.column(&id, fixtures::FORCE_COLUMN).unwrap().len(), 260);

    ds.expand_columns(&id).unwrap();
    assert_eq!(ds.integration_level(&id).unwrap(), IntegrationLevel::Level(5));
}

#[test]
fn repeated_ingest_replaces_output() {
    let mut ds = ds_with("dataset");
    let id = tensile_item(&mut ds, "DX56D", &TensileSpecimen::dx56d());
    let before = ds.store().len();
    ds.ingest(&id, "test.csv", &fixtures::tensile_mapping(), &fixtures::tensile_config()).unwrap();
    assert_eq!(ds.metadata_rows(&id).unwrap().len(), fixtures::TENSILE_METADATA_COUNT);
    // one more provenance activity (5 triples, agent shared) and nothing else
    assert_eq!(ds.store().len(), before + 4);
}

#[test]
fn failed_ingest_commits_nothing() {
    let mut ds = ds_with("dataset");
    let item = ds.create_kitem("dataset", "a", "").unwrap();
    ds.attach(&item.id, "h.csv", fixtures::HARDNESS_CSV.as_bytes().to_vec(), "text/csv").unwrap();
    let before = ds.store().len();
    let mut config = fixtures::hardness_config();
    config.strict = true;
    // the tensile mapping does not know any hardness key
    let err = ds.ingest(&item.id, "h.csv", &fixtures::tensile_mapping(), &config).unwrap_err();
    assert!(matches!(err, CoreError::Unmapped(_)), "{err}");
    assert_eq!(ds.store().len(), before);
    assert!(ds.ingest_record(&item.id).is_none());
}

#[test]
fn attachments_are_checksummed() {
    let mut ds = ds_with("dataset");
    let item = ds.create_kitem("dataset", "a", "").unwrap();
    ds.attach(&item.id, "raw file.bin", vec![1, 2, 3], "application/octet-stream").unwrap();
    assert_eq!(ds.attachment_bytes(&item.id, "raw file.bin").unwrap(), &[1, 2, 3]);
    assert_eq!(ds.attachment_bytes_total(), 3);
    assert_eq!(ds.integration_level(&item.id).unwrap(), IntegrationLevel::Level(0));
    assert!(ds.attachment_bytes(&item.id, "other").is_err());
}

#[test]
fn form_submission_writes_metadata() {
    let mut ds = ds_with("testing-machine");
    let schema: crate::form::FormSchema = serde_json::from_value(fixtures::testing_machine_form()).unwrap();
    assert_eq!(ds.attach_form(schema.clone()).unwrap().version, 1);
    assert_eq!(ds.attach_form(schema).unwrap().version, 2);
    let item = ds.create_kitem("testing-machine", "Z50", "").unwrap();
    let mut values = BTreeMap::new();
    values.insert("name".to_string(), Value::String("ZwickRoell Kappa50DS".into()));
    values.insert("material".to_string(), Value::String(steel::DX56D.into()));
    assert_eq!(ds.submit_form(&item.id, "testing-machine", &values).unwrap(), 2);
    let rows = ds.metadata_rows(&item.id).unwrap();
    assert!(rows.iter().any(|r| r.value == Value::String("ZwickRoell Kappa50DS".into())));

    values.remove("name");
    assert!(ds.submit_form(&item.id, "testing-machine", &values).is_err());
}

#[test]
fn facet_search_is_conjunctive() {
    let mut ds = ds_with("dataset");
    let mut hits = Vec::new();
    for i in 0..3 {
        let item = ds.create_kitem("dataset", &format!("H340LAD test {i}"), "").unwrap();
        ds.annotate(&item.id, &steel("TensileTest")).unwrap();
        ds.annotate(&item.id, &steel("H340LAD")).unwrap();
        hits.push(item.id);
    }
    let only_grade = ds.create_kitem("dataset", "grade only", "").unwrap();
    ds.annotate(&only_grade.id, &steel("H340LAD")).unwrap();
    let q = SearchQuery {
        annotations: vec![steel("TensileTest"), steel("H340LAD")],
        ..Default::default()
    };
    let mut got: Vec<String> = ds.search(&q).unwrap().into_iter().map(|r| r.id).collect();
    assert_eq!(got.len(), 3);
    got.sort();
    hits.sort();
    assert_eq!(got, hits);
    assert_eq!(ds.search(&SearchQuery::text("grade")).unwrap()[0].id, only_grade.id);
}

#[test]
fn triggered_evaluation_and_export_trace() {
    let mut ds = ds_with("dataset");
    ds.register_app(fixtures::tensile_eval_app()).unwrap();
    ds.register_app(fixtures::card_export_app()).unwrap();
    let id = tensile_item(&mut ds, "DX56D", &TensileSpecimen::dx56d());
    assert_eq!(ds.pending_runs(), 1);
    let runs = ds.drain();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].status, RunStatus::Succeeded, "{}", runs[0].log);
    // a second drain does not rerun the same upload
    assert!(ds.drain().is_empty());

    let card_iri = runs[0].outputs[0].clone();
    let card = card_iri.as_str().strip_prefix("dsms://kitem/").unwrap().to_string();
    let data = ds.card_data(&card).unwrap();
    assert!((data.properties.e - 210_000.0).abs() / 210_000.0 < 0.02, "{:?}", data.properties);
    assert!(data.model.is_some());

    let export = ds.export_card(&card, CardTemplate::HsAnalytic).unwrap();
    assert_eq!(export.status, RunStatus::Succeeded, "{}", export.log);
    let file = export.outputs[0].as_str().to_string();
    let tree = ds.trace(&file).unwrap();
    let chain = tree.primary_chain();
    assert_eq!(
        chain,
        vec![
            Iri::new(file.as_str()).unwrap(),
            ns::activity_iri(&export.id),
            card_iri,
            ns::activity_iri(&runs[0].id),
            ns::kitem_iri(&id),
        ]
    );
    let settings = tree.settings_of(&ns::activity_iri(&runs[0].id));
    assert_eq!(settings.len(), 1);
    assert!(tree.chains().len() >= 2);
    assert_eq!(tree.children[0].kind, TraceKind::Activity);
}

#[test]
fn manual_run_rejects_bad_inputs() {
    let mut ds = ds_with("dataset");
    ds.register_app(fixtures::card_export_app()).unwrap();
    assert!(matches!(ds.register_app(fixtures::card_export_app()), Err(CoreError::Conflict(_))));
    let a = ds.create_kitem("dataset", "not a card", "").unwrap();
    let r = ds.run_app("card-export", &[a.id.clone()], BTreeMap::new());
    match r {
        Ok(rec) => assert_eq!(rec.status, RunStatus::Failed),
        Err(e) => assert!(matches!(e, CoreError::Invalid(_)), "{e}"),
    }
    assert!(ds.run_app("missing", &[a.id], BTreeMap::new()).is_err());
}

#[test]
fn catalog_sync_is_idempotent() {
    let mut ds = Dataspace::new();
    ds.add_connector(crate::connectors::ConnectorSpec {
        id: "kupfer".into(),
        endpoint: "file:///nonexistent".into(),
        ktype: "dataset".into(),
        interval: 0,
    })
    .unwrap();
    let catalog = serde_json::to_vec(&fixtures::kupfer_catalog()).unwrap();
    let first = ds.sync_catalog("kupfer", &catalog).unwrap();
    assert_eq!((first.created, first.updated, first.unchanged), (30, 0, 0));
    let second = ds.sync_catalog("kupfer", &catalog).unwrap();
    assert_eq!((second.created, second.updated, second.unchanged), (0, 0, 30));
    assert_eq!(ds.attachment_bytes_total(), 0);

    let mut changed = fixtures::kupfer_catalog();
    changed["result"]["results"][0]["title"] = Value::String("renamed".into());
    let third = ds.sync_catalog("kupfer", &serde_json::to_vec(&changed).unwrap()).unwrap();
    assert_eq!((third.created, third.updated, third.unchanged), (0, 1, 29));
    let item = ds.external_item("kupfer", "kupfer-cuzn38as-1").unwrap();
    assert_eq!(ds.kitem(item).unwrap().name, "renamed");
    assert_eq!(ds.kitems().len(), 30);
}

#[test]
fn save_and_open_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut ds = Dataspace::open(dir.path()).unwrap();
    ds.create_ktype(KType { id: "dataset".into(), name: "dataset".into(), description: String::new(), form: None }).unwrap();
    let id = tensile_item(&mut ds, "DX56D", &TensileSpecimen::dx56d());
    ds.save().unwrap();

    let back = Dataspace::open(dir.path()).unwrap();
    assert_eq!(back.kitems().len(), 1);
    assert_eq!(back.column(&id, fixtures::FORCE_COLUMN).unwrap(), ds.column(&id, fixtures::FORCE_COLUMN).unwrap());
    assert_eq!(back.integration_level(&id).unwrap(), IntegrationLevel::Level(4));
    for g in ds.store().graph_names() {
        let (a, b) = (ds.store().graph_triples(g), back.store().graph_triples(g));
        assert!(matspace_rdf::isomorphic(&a, &b), "graph {g}");
    }
    assert_eq!(back.search(&SearchQuery::text("DX56D")).unwrap().len(), 1);
}

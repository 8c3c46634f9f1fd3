use std::collections::BTreeMap;

use matspace_core::fixtures::{self, TensileSpecimen};
use matspace_core::form::FormSchema;
use matspace_core::search::{tokenize, SearchDoc, SearchIndex, SearchQuery};
use matspace_core::vocabulary::{mint_iri, slug, steel, Namespace};
use matspace_core::{ns, CoreError, Dataspace, IntegrationLevel, KType, Registry};
use matspace_rdf::store::Scope;
use matspace_rdf::vocab::{prov, rdf};
use matspace_rdf::{isomorphic, Iri, Subject, Term};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn steel_iri(local: &str) -> Iri {
    Iri::new(format!("{}{local}", steel::NS)).unwrap()
}

const CONCEPTS: [&str; 6] = ["TensileTest", "H340LAD", "DX56D", "HardnessTest", "Material", "SteelGrade"];

fn dataspace() -> Dataspace {
    let mut ds = Dataspace::new();
    for k in ["dataset", "specimen"] {
        ds.create_ktype(KType { id: k.into(), name: k.into(), description: String::new(), form: None }).unwrap();
    }
    ds
}

#[derive(Debug, Clone)]
enum Op {
    Create(usize, String),
    Link(usize, usize),
    Annotate(usize, usize),
    Delete(usize),
    Patch(usize, String),
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        3 => (0usize..2, "[a-z]{1,6}( [a-z]{1,6})?").prop_map(|(k, n)| Op::Create(k, n)),
        3 => (0usize..8, 0usize..8).prop_map(|(a, b)| Op::Link(a, b)),
        3 => (0usize..8, 0usize..CONCEPTS.len()).prop_map(|(a, c)| Op::Annotate(a, c)),
        1 => (0usize..8).prop_map(Op::Delete),
        1 => (0usize..8, "[a-z]{1,8}").prop_map(|(a, n)| Op::Patch(a, n)),
    ];
    prop::collection::vec(op, 1..30)
}

/// Applies operations, ignoring those rejected by validation; indices wrap
/// over the live items.
fn apply(ds: &mut Dataspace, ops: &[Op]) {
    let pick = |ds: &Dataspace, i: usize| -> Option<String> {
        let items = ds.kitems();
        (!items.is_empty()).then(|| items[i % items.len()].id.clone())
    };
    for op in ops {
        match op {
            Op::Create(k, n) => {
                ds.create_kitem(["dataset", "specimen"][*k], n, "").unwrap();
            }
            Op::Link(a, b) => {
                if let (Some(a), Some(b)) = (pick(ds, *a), pick(ds, *b)) {
                    let _ = ds.link(&a, &b, None, None);
                }
            }
            Op::Annotate(a, c) => {
                if let Some(a) = pick(ds, *a) {
                    ds.annotate(&a, &steel_iri(CONCEPTS[*c])).unwrap();
                }
            }
            Op::Delete(a) => {
                if let Some(a) = pick(ds, *a) {
                    ds.delete_kitem(&a).unwrap();
                }
            }
            Op::Patch(a, n) => {
                if let Some(a) = pick(ds, *a) {
                    ds.patch_kitem(&a, &matspace_core::dataspace::KItemPatch { name: Some(n.clone()), summary: None }).unwrap();
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn links_and_graph_stay_coherent(ops in ops()) {
        let mut ds = dataspace();
        apply(&mut ds, &ops);
        prop_assert_eq!(ds.reconcile(), Vec::<String>::new());
        // no triple points at a deleted item
        let live: std::collections::BTreeSet<Iri> = ds.kitems().iter().map(|i| i.iri()).collect();
        for t in ds.store().triples_matching(Scope::Union, None, None, None) {
            if let Term::Iri(o) = &t.object {
                if o.as_str().starts_with("dsms://kitem/") && !o.as_str().contains("/attachment/") {
                    prop_assert!(live.contains(o), "dangling {}", o);
                }
            }
        }
    }

    #[test]
    fn search_hits_are_live_items(ops in ops(), text in "[a-z]{1,6}") {
        let mut ds = dataspace();
        apply(&mut ds, &ops);
        let live: Vec<String> = ds.kitems().iter().map(|i| i.id.clone()).collect();
        for q in [SearchQuery::text(&text), SearchQuery { ktypes: vec!["dataset".into()], ..Default::default() }] {
            for hit in ds.search(&q).unwrap() {
                prop_assert!(live.contains(&hit.id));
            }
        }
    }

    #[test]
    fn adding_an_annotation_narrows_facets(ops in ops(), base in prop::collection::vec(0usize..CONCEPTS.len(), 0..3), extra in 0usize..CONCEPTS.len()) {
        let mut ds = dataspace();
        apply(&mut ds, &ops);
        let a: Vec<Iri> = base.iter().map(|c| steel_iri(CONCEPTS[*c])).collect();
        let mut b = a.clone();
        b.push(steel_iri(CONCEPTS[extra]));
        let query = |anns: Vec<Iri>| SearchQuery { ktypes: vec!["dataset".into(), "specimen".into()], annotations: anns, ..Default::default() };
        let wide: Vec<String> = ds.search(&query(a)).unwrap().into_iter().map(|h| h.id).collect();
        let narrow: Vec<String> = ds.search(&query(b)).unwrap().into_iter().map(|h| h.id).collect();
        prop_assert!(narrow.iter().all(|id| wide.contains(id)));
    }

    #[test]
    fn text_hits_share_a_query_token(docs in prop::collection::vec("[a-c]{1,3}( [a-c]{1,3}){0,4}", 1..12), query in "[a-c]{1,3}( [a-c]{1,3})?") {
        let mut index = SearchIndex::default();
        for (i, d) in docs.iter().enumerate() {
            index.index(SearchDoc::new(&format!("d{i:02}"), "dataset", vec![], d, "2026-01-01T00:00:00Z"));
        }
        let q = tokenize(&query);
        for hit in index.text_search(&query, None) {
            let doc = index.get(&hit.id).unwrap();
            prop_assert!(doc.tokens.iter().any(|t| q.contains(t)));
        }
    }

    #[test]
    fn ranking_ignores_insertion_order(docs in prop::collection::vec("[a-d]{1,3}( [a-d]{1,3}){0,4}", 1..12), query in "[a-d]{1,3}", seed in any::<u64>()) {
        let build = |order: &[usize]| {
            let mut index = SearchIndex::default();
            for &i in order {
                index.index(SearchDoc::new(&format!("d{i:02}"), "dataset", vec![], &docs[i], "2026-01-01T00:00:00Z"));
            }
            index.text_search(&query, None).into_iter().map(|h| (h.id, h.score.to_bits())).collect::<Vec<_>>()
        };
        let forward: Vec<usize> = (0..docs.len()).collect();
        let mut shuffled = forward.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(build(&forward), build(&shuffled));
    }

    #[test]
    fn minting_is_deterministic_and_collisions_raise(label in "[A-Za-zäöü][A-Za-zäöü0-9 ]{0,15}") {
        let ns = Namespace::new("https://example.org/vocab/").unwrap();
        let s = slug(&label);
        prop_assume!(!s.is_empty());
        let iri = mint_iri(&ns, &label).unwrap();
        prop_assert_eq!(&iri, &mint_iri(&ns, &label).unwrap());
        prop_assert!(s.is_ascii());
        let mut reg = Registry::new();
        reg.register_term(&ns, &label, None, None).unwrap();
        // a different label with the same slug collides
        let variant = format!(" {label} ");
        let collided = matches!(reg.register_term(&ns, &variant, None, None), Err(CoreError::Collision { .. }));
        prop_assert!(collided);
        prop_assert_eq!(reg.len(), 1);
    }
}

#[test]
fn seeded_registry_is_acyclic_and_valid() {
    let reg = Registry::seeded();
    for term in reg.terms() {
        Iri::new(term.iri.as_str()).unwrap();
        let mut seen = vec![term.iri.clone()];
        let mut cur = term.parent.clone();
        while let Some(p) = cur {
            assert!(!seen.contains(&p), "cycle through {p}");
            seen.push(p.clone());
            cur = reg.get(&p).expect("parent registered").parent.clone();
        }
    }
}

#[test]
fn level_never_drops_while_content_is_added() {
    let mut ds = dataspace();
    let id = ds.create_kitem("dataset", "levels", "").unwrap().id;
    let mut last = ds.integration_level(&id).unwrap();
    assert_eq!(last, IntegrationLevel::None);
    let mut check = |ds: &Dataspace| {
        let now = ds.integration_level(&id).unwrap();
        assert!(now.as_u8().map_or(-1, i16::from) >= last.as_u8().map_or(-1, i16::from), "{last:?} -> {now:?}");
        // prerequisites of the level hold
        let ev = ds.level_evidence(&id).unwrap();
        let flags = [ev.has_attachment, ev.file_type, ev.context, ev.typed_metadata, ev.fully_semantified && ev.column_referenced, ev.columns_expanded];
        if let Some(l) = now.as_u8() {
            assert!(flags[..=l as usize].iter().all(|f| *f));
        }
        last = now;
    };
    ds.attach(&id, "notes.txt", b"free text".to_vec(), "text/plain").unwrap();
    check(&ds);
    ds.annotate(&id, &steel_iri("H340LAD")).unwrap();
    check(&ds);
    ds.attach(&id, "test.csv", TensileSpecimen::dx56d().csv().into_bytes(), "text/csv").unwrap();
    check(&ds);
    ds.ingest(&id, "test.csv", &fixtures::tensile_mapping(), &fixtures::tensile_config()).unwrap();
    check(&ds);
    ds.annotate(&id, &steel_iri("TensileTest")).unwrap();
    check(&ds);
    ds.expand_columns(&id).unwrap();
    check(&ds);
    ds.attach(&id, "more.bin", vec![0; 8], "application/octet-stream").unwrap();
    check(&ds);
    let other = ds.create_kitem("dataset", "other", "").unwrap().id;
    ds.link(&id, &other, None, None).unwrap();
    check(&ds);
    assert_eq!(last, IntegrationLevel::Level(5));
}

fn machine_values(name: &str) -> BTreeMap<String, Value> {
    let mut v = BTreeMap::new();
    v.insert("name".to_string(), Value::String(name.into()));
    v.insert("operator".to_string(), Value::String("wes".into()));
    v
}

#[test]
fn form_submission_is_deterministic_and_spares_ingest_nodes() {
    let schema: FormSchema = serde_json::from_value(fixtures::testing_machine_form()).unwrap();
    let run = || {
        let mut ds = dataspace();
        ds.create_ktype(KType { id: "testing-machine".into(), name: "Machine".into(), description: String::new(), form: None }).unwrap();
        ds.attach_form(schema.clone()).unwrap();
        let id = ds.create_kitem("dataset", "machine", "").unwrap().id;
        ds.attach(&id, "test.csv", TensileSpecimen::dx56d().csv().into_bytes(), "text/csv").unwrap();
        ds.ingest(&id, "test.csv", &fixtures::tensile_mapping(), &fixtures::tensile_config()).unwrap();
        ds.submit_form(&id, "testing-machine", &machine_values("Z50")).unwrap();
        ds.submit_form(&id, "testing-machine", &machine_values("Z100")).unwrap();
        (ds, id)
    };
    let (a, id) = run();
    let (b, _) = run();
    let ga = a.store().graph_triples(&ns::kitem_iri(&id));
    assert!(isomorphic(&ga, &b.store().graph_triples(&ns::kitem_iri(&id))));

    let rows = a.metadata_rows(&id).unwrap();
    assert_eq!(rows.iter().filter(|r| r.origin.as_ref().map(Iri::as_str) == Some(ns::INGEST_ORIGIN)).count(), fixtures::TENSILE_METADATA_COUNT);
    let form_rows: Vec<_> = rows.iter().filter(|r| r.origin.as_ref().map(Iri::as_str) == Some(ns::FORM_ORIGIN)).collect();
    assert_eq!(form_rows.len(), 2);
    assert!(form_rows.iter().any(|r| r.value == Value::String("Z100".into())));
    for r in &form_rows {
        assert!(a.registry().contains(r.concept.as_ref().unwrap()));
    }
}

#[test]
fn provenance_outputs_have_one_generator_and_activities_use_something() {
    let mut ds = dataspace();
    ds.register_app(fixtures::tensile_eval_app()).unwrap();
    ds.register_app(fixtures::card_export_app()).unwrap();
    for n in 1..=2 {
        let id = ds.create_kitem("dataset", &format!("H340LAD {n}"), "").unwrap().id;
        ds.attach(&id, "t.csv", TensileSpecimen::h340lad(n).csv().into_bytes(), "text/csv").unwrap();
        ds.ingest(&id, "t.csv", &fixtures::tensile_mapping(), &fixtures::tensile_config()).unwrap();
    }
    let runs = ds.drain();
    assert_eq!(runs.len(), 2);
    for r in &runs {
        let card = r.outputs[0].as_str().strip_prefix("dsms://kitem/").unwrap().to_string();
        ds.export_card(&card, matspace_core::material::CardTemplate::TabulatedPlasticity).unwrap();
    }
    let g = Iri::new(ns::PROVENANCE_GRAPH).unwrap();
    let pred = |s: &str| Iri::new(s).unwrap();
    let triples = ds.store().graph_triples(&g);
    for t in triples.iter().filter(|t| t.predicate.as_str() == prov::WAS_GENERATED_BY) {
        let n = ds
            .store()
            .triples_matching(Scope::Graph(&g), Some(&t.subject), Some(&pred(prov::WAS_GENERATED_BY)), None)
            .len();
        assert_eq!(n, 1, "{:?}", t.subject);
    }
    let activities = ds.store().triples_matching(
        Scope::Graph(&g),
        None,
        Some(&pred(rdf::TYPE)),
        Some(&Term::Iri(pred(prov::ACTIVITY))),
    );
    assert!(activities.len() >= 6);
    for a in activities {
        let used = ds.store().triples_matching(Scope::Graph(&g), Some(&a.subject), Some(&pred(prov::USED)), None);
        assert!(!used.is_empty(), "{:?}", a.subject);
        assert!(matches!(a.subject, Subject::Iri(_)));
    }
}

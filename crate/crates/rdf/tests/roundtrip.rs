mod support;

use std::collections::BTreeMap;

use matspace_rdf::{isomorphic, parse_turtle, serialize_turtle, Iri, TurtleParser};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn prefixes() -> BTreeMap<String, Iri> {
    let mut p = BTreeMap::new();
    p.insert("ex".to_string(), Iri::new("http://e.org/").unwrap());
    p.insert("steel".to_string(), Iri::new("https://w3id.org/steel/ProcessOntology/").unwrap());
    p.insert("xsd".to_string(), Iri::new("http://www.w3.org/2001/XMLSchema#").unwrap());
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parse_serialize_is_isomorphic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = support::random_graph(&mut rng, 50);
        let text = serialize_turtle(&graph, &prefixes());
        let back = parse_turtle(&text).unwrap();
        prop_assert!(isomorphic(&graph, &back), "not isomorphic:\n{}", text);
    }

    #[test]
    fn serialization_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = support::random_graph(&mut rng, 50);
        let mut reversed = graph.clone();
        reversed.reverse();
        prop_assert_eq!(serialize_turtle(&graph, &prefixes()), serialize_turtle(&reversed, &prefixes()));
    }

    #[test]
    fn reserialization_is_a_fixed_point(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = support::random_graph(&mut rng, 30);
        let once = serialize_turtle(&graph, &prefixes());
        let doc = TurtleParser::new().parse(&once).unwrap();
        let twice = serialize_turtle(&doc.triples, &doc.prefixes);
        // blank labels are canonicalised; equal unless automorphic ties reorder them
        prop_assert!(isomorphic(&parse_turtle(&twice).unwrap(), &graph));
    }
}

#[test]
fn hand_written_document_round_trips() {
    let text = r#"
        @prefix ex: <http://e.org/> .
        @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
        ex:item ex:hasMetadatum [ a ex:BrinellHardness ; ex:value "106.89333758774"^^xsd:double ] ,
                                [ a ex:Material ; ex:value "CuZn38As" ] .
        ex:item ex:list ( 1 2 3 ) .
    "#;
    let triples = parse_turtle(text).unwrap();
    let out = serialize_turtle(&triples, &prefixes());
    assert!(isomorphic(&triples, &parse_turtle(&out).unwrap()));
}

//! Controlled vocabulary: IRI minting, a term registry and a simple taxonomy.

use std::collections::{BTreeMap, BTreeSet};

use matspace_rdf::vocab::{dcterms, prov, rdf, rdfs};
use matspace_rdf::{Iri, Literal, Subject, Term, Triple, TurtleParser};
use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::ns;
use crate::units::UnitTable;
use crate::{CoreError, Result};

/// Steel/copper process-ontology concepts used by the built-in fixtures.
pub mod steel {
    pub const NS: &str = "https://w3id.org/steel/ProcessOntology/";
    /// Annotation prefix as written in mapping files (no trailing separator).
    pub const PREFIX: &str = "https://w3id.org/steel/ProcessOntology";

    pub const TENSILE_TEST: &str = "https://w3id.org/steel/ProcessOntology/TensileTest";
    pub const HARDNESS_TEST: &str = "https://w3id.org/steel/ProcessOntology/HardnessTest";
    pub const MATERIAL: &str = "https://w3id.org/steel/ProcessOntology/Material";
    pub const STEEL_GRADE: &str = "https://w3id.org/steel/ProcessOntology/SteelGrade";
    pub const DX56D: &str = "https://w3id.org/steel/ProcessOntology/DX56D";
    pub const H340LAD: &str = "https://w3id.org/steel/ProcessOntology/H340LAD";
    pub const TESTING_MACHINE: &str = "https://w3id.org/steel/ProcessOntology/TestingMachine";
    pub const FORCE_MEASURING_DEVICE: &str = "https://w3id.org/steel/ProcessOntology/ForceMeasuringDevice";
    pub const TESTER: &str = "https://w3id.org/steel/ProcessOntology/Tester";
    pub const SPECIMEN_THICKNESS: &str = "https://w3id.org/steel/ProcessOntology/SpecimenThickness";
    pub const SPECIMEN_WIDTH: &str = "https://w3id.org/steel/ProcessOntology/SpecimenWidth";
    pub const ORIGINAL_GAUGE_LENGTH: &str = "https://w3id.org/steel/ProcessOntology/OriginalGaugeLength";
    pub const STANDARD_FORCE: &str = "https://w3id.org/steel/ProcessOntology/StandardForce";
    pub const EXTENSION: &str = "https://w3id.org/steel/ProcessOntology/Extension";
    pub const ELASTIC_MODULUS: &str = "https://w3id.org/steel/ProcessOntology/ElasticModulus";
    pub const YIELD_STRENGTH: &str = "https://w3id.org/steel/ProcessOntology/YieldStrength";
    pub const TENSILE_STRENGTH: &str = "https://w3id.org/steel/ProcessOntology/TensileStrength";
    pub const UNIFORM_ELONGATION: &str = "https://w3id.org/steel/ProcessOntology/UniformElongation";
    pub const BRINELL_HARDNESS: &str = "https://w3id.org/steel/ProcessOntology/BrinellHardness";
    pub const TEST_PIECE_COMPOSITION: &str = "https://w3id.org/steel/ProcessOntology/TestPieceComposition";
    pub const TEST_PIECE_THICKNESS: &str = "https://w3id.org/steel/ProcessOntology/TestPieceThickness";
    pub const COPPER_CONTENT: &str = "https://w3id.org/steel/ProcessOntology/CopperContent";

    /// The six copper alloys of the hardness corpus.
    pub const ALLOYS: [&str; 6] = ["CuZn38As", "CuZn21Si3P", "CuNi12Al3", "CuSn12", "CuSn6", "CuNiSi"];
}

/// Media-type concepts, children of `dsms:MediaType`.
pub mod media {
    pub const CSV: &str = "dsms://mediatype/CSV";
    pub const JSON: &str = "dsms://mediatype/JSON";
    pub const GRID: &str = "dsms://mediatype/Grid";
    pub const TURTLE: &str = "dsms://mediatype/Turtle";
    pub const PLAIN_TEXT: &str = "dsms://mediatype/PlainText";
}

/// Base IRI for minted terms; ends in `/` or `#`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Namespace(Iri);

impl Namespace {
    pub fn new(base: &str) -> Result<Self> {
        if !(base.ends_with('/') || base.ends_with('#')) {
            return Err(CoreError::Invalid(format!("namespace <{base}> must end in '/' or '#'")));
        }
        Ok(Namespace(Iri::new(base)?))
    }

    /// Accepts an annotation prefix with or without the trailing separator.
    pub fn from_prefix(prefix: &str) -> Result<Self> {
        if prefix.ends_with('/') || prefix.ends_with('#') {
            Self::new(prefix)
        } else {
            Self::new(&format!("{prefix}/"))
        }
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }

    pub fn iri(&self) -> &Iri {
        &self.0
    }
}

impl TryFrom<String> for Namespace {
    type Error = CoreError;
    fn try_from(value: String) -> Result<Self> {
        Namespace::new(&value)
    }
}

impl From<Namespace> for String {
    fn from(ns: Namespace) -> String {
        ns.0.into_string()
    }
}

/// UpperCamelCase ASCII slug: umlauts transliterated, diacritics stripped,
/// words split at non-alphanumerics, first letter of each word uppercased.
pub fn slug(label: &str) -> String {
    let mut transliterated = String::with_capacity(label.len());
    for c in label.chars() {
        match c {
            'ä' => transliterated.push_str("ae"),
            'ö' => transliterated.push_str("oe"),
            'ü' => transliterated.push_str("ue"),
            'Ä' => transliterated.push_str("Ae"),
            'Ö' => transliterated.push_str("Oe"),
            'Ü' => transliterated.push_str("Ue"),
            'ß' => transliterated.push_str("ss"),
            other => transliterated.push(other),
        }
    }
    let stripped: String = transliterated.nfd().filter(|c| !is_combining_mark(*c)).collect();
    let mut out = String::new();
    for word in stripped.split(|c: char| !c.is_ascii_alphanumeric()) {
        let mut chars = word.chars();
        if let Some(first) = chars.next() {
            out.push(first.to_ascii_uppercase());
            out.extend(chars);
        }
    }
    out
}

/// `namespace + slug(label)`.
pub fn mint_iri(namespace: &Namespace, label: &str) -> Result<Iri> {
    let s = slug(label);
    if s.is_empty() {
        return Err(CoreError::EmptySlug(label.to_string()));
    }
    Ok(Iri::new(format!("{}{s}", namespace.as_str()))?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabTerm {
    pub iri: Iri,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub namespace: Iri,
}

/// Registered vocabulary terms keyed by IRI.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Registry {
    terms: BTreeMap<Iri, VocabTerm>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Mints the IRI from `label` and registers the term.
    pub fn register_term(
        &mut self,
        namespace: &Namespace,
        label: &str,
        parent: Option<&Iri>,
        description: Option<&str>,
    ) -> Result<VocabTerm> {
        let iri = mint_iri(namespace, label)?;
        self.insert(VocabTerm {
            iri,
            label: label.to_string(),
            parent: parent.cloned(),
            description: description.map(str::to_string),
            namespace: namespace.iri().clone(),
        })
    }

    /// Registers a term under an externally fixed IRI (unit, PROV or utility
    /// predicate IRIs) whose local name is not a slug of the label.
    pub fn import_term(&mut self, iri: Iri, label: &str, parent: Option<&Iri>, description: Option<&str>) -> Result<VocabTerm> {
        let cut = iri.as_str().rfind(['/', '#']).map(|i| i + 1).unwrap_or(0);
        let namespace = Iri::new(&iri.as_str()[..cut]).unwrap_or_else(|_| iri.clone());
        self.insert(VocabTerm {
            iri,
            label: label.to_string(),
            parent: parent.cloned(),
            description: description.map(str::to_string),
            namespace,
        })
    }

    fn insert(&mut self, term: VocabTerm) -> Result<VocabTerm> {
        if let Some(existing) = self.terms.get(&term.iri) {
            return Err(CoreError::Collision {
                iri: term.iri.to_string(),
                existing: existing.label.clone(),
            });
        }
        if let Some(parent) = &term.parent {
            if !self.terms.contains_key(parent) {
                return Err(CoreError::not_found("parent term", parent.as_str()));
            }
            // A new IRI cannot already sit on an existing parent chain, but the
            // walk also guards imported registries.
            let mut cursor = Some(parent.clone());
            let mut seen = BTreeSet::new();
            while let Some(c) = cursor {
                if c == term.iri || !seen.insert(c.clone()) {
                    return Err(CoreError::Invalid(format!("parent chain of <{}> is cyclic", term.iri)));
                }
                cursor = self.terms.get(&c).and_then(|t| t.parent.clone());
            }
        }
        self.terms.insert(term.iri.clone(), term.clone());
        Ok(term)
    }

    pub fn get(&self, iri: &Iri) -> Option<&VocabTerm> {
        self.terms.get(iri)
    }

    pub fn contains(&self, iri: &Iri) -> bool {
        self.terms.contains_key(iri)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn label(&self, iri: &Iri) -> Option<&str> {
        self.terms.get(iri).map(|t| t.label.as_str())
    }

    pub fn terms(&self) -> impl Iterator<Item = &VocabTerm> {
        self.terms.values()
    }

    /// Case-insensitive substring search over label and description, ordered
    /// by label then IRI.
    pub fn find_terms(&self, query: &str) -> Vec<VocabTerm> {
        let needle = query.to_lowercase();
        let mut hits: Vec<VocabTerm> = self
            .terms
            .values()
            .filter(|t| {
                t.label.to_lowercase().contains(&needle)
                    || t.description.as_deref().is_some_and(|d| d.to_lowercase().contains(&needle))
            })
            .cloned()
            .collect();
        sort_terms(&mut hits);
        hits
    }

    /// Direct children of a registered term.
    pub fn children(&self, iri: &Iri) -> Result<Vec<VocabTerm>> {
        if !self.contains(iri) {
            return Err(CoreError::not_found("term", iri.as_str()));
        }
        let mut out: Vec<VocabTerm> = self.terms.values().filter(|t| t.parent.as_ref() == Some(iri)).cloned().collect();
        sort_terms(&mut out);
        Ok(out)
    }

    /// True when `iri` or one of its ancestors is `ancestor`.
    pub fn is_a(&self, iri: &Iri, ancestor: &str) -> bool {
        let mut cursor = self.terms.get(iri);
        let mut steps = 0;
        while let Some(t) = cursor {
            if t.iri.as_str() == ancestor {
                return true;
            }
            steps += 1;
            if steps > self.terms.len() {
                return false;
            }
            cursor = t.parent.as_ref().and_then(|p| self.terms.get(p));
        }
        false
    }

    pub fn is_media_type(&self, iri: &Iri) -> bool {
        iri.as_str() != ns::MEDIA_TYPE && self.is_a(iri, ns::MEDIA_TYPE)
    }

    /// `term a dsms:VocabularyTerm; rdfs:label; rdfs:subClassOf; dcterms:description`.
    pub fn to_triples(&self) -> Vec<Triple> {
        self.terms.values().flat_map(term_triples).collect()
    }

    pub fn to_turtle(&self) -> String {
        let mut prefixes: BTreeMap<String, Iri> = matspace_rdf::vocab::standard_prefixes()
            .into_iter()
            .map(|(p, n)| (p.to_string(), ns::iri(n)))
            .collect();
        prefixes.insert("dsms".into(), ns::iri(ns::DSMS));
        prefixes.insert("steel".into(), ns::iri(steel::NS));
        matspace_rdf::serialize_turtle(&self.to_triples(), &prefixes)
    }

    /// Imports every `dsms:VocabularyTerm` described in `text`, parents first.
    /// Terms already present with the same label are skipped.
    pub fn import_turtle(&mut self, text: &str) -> Result<usize> {
        let doc = TurtleParser::new().with_prefix("dsms", &ns::iri(ns::DSMS)).parse(text)?;
        let mut pending: BTreeMap<Iri, (String, Option<Iri>, Option<String>)> = BTreeMap::new();
        let vt = ns::iri(ns::VOCABULARY_TERM);
        for t in &doc.triples {
            if let (Subject::Iri(s), true, Term::Iri(o)) = (&t.subject, t.predicate.as_str() == rdf::TYPE, &t.object) {
                if *o == vt {
                    pending.entry(s.clone()).or_default();
                }
            }
        }
        for t in &doc.triples {
            let Subject::Iri(s) = &t.subject else { continue };
            let Some(entry) = pending.get_mut(s) else { continue };
            match (t.predicate.as_str(), &t.object) {
                (rdfs::LABEL, Term::Literal(l)) => entry.0 = l.lexical().to_string(),
                (rdfs::SUB_CLASS_OF, Term::Iri(p)) => entry.1 = Some(p.clone()),
                (dcterms::DESCRIPTION, Term::Literal(l)) => entry.2 = Some(l.lexical().to_string()),
                _ => {}
            }
        }
        let mut added = 0;
        while !pending.is_empty() {
            let ready: Vec<Iri> = pending
                .iter()
                .filter(|(_, (_, parent, _))| parent.as_ref().is_none_or(|p| !pending.contains_key(p)))
                .map(|(iri, _)| iri.clone())
                .collect();
            if ready.is_empty() {
                return Err(CoreError::Invalid("vocabulary import contains a parent cycle".into()));
            }
            for iri in ready {
                let (label, parent, description) = pending.remove(&iri).expect("ready term is pending");
                if let Some(existing) = self.terms.get(&iri) {
                    if existing.label == label {
                        continue;
                    }
                }
                if label.is_empty() {
                    return Err(CoreError::Invalid(format!("term <{iri}> has no label")));
                }
                self.import_term(iri, &label, parent.as_ref(), description.as_deref())?;
                added += 1;
            }
        }
        Ok(added)
    }

    /// Registry with units, PROV terms, `dsms:` utility terms, media types and
    /// the steel/copper concepts used by the fixtures.
    pub fn seeded() -> Self {
        let mut r = Registry::new();
        r.seed(&UnitTable::seeded()).expect("seed vocabulary is consistent");
        r
    }

    fn seed(&mut self, units: &UnitTable) -> Result<()> {
        let dsms = Namespace::new(ns::DSMS)?;
        let media_root = self.register_term(&dsms, "Media Type", None, Some("file format of an attachment"))?;
        let media_ns = Namespace::new(ns::MEDIA_TYPE_NS)?;
        for (label, desc) in [
            ("CSV", "comma or tab separated values"),
            ("JSON", "JSON document"),
            ("Grid", "spreadsheet-like cell grid"),
            ("Turtle", "RDF Turtle document"),
            ("Plain Text", "unstructured text"),
        ] {
            self.register_term(&media_ns, label, Some(&media_root.iri), Some(desc))?;
        }
        for label in ["KItem", "Vocabulary Term", "External Reference", "Settings", "Hockett Sherby", "Attachment"] {
            self.register_term(&dsms, label, None, None)?;
        }
        for (iri, label) in [
            (ns::KTYPE, "k-type"),
            (ns::HAS_METADATUM, "has metadatum"),
            (ns::VALUE, "value"),
            (ns::ORIGINAL_KEY, "original key"),
            (ns::ORIGINAL_UNIT, "original unit"),
            (ns::TERM_VALUE, "term value"),
            (ns::HAS_COLUMN, "has column"),
            (ns::COLUMN_NAME, "column name"),
            (ns::ACCESS_URL, "access URL"),
            (ns::ROW_INDEX, "row index"),
            (ns::IS_RELATED_TO, "is related to"),
            (ns::IS_INPUT_FOR, "is input for"),
            (ns::HAS_ANNOTATION, "has annotation"),
            (ns::FORMAT, "format"),
            (ns::ORIGIN, "origin"),
            (ns::FORM_ORIGIN, "form origin"),
            (ns::INGEST_ORIGIN, "ingest origin"),
            (ns::CONNECTOR_ORIGIN, "connector origin"),
            (ns::APP_ORIGIN, "app origin"),
            (ns::HAS_ATTACHMENT, "has attachment"),
            (ns::FORM_VERSION, "form version"),
            (ns::RUN_STATUS, "run status"),
            (ns::FAILED, "failed"),
            (ns::FILENAME, "filename"),
            (ns::CHECKSUM, "checksum"),
            (ns::TARGET, "target"),
            (ns::EXTERNAL_ID, "external id"),
            (ns::RESOURCE_URL, "resource URL"),
            (ns::HAS_MODEL, "has model"),
            (ns::HAS_PARAMETER, "has parameter"),
            (ns::PARAMETER_NAME, "parameter name"),
        ] {
            self.import_term(ns::iri(iri), label, None, None)?;
        }

        let prov_ns = Namespace::new(prov::NS)?;
        let agent = self.register_term(&prov_ns, "Agent", None, None)?;
        self.register_term(&prov_ns, "Software Agent", Some(&agent.iri), None)?;
        self.register_term(&prov_ns, "Activity", None, None)?;
        self.register_term(&prov_ns, "Entity", None, None)?;
        for (iri, label) in [
            (prov::USED, "used"),
            (prov::WAS_GENERATED_BY, "was generated by"),
            (prov::WAS_ASSOCIATED_WITH, "was associated with"),
            (prov::WAS_ATTRIBUTED_TO, "was attributed to"),
            (prov::WAS_DERIVED_FROM, "was derived from"),
            (prov::STARTED_AT_TIME, "started at time"),
            (prov::ENDED_AT_TIME, "ended at time"),
        ] {
            self.import_term(ns::iri(iri), label, None, None)?;
        }

        for u in units.units() {
            self.import_term(u.iri.clone(), &u.label, None, Some(&format!("unit {}", u.symbol)))?;
        }

        let steel = Namespace::new(steel::NS)?;
        let s = |r: &mut Registry, label: &str, parent: Option<&Iri>, desc: &str| {
            r.register_term(&steel, label, parent, Some(desc).filter(|d| !d.is_empty()))
        };
        let test = s(self, "Mechanical Test", None, "")?;
        s(self, "Tensile Test", Some(&test.iri), "uniaxial tensile test")?;
        s(self, "Hardness Test", Some(&test.iri), "indentation hardness test")?;
        let material = s(self, "Material", None, "material of a specimen")?;
        for alloy in steel::ALLOYS {
            s(self, alloy, Some(&material.iri), "copper alloy")?;
        }
        let grade = s(self, "Steel Grade", None, "designation of a steel grade")?;
        s(self, "DX56D", Some(&grade.iri), "cold-forming sheet steel")?;
        s(self, "H340LAD", Some(&grade.iri), "high-strength low-alloy sheet steel")?;
        for (label, desc) in [
            ("Testing Facility", "institution running the test"),
            ("Project Number", ""),
            ("Project Name", ""),
            ("Time Stamp", "date and time of the test"),
            ("Testing Machine", "machine used for testing"),
            ("Force Measuring Device", "load cell"),
            ("Displacement Transducer", "extensometer"),
            ("Test Standard", "standard followed by the test"),
            ("Specimen Type", ""),
            ("Tester", "person running the test"),
            ("Specimen Name", ""),
            ("Original Gauge Length", "initial extensometer gauge length"),
            ("Parallel Length", ""),
            ("Specimen Thickness", ""),
            ("Specimen Width", ""),
            ("Testing Rate", "crosshead speed"),
            ("Preload", ""),
            ("Temperature", ""),
            ("Remark", ""),
            ("Standard Force", "measured force"),
            ("Extension", "measured elongation"),
            ("Elastic Modulus", "Young's modulus"),
            ("Yield Strength", "0.2% offset yield strength"),
            ("Tensile Strength", "maximum engineering stress"),
            ("Uniform Elongation", "engineering strain at maximum stress"),
            ("Identifier", ""),
            ("Test Piece Identifier", ""),
            ("Test Piece Composition", "alloy of the test piece"),
            ("Test Piece Producer", ""),
            ("Repetition", ""),
            ("Indentation Diameter Horizontal", ""),
            ("Indentation Diameter Vertical", ""),
            ("Indentation Diameter Average", ""),
            ("Brinell Hardness", "hardness from a Brinell indentation"),
            ("Total Average Diameter", ""),
            ("Average Brinell Hardness", "mean hardness over repetitions"),
            ("Standard Deviation Brinell Hardness", ""),
            ("CRM Average Brinell Hardness", "reference material hardness"),
            ("CRM Standard Deviation Brinell Hardness", ""),
            ("CRM Uncertainty", ""),
            ("Testing Machine Uncertainty", ""),
            ("Measurement Resolution Uncertainty", ""),
            ("Permissible Uncertainty", ""),
            ("Brinell Hardness Uncertainty", ""),
            ("Test Piece Thickness", ""),
            ("Test Piece Processing", ""),
            ("Test Piece Preparation", ""),
            ("Indenter Identifier", ""),
            ("Copper Content", "copper mass fraction of an alloy"),
        ] {
            s(self, label, None, desc)?;
        }
        Ok(())
    }
}

fn sort_terms(terms: &mut [VocabTerm]) {
    terms.sort_by(|a, b| a.label.cmp(&b.label).then_with(|| a.iri.cmp(&b.iri)));
}

fn term_triples(t: &VocabTerm) -> Vec<Triple> {
    let mut out = vec![
        Triple::new(t.iri.clone(), ns::iri(rdf::TYPE), ns::iri(ns::VOCABULARY_TERM)),
        Triple::new(t.iri.clone(), ns::iri(rdfs::LABEL), Literal::string(&t.label)),
    ];
    if let Some(p) = &t.parent {
        out.push(Triple::new(t.iri.clone(), ns::iri(rdfs::SUB_CLASS_OF), p.clone()));
    }
    if let Some(d) = &t.description {
        out.push(Triple::new(t.iri.clone(), ns::iri(dcterms::DESCRIPTION), Literal::string(d)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steel_ns() -> Namespace {
        Namespace::new(steel::NS).unwrap()
    }

    #[test]
    fn minting() {
        let ns = steel_ns();
        assert_eq!(mint_iri(&ns, "DX56D").unwrap().as_str(), steel::DX56D);
        assert_eq!(mint_iri(&ns, "Brinell Hardness").unwrap().as_str(), steel::BRINELL_HARDNESS);
        assert!(matches!(mint_iri(&ns, "***"), Err(CoreError::EmptySlug(_))));
        assert_eq!(slug("Messlänge Standardweg"), "MesslaengeStandardweg");
        assert_eq!(slug("Prüfer"), "Pruefer");
        assert_eq!(slug("café crème"), "CafeCreme");
        assert_eq!(slug("FZ2 (L0=80_b0=20_R20)"), "FZ2L080B020R20");
        assert_eq!(slug("Straße"), "Strasse");
    }

    #[test]
    fn namespaces() {
        assert!(Namespace::new("https://e.org/x").is_err());
        assert_eq!(Namespace::from_prefix(steel::PREFIX).unwrap().as_str(), steel::NS);
    }

    #[test]
    fn register_and_collide() {
        let mut r = Registry::new();
        let t = r.register_term(&steel_ns(), "Tensile Test", None, None).unwrap();
        assert_eq!(t.iri.as_str(), steel::TENSILE_TEST);
        let err = r.register_term(&steel_ns(), "Tensile Test", None, None).unwrap_err();
        assert!(matches!(err, CoreError::Collision { ref existing, .. } if existing == "Tensile Test"));
        // a different label with the same slug also collides
        assert!(r.register_term(&steel_ns(), "tensile-test", None, None).is_err());
    }

    #[test]
    fn taxonomy() {
        let mut r = Registry::new();
        let m = r.register_term(&steel_ns(), "Material", None, None).unwrap();
        let c = r.register_term(&steel_ns(), "CuZn38As", Some(&m.iri), None).unwrap();
        assert_eq!(r.children(&m.iri).unwrap(), vec![c.clone()]);
        assert!(r.children(&c.iri).unwrap().is_empty());
        assert!(r.children(&ns::iri("https://e.org/none")).is_err());
        let missing = ns::iri("https://e.org/none");
        assert!(r.register_term(&steel_ns(), "Orphan", Some(&missing), None).is_err());
    }

    #[test]
    fn seeded_content() {
        let r = Registry::seeded();
        let material = ns::iri(steel::MATERIAL);
        assert_eq!(r.children(&material).unwrap().len(), 6);
        let hits = r.find_terms("hardness");
        assert!(hits.iter().any(|t| t.iri.as_str() == steel::BRINELL_HARDNESS));
        assert_eq!(r.find_terms("").len(), r.len());
        assert!(r.find_terms("zzz-no-match").is_empty());
        assert!(r.is_media_type(&ns::iri(media::CSV)));
        assert!(!r.is_media_type(&ns::iri(steel::TENSILE_TEST)));
        assert!(!r.is_media_type(&ns::iri(ns::MEDIA_TYPE)));
        for t in r.terms() {
            assert!(Iri::new(t.iri.as_str()).is_ok());
        }
    }

    #[test]
    fn find_order_is_label_then_iri() {
        let r = Registry::seeded();
        let hits = r.find_terms("test");
        let keys: Vec<_> = hits.iter().map(|t| (t.label.clone(), t.iri.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn turtle_round_trip() {
        let r = Registry::seeded();
        let text = r.to_turtle();
        let mut back = Registry::new();
        assert_eq!(back.import_turtle(&text).unwrap(), r.len());
        let shape = |r: &Registry| -> Vec<_> {
            r.terms().map(|t| (t.iri.clone(), t.label.clone(), t.parent.clone(), t.description.clone())).collect()
        };
        assert_eq!(shape(&back), shape(&r));
        // importing again adds nothing
        assert_eq!(back.import_turtle(&text).unwrap(), 0);
    }
}

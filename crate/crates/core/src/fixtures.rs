//! Deterministic fixture data for the steel and copper
//! use cases: a tensile test file with its mapping, Brinell hardness files,
//! a CKAN catalog and app specs. Used by tests, the acceptance suite and the
//! `fixtures` CLI command.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::ingest::{CsvDialect, IngestConfig, MappingFile, MappingFormat, TableMode};
use crate::material::HockettSherby;
use crate::vocabulary::{mint_iri, steel, Namespace};
use crate::workflow::{AppSpec, Builtin, Operation, Trigger};

fn steel_iri(label: &str) -> String {
    let ns = Namespace::new(steel::NS).expect("static namespace");
    mint_iri(&ns, label).expect("static label").into_string()
}

/// Header of the tensile test file: key, value, unit, mapped concept label.
/// The empty `Bemerkung` row is mapped but carries no value.
pub const TENSILE_HEADER: [(&str, &str, &str, &str); 20] = [
    ("Prüfinstitut", "Fraunhofer IWM", "", "Testing Facility"),
    ("Projektnummer", "142003", "", "Project Number"),
    ("Projektname", "3D-Blechmodelle2", "", "Project Name"),
    ("Datum/Uhrzeit", "44335.4", "", "Time Stamp"),
    ("Maschinendaten", "ZwickRoell Kappa50DS", "", "Testing Machine"),
    ("Kraftaufnehmer", "xForce K", "", "Force Measuring Device"),
    ("Wegaufnehmer", "makroXtens", "", "Displacement Transducer"),
    ("Prüfnorm", "DIN EN ISO 6892-1", "", "Test Standard"),
    ("Werkstoff", "DX56D", "", "Material"),
    ("Probentyp", "FZ2 (L0=80_b0=20_R20)", "", "Specimen Type"),
    ("Prüfer", "wes", "", "Tester"),
    ("Probenkennung 2", "DX56_D_FZ2_WR00_43", "", "Specimen Name"),
    ("Messlänge Standardweg", "80", "mm", "Original Gauge Length"),
    ("Versuchslänge", "120", "mm", "Parallel Length"),
    ("Probendicke", "1.55", "mm", "Specimen Thickness"),
    ("Probenbreite", "20.04", "mm", "Specimen Width"),
    ("Prüfgeschwindigkeit", "0.1", "mm/s", "Testing Rate"),
    ("Vorkraft", "2", "MPa", "Preload"),
    ("Temperatur", "22", "°C", "Temperature"),
    ("Bemerkung", "", "", "Remark"),
];

/// Non-empty header keys of [`TENSILE_HEADER`].
pub const TENSILE_METADATA_COUNT: usize = 19;

pub const FORCE_COLUMN: &str = "Standardkraft";
pub const EXTENSION_COLUMN: &str = "Standardweg";

/// Synthetic specimen from which a tensile file is generated.
#[derive(Debug, Clone, PartialEq)]
pub struct TensileSpecimen {
    pub material: String,
    pub specimen: String,
    pub gauge_length: f64,
    pub thickness: f64,
    pub width: f64,
    /// Young's modulus, MPa.
    pub e: f64,
    /// True flow curve of the plastic branch.
    pub hs: HockettSherby<f64>,
}

impl TensileSpecimen {
    /// The DX56D specimen with the geometry of the reference file header.
    pub fn dx56d() -> Self {
        TensileSpecimen {
            material: "DX56D".into(),
            specimen: "DX56_D_FZ2_WR00_43".into(),
            gauge_length: 80.0,
            thickness: 1.55,
            width: 20.04,
            e: 210_000.0,
            hs: HockettSherby::new(150.0, 330.0, 8.0, 0.8),
        }
    }

    pub fn h340lad(n: usize) -> Self {
        TensileSpecimen {
            material: "H340LAD".into(),
            specimen: format!("H340LAD_FZ2_{n:02}"),
            gauge_length: 80.0,
            thickness: 1.0,
            width: 20.0,
            e: 205_000.0,
            hs: HockettSherby::new(360.0 + n as f64, 560.0, 10.0, 0.7),
        }
    }

    /// Engineering (strain, stress) samples: 60 elastic points up to just
    /// below initial yield, then 200 points of the plastic flow curve
    /// converted back to engineering values.
    pub fn engineering_curve(&self) -> (Vec<f64>, Vec<f64>) {
        let (mut strain, mut stress) = (Vec::new(), Vec::new());
        for i in 0..60 {
            let s = self.hs.sigma_i * 0.995 * i as f64 / 59.0;
            strain.push(s / self.e);
            stress.push(s);
        }
        for k in 1..=200 {
            let eps_p = 0.35 * (k as f64 / 200.0).powi(2);
            let sigma_t = self.hs.flow_stress(eps_p);
            let eps = (eps_p + sigma_t / self.e).exp() - 1.0;
            strain.push(eps);
            stress.push(sigma_t / (1.0 + eps));
        }
        (strain, stress)
    }

    /// Tab separated, quoted header plus a force/extension table.
    pub fn csv(&self) -> String {
        let mut out = String::new();
        for (key, value, unit, _) in TENSILE_HEADER {
            let value = match key {
                "Werkstoff" => self.material.clone(),
                "Probenkennung 2" => self.specimen.clone(),
                "Messlänge Standardweg" => self.gauge_length.to_string(),
                "Probendicke" => self.thickness.to_string(),
                "Probenbreite" => self.width.to_string(),
                _ => value.to_string(),
            };
            if key == "Datum/Uhrzeit" {
                let _ = writeln!(out, "\"{key}\"\t\"{value}\"\t\"\"");
            } else if unit.is_empty() {
                let _ = writeln!(out, "\"{key}\"\t\"{value}\"");
            } else {
                let _ = writeln!(out, "\"{key}\"\t\"{value}\"\t\"{unit}\"");
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "\"{FORCE_COLUMN}\"\t\"{EXTENSION_COLUMN}\"");
        let _ = writeln!(out, "\"N\"\t\"mm\"");
        let area = self.thickness * self.width;
        let (strain, stress) = self.engineering_curve();
        for (e, s) in strain.iter().zip(&stress) {
            let _ = writeln!(out, "{:.4}\t{:.7}", s * area, e * self.gauge_length);
        }
        out
    }
}

/// Structured mapping covering every header key and both table columns.
pub fn tensile_mapping_json() -> String {
    let mut m = serde_json::Map::new();
    for (key, _, _, label) in TENSILE_HEADER {
        let annotation = if key == "Werkstoff" { steel::PREFIX } else { "" };
        m.insert(key.into(), json!({"key": key, "iri": steel_iri(label), "annotation": annotation}));
    }
    m.insert(FORCE_COLUMN.into(), json!({"key": FORCE_COLUMN, "iri": steel::STANDARD_FORCE, "annotation": ""}));
    m.insert(EXTENSION_COLUMN.into(), json!({"key": EXTENSION_COLUMN, "iri": steel::EXTENSION, "annotation": ""}));
    serde_json::to_string_pretty(&Value::Object(m)).expect("plain JSON")
}

pub fn tensile_mapping() -> MappingFile {
    crate::ingest::parse_mapping(tensile_mapping_json().as_bytes(), MappingFormat::Structured).expect("fixture mapping parses")
}

pub fn tensile_dialect() -> CsvDialect {
    CsvDialect {
        delimiter: '\t',
        table_header_rows: 2,
        table: TableMode::Required,
        ..CsvDialect::default()
    }
}

/// CSV ingest with the tensile test context annotation.
pub fn tensile_config() -> IngestConfig {
    IngestConfig::csv(tensile_dialect()).with_context(crate::ns::iri(steel::TENSILE_TEST))
}

/// The reference hardness measurement file.
pub const HARDNESS_CSV: &str = "Name,Value,
ID,1.0,
Test Piece Identifier,A,
Test Piece Composition,CuZn38As,
Test Piece Producer,Copperalliance,
Indentation Repetition,1.0,
Indentation Horizontal Diameter,0.86316,mm
Indentation Vertical Diameter,0.83682,mm
Indentation Average Diameter,0.84999,mm
Brinell Hardness,106.89333758774,HBW
Total Average Diameter,0.833716,mm
Average Brinell Hardness,111.476225984258,HBW
Standard Deviation of Brinell Hardness,6.71000409814515,HBW
CRM Average Brinell Hardness,141.390453006151,HBW
CRM Standard Deviation Brinell Hardness,0.549079651735196,HBW
CRM Uncertainty (UCRM),0.995,UnitOne
Testing Machine Uncertainty (Uh),0.625950802978124,UnitOne
Measurement Resolution Uncertainty (Ums),0.123289022262944,HBW
Permissible Uncertainty (Umpe),4.26,UnitOne
Brinell Hardness Uncertainty,5.45755974433978,HBW
Test Piece Thickness,8,mm
Test Piece Processing,casting and rolling,
Test Piece Preparation,smoothing polishing and cleaning,
Indenter Identifier,3688.0,
";

pub const HARDNESS_BRINELL: &str = "106.89333758774";

/// Hardness file key and concept label; the copper row only appears in
/// the corpus files.
pub const HARDNESS_KEYS: [(&str, &str); 24] = [
    ("ID", "Identifier"),
    ("Test Piece Identifier", "Test Piece Identifier"),
    ("Test Piece Composition", "Test Piece Composition"),
    ("Test Piece Producer", "Test Piece Producer"),
    ("Indentation Repetition", "Repetition"),
    ("Indentation Horizontal Diameter", "Indentation Diameter Horizontal"),
    ("Indentation Vertical Diameter", "Indentation Diameter Vertical"),
    ("Indentation Average Diameter", "Indentation Diameter Average"),
    ("Brinell Hardness", "Brinell Hardness"),
    ("Total Average Diameter", "Total Average Diameter"),
    ("Average Brinell Hardness", "Average Brinell Hardness"),
    ("Standard Deviation of Brinell Hardness", "Standard Deviation Brinell Hardness"),
    ("CRM Average Brinell Hardness", "CRM Average Brinell Hardness"),
    ("CRM Standard Deviation Brinell Hardness", "CRM Standard Deviation Brinell Hardness"),
    ("CRM Uncertainty (UCRM)", "CRM Uncertainty"),
    ("Testing Machine Uncertainty (Uh)", "Testing Machine Uncertainty"),
    ("Measurement Resolution Uncertainty (Ums)", "Measurement Resolution Uncertainty"),
    ("Permissible Uncertainty (Umpe)", "Permissible Uncertainty"),
    ("Brinell Hardness Uncertainty", "Brinell Hardness Uncertainty"),
    ("Test Piece Thickness", "Test Piece Thickness"),
    ("Test Piece Processing", "Test Piece Processing"),
    ("Test Piece Preparation", "Test Piece Preparation"),
    ("Indenter Identifier", "Indenter Identifier"),
    ("Copper Content", "Copper Content"),
];

pub fn hardness_mapping_json() -> String {
    let mut m = serde_json::Map::new();
    for (key, label) in HARDNESS_KEYS {
        let annotation = if key == "Test Piece Composition" { steel::PREFIX } else { "" };
        m.insert(key.into(), json!({"key": key, "iri": steel_iri(label), "annotation": annotation}));
    }
    serde_json::to_string_pretty(&Value::Object(m)).expect("plain JSON")
}

pub fn hardness_mapping() -> MappingFile {
    crate::ingest::parse_mapping(hardness_mapping_json().as_bytes(), MappingFormat::Structured).expect("fixture mapping parses")
}

/// Caption row skipped, no table.
pub fn hardness_dialect() -> CsvDialect {
    CsvDialect {
        metadata_header_rows: 1,
        table: TableMode::Absent,
        ..CsvDialect::default()
    }
}

pub fn hardness_config() -> IngestConfig {
    IngestConfig::csv(hardness_dialect()).with_context(crate::ns::iri(steel::HARDNESS_TEST))
}

/// One corpus measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct HardnessSample {
    pub alloy: &'static str,
    pub repetition: usize,
    /// Brinell hardness exactly as written to the file.
    pub brinell: String,
    /// Copper mass fraction, wt.%.
    pub copper: f64,
}

impl HardnessSample {
    pub fn brinell_value(&self) -> f64 {
        self.brinell.parse().expect("fixture numbers parse")
    }

    /// The reference file with composition, repetition and hardness
    /// replaced and a copper content row appended.
    pub fn csv(&self) -> String {
        let mut out = String::new();
        for line in HARDNESS_CSV.lines() {
            let key = line.split(',').next().unwrap_or_default();
            let replaced = match key {
                "Test Piece Composition" => format!("{key},{},", self.alloy),
                "Indentation Repetition" => format!("{key},{}.0,", self.repetition),
                "Brinell Hardness" => format!("{key},{},HBW", self.brinell),
                _ => line.to_string(),
            };
            out.push_str(&replaced);
            out.push('\n');
        }
        let _ = writeln!(out, "Copper Content,{},wt.%", self.copper);
        out
    }

    pub fn filename(&self) -> String {
        format!("{}-{}.csv", self.alloy, self.repetition)
    }
}

/// Copper content and mean Brinell hardness per alloy. CuNi12Al3, at about
/// 85 wt.% copper, has the highest mean.
pub const ALLOY_PROFILE: [(&str, f64, f64); 6] = [
    ("CuZn38As", 62.0, 110.0),
    ("CuZn21Si3P", 76.0, 152.0),
    ("CuNi12Al3", 85.0, 201.0),
    ("CuSn12", 88.0, 124.0),
    ("CuSn6", 94.0, 96.0),
    ("CuNiSi", 97.0, 171.0),
];

/// Deviations from the alloy mean per repetition; they do not sum to zero,
/// so the sample means differ from the profile means.
const SCATTER: [f64; 5] = [-3.11, 1.73, 0.42, 2.26, -0.97];

/// 30 measurements: 6 alloys times 5 repetitions. The first CuZn38As
/// repetition carries the reference hardness value.
pub fn kupfer_corpus() -> Vec<HardnessSample> {
    let mut out = Vec::new();
    for (alloy, copper, mean) in ALLOY_PROFILE {
        for (r, d) in SCATTER.iter().enumerate() {
            let brinell = if alloy == "CuZn38As" && r == 0 {
                HARDNESS_BRINELL.to_string()
            } else {
                format!("{}", ((mean + d * (1.0 + r as f64 * 0.1)) * 1e9).round() / 1e9)
            };
            out.push(HardnessSample { alloy, repetition: r + 1, brinell, copper });
        }
    }
    out
}

/// CKAN `package_search` response listing the corpus as 30 datasets.
pub fn kupfer_catalog() -> Value {
    let results: Vec<Value> = kupfer_corpus()
        .iter()
        .map(|s| {
            let id = format!("kupfer-{}-{}", s.alloy.to_lowercase(), s.repetition);
            json!({
                "id": id,
                "name": id,
                "title": format!("Brinell hardness {} repetition {}", s.alloy, s.repetition),
                "notes": format!("Brinell hardness test of {} ({} wt.% Cu)", s.alloy, s.copper),
                "resources": [
                    {"url": format!("https://repository.kupferdigital.example/dataset/{id}/{}", s.filename()), "format": "CSV"}
                ],
                "tags": [{"name": "hardness"}, {"name": s.alloy}]
            })
        })
        .collect();
    json!({"success": true, "result": {"count": results.len(), "results": results}})
}

/// Tensile evaluation fired by CSV uploads to tensile test items.
pub fn tensile_eval_app() -> AppSpec {
    AppSpec {
        id: "tensile-eval".into(),
        name: "Tensile test evaluation".into(),
        trigger: Trigger { glob: Some("*.csv".into()), annotations: vec![crate::ns::iri(steel::TENSILE_TEST)] },
        operation: Operation::Builtin(Builtin::TensileEval),
        settings_schema: None,
        default_settings: BTreeMap::new(),
        output_ktype: None,
    }
}

/// Manual-only card export.
pub fn card_export_app() -> AppSpec {
    let mut default_settings = BTreeMap::new();
    default_settings.insert("template".to_string(), Value::String("hs-analytic".into()));
    AppSpec {
        id: "card-export".into(),
        name: "Material card export".into(),
        trigger: Trigger::default(),
        operation: Operation::Builtin(Builtin::CardExport),
        settings_schema: None,
        default_settings,
        output_ktype: None,
    }
}

/// Form schema for testing machines.
pub fn testing_machine_form() -> Value {
    json!({
        "ktype": "testing-machine",
        "fields": [
            {"key": "name", "label": "Machine", "concept": steel::TESTING_MACHINE, "kind": "text", "required": true},
            {"key": "forceSensor", "label": "Force sensor", "concept": steel::FORCE_MEASURING_DEVICE, "kind": "text"},
            {"key": "operator", "label": "Operator", "concept": steel::TESTER, "kind": "text"},
            {"key": "material", "label": "Material", "concept": steel::STEEL_GRADE, "kind": "term-ref",
             "options": [steel::DX56D, steel::H340LAD]}
        ]
    })
}

//! Raw-file semantification: parse CSV, grid or JSON sources, resolve keys
//! against a mapping file and a unit table, and emit RDF plus a column
//! container.

mod container;
mod csv;
mod graph;
mod grid;
mod json;
mod mapping;
mod resolve;

pub use container::{read_container, write_container, ColumnContainer, ContainerColumn, ContainerManifest, ManifestColumn};
pub use csv::parse_csv;
pub use graph::{apply_template, build_flat_graph, expand_column, metadatum_triples, parse_template, ColumnRef, FlatGraph, Origin};
pub use grid::{parse_grid, CellAddress, Grid};
pub use json::parse_json;
pub use mapping::{parse_mapping, MappingEntry, MappingFile, MappingFormat};
pub use resolve::{parse_number, resolve, MetaValue, MetadataRecord, Resolution, ResolvedColumn};

use matspace_rdf::{Iri, Triple};
use serde::{Deserialize, Serialize};

use crate::knowledge::IntegrationLevel;
use crate::units::UnitTable;
use crate::Result;

/// One `key[,value[,unit]]` row of a raw file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMeta {
    pub key: String,
    pub value: String,
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawColumn {
    pub name: String,
    pub unit: Option<String>,
    pub values: Vec<f64>,
}

/// Parser output: metadata rows plus named numeric columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub metadata: Vec<RawMeta>,
    pub columns: Vec<RawColumn>,
}

/// Whether the CSV parser expects a column table after the metadata block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableMode {
    /// A table follows the first blank line if there is one.
    #[default]
    Auto,
    /// A blank line and a table must follow the metadata.
    Required,
    /// Every row is metadata.
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvDialect {
    pub delimiter: char,
    pub quote: char,
    pub decimal: char,
    /// Rows before the metadata block (e.g. a `Name,Value,` caption).
    pub metadata_header_rows: usize,
    /// Header rows of the table: 1 = names, 2 = names then units.
    pub table_header_rows: usize,
    pub table: TableMode,
    pub allow_repeated_keys: bool,
}

impl Default for CsvDialect {
    fn default() -> Self {
        CsvDialect {
            delimiter: ',',
            quote: '"',
            decimal: '.',
            metadata_header_rows: 0,
            table_header_rows: 1,
            table: TableMode::Auto,
            allow_repeated_keys: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMeta {
    pub key: String,
    pub cell: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GridLayout {
    #[serde(default)]
    pub metadata: Vec<GridMeta>,
    /// Rectangular range such as `A5:C7`; its first row holds column names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_decimal")]
    pub decimal: char,
}

fn default_delimiter() -> char {
    ','
}

fn default_decimal() -> char {
    '.'
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonMeta {
    pub key: String,
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct JsonPaths {
    #[serde(default)]
    pub metadata: Vec<JsonMeta>,
    #[serde(default)]
    pub columns: Vec<JsonMeta>,
}

/// Format-specific parser directives; the enum admits exactly one set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum Directives {
    Csv(CsvDialect),
    Grid(GridLayout),
    Json(JsonPaths),
}

impl Directives {
    pub fn name(&self) -> &'static str {
        match self {
            Directives::Csv(_) => "csv",
            Directives::Grid(_) => "grid",
            Directives::Json(_) => "json",
        }
    }

    pub fn decimal(&self) -> char {
        match self {
            Directives::Csv(d) => d.decimal,
            Directives::Grid(g) => g.decimal,
            Directives::Json(_) => '.',
        }
    }

    /// Media-type concept written as the file-type annotation.
    pub fn media_type(&self) -> &'static str {
        match self {
            Directives::Csv(_) => crate::vocabulary::media::CSV,
            Directives::Grid(_) => crate::vocabulary::media::GRID,
            Directives::Json(_) => crate::vocabulary::media::JSON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    #[serde(flatten)]
    pub directives: Directives,
    /// Turtle template with placeholders; absent means the flat graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    /// Context annotation written on the item, e.g. a test-type concept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<Iri>,
    #[serde(default)]
    pub strict: bool,
}

impl IngestConfig {
    pub fn csv(dialect: CsvDialect) -> Self {
        IngestConfig {
            directives: Directives::Csv(dialect),
            template: None,
            context: None,
            strict: false,
        }
    }

    pub fn with_context(mut self, context: Iri) -> Self {
        self.context = Some(context);
        self
    }
}

/// Dispatches to the parser for the configured format.
pub fn parse_raw(bytes: &[u8], directives: &Directives) -> Result<RawRecord> {
    match directives {
        Directives::Csv(d) => parse_csv(bytes, d),
        Directives::Grid(layout) => {
            let text = std::str::from_utf8(bytes).map_err(|e| crate::CoreError::Parse(e.to_string()))?;
            parse_grid(&Grid::from_delimited(text, layout.delimiter)?, layout)
        }
        Directives::Json(paths) => parse_json(bytes, paths),
    }
}

/// Everything an ingest run produces before it is committed.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub resolution: Resolution,
    pub triples: Vec<Triple>,
    pub container: Option<ColumnContainer>,
}

/// Pure part of an ingest: parse, resolve, build the item graph.
pub fn run_pipeline(
    bytes: &[u8],
    mapping: &MappingFile,
    config: &IngestConfig,
    units: &UnitTable,
    item_id: &str,
) -> Result<PipelineOutput> {
    let raw = parse_raw(bytes, &config.directives)?;
    let resolution = resolve(&raw, mapping, units, config.strict, config.directives.decimal())?;
    let container = if resolution.columns.is_empty() {
        None
    } else {
        Some(ColumnContainer {
            columns: resolution
                .columns
                .iter()
                .map(|c| ContainerColumn {
                    name: c.name.clone(),
                    concept: c.concept.clone(),
                    unit: c.unit.clone(),
                    values: c.values.clone(),
                })
                .collect(),
        })
    };
    let refs: Vec<ColumnRef> = resolution
        .columns
        .iter()
        .map(|c| ColumnRef {
            name: c.name.clone(),
            concept: c.concept.clone(),
            unit: c.unit.clone(),
        })
        .collect();
    let item = crate::ns::kitem_iri(item_id);
    let flat = build_flat_graph(&item, item_id, &resolution.records, &refs, Origin::Ingest);
    let mut triples = flat.triples.clone();
    if let Some(template) = &config.template {
        let template = parse_template(template)?;
        triples.extend(apply_template(&template, &resolution.records, &flat, &item)?);
    }
    Ok(PipelineOutput {
        resolution,
        triples,
        container,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub level: IntegrationLevel,
    pub metadata: usize,
    pub columns: usize,
    pub triples: usize,
    pub unmapped: Vec<String>,
    /// Name of the derived Turtle attachment.
    pub turtle: String,
}

/// What an ingest matched, kept on the item so later level checks can tell
/// whether every matched key was semantified.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestRecord {
    pub attachment: String,
    pub matched_keys: Vec<String>,
    pub matched_columns: Vec<String>,
    pub unmapped: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_shape() {
        let json = r#"{"format":"csv","delimiter":"\t","table_header_rows":2,"strict":true}"#;
        let c: IngestConfig = serde_json::from_str(json).unwrap();
        match &c.directives {
            Directives::Csv(d) => {
                assert_eq!(d.delimiter, '\t');
                assert_eq!(d.table_header_rows, 2);
                assert_eq!(d.decimal, '.');
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(c.strict);
        let back: IngestConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let j: IngestConfig = serde_json::from_str(r#"{"format":"json","metadata":[{"key":"material","path":"$.meta.material"}]}"#).unwrap();
        assert_eq!(j.directives.name(), "json");
        assert!(serde_json::from_str::<IngestConfig>(r#"{"format":"xlsx"}"#).is_err());
    }
}

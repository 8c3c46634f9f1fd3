//! `matspace` command line. Every mutating command goes through
//! [`ops::execute`], drains triggered runs, then saves.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use matspace_core::connectors::ConnectorSpec;
use matspace_core::dataspace::KItemPatch;
use matspace_core::form::FormSchema;
use matspace_core::ingest::{IngestConfig, MappingFormat};
use matspace_core::search::SearchQuery;
use matspace_core::workflow::AppSpec;
use matspace_core::{analysis, fixtures, ns, CoreError, Dataspace, KType, Result};
use matspace_rdf::Iri;
use serde_json::{json, Value};

use crate::ops::{self, Action, IngestRequest, LinkRequest, NewKItem, RunRequest, TermRequest};
use crate::state::{ApiConfig, Gateway};

#[derive(Debug, Parser)]
#[command(name = "matspace", version, about = "Materials dataspace: knowledge items, ingest, search, workflows")]
pub struct Cli {
    /// Directory holding the dataspace.
    #[arg(long, global = true, env = "MATSPACE_DATA", default_value = "matspace-data")]
    pub data_dir: PathBuf,
    /// Compact JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the REST gateway.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Bearer token required on mutating routes.
        #[arg(long, env = "MATSPACE_TOKEN")]
        token: Option<String>,
        /// Allowed CORS origin; repeatable, `*` for any.
        #[arg(long = "cors")]
        cors: Vec<String>,
        /// Reject unmapped keys on every ingest.
        #[arg(long)]
        strict: bool,
    },
    #[command(subcommand)]
    Ktype(KtypeCmd),
    #[command(subcommand)]
    Kitem(KitemCmd),
    /// Attach a file to an item and ingest it.
    Ingest {
        id: String,
        file: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long, value_enum, default_value = "structured")]
        mapping_format: FormatArg,
        /// Ingest configuration JSON (format directives, template, context).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    Search {
        #[arg(long)]
        text: Option<String>,
        #[arg(long)]
        ktype: Vec<String>,
        #[arg(long)]
        annotation: Vec<String>,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// SPARQL SELECT; reads stdin when the query is absent or `-`.
    Query { sparql: Option<String> },
    #[command(subcommand)]
    Vocab(VocabCmd),
    #[command(subcommand)]
    Form(FormCmd),
    #[command(subcommand)]
    App(AppCmd),
    #[command(subcommand)]
    Run(RunCmd),
    #[command(subcommand)]
    Card(CardCmd),
    #[command(subcommand)]
    Connector(ConnectorCmd),
    /// Integration level with per-level evidence.
    Level { id: String },
    /// Backward provenance of an item id or entity IRI.
    Trace { target: String },
    #[command(subcommand)]
    Analysis(AnalysisCmd),
    /// Write the bundled fixture files into a directory.
    Fixtures { dir: PathBuf },
    Health,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    TwoColumn,
    Structured,
}

impl From<FormatArg> for MappingFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::TwoColumn => MappingFormat::TwoColumn,
            FormatArg::Structured => MappingFormat::Structured,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum KtypeCmd {
    Create {
        id: String,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long)]
        form: Option<String>,
    },
    List,
    Delete { id: String },
}

#[derive(Debug, Subcommand)]
pub enum KitemCmd {
    Create {
        #[arg(long)]
        ktype: String,
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "")]
        summary: String,
    },
    Get { id: String },
    List {
        #[arg(long)]
        ktype: Option<String>,
    },
    Patch {
        id: String,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        summary: Option<String>,
    },
    Delete { id: String },
    Link {
        id: String,
        target: String,
        #[arg(long)]
        relation: Option<String>,
        #[arg(long)]
        label: Option<String>,
    },
    Annotate { id: String, iri: String },
    Attach {
        id: String,
        file: PathBuf,
        /// Stored filename; defaults to the file's name.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        media_type: Option<String>,
    },
    /// Item graph as Turtle.
    Graph { id: String },
    Linkgraph {
        id: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    Metadata { id: String },
    /// One container column as a JSON array.
    Column { id: String, name: String },
    /// Attach per-point RDF graphs for every container column.
    Expand { id: String },
}

#[derive(Debug, Subcommand)]
pub enum VocabCmd {
    Add {
        namespace: String,
        label: String,
        #[arg(long)]
        parent: Option<String>,
        #[arg(long)]
        description: Option<String>,
    },
    Search { query: String },
    /// Import terms from a Turtle file.
    Import { file: PathBuf },
    Children { iri: String },
}

#[derive(Debug, Subcommand)]
pub enum FormCmd {
    /// Attach a form schema (JSON file) to its k-type.
    Attach { file: PathBuf },
    Get { ktype: String },
    /// Submit values (JSON object file) through a k-type's form.
    Submit { id: String, ktype: String, file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum AppCmd {
    Register { file: PathBuf },
    List,
    Run {
        app: String,
        #[arg(long = "input")]
        inputs: Vec<String>,
        /// Settings JSON object file.
        #[arg(long)]
        settings: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RunCmd {
    Get { id: String },
    List,
    /// Execute queued triggered runs.
    Drain,
}

#[derive(Debug, Subcommand)]
pub enum CardCmd {
    Export {
        card: String,
        #[arg(long, default_value = "hs-analytic")]
        template: String,
        /// Also write the exported file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConnectorCmd {
    Add {
        id: String,
        endpoint: String,
        #[arg(long, default_value = "dataset")]
        ktype: String,
        #[arg(long, default_value_t = 0)]
        interval: u64,
    },
    Sync { id: String },
    List,
}

#[derive(Debug, Subcommand)]
pub enum AnalysisCmd {
    /// Mean Brinell hardness per alloy.
    Hardness,
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            1
        }
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CoreError::Invalid(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&read_file(path)?)?)
}

fn parse_iri(s: &str) -> Result<Iri> {
    Ok(Iri::new(s)?)
}

fn to_json<T: serde::Serialize>(v: T) -> Result<Output> {
    Ok(Output::Json(serde_json::to_value(v)?))
}

fn media_type_for(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("csv") => "text/csv",
        Some("tsv") | Some("txt") => "text/plain",
        Some("json") => "application/json",
        Some("ttl") => "text/turtle",
        Some("xlsx") => "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
        _ => "application/octet-stream",
    }
}

fn file_name(path: &Path) -> Result<String> {
    path.file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .ok_or_else(|| CoreError::Invalid(format!("no file name in {}", path.display())))
}

/// Executes, runs whatever got triggered, persists.
fn mutate(ds: &mut Dataspace, action: Action) -> Result<Value> {
    let trigger = action.may_trigger();
    let out = ops::execute(ds, action)?;
    if trigger {
        ds.drain();
    }
    ds.save()?;
    Ok(out)
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Command::Serve { bind, token, cors, strict } = cli.command {
        let config = ApiConfig { bind, data_dir: Some(cli.data_dir), strict_ingest: strict, cors_origins: cors, token };
        return serve(config);
    }
    if let Command::Fixtures { dir } = &cli.command {
        let written = write_fixtures(dir)?;
        return print(to_json(json!({ "written": written }))?, cli.json);
    }
    let mut ds = Dataspace::open(&cli.data_dir)?;
    let out = command(&mut ds, cli.command)?;
    print(out, cli.json)
}

fn print(out: Output, compact: bool) -> Result<()> {
    match out {
        Output::Text(t) => print!("{t}"),
        Output::Json(v) if compact => println!("{v}"),
        Output::Json(v) => println!("{}", serde_json::to_string_pretty(&v)?),
    }
    Ok(())
}

fn command(ds: &mut Dataspace, cmd: Command) -> Result<Output> {
    let out = match cmd {
        Command::Serve { .. } | Command::Fixtures { .. } => unreachable!("handled in dispatch"),
        Command::Ktype(c) => match c {
            KtypeCmd::Create { id, name, description, form } => {
                let name = name.unwrap_or_else(|| id.clone());
                Output::Json(mutate(ds, Action::CreateKType(KType { id, name, description, form }))?)
            }
            KtypeCmd::List => to_json(ds.ktypes())?,
            KtypeCmd::Delete { id } => Output::Json(mutate(ds, Action::DeleteKType(id))?),
        },
        Command::Kitem(c) => kitem(ds, c)?,
        Command::Ingest { id, file, mapping, mapping_format, config, strict } => {
            let filename = file_name(&file)?;
            let bytes = read_file(&file)?;
            let mut config: IngestConfig = read_json(&config)?;
            config.strict |= strict;
            let mapping = String::from_utf8(read_file(&mapping)?).map_err(|_| CoreError::Parse("mapping is not UTF-8".into()))?;
            let media_type = media_type_for(&file).to_string();
            mutate(ds, Action::Attach { id: id.clone(), filename: filename.clone(), bytes, media_type })?;
            let req = IngestRequest { attachment: filename, mapping, mapping_format: mapping_format.into(), config };
            Output::Json(mutate(ds, Action::Ingest(id, req))?)
        }
        Command::Search { text, ktype, annotation, limit } => {
            let annotations = annotation.iter().map(|a| parse_iri(a)).collect::<Result<Vec<_>>>()?;
            to_json(ds.search(&SearchQuery { text, ktypes: ktype, annotations, limit })?)?
        }
        Command::Query { sparql } => {
            let q = match sparql.as_deref() {
                None | Some("-") => {
                    let mut s = String::new();
                    std::io::stdin().read_to_string(&mut s)?;
                    s
                }
                Some(q) => q.to_string(),
            };
            Output::Json(ds.sparql(&q)?.to_json())
        }
        Command::Vocab(c) => match c {
            VocabCmd::Add { namespace, label, parent, description } => {
                let parent = parent.as_deref().map(parse_iri).transpose()?;
                Output::Json(mutate(ds, Action::AddTerm(TermRequest { namespace, label, parent, description }))?)
            }
            VocabCmd::Search { query } => to_json(ds.find_terms(&query))?,
            VocabCmd::Import { file } => {
                let text = String::from_utf8(read_file(&file)?).map_err(|_| CoreError::Parse("vocabulary is not UTF-8".into()))?;
                Output::Json(mutate(ds, Action::ImportVocabulary(text))?)
            }
            VocabCmd::Children { iri } => to_json(ds.children(&parse_iri(&iri)?)?)?,
        },
        Command::Form(c) => match c {
            FormCmd::Attach { file } => {
                let schema: FormSchema = read_json(&file)?;
                Output::Json(mutate(ds, Action::AttachForm(schema))?)
            }
            FormCmd::Get { ktype } => to_json(ds.form(&ktype)?)?,
            FormCmd::Submit { id, ktype, file } => {
                let values: BTreeMap<String, Value> = read_json(&file)?;
                Output::Json(mutate(ds, Action::SubmitForm { id, schema: ktype, values })?)
            }
        },
        Command::App(c) => match c {
            AppCmd::Register { file } => {
                let spec: AppSpec = read_json(&file)?;
                Output::Json(mutate(ds, Action::RegisterApp(spec))?)
            }
            AppCmd::List => to_json(ds.apps())?,
            AppCmd::Run { app, inputs, settings } => {
                let settings = match settings {
                    Some(f) => read_json(&f)?,
                    None => BTreeMap::new(),
                };
                Output::Json(mutate(ds, Action::RunApp(app, RunRequest { inputs, settings }))?)
            }
        },
        Command::Run(c) => match c {
            RunCmd::Get { id } => to_json(ds.run(&id)?)?,
            RunCmd::List => to_json(ds.runs())?,
            RunCmd::Drain => Output::Json(mutate(ds, Action::Drain)?),
        },
        Command::Card(CardCmd::Export { card, template, out }) => {
            let template = ops::parse_template(&template)?;
            let record = mutate(ds, Action::ExportCard(card, template))?;
            if let Some(out) = out {
                write_export(ds, &record, &out)?;
            }
            Output::Json(record)
        }
        Command::Connector(c) => match c {
            ConnectorCmd::Add { id, endpoint, ktype, interval } => {
                Output::Json(mutate(ds, Action::AddConnector(ConnectorSpec { id, endpoint, ktype, interval }))?)
            }
            ConnectorCmd::Sync { id } => {
                let bytes = ds.connector(&id)?.fetch()?;
                Output::Json(mutate(ds, Action::SyncCatalog(id, bytes))?)
            }
            ConnectorCmd::List => to_json(ds.connectors())?,
        },
        Command::Level { id } => {
            let level = ds.integration_level(&id)?;
            to_json(json!({ "level": level, "evidence": ds.level_evidence(&id)? }))?
        }
        Command::Trace { target } => to_json(ds.trace(&target)?)?,
        Command::Analysis(AnalysisCmd::Hardness) => to_json(analysis::hardness_by_alloy(ds)?)?,
        Command::Health => to_json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION"), "stats": ds.stats() }))?,
    };
    Ok(out)
}

fn kitem(ds: &mut Dataspace, c: KitemCmd) -> Result<Output> {
    Ok(match c {
        KitemCmd::Create { ktype, name, summary } => Output::Json(mutate(ds, Action::CreateKItem(NewKItem { ktype, name, summary }))?),
        KitemCmd::Get { id } => Output::Json(ops::kitem_view(ds, &id)?),
        KitemCmd::List { ktype } => {
            let items: Vec<_> = ds.kitems().into_iter().filter(|k| ktype.as_ref().is_none_or(|t| &k.ktype == t)).collect();
            to_json(items)?
        }
        KitemCmd::Patch { id, name, summary } => Output::Json(mutate(ds, Action::PatchKItem(id, KItemPatch { name, summary }))?),
        KitemCmd::Delete { id } => Output::Json(mutate(ds, Action::DeleteKItem(id))?),
        KitemCmd::Link { id, target, relation, label } => {
            let relation = relation.as_deref().map(parse_iri).transpose()?;
            Output::Json(mutate(ds, Action::Link(id, LinkRequest { target, relation, label }))?)
        }
        KitemCmd::Annotate { id, iri } => Output::Json(mutate(ds, Action::Annotate(id, parse_iri(&iri)?))?),
        KitemCmd::Attach { id, file, name, media_type } => {
            let filename = match name {
                Some(n) => n,
                None => file_name(&file)?,
            };
            let media_type = media_type.unwrap_or_else(|| media_type_for(&file).to_string());
            let bytes = read_file(&file)?;
            Output::Json(mutate(ds, Action::Attach { id, filename, bytes, media_type })?)
        }
        KitemCmd::Graph { id } => Output::Text(ds.kitem_turtle(&id)?),
        KitemCmd::Linkgraph { id, depth } => to_json(ds.link_graph(&id, depth)?)?,
        KitemCmd::Metadata { id } => to_json(ds.metadata_rows(&id)?)?,
        KitemCmd::Column { id, name } => to_json(ds.column(&id, &name)?)?,
        KitemCmd::Expand { id } => Output::Json(mutate(ds, Action::ExpandColumns(id))?),
    })
}

/// Copies the attachment produced by an export run to `out`.
fn write_export(ds: &Dataspace, record: &Value, out: &Path) -> Result<()> {
    let outputs = record["outputs"].as_array().cloned().unwrap_or_default();
    for o in outputs.iter().filter_map(Value::as_str) {
        let Some(rest) = o.strip_prefix("dsms://kitem/") else { continue };
        let Some((id, file)) = rest.split_once("/attachment/") else { continue };
        let bytes = ds.attachment_bytes(id, &ns::decode_segment(file))?;
        std::fs::write(out, bytes)?;
        return Ok(());
    }
    Err(CoreError::Operation(format!("export run produced no file: {}", record["log"])))
}

fn serve(config: ApiConfig) -> Result<()> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .try_init();
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let bind = config.bind.clone();
        let gw = Gateway::open(config)?;
        tokio::spawn(gw.clone().trigger_worker());
        tokio::spawn(gw.clone().connector_poller());
        let listener = tokio::net::TcpListener::bind(&bind).await?;
        tracing::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, crate::api::router(gw))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

/// Writes the bundled fixtures; returns the file names written.
pub fn write_fixtures(dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir.join("kupfer"))?;
    let pretty = |v: &Value| serde_json::to_string_pretty(v).expect("fixture JSON serializes");
    let mut files: Vec<(String, String)> = vec![
        ("dx56d.csv".into(), fixtures::TensileSpecimen::dx56d().csv()),
        ("tensile-mapping.json".into(), fixtures::tensile_mapping_json()),
        ("tensile-config.json".into(), pretty(&serde_json::to_value(fixtures::tensile_config())?)),
        ("hardness.csv".into(), fixtures::HARDNESS_CSV.to_string()),
        ("hardness-mapping.json".into(), fixtures::hardness_mapping_json()),
        ("hardness-config.json".into(), pretty(&serde_json::to_value(fixtures::hardness_config())?)),
        ("kupfer-catalog.json".into(), pretty(&fixtures::kupfer_catalog())),
        ("tensile-eval-app.json".into(), pretty(&serde_json::to_value(fixtures::tensile_eval_app())?)),
        ("card-export-app.json".into(), pretty(&serde_json::to_value(fixtures::card_export_app())?)),
        ("testing-machine-form.json".into(), pretty(&fixtures::testing_machine_form())),
    ];
    for n in 1..=3 {
        files.push((format!("h340lad-{n}.csv"), fixtures::TensileSpecimen::h340lad(n).csv()));
    }
    for s in fixtures::kupfer_corpus() {
        files.push((format!("kupfer/{}", s.filename()), s.csv()));
    }
    let mut written = Vec::new();
    for (name, body) in files {
        std::fs::write(dir.join(&name), body)?;
        written.push(name);
    }
    Ok(written)
}

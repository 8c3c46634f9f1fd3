//! The `matspace` binary: exit codes, output shapes, persistence between calls.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use matspace_core::fixtures;
use serde_json::Value;

struct Cli {
    data: tempfile::TempDir,
    fx: tempfile::TempDir,
}

impl Cli {
    fn new() -> Self {
        let cli = Cli { data: tempfile::tempdir().unwrap(), fx: tempfile::tempdir().unwrap() };
        let out = cli.run(&["fixtures", cli.fx.path().to_str().unwrap()]);
        assert!(out.status.success());
        cli
    }

    fn fx(&self, name: &str) -> String {
        self.fx.path().join(name).to_string_lossy().into_owned()
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_matspace"))
            .arg("--data-dir")
            .arg(self.data.path())
            .arg("--json")
            .args(args)
            .output()
            .unwrap()
    }

    fn json(&self, args: &[&str]) -> Value {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    }

    fn ingested(&self) -> String {
        self.json(&["ktype", "create", "dataset"]);
        let id = self.json(&["kitem", "create", "--ktype", "dataset", "--name", "DX56D"])["id"].as_str().unwrap().to_string();
        let report = self.json(&[
            "ingest",
            &id,
            &self.fx("dx56d.csv"),
            "--mapping",
            &self.fx("tensile-mapping.json"),
            "--config",
            &self.fx("tensile-config.json"),
        ]);
        assert_eq!(report["level"], 4);
        id
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn fixtures_are_written() {
    let cli = Cli::new();
    for f in ["dx56d.csv", "hardness.csv", "kupfer-catalog.json", "testing-machine-form.json", "kupfer/CuNi12Al3-1.csv"] {
        assert!(Path::new(&cli.fx(f)).exists(), "{f}");
    }
    assert_eq!(std::fs::read_to_string(cli.fx("hardness.csv")).unwrap(), fixtures::HARDNESS_CSV);
}

#[test]
fn exit_codes() {
    let cli = Cli::new();
    assert_eq!(code(&cli.run(&["health"])), 0);
    let missing = cli.run(&["kitem", "get", "nope"]);
    assert_eq!(code(&missing), 1);
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error[not-found]"));
    assert_eq!(code(&cli.run(&["frobnicate"])), 2);
    assert_eq!(code(&cli.run(&["kitem", "create", "--name", "x"])), 2);
    let bad = cli.run(&["query", "SELECT nothing"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("query-error"));
}

#[test]
fn ingest_then_inspect_across_invocations() {
    let cli = Cli::new();
    let id = cli.ingested();
    let column = cli.json(&["kitem", "column", &id, fixtures::FORCE_COLUMN]);
    assert_eq!(column.as_array().unwrap().len(), fixtures::TensileSpecimen::dx56d().engineering_curve().0.len());
    let item = cli.json(&["kitem", "get", &id]);
    assert_eq!(item["metadata"].as_array().unwrap().len(), fixtures::TENSILE_METADATA_COUNT);

    let out = cli.run(&["kitem", "graph", &id]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("termValue"));
    assert_eq!(cli.json(&["kitem", "expand", &id])["triples"].as_u64().map(|n| n > 0), Some(true));
    assert_eq!(cli.json(&["level", &id])["level"], 5);
}

#[test]
fn query_reads_stdin() {
    let cli = Cli::new();
    cli.ingested();
    let mut child = Command::new(env!("CARGO_BIN_EXE_matspace"))
        .arg("--data-dir")
        .arg(cli.data.path())
        .args(["query", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"SELECT ?n WHERE { ?n dsms:termValue steel:DX56D }").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["bindings"].as_array().unwrap().len(), 1);
}

#[test]
fn triggered_evaluation_and_card_export() {
    let cli = Cli::new();
    cli.json(&["app", "register", &cli.fx("tensile-eval-app.json")]);
    cli.json(&["app", "register", &cli.fx("card-export-app.json")]);
    cli.ingested();
    let runs = cli.json(&["run", "list"]);
    assert_eq!(runs.as_array().unwrap().len(), 1, "the CLI drains triggered runs itself");
    let card = runs[0]["outputs"][0].as_str().unwrap().strip_prefix("dsms://kitem/").unwrap().to_string();

    let out = cli.fx("card.inp");
    let export = cli.json(&["card", "export", &card, "--out", &out]);
    assert_eq!(export["status"], "succeeded");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.is_empty());
    let trace = cli.json(&["trace", export["outputs"][0].as_str().unwrap()]);
    assert_eq!(trace["children"][0]["kind"], "activity");
    assert_eq!(code(&cli.run(&["card", "export", &card, "--template", "nope"])), 1);
}

#[test]
fn search_vocab_form_and_connector() {
    let cli = Cli::new();
    cli.json(&["ktype", "create", "testing-machine"]);
    cli.json(&["form", "attach", &cli.fx("testing-machine-form.json")]);
    let id = cli.json(&["kitem", "create", "--ktype", "testing-machine", "--name", "Zwick Z50"])["id"].as_str().unwrap().to_string();
    let values = cli.fx("values.json");
    std::fs::write(&values, r#"{"name": "Kappa50DS"}"#).unwrap();
    assert_eq!(cli.json(&["form", "submit", &id, "testing-machine", &values])["nodes"], 1);
    assert_eq!(cli.json(&["search", "--text", "zwick"]).as_array().unwrap().len(), 1);

    let term = cli.json(&["vocab", "add", "https://example.org/lab/", "Drop Tower"]);
    assert_eq!(term["iri"], "https://example.org/lab/DropTower");
    assert_eq!(cli.json(&["vocab", "search", "drop"]).as_array().unwrap().len(), 1);

    cli.json(&["ktype", "create", "dataset"]);
    cli.json(&["connector", "add", "kupfer", &cli.fx("kupfer-catalog.json")]);
    assert_eq!(cli.json(&["connector", "sync", "kupfer"])["created"], 30);
    assert_eq!(cli.json(&["connector", "sync", "kupfer"])["unchanged"], 30);
    assert_eq!(cli.json(&["health"])["stats"]["kitems"], 31);
}

#[test]
fn hardness_analysis_over_the_corpus() {
    let cli = Cli::new();
    cli.json(&["ktype", "create", "hardness-test"]);
    for s in fixtures::kupfer_corpus() {
        let id = cli.json(&["kitem", "create", "--ktype", "hardness-test", "--name", &s.filename()])["id"].as_str().unwrap().to_string();
        cli.json(&[
            "ingest",
            &id,
            &cli.fx(&format!("kupfer/{}", s.filename())),
            "--mapping",
            &cli.fx("hardness-mapping.json"),
            "--config",
            &cli.fx("hardness-config.json"),
        ]);
    }
    let summary = cli.json(&["analysis", "hardness"]);
    let hardest: Vec<&Value> = summary.as_array().unwrap().iter().filter(|r| r["hardest"] == true).collect();
    assert_eq!(hardest.len(), 1);
    assert_eq!(hardest[0]["alloy"], "CuNi12Al3");
}

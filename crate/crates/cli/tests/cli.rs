use std::path::Path;
use std::process::{Command, Output};

use fbdump::pipeline::{DedupReport, PipelineError, PrepareReport};
use fbdump::slicer::RunManifest;

fn run(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbdump"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FBDUMP_INPUT")
        .env_remove("FBDUMP_OUT")
        .env_remove("FBDUMP_WORKERS")
        .output()
        .expect("spawn fbdump")
}

fn ok(cwd: &Path, args: &[&str]) -> String {
    let out = run(cwd, args);
    assert!(out.status.success(), "fbdump {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(cwd: &Path, args: &[&str]) -> (i32, String) {
    let out = run(cwd, args);
    (out.status.code().expect("exit code"), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// A generated dump sliced into `run/`.
fn sliced(total: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "--total", total, "--seed", "4", "--out", "gen"]);
    ok(dir.path(), &["prepare", "--input", "gen/dump.nt", "--out", "run"]);
    ok(dir.path(), &["slice", "--out", "run"]);
    dir
}

#[test]
fn stats_before_slice_is_a_prerequisite_error() {
    let dir = tempfile::tempdir().unwrap();
    let (c, err) = code(dir.path(), &["stats", "--out", "empty"]);
    assert_eq!(c, PipelineError::PREREQUISITE);
    assert!(err.contains("run slice first"), "{err}");
    assert_eq!(code(dir.path(), &["dedup", "--out", "empty"]).0, PipelineError::PREREQUISITE);
    assert_eq!(code(dir.path(), &["schema", "--domain", "music", "--out", "empty"]).0, PipelineError::PREREQUISITE);
    assert_eq!(code(dir.path(), &["slice", "--out", "empty"]).0, PipelineError::PREREQUISITE);
    assert_eq!(code(dir.path(), &["report", "--out", "empty"]).0, PipelineError::PREREQUISITE);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["bogus"][..],
        &["prepare"],
        &["--workers", "0", "prepare", "--input", "x"],
        &["--sort-mem", "10", "stats"],
        &["schema", "--domain", "a.b"],
        &["generate", "--preset", "bicycles", "--spec", "x.json"],
        &["--granularity", "type", "slice"],
    ] {
        assert_eq!(code(dir.path(), args).0, PipelineError::USAGE, "{args:?}");
    }
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(dir.path(), &["prepare", "--input", "nope.nt"]).0, PipelineError::IO);
}

#[test]
fn foreign_predicate_in_name_slice_is_a_contract_error() {
    let dir = sliced("20000");
    let ids: RunManifest = json(dir.path().join("run/identifiers/manifest.json"));
    let name = ids.by_label("name").unwrap().path.clone().unwrap();
    let path = dir.path().join("run/identifiers").join(name);
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("/m.0x\t/music.artist.label\t/m.0y\n");
    std::fs::write(&path, text).unwrap();
    assert_eq!(code(dir.path(), &["stats", "--out", "run"]).0, PipelineError::CONTRACT);
}

#[test]
fn prepare_shrinks_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "--total", "20000", "--out", "gen"]);
    ok(dir.path(), &["prepare", "--input", "gen/dump.nt", "--out", "a"]);
    ok(dir.path(), &["prepare", "--input", "a/normalized.tsv", "--out", "b"]);
    let a: PrepareReport = json(dir.path().join("a/prepare.json"));
    assert_eq!(a.output_lines, 20_000);
    assert!(a.output_bytes < a.input_bytes);
    let (na, nb) = (dir.path().join("a/normalized.tsv"), dir.path().join("b/normalized.tsv"));
    assert_eq!(std::fs::read(na).unwrap(), std::fs::read(nb).unwrap());
}

#[test]
fn gzip_and_slashes_round_trip_through_prepare() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--gzip", "generate", "--total", "5000", "--out", "gen"]);
    ok(dir.path(), &["--style", "slashes", "prepare", "--input", "gen/dump.nt.gz", "--out", "s"]);
    let text = std::fs::read_to_string(dir.path().join("s/normalized.tsv")).unwrap();
    assert!(text.lines().any(|l| l.contains("/type/object/name")));
    assert!(!text.contains("/type.object.name"));
    ok(dir.path(), &["--gzip", "prepare", "--input", "s/normalized.tsv", "--out", "d"]);
    ok(dir.path(), &["prepare", "--input", "gen/dump.nt.gz", "--out", "plain"]);
    ok(dir.path(), &["prepare", "--input", "d/normalized.tsv.gz", "--out", "again"]);
    let (plain, again) = (dir.path().join("plain/normalized.tsv"), dir.path().join("again/normalized.tsv"));
    assert_eq!(std::fs::read(plain).unwrap(), std::fs::read(again).unwrap());
}

#[test]
fn dedup_counts_reproduce_the_published_trim() {
    let dir = tempfile::tempdir().unwrap();
    let counts = r#"{"total_triples":3130753066,"owl_label_duplicates":72698733,"owl_type_duplicates":266321867,
        "reverse_duplicates":266257391,"mediator_triples":1280720680,"compacted_triples":30696375}"#;
    std::fs::write(dir.path().join("counts.json"), counts).unwrap();
    let stdout = ok(dir.path(), &["dedup", "--counts", "counts.json", "--out", "run"]);
    assert!(stdout.contains("59.26%"), "{stdout}");
    let report: DedupReport = json(dir.path().join("run/dedup/report.json"));
    assert_eq!(report.schema_version, fbdump::SCHEMA_VERSION);
    assert!((report.trim.total_trim_fraction * 100.0 - 59.26).abs() < 0.01);
}

#[test]
fn schema_lists_the_bicycles_domain() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "--preset", "bicycles", "--out", "gen"]);
    ok(dir.path(), &["prepare", "--input", "gen/dump.nt", "--out", "run"]);
    ok(dir.path(), &["slice", "--out", "run"]);
    let stdout = ok(dir.path(), &["schema", "--domain", "bicycles", "--out", "run"]);
    assert_eq!(stdout.trim(), "/bicycles: 3 types, 5 properties");
    let listing = std::fs::read_to_string(dir.path().join("run/schema/bicycles.txt")).unwrap();
    assert!(listing.contains("/bicycles.bicycle_model.bicycle_type"), "{listing}");
    assert!(listing.contains("Bicycle type"), "{listing}");
}

#[test]
fn slices_do_not_depend_on_worker_count() {
    let dir = sliced("30000");
    ok(dir.path(), &["--workers", "3", "--input", "run/normalized.tsv", "slice", "--out", "par"]);
    let one: RunManifest = json(dir.path().join("run/slices/manifest.json"));
    let three: RunManifest = json(dir.path().join("par/slices/manifest.json"));
    assert_eq!(one, three);
}

#[test]
fn a_saved_plan_reproduces_the_run_and_a_bad_plan_is_rejected() {
    let dir = sliced("20000");
    let before: RunManifest = json(dir.path().join("run/slices/manifest.json"));
    std::fs::copy(dir.path().join("run/slices/plan.tsv"), dir.path().join("plan.tsv")).unwrap();
    ok(dir.path(), &["--plan", "plan.tsv", "slice", "--out", "run"]);
    let after: RunManifest = json(dir.path().join("run/slices/manifest.json"));
    assert_eq!(before, after);

    let mut bad = std::fs::read_to_string(dir.path().join("plan.tsv")).unwrap();
    bad.push_str("predicate:/type.object.name\t0\n");
    std::fs::write(dir.path().join("bad.tsv"), bad).unwrap();
    assert_eq!(code(dir.path(), &["--plan", "bad.tsv", "slice", "--out", "run"]).0, PipelineError::USAGE);
}

#[test]
fn env_overrides_and_report() {
    let dir = sliced("20000");
    let out = Command::new(env!("CARGO_BIN_EXE_fbdump"))
        .args(["stats"])
        .current_dir(dir.path())
        .env("FBDUMP_OUT", "run")
        .env_remove("FBDUMP_INPUT")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    ok(dir.path(), &["dedup", "--out", "run"]);
    let text = ok(dir.path(), &["report", "--out", "run"]);
    assert!(text.starts_with("prepare: 20000 lines"), "{text}");
    assert!(text.contains("trim: "), "{text}");
    for file in ["report.json", "prepare.json", "stats/stats.json", "dedup/report.json", "slices/manifest.json"] {
        let v: serde_json::Value = json(dir.path().join("run").join(file));
        assert_eq!(v["schema_version"], fbdump::SCHEMA_VERSION, "{file}");
    }
}

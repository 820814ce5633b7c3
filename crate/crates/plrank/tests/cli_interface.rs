//! End-to-end tests of the installed binary: real process spawns, real
//! files, asserted exit codes, and byte-level reproducibility.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn plrank(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plrank"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to spawn the binary")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

/// Hand-written corpus in the documented line format: header naming the
/// features, then one record per sentence with sparse per-parse maps.
const SMALL_CORPUS: &str = r#"{"features": ["lex", "dist"]}
{"id": "s1", "correct": 0, "parses": [{"lex": 2.0, "dist": 1.0}, {"dist": 3.0}, {"lex": 1.0}]}
{"id": "s2", "correct": 1, "parses": [{"lex": 1.0, "dist": 2.0}, {"lex": 3.0}]}
{"id": "s3", "correct": 0, "parses": [{"dist": 1.0}, {"lex": 2.0, "dist": 2.0}]}
{"id": "s4", "correct": 1, "parses": [{"lex": 1.0}, {"lex": 2.0, "dist": 1.0}, {"dist": 2.0}]}
{"id": "s5", "correct": 0, "parses": [{"lex": 3.0, "dist": 1.0}, {"lex": 1.0, "dist": 1.0}]}
{"id": "s6", "correct": 0, "parses": [{"lex": 1.0, "dist": 3.0}, {"lex": 2.0}]}
"#;

const UNIVERSE: &str = r#"{
  "features": ["lex", "dist"],
  "analyses": [
    {"yield": "y0", "features": {"lex": 1.0}},
    {"yield": "y0", "features": {"dist": 2.0}},
    {"yield": "y0", "features": {"lex": 2.0, "dist": 1.0}},
    {"yield": "y1", "features": {"lex": 1.0, "dist": 1.0}},
    {"yield": "y1", "features": {"lex": 3.0}},
    {"yield": "y2", "features": {"dist": 1.0}},
    {"yield": "y2", "features": {"lex": 1.0, "dist": 3.0}},
    {"yield": "y2", "features": {"lex": 2.0, "dist": 2.0}}
  ]
}
"#;

fn write(dir: &Path, name: &str, contents: &str) {
    std::fs::write(dir.join(name), contents).unwrap();
}

#[test]
fn usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "c.jsonl", SMALL_CORPUS);

    assert_eq!(code(&plrank(dir, &[])), 1);
    assert_eq!(code(&plrank(dir, &["frobnicate"])), 1);
    assert_eq!(
        code(&plrank(dir, &["train", "c.jsonl"])),
        1,
        "--out is required"
    );
    assert_eq!(code(&plrank(dir, &["--jobs", "0", "stats", "c.jsonl"])), 1);
    assert_eq!(code(&plrank(dir, &["--help"])), 0, "help is not an error");
}

#[test]
fn missing_and_malformed_inputs_exit_two() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();

    let out = plrank(dir, &["stats", "no-such-file.jsonl"]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).starts_with("error:"),
        "stderr: {}",
        stderr(&out)
    );

    // Correct index out of range on the third line.
    write(
        dir,
        "bad.jsonl",
        "{\"features\": [\"f\"]}\n\
         {\"id\": \"ok\", \"correct\": 0, \"parses\": [{\"f\": 1.0}]}\n\
         {\"id\": \"broken\", \"correct\": 5, \"parses\": [{\"f\": 1.0}]}\n",
    );
    let out = plrank(dir, &["stats", "bad.jsonl"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains(":3"), "no line number in: {err}");
    assert!(err.contains("broken"), "no sentence id in: {err}");

    // Unknown feature name inside a parse map.
    write(
        dir,
        "alien.jsonl",
        "{\"features\": [\"f\"]}\n\
         {\"id\": \"s\", \"correct\": 0, \"parses\": [{\"g\": 1.0}]}\n",
    );
    assert_eq!(code(&plrank(dir, &["stats", "alien.jsonl"])), 2);
}

#[test]
fn stats_text_and_json() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "c.jsonl", SMALL_CORPUS);

    let out = plrank(dir, &["stats", "c.jsonl"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("sentences"), "text output: {text}");

    let out = plrank(dir, &["--json", "stats", "c.jsonl"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["config"]["corpus"], "c.jsonl");
    assert_eq!(doc["stats"]["n_sentences"], 6);
    assert_eq!(doc["stats"]["n_ambiguous"], 6);
}

#[test]
fn diagnose_flags_pathologies() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    // "aux" never varies within a sentence; "lex" always favors the correct
    // parse strictly somewhere.
    write(
        dir,
        "p.jsonl",
        r#"{"features": ["lex", "aux"]}
{"id": "s1", "correct": 0, "parses": [{"lex": 2.0, "aux": 1.0}, {"lex": 1.0, "aux": 1.0}]}
{"id": "s2", "correct": 0, "parses": [{"lex": 1.0, "aux": 3.0}, {"aux": 3.0}]}
"#,
    );

    let out = plrank(dir, &["diagnose", "p.jsonl", "--report", "d.json"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("pseudo-constant"), "{text}");
    assert!(text.contains("pseudo-maximal"), "{text}");
    assert!(text.contains("lex"), "{text}");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("d.json")).unwrap()).unwrap();
    assert_eq!(doc["n_pseudo_constant"], 1);
    assert_eq!(doc["n_pseudo_maximal"], 1);
}

#[test]
fn train_evaluate_round_trip_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "c.jsonl", SMALL_CORPUS);

    let out = plrank(
        dir,
        &["train", "c.jsonl", "--out", "w1.json", "--trace", "t.json"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let out2 = plrank(dir, &["train", "c.jsonl", "--out", "w2.json"]);
    assert_eq!(code(&out2), 0);
    assert_eq!(
        std::fs::read(dir.join("w1.json")).unwrap(),
        std::fs::read(dir.join("w2.json")).unwrap(),
        "retraining changed the parameter file"
    );

    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("t.json")).unwrap()).unwrap();
    assert!(trace["iterations"].as_array().unwrap().len() >= 2);

    let out = plrank(dir, &["evaluate", "c.jsonl", "--params", "w1.json"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("correct"), "{}", stdout(&out));

    // A parameter file naming an unknown feature is a data error.
    write(
        dir,
        "alien.json",
        r#"{"theta": {"zzz": 1.0}, "frozen": []}"#,
    );
    assert_eq!(
        code(&plrank(
            dir,
            &["evaluate", "c.jsonl", "--params", "alien.json"]
        )),
        2
    );
}

#[test]
fn train_warns_about_runaway_features() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    // "lex" is pseudo-maximal here.
    write(
        dir,
        "runaway.jsonl",
        r#"{"features": ["lex", "dist"]}
{"id": "s1", "correct": 0, "parses": [{"lex": 2.0, "dist": 1.0}, {"lex": 1.0}, {"dist": 2.0}]}
{"id": "s2", "correct": 0, "parses": [{"lex": 1.0}, {"dist": 3.0}]}
"#,
    );
    let out = plrank(dir, &["train", "runaway.jsonl", "--out", "w.json"]);
    assert_eq!(code(&out), 0);
    let err = stderr(&out);
    assert!(err.contains("pseudo-maximal"), "stderr: {err}");
    assert!(err.contains("lex"), "stderr: {err}");
}

#[test]
fn synth_then_crossval_is_deterministic_across_jobs() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "u.json", UNIVERSE);
    write(
        dir,
        "star.json",
        r#"{"theta": {"lex": 0.7, "dist": -0.4}, "frozen": []}"#,
    );

    let out = plrank(
        dir,
        &[
            "synth",
            "--universe",
            "u.json",
            "--theta",
            "star.json",
            "--n",
            "60",
            "--seed",
            "3",
            "--out",
            "c.jsonl",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let out = plrank(dir, &["--json", "stats", "c.jsonl"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["stats"]["n_sentences"], 60);

    // Sampling with --n 0 is a configuration error.
    assert_eq!(
        code(&plrank(
            dir,
            &[
                "synth",
                "--universe",
                "u.json",
                "--n",
                "0",
                "--out",
                "x.jsonl"
            ]
        )),
        1
    );

    let cv = [
        "--json",
        "crossval",
        "c.jsonl",
        "--k",
        "3",
        "--seed",
        "9",
        "--estimators",
        "baseline,pl",
    ];
    let serial = plrank(dir, &cv);
    assert_eq!(code(&serial), 0, "stderr: {}", stderr(&serial));
    let mut parallel_args = vec!["--jobs", "3"];
    parallel_args.extend_from_slice(&cv);
    let parallel = plrank(dir, &parallel_args);
    assert_eq!(code(&parallel), 0);
    assert_eq!(
        serial.stdout, parallel.stdout,
        "worker count changed the report"
    );
    let again = plrank(dir, &parallel_args);
    assert_eq!(serial.stdout, again.stdout, "rerun changed the report");

    let doc: serde_json::Value = serde_json::from_str(&stdout(&serial)).unwrap();
    let rows = doc["report"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["estimator"], "Baseline estimator");
    assert_eq!(rows[0]["per_fold"].as_array().unwrap().len(), 3);
}

#[test]
fn crossval_text_table_and_report_file() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "c.jsonl", SMALL_CORPUS);

    let out = plrank(
        dir,
        &["crossval", "c.jsonl", "--k", "2", "--report", "r.json"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Baseline estimator"), "{text}");
    assert!(text.contains("Pseudo-likelihood estimator"), "{text}");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("r.json")).unwrap()).unwrap();
    assert_eq!(doc["k"], 2);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn drop_features_narrows_the_catalog() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "c.jsonl", SMALL_CORPUS);
    write(
        dir,
        "drop.txt",
        "# trimmed after an ablation study\nlex\n\n",
    );

    let out = plrank(
        dir,
        &[
            "--json",
            "diagnose",
            "c.jsonl",
            "--drop-features",
            "drop.txt",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["report"]["n_features"], 1);

    write(dir, "unknown.txt", "no_such_feature\n");
    assert_eq!(
        code(&plrank(
            dir,
            &["diagnose", "c.jsonl", "--drop-features", "unknown.txt"]
        )),
        2
    );
}

#[test]
fn train_correct_chains_pick_one_winner() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "c.jsonl", SMALL_CORPUS);

    let args = [
        "--json",
        "train",
        "c.jsonl",
        "--estimator",
        "correct",
        "--chains",
        "3",
        "--seed",
        "11",
        "--box",
        "4",
        "--out",
        "w.json",
    ];
    let serial = plrank(dir, &args);
    assert_eq!(code(&serial), 0, "stderr: {}", stderr(&serial));
    let w_serial = std::fs::read(dir.join("w.json")).unwrap();

    let mut parallel_args = vec!["--jobs", "3"];
    parallel_args.extend_from_slice(&args);
    let parallel = plrank(dir, &parallel_args);
    assert_eq!(code(&parallel), 0);
    assert_eq!(serial.stdout, parallel.stdout);
    assert_eq!(w_serial, std::fs::read(dir.join("w.json")).unwrap());

    let doc: serde_json::Value = serde_json::from_str(&stdout(&serial)).unwrap();
    assert!(doc["summary"]["winning_chain"].as_u64().unwrap() < 3);
    assert!(doc["summary"]["scores"]["correct_count"].as_f64().unwrap() > 0.0);
}

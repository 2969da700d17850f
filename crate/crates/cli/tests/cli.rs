use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn microgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_microgen")).args(args).env_remove("MICROGEN_OUT_DIR").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = microgen(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FAST: [&str; 2] = ["--steps", "8"];

#[test]
fn generate_writes_grid_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    ok(&["generate", "--prompt", "a photo of a red circle", "--seed", "1", "--steps", "50", "--cfg-scale", "5.0", "--out-dir", s(d.path())]);
    let grid = json(&d.path().join("grid.json"));
    assert_eq!(grid["tokens"].as_array().unwrap().len(), 64);
    let m = json(&d.path().join("generate.manifest.json"));
    assert_eq!(m["config"]["steps"], 50);
    assert_eq!(m["config"]["cfg_scale"], 5.0);
    assert_eq!(m["seed"], 1);
    let out = &m["outputs"][0];
    let bytes = fs::read(out["path"].as_str().unwrap()).unwrap();
    assert_eq!(out["sha256"].as_str().unwrap(), microgen::digest::sha256_hex(&bytes));
}

#[test]
fn verify_red_square_against_blue_square() {
    let d = tempfile::tempdir().unwrap();
    let mut tokens = vec![0u16; 64];
    tokens[9] = 5; // square, red
    let g = d.path().join("g.json");
    fs::write(&g, serde_json::json!({"width": 8, "height": 8, "tokens": tokens}).to_string()).unwrap();
    let out = ok(&["verify", "--grid", s(&g), "--prompt", "a photo of a blue square", "--strategy", "rule", "--out-dir", s(d.path())]);
    assert_eq!(out.trim(), "0.5");
    let v = json(&d.path().join("verdict.json"));
    assert_eq!(v["answers"], serde_json::json!(["yes", "no"]));
    let m = json(&d.path().join("verify.manifest.json"));
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap(), microgen::digest::sha256_hex(&fs::read(&g).unwrap()));
}

#[test]
fn verify_parses_transcripts() {
    let d = tempfile::tempdir().unwrap();
    let t = d.path().join("t.txt");
    fs::write(&t, "<think_start>Is there a circle? yes; Is it red? no;<think_end> <answer_start>no<answer_end>").unwrap();
    assert_eq!(ok(&["verify", "--transcript", s(&t), "--out-dir", s(d.path())]).trim(), "0.5");
    fs::write(&t, "<think_start>Is there a circle? yes;<think_end>").unwrap();
    let out = microgen(&["verify", "--transcript", s(&t), "--out-dir", s(d.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 47"));
}

#[test]
fn select_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        ok(&["select", "--prompt", "a photo of two blue squares", "--n", "20", "--k", "4", "--strategy", "cot", "--seed", "1", FAST[0], FAST[1], "--out-dir", s(d.path())]);
    }
    let ra = fs::read(a.path().join("selection.json")).unwrap();
    assert_eq!(ra, fs::read(b.path().join("selection.json")).unwrap());
    let rec: Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(rec["ranked"].as_array().unwrap().len(), 4);
    assert_eq!(rec["scores"].as_array().unwrap().len(), 20);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let dir = s(d.path());
    assert_eq!(microgen(&["generate", "--prompt", "a photo of a red circle", "--bogus", "--out-dir", dir]).status.code(), Some(2));
    assert_eq!(microgen(&["generate", "--prompt", "a photo of a red circle"]).status.code(), Some(2));
    assert_eq!(microgen(&["generate", "--out-dir", dir]).status.code(), Some(2));
    assert_eq!(microgen(&["generate", "--prompt", "a photo of a purple blob", "--out-dir", dir]).status.code(), Some(1));
    assert_eq!(microgen(&["generate", "--prompt", "a photo of a red circle", "--epsilon", "2", "--out-dir", dir]).status.code(), Some(1));
    assert_eq!(microgen(&["select", "--prompt", "a photo of a red circle", "--strategy", "none", "--out-dir", dir]).status.code(), Some(2));
    assert_eq!(microgen(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn help_documents_every_subcommand() {
    for sub in ["generate", "verify", "select", "build-dpo", "cot-labels", "bench", "report"] {
        let out = microgen(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        let text = String::from_utf8(out.stdout).unwrap();
        for flag in ["--seed", "--config", "--out-dir", "--jobs"] {
            assert!(text.contains(flag), "{sub} --help lacks {flag}");
        }
    }
    assert!(microgen(&["--help"]).status.success());
}

#[test]
fn flags_override_config_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.toml");
    fs::write(&cfg, "seed = 7\nsteps = 4\nprompt = \"a photo of a green cross\"\nepsilon = 0.1\n").unwrap();
    ok(&["generate", "--config", s(&cfg), "--steps", "6", "--out-dir", s(d.path())]);
    let m = json(&d.path().join("generate.manifest.json"));
    assert_eq!(m["config"]["steps"], 6);
    assert_eq!(m["config"]["seed"], 7);
    assert_eq!(m["config"]["epsilon"], 0.1);
    assert_eq!(m["config"]["prompt"], "a photo of a green cross");

    fs::write(&cfg, "stepz = 4\n").unwrap();
    let out = microgen(&["generate", "--config", s(&cfg), "--out-dir", s(d.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn manifest_config_reproduces_digests() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(&["select", "--prompt", "a photo of a red circle left of a blue square", "--n", "6", "--seed", "3", FAST[0], FAST[1], "--out-dir", s(a.path())]);
    let m = json(&a.path().join("select.manifest.json"));
    let cfg = b.path().join("replay.json");
    fs::write(&cfg, m["config"].to_string()).unwrap();
    ok(&["select", "--config", s(&cfg), "--out-dir", s(b.path())]);
    let m2 = json(&b.path().join("select.manifest.json"));
    assert_eq!(m["config_digest"], m2["config_digest"]);
    assert_eq!(m["outputs"][0]["sha256"], m2["outputs"][0]["sha256"]);
}

#[test]
fn dpo_pairs_then_cot_labels() {
    let d = tempfile::tempdir().unwrap();
    let dir = s(d.path());
    let prompts = d.path().join("prompts.txt");
    fs::write(&prompts, "a photo of three red circles\n\na photo of a blue square and a green cross\na photo of a circle that is yellow\n").unwrap();
    let out = ok(&["build-dpo", "--prompts", s(&prompts), "--n-per-prompt", "8", "--epsilon", "0.6", "--seed", "2", FAST[0], FAST[1], "--out-dir", dir]);
    let summary = json(&d.path().join("pairs_summary.json"));
    assert_eq!(summary["specs"], 3);
    assert_eq!(summary["pairs"].as_u64().unwrap() + summary["skipped"].as_u64().unwrap(), 3);
    assert!(out.contains("pairs"));
    assert_eq!(json(&d.path().join("build-dpo.manifest.json"))["config"]["strategy"], "rule");
    let pairs = d.path().join("pairs.jsonl");
    ok(&["cot-labels", "--pairs", s(&pairs), "--seed", "2", "--out-dir", dir]);
    let labels = fs::read_to_string(d.path().join("cot_labels.jsonl")).unwrap();
    let n_pairs = fs::read_to_string(&pairs).unwrap().lines().count();
    assert_eq!(labels.lines().count(), 2 * n_pairs);
    for line in labels.lines() {
        let r: Value = serde_json::from_str(line).unwrap();
        let t = microgen::verifier::parse_transcript(r["transcript"].as_str().unwrap()).unwrap();
        assert_eq!(serde_json::to_value(t.final_answer).unwrap(), r["final_answer"]);
    }
}

#[test]
fn bench_is_byte_identical_across_runs_and_jobs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let common = ["bench", "--per-category", "5", "--n", "4", "--seed", "11", "--steps", "8", "--svg"];
    let mut args_a = common.to_vec();
    args_a.extend(["--jobs", "1", "--out-dir", s(a.path())]);
    let mut args_b = common.to_vec();
    args_b.extend(["--jobs", "3", "--out-dir", s(b.path())]);
    ok(&args_a);
    ok(&args_b);
    for f in ["report.json", "report.csv", "report.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 + 1);

    let none = tempfile::tempdir().unwrap();
    ok(&["bench", "--per-category", "5", "--strategy", "none", "--seed", "11", "--steps", "8", "--out-dir", s(none.path())]);
    let ra = a.path().join("report.json");
    let rn = none.path().join("report.json");
    let out = ok(&["report", "--input", s(&ra), s(&rn), "--out-dir", s(a.path())]);
    assert_eq!(out.lines().count(), 2);
    let cmp = fs::read_to_string(a.path().join("comparison.csv")).unwrap();
    assert_eq!(cmp.lines().count(), 1 + 2 * 7);
    assert!(a.path().join("comparison.svg").exists());
}

#[test]
fn out_dir_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_microgen"))
        .args(["generate", "--prompt", "a photo of a red circle", "--steps", "4"])
        .env("MICROGEN_OUT_DIR", d.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.path().join("grid.json").exists());
}

//! End-to-end runs of the `cme` binary: examples, exit codes and replay.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cme")).args(args).env_remove("CME_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report_lines(dir: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(dir.join("report.jsonl")).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn measure_one_third() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cme(&["measure", "--mass", "rational:1/3", "--schedule", "exp:k=2", "--digits", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("01010101"));
    let recs = report_lines(&out);
    assert_eq!(recs[0]["digits"], "01010101");
    assert_eq!(recs[0]["status"], "complete");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 0);
    // every record carries a 64-hex-digit manifest hash
    let hash = recs[0]["manifest"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(fs::read_to_string(out.join("transcript.jsonl")).unwrap().lines().count(), 8);
}

#[test]
fn timeouts_and_usage_errors_have_their_own_codes() {
    let o = cme(&["measure", "--mass", "dyadic:1/2", "--digits", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("timed out at digit 1"));

    let o = cme(&["measure", "--mass", "adversarial:from-schedule", "--schedule", "exp:k=2", "--digits", "32"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("timed out at digit"));

    let o = cme(&["measure", "--mass", "rational:1/x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1:12:"));

    let o = cme(&["measure", "--mass", "rational:1/3", "--schedule", "exp:q=2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = cme(&["measure"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mass_files_report_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    fs::write(&good, "# a pattern mass\nkind=pattern u=1,1 tail=const:1\n").unwrap();
    let o = cme(&["measure", "--mass", &format!("file:{}", good.display()), "--digits", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("101010"));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "\n\nkind=rational p=1 q=zero\n").unwrap();
    let o = cme(&["measure", "--mass", &format!("file:{}", bad.display())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3:21:"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn seed_comes_from_the_environment_when_not_given() {
    let o = Command::new(env!("CARGO_BIN_EXE_cme"))
        .args(["measure", "--mass", "rational:1/3", "--digits", "4", "--mode", "arbitrary"])
        .env("CME_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = Command::new(env!("CARGO_BIN_EXE_cme"))
        .args(["measure", "--mass", "rational:1/3", "--digits", "4", "--out", out.to_str().unwrap()])
        .env("CME_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 77);
    assert!(manifest["args"].as_array().unwrap().iter().any(|a| a == "77"));
}

#[test]
fn replay_reproduces_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cme(&[
        "measure",
        "--mass",
        "rational:5/7",
        "--schedule",
        "exp:k=3",
        "--digits",
        "12",
        "--mode",
        "arbitrary",
        "--N",
        "1/2",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = cme(&["replay", out.join("manifest.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("reports identical"));
    assert_eq!(fs::read(out.join("report.jsonl")).unwrap(), fs::read(out.join("replay/report.jsonl")).unwrap());
}

#[test]
fn estimate_refuses_too_few_trials() {
    let o = cme(&["estimate", "--s", "rational:1/3", "--digits", "3", "--epsilon", "1/4", "--zeta", "100"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("196609"));

    let o = cme(&["estimate", "--s", "rational:1/3", "--digits", "8", "--epsilon", "1/4"]);
    assert_eq!(o.status.code(), Some(4));

    let o = cme(&["estimate", "--s", "rational:1/3", "--digits", "2", "--epsilon", "3/8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn estimate_reads_a_digit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("est");
    let o = cme(&[
        "estimate",
        "--s",
        "rational:3/4",
        "--digits",
        "1",
        "--epsilon",
        "1/8",
        "--replications",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let recs = report_lines(&out);
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[0]["truth"], "1");
    assert_eq!(recs[0]["zeta"], 12289);
    assert_eq!(recs[2]["record"], "aggregate");

    let o = cme(&["estimate", "--s", "rational:3/4", "--digits", "1", "--epsilon", "1/8", "--zeta", "50", "--force"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn advice_encode_and_decode() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("f.tsv");
    fs::write(&corpus, "1\t1\n2\t10\n4\t101\n8\t1011\n").unwrap();
    let o = cme(&["advice", "encode", "--corpus", corpus.to_str().unwrap(), "--n-max", "4"]);
    assert_eq!(o.status.code(), Some(0));
    // blocks for n = 1, 2, 4 are c(1) 001, c(0) 001, c(1) 001; n = 3 adds nothing
    assert!(stdout(&o).contains("0.010001100001010001"), "{}", stdout(&o));

    let o = cme(&["advice", "decode", "--corpus", corpus.to_str().unwrap(), "--max-len", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    for w in ["\"1\"", "\"10\"", "\"101\"", "\"1011\""] {
        assert!(s.contains(w), "{s}");
    }

    let o = cme(&["advice", "decode", "--bits", "010001100001", "--max-len", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("digits run out"));

    fs::write(&corpus, "1\t1\n2\t01\n").unwrap();
    let o = cme(&["advice", "encode", "--corpus", corpus.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

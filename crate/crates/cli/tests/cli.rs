use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stabcolor::harness::CodeRecord;
use stabcolor::{BitMatrix, CssCode};

fn stabcolor(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabcolor"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn shor() -> CssCode {
    let rows = |r: &[&str]| r.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    CssCode::new(
        9,
        BitMatrix::from_bitstrings(9, &rows(&["111111000", "000111111"])).unwrap(),
        BitMatrix::from_bitstrings(
            9,
            &rows(&["110000000", "011000000", "000110000", "000011000", "000000110", "000000011"]),
        )
        .unwrap(),
    )
    .unwrap()
}

#[test]
fn sample_encode_solve_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let out = stabcolor(d, args);
        assert_eq!(code_of(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    };
    run(&["sample", "--n", "6", "--m", "4", "--gamma", "0.8", "--seed", "3", "--out", "g.json"]);
    run(&["encode", "--graph", "g.json", "--delta-q", "1", "--out", "cs.json"]);
    let solved = run(&["solve", "--system", "cs.json", "--budget", "10", "--out", "r.json", "--model", "a.json"]);
    let stats: serde_json::Value = serde_json::from_slice(&solved.stdout).unwrap();
    assert!(stats.get("verdict").is_some(), "{stats}");
    run(&["export-cnf", "--system", "cs.json", "--out", "cs.cnf"]);

    let graph: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("g.json")).unwrap()).unwrap();
    assert_eq!(graph["format_version"], 1);
    let cnf = fs::read_to_string(d.join("cs.cnf")).unwrap();
    assert!(cnf.starts_with("c format_version: 1\n"));
    assert!(cnf.lines().any(|l| l.starts_with("p cnf ")));
}

#[test]
fn find_code_writes_a_valid_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = stabcolor(
        dir.path(),
        &["find-code", "--n", "12", "--m", "10", "--gamma", "0.6", "--seed", "5", "--delta-q", "1", "--budget", "30"],
    );
    assert_eq!(code_of(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rec = CodeRecord::from_json(&fs::read_to_string(dir.path().join("code.json")).unwrap()).unwrap();
    assert_eq!(rec.stats.n, 12);
    assert_eq!(rec.provenance.master_seed, 5);
}

#[test]
fn find_code_reports_missing_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = stabcolor(
        dir.path(),
        &["find-code", "--n", "6", "--m", "5", "--gamma", "0", "--delta-q", "3"],
    );
    assert_eq!(code_of(&out), 1);
    assert!(!dir.path().join("code.json").exists());
}

#[test]
fn sweep_without_edges_is_unsatisfiable() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "qubit_counts": [6, 8],
        "gamma_min": 0.0,
        "gamma_max": 0.0,
        "gamma_step": 0.05,
        "samples": 3,
        "params": {"delta_q": 3, "delta_s": 0, "max_s": null, "balancing": false},
        "master_seed": 1,
        "output_dir": "out"
    }"#;
    fs::write(dir.path().join("sweep.json"), config).unwrap();
    let out = stabcolor(dir.path(), &["sweep", "--config", "sweep.json"]);
    assert_eq!(code_of(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/pixels.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# format_version: 1"));
    assert_eq!(lines.next(), Some("n,m,gamma,sat,unsat,unknown,class"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows, ["6,5,0,0,3,0,unsat", "8,7,0,0,3,0,unsat"]);

    // No codes were found, so there is nothing to study.
    let density = stabcolor(dir.path(), &["density", "--sweep", "out"]);
    assert_eq!(code_of(&density), 2);
}

#[test]
fn decode_shor_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("shor.json"), shor().to_json().unwrap()).unwrap();
    let out = stabcolor(
        dir.path(),
        &["decode", "--code", "shor.json", "--p", "0,1", "--trials", "50", "--out", "r.json"],
    );
    assert_eq!(code_of(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reports: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(reports[0]["failure_rate"], 0.0);
    assert_eq!(reports[1]["failure_rate"], 0.75);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code_of(&stabcolor(d, &["solve", "--no-such-flag"])), 2);
    assert_eq!(code_of(&stabcolor(d, &["solve", "--system", "missing.json"])), 3);
    fs::write(d.join("bad.json"), "{ not json").unwrap();
    assert_eq!(code_of(&stabcolor(d, &["solve", "--system", "bad.json"])), 4);
    fs::write(d.join("g.json"), "{}").unwrap();
    assert_eq!(code_of(&stabcolor(d, &["encode", "--graph", "g.json", "--out", "cs.json"])), 4);
    assert_eq!(
        code_of(&stabcolor(
            d,
            &["sample", "--n", "4", "--m", "3", "--gamma", "1.5", "--out", "g2.json"]
        )),
        2
    );
    assert_eq!(code_of(&stabcolor(d, &["--help"])), 0);
}

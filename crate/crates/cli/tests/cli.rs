use std::path::Path;
use std::process::{Command, Output};

fn bdmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdmf")).arg("--no-cache").args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

#[test]
fn repro_targets_match_golden_files() {
    for t in ["ex3.5", "ex3.6", "sec3.3", "ex4.2", "ex4.3", "ex5.2", "ex5.3", "ex5.4"] {
        let out = bdmf(&["repro", t]);
        assert!(out.status.success(), "{t}");
        assert_eq!(stdout(&out), golden(&format!("repro_{t}.txt")), "{t}");
    }
}

#[test]
fn sagbi_check_json_is_byte_identical_across_runs() {
    let args = ["sagbi-check", "--r", "3", "--n", "6", "--a", "2,4", "--ell", "3", "--mode", "rigorous", "--format", "json"];
    let first = bdmf(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, bdmf(&args).stdout);
    assert!(stdout(&first).contains("\"format_version\": 1"));
    assert!(!stdout(&first).contains("wall_time_ms"));
}

#[test]
fn exit_codes() {
    let text = bdmf(&["sagbi-check", "--r", "3", "--a", "2,4", "--ell", "3"]);
    assert_eq!(text.status.code(), Some(0));
    assert!(stdout(&text).contains("SAGBI(certified)"));
    // ell > r
    assert_eq!(bdmf(&["sagbi-check", "--r", "3", "--a", "2,4", "--ell", "4"]).status.code(), Some(2));
    // n disagrees with the composition
    assert_eq!(bdmf(&["matrix", "--r", "3", "--n", "7", "--a", "2,4", "--ell", "3"]).status.code(), Some(2));
    let refused = bdmf(&["sweep", "--r", "2", "--n", "6"]);
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("we do not need to discuss the case r=2"));
    // a one-step toric computation cap
    let capped = bdmf(&["--max-degree", "1", "sagbi-check", "--r", "3", "--a", "2,4", "--ell", "3"]);
    assert_eq!(capped.status.code(), Some(3));
    assert!(stdout(&capped).contains("UNDECIDED"));
    assert_eq!(bdmf(&["repro", "ex9.9"]).status.code(), Some(2));
}

#[test]
fn certificate_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let cert_s = cert.to_str().unwrap();
    let out = bdmf(&["sagbi-check", "--r", "4", "--a", "5,2", "--ell", "4", "--mode", "fast", "--degree", "2", "--out", cert_s]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("NOT_SAGBI"));
    let ok = bdmf(&["verify-cert", cert_s]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).starts_with("valid:"));

    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    v["witness"]["stuck_coeff"] = serde_json::json!(7);
    std::fs::write(&cert, serde_json::to_string(&v).unwrap()).unwrap();
    let bad = bdmf(&["verify-cert", cert_s]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).starts_with("invalid:"));
}

#[test]
fn matrix_json_feeds_back_as_a_matrix_instance() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.json");
    let out = bdmf(&["matrix", "--r", "4", "--a", "2,2,3,2", "--ell", "3", "--format", "json"]);
    std::fs::write(&file, &out.stdout).unwrap();
    let from_matrix = bdmf(&["mf", "--matrix", file.to_str().unwrap(), "--format", "csv"]);
    assert!(from_matrix.status.success());
    let closed = bdmf(&["mf", "--r", "4", "--a", "2,2,3,2", "--ell", "3", "--format", "csv"]);
    let strip = |s: String| -> Vec<String> {
        s.lines().map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{},{},{}", f[0], f[1], f[4])
        }).collect()
    };
    assert_eq!(strip(stdout(&from_matrix)), strip(stdout(&closed)));
    let first = stdout(&closed);
    assert!(first.lines().any(|l| l.starts_with("1349,(1 2 3),")));
}

#[test]
fn initial_prints_tableau_and_latex() {
    let args = ["initial", "--r", "4", "--a", "3,2,3", "--ell", "4", "P[1,2,4,6]*P[2,3,5,8] - P[1,2,5,6]*P[2,3,4,8]"];
    let out = stdout(&bdmf(&args));
    assert!(out.contains("tableau      = [(1,5,6,2)|(4,2,8,3)]"), "{out}");
    assert!(out.contains("{1236,2458}"), "{out}");
    let mut latex_args = args.to_vec();
    latex_args.extend(["--format", "latex"]);
    let latex = stdout(&bdmf(&latex_args));
    assert!(latex.starts_with("\\begin{ytableau}\n1 & 4 \\\\\n5 & 2 \\\\"), "{latex}");
}

#[test]
fn witness_search_from_the_command_line() {
    let out = bdmf(&["witness", "--r", "4", "--a", "5,2", "--ell", "4", "--latex"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\\begin{ytableau}"));
    let none = bdmf(&["witness", "--r", "3", "--a", "2,4", "--ell", "3"]);
    assert_eq!(stdout(&none), "no obstruction found\n");
}

#[test]
fn small_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.csv");
    let out = bdmf(&["sweep", "--r", "3", "--n", "6", "--mode", "rigorous", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let csv = std::fs::read_to_string(&file).unwrap();
    assert_eq!(csv.lines().count(), 1 + 16);
    assert!(csv.lines().skip(1).all(|l| l.contains("SAGBI_BY_THM") && l.contains("SAGBI(certified)")));
}

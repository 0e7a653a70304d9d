//! End-to-end runs of the binary: flows, file handoffs, exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bitprobe"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_owned()
}

#[test]
fn classify_prints_class_line() {
    let out = run(&["classify", "E8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("table=E8"));
    assert!(text.contains("strategy=MAJORITY_MODEL_GRAPH"));
}

#[test]
fn classify_all_lists_22_classes() {
    let out = run(&["classify", "--all"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 22);
}

#[test]
fn classify_rejects_garbage() {
    let out = run(&["classify", "ZZ"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_encode_query_verify_flow() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("s.scheme");
    let mem = dir.path().join("s.mem");
    let out = run(&[
        "build", "--kind", "nonadaptive", "-m", "8", "-n", "1", "-t", "3", "--space", "12",
        "--seed", "5", "--out", &path_str(&scheme),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let out = run(&["encode", &path_str(&scheme), "--out", &path_str(&mem), "3"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let out = run(&["query", &path_str(&scheme), &path_str(&mem), "3"]);
    assert!(stdout(&out).contains("answer=1"));
    let out = run(&["query", &path_str(&scheme), &path_str(&mem), "4"]);
    assert!(stdout(&out).contains("answer=0"));
    let out = run(&["verify", &path_str(&scheme)]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("verify=pass"));
}

#[test]
fn builds_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.scheme");
    let b = dir.path().join("b.scheme");
    for p in [&a, &b] {
        let out = run(&[
            "build", "--kind", "nonadaptive", "-m", "8", "-n", "1", "-t", "3", "--space", "12",
            "--seed", "5", "--out", &path_str(p),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn adaptive_flow_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("a.scheme");
    let mem = dir.path().join("a.mem");
    let out = run(&[
        "build", "--kind", "adaptive", "-m", "10", "-n", "1", "-t", "3", "--space", "12",
        "--seed", "0", "--out", &path_str(&scheme),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(run(&["encode", &path_str(&scheme), "--out", &path_str(&mem), "7"]).status.success());
    assert!(stdout(&run(&["query", &path_str(&scheme), &path_str(&mem), "7"])).contains("answer=1"));
    assert!(stdout(&run(&["query", &path_str(&scheme), &path_str(&mem), "2"])).contains("answer=0"));
    assert!(run(&["verify", &path_str(&scheme)]).status.success());
}

#[test]
fn grid_build_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("g.scheme");
    let out = run(&["build", "--kind", "grid", "-m", "16", "--out", &path_str(&scheme)]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("bits=8"));
    assert!(run(&["verify", &path_str(&scheme)]).status.success());
}

#[test]
fn corrupted_scheme_reports_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("g.scheme");
    assert!(run(&["build", "--kind", "grid", "-m", "9", "--out", &path_str(&scheme)]).status.success());
    let mut text = std::fs::read_to_string(&scheme).unwrap();
    text = text.replace("kind grid", "kind gird");
    std::fs::write(&scheme, text).unwrap();
    let out = run(&["verify", &path_str(&scheme)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("line 2"), "{}", stdout(&out));
}

#[test]
fn foreign_memory_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = dir.path().join("s1.scheme");
    let s2 = dir.path().join("s2.scheme");
    let mem = dir.path().join("s1.mem");
    assert!(run(&["build", "--kind", "grid", "-m", "16", "--out", &path_str(&s1)]).status.success());
    assert!(run(&["build", "--kind", "grid", "-m", "25", "--out", &path_str(&s2)]).status.success());
    assert!(run(&["encode", &path_str(&s1), "--out", &path_str(&mem), "3"]).status.success());
    let out = run(&["query", &path_str(&s2), &path_str(&mem), "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("belongs to scheme"));
}

#[test]
fn search_reports_minimum_space() {
    // one probe, three elements: the characteristic vector is optimal
    let out = run(&["search", "-m", "3", "-n", "1", "-t", "1"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("s=3"), "{}", stdout(&out));
}

fn write_parity_map(dir: &Path) -> PathBuf {
    let scheme = dir.join("pm.scheme");
    std::fs::write(
        &scheme,
        "bitprobe-scheme v1\nkind probe-map-3\nm 4\nn 1\ns 3\nlayout single\nquery 96\nprobes\n1 2 3\n2 3 1\n3 1 2\n1 3 2\n",
    )
    .unwrap();
    scheme
}

#[test]
fn witness_then_check_confirms() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = write_parity_map(dir.path());
    let witness = dir.path().join("w.wit");
    let out = run(&["witness", &path_str(&scheme), "--out", &path_str(&witness)]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("kind=DEPENDENCY"));
    let out = run(&["check", &path_str(&witness)]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("verdict=confirmed"));
}

#[test]
fn tampered_witness_is_refuted() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = write_parity_map(dir.path());
    let witness = dir.path().join("w.wit");
    assert!(run(&["witness", &path_str(&scheme), "--out", &path_str(&witness)]).status.success());
    // move the stored element's probes off the shared locations: the
    // store/exclude split becomes satisfiable and the witness is bogus
    let text = std::fs::read_to_string(&witness).unwrap();
    let tampered = text.replace("s 3", "s 4").replace("2 3 1", "2 3 4");
    std::fs::write(&witness, tampered).unwrap();
    let out = run(&["check", &path_str(&witness)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verdict=refuted"));
}

#[test]
fn height2_class_has_no_witness_argument() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("pm.scheme");
    // query 00 is constant false: a height-0 decision tree
    std::fs::write(
        &scheme,
        "bitprobe-scheme v1\nkind probe-map-3\nm 2\nn 1\ns 3\nlayout single\nquery 00\nprobes\n1 2 3\n2 3 1\n",
    )
    .unwrap();
    let witness = dir.path().join("w.wit");
    let out = run(&["witness", &path_str(&scheme), "--out", &path_str(&witness)]);
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn budget_env_forces_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("pm.scheme");
    // a probe-map scheme with more bits than a tiny budget allows
    std::fs::write(
        &scheme,
        "bitprobe-scheme v1\nkind probe-map-3\nm 2\nn 1\ns 4\nlayout three\nquery 6A\nprobes\n1 2 3\n2 3 4\n",
    )
    .unwrap();
    let out = bin()
        .args(["verify", &path_str(&scheme)])
        .env("BITPROBE_BUDGET", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", stdout(&out));
}

#[test]
fn bench_emits_csv() {
    let out = run(&["bench", "--seed", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("kind,m,n,t,bits,build_ms,encode_us,query_us"));
    assert!(text.lines().count() >= 5);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pswg::genmodel::io::to_text;
use pswg::verify::hand_built_line;

fn pswg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pswg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON value")
}

#[test]
fn generate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for p in [&a, &b] {
        let out = pswg(&["generate", "--n", "2048", "--seed", "7", "--graph-out", path_str(p)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn generate_summary_counts_match_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let out = pswg(&["generate", "--n", "1024", "--seed", "1", "--graph-out", path_str(&g)]);
    assert!(out.status.success());
    let summary = stdout_json(&out);
    let text = fs::read_to_string(&g).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header[3], summary["nodes"].to_string());
    let shortcuts_line = text.lines().find(|l| l.starts_with("shortcut ")).unwrap();
    assert_eq!(shortcuts_line, format!("shortcut {}", summary["shortcuts"]));
}

#[test]
fn tiny_n_is_rejected() {
    let out = pswg(&["generate", "--n", "16"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shortcut range empty"));
}

#[test]
fn route_to_self_takes_no_hops() {
    let out = pswg(&["route", "--n", "1024", "--seed", "2", "--source", "5", "--dest", "5"]);
    assert!(out.status.success());
    let res = stdout_json(&out);
    assert_eq!(res["hops_total"], 0);
    assert_eq!(res["status"], "delivered");
}

#[test]
fn routes_hand_built_graph_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("line.txt");
    let trace = dir.path().join("trace.txt");
    fs::write(&g, to_text(&hand_built_line())).unwrap();
    let out = pswg(&[
        "route",
        "--graph-in",
        path_str(&g),
        "--source",
        "0",
        "--dest",
        "3",
        "--trace",
        "--out",
        path_str(&trace),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let res = stdout_json(&out);
    assert_eq!(res["hops_total"], 3);
    assert_eq!(res["hops_shortcut"], 1);
    assert_eq!(res["path"], serde_json::json!([0, 1, 2, 3]));
    let lines: Vec<String> = fs::read_to_string(&trace).unwrap().lines().map(String::from).collect();
    assert_eq!(
        lines,
        ["0 0 1 shortcut 6 3 3", "1 1 2 local 3 1.5 1.5", "2 2 3 local 1.5 1.5 0"]
    );

    let pure = pswg(&[
        "route",
        "--graph-in",
        path_str(&g),
        "--algo",
        "pure_greedy",
        "--source",
        "0",
        "--dest",
        "3",
    ]);
    assert_eq!(stdout_json(&pure)["path"], serde_json::json!([0, 1, 2, 3]));
}

#[test]
fn corrupt_graph_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.txt");
    let text = to_text(&hand_built_line()).replacen("pswg 1", "pswx 1", 1);
    fs::write(&g, text).unwrap();
    let out = pswg(&["route", "--graph-in", path_str(&g)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let truncated = to_text(&hand_built_line());
    let cut: String = truncated.lines().take(3).map(|l| format!("{l}\n")).collect();
    fs::write(&g, cut).unwrap();
    let out = pswg(&["route", "--graph-in", path_str(&g)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn missing_graph_file_is_an_io_error() {
    let out = pswg(&["route", "--graph-in", "/nonexistent/graph.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(
        pswg(&["route", "--n", "1024", "--source", "999999"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pswg(&["route", "--n", "1024", "--hop-budget", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(pswg(&["sweep", "--n-grid", "4096,1024"]).status.code(), Some(2));
    assert_eq!(
        pswg(&["generate", "--n", "1024", "--alpha", "nan"]).status.code(),
        Some(2)
    );
    assert_eq!(pswg(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn single_point_sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = pswg(&[
            "sweep",
            "--n-grid",
            "1024",
            "--seeds",
            "1",
            "--pairs",
            "1",
            "--seed",
            "3",
            "--out",
            path_str(p),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], pswg::analysis::CSV_HEADER);
    assert!(lines[1].starts_with("1024,3,0,"));
    assert_eq!(text.as_bytes(), fs::read(&b).unwrap());
}

#[test]
fn sweep_fit_prints_report() {
    let out = pswg(&[
        "sweep",
        "--n-grid",
        "1024,2048,4096,8192",
        "--seeds",
        "1",
        "--pairs",
        "3",
        "--fit",
        "powerlaw",
        "--out",
        "/dev/null",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = stdout_json(&out);
    assert_eq!(fit["model"], "powerlaw");
    for key in ["A", "b", "residual", "ci_b", "n_grid"] {
        assert!(fit.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn sweep_with_too_few_points_cannot_fit() {
    let out = pswg(&[
        "sweep",
        "--n-grid",
        "1024",
        "--seeds",
        "1",
        "--pairs",
        "1",
        "--fit",
        "polylog",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_model_reports_sampler_equivalence() {
    let out = pswg(&["verify", "--suite", "model", "--n", "1024"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout
        .lines()
        .any(|l| l.starts_with("fast_sampler == exact_sampler: pass")));
}

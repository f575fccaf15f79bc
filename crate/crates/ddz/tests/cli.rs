use std::path::Path;
use std::process::{Command, Output};

use ddz::io::{matrix_to_string, read_value};
use ddz_core::DualMatrix;

fn ddz(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ddz"));
    cmd.args(args).env_remove("DDZ_RANK_TOL").env_remove("DDZ_RESIDUAL_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", &matrix_to_string(&DualMatrix::from_real(2, 2, &[1., 1., 0., 0.], &[0., 1., 0., 0.])));
    let nil = write(dir.path(), "nil.json", &matrix_to_string(&DualMatrix::from_real(2, 2, &[0., 1., 0., 0.], &[0., 0., 1., 0.])));
    let bad = write(dir.path(), "bad.json", r#"{"rows":2,"cols":2,"std":[[[1,0]]]}"#);
    let rect = write(dir.path(), "rect.json", &matrix_to_string(&DualMatrix::zeros(2, 3)));

    assert_eq!(ddz(&["dual-drazin", "-i", &ok], &[]).status.code(), Some(0));
    assert_eq!(ddz(&["dual-drazin", "-i", &nil], &[]).status.code(), Some(3));
    assert_eq!(ddz(&["exists", "-i", &nil], &[]).status.code(), Some(3));
    assert_eq!(ddz(&["dual-drazin", "-i", &bad], &[]).status.code(), Some(4));
    assert_eq!(ddz(&["dual-drazin", "-i", &rect], &[]).status.code(), Some(4));
    assert_eq!(ddz(&["dual-drazin", "-i", "/nonexistent/x.json"], &[]).status.code(), Some(1));
    assert_eq!(ddz(&["no-such-verb"], &[]).status.code(), Some(1));
    assert_eq!(ddz(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn violated_block_hypothesis_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // B A = ε E_11 is outside DC_z
    let a = write(dir.path(), "a.json", &matrix_to_string(&DualMatrix::from_real(2, 2, &[1., 0., 0., 0.], &[0., 0., 1., 0.])));
    let b = write(dir.path(), "b.json", &matrix_to_string(&DualMatrix::from_real(2, 2, &[0., 1., 0., 0.], &[0., 0., 0., 0.])));
    let out = ddz(&["cline", "-a", &a, "-b", &b], &[]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", &matrix_to_string(&DualMatrix::from_real(2, 2, &[2., 0., 0., 0.], &[1., 1., 1., 0.])));
    let out_path = dir.path().join("out.json");
    let printed = ddz(&["dual-drazin", "-i", &ok], &[]);
    assert_eq!(ddz(&["dual-drazin", "-i", &ok, "-o", out_path.to_str().unwrap()], &[]).status.code(), Some(0));
    assert_eq!(read_value(&out_path).unwrap(), stdout_json(&printed));
}

#[test]
fn flag_overrides_environment_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.json", &matrix_to_string(&DualMatrix::from_real(2, 2, &[1., 0., 0., 1e-3], &[0.; 4])));
    let rank = |args: &[&str], env: &[(&str, &str)]| {
        let out = ddz(args, env);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        stdout_json(&out)["rank_std"].as_u64().unwrap()
    };
    assert_eq!(rank(&["rank", "-i", &x], &[]), 2);
    assert_eq!(rank(&["rank", "-i", &x], &[("DDZ_RANK_TOL", "0.1")]), 1);
    assert_eq!(rank(&["--rank-tol", "1e-12", "rank", "-i", &x], &[("DDZ_RANK_TOL", "0.1")]), 2);
    assert_eq!(ddz(&["rank", "-i", &x], &[("DDZ_RANK_TOL", "abc")]).status.code(), Some(1));
}

#[test]
fn graph_and_fuzz_verbs() {
    let out = ddz(&["graph", "double-star", "--m", "3", "--n", "2"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!((v["rows"].as_u64(), v["cols"].as_u64()), (Some(7), Some(7)));

    let out = ddz(&["fuzz", "--theorem", "abco-right", "--trials", "100", "--seed", "7"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(lines[100]["record"], "summary");
    assert_eq!(lines[100]["pass_count"], 100);
}

use std::path::Path;
use std::process::{Command, Output};

use isotropykit::lin3::DEFAULT_DEGENERACY_TOL;
use isotropykit::spectral_frame::{build_frame, extract_invariants};
use isotropykit_cli::system_file::SystemFile;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_isotropykit"));
    c.env_remove("ISOTROPYKIT_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn counts_examples() {
    let o = run(&["counts", "--n", "2", "--p", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("spectral scalar invariants: 15"));
    let o = run(&["counts", "--n", "1", "--p", "1", "--unit-vectors"]);
    assert!(stdout(&o).contains("spectral scalar invariants: 5"));
    let o = run(&["counts", "--p", "1"]);
    assert!(stdout(&o).contains("spectral scalar invariants: 1"));
    assert_eq!(run(&["counts"]).status.code(), Some(2));
    assert_eq!(run(&["counts", "--n", "1", "--svd"]).status.code(), Some(2));
    assert_eq!(run(&["counts", "--n", "x"]).status.code(), Some(2));
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&["verify", "p-property", "--seed", "11", "--json", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stdout(&o));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["version"], 1);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["suite"], "p-property");
    let ids: Vec<&str> = v["claims"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn seed_flag_wins_over_environment() {
    let dir = tempfile::tempdir().unwrap();
    let env = dir.path().join("env.json");
    let flag = dir.path().join("flag.json");
    let o = bin().env("ISOTROPYKIT_SEED", "5").args(["verify", "coalescence", "--trials", "3", "--json", env.to_str().unwrap()]).output().unwrap();
    assert!(o.status.success());
    let o = bin()
        .env("ISOTROPYKIT_SEED", "5")
        .args(["verify", "coalescence", "--trials", "3", "--seed", "9", "--json", flag.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    let e: serde_json::Value = serde_json::from_slice(&std::fs::read(env).unwrap()).unwrap();
    let f: serde_json::Value = serde_json::from_slice(&std::fs::read(flag).unwrap()).unwrap();
    assert_eq!((e["seed"].as_u64(), f["seed"].as_u64()), (Some(5), Some(9)));
}

#[test]
fn exit_code_contract() {
    let o = run(&["verify", "reconstruction", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("[PASS] reconstruction/eig ")));

    let o = run(&["verify", "rank", "--p", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rank/N0M0P2/point1/spectral"));

    let o = run(&["verify", "hyperelastic", "--tol", "0", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"version":1,"sym":[[[1,2,0],[0,1,0],[0,0,1]]]}"#);
    assert_eq!(run(&["verify", "isotropy", "--input", &bad]).status.code(), Some(2));
    let garbage = write(dir.path(), "garbage.json", "{");
    assert_eq!(run(&["verify", "isotropy", "--input", &garbage]).status.code(), Some(2));
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "isotropy", "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn verify_with_input_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "sys.json",
        r#"{"version":1,"sym":[[[3,0.2,0.1],[0.2,2,-0.3],[0.1,-0.3,1]]],"vecs":[{"v":[0.6,0,0.8],"unit":true}]}"#,
    );
    let o = run(&["verify", "isotropy", "--input", &f, "--trials", "20"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("isotropy/input-N1M0P1-unit/spectral"));
    let o = run(&["verify", "hyperelastic", "--input", &f]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn frame_output_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"version":1,"sym":[[[2.5,0.3,-0.7],[0.3,1.1,0.4],[-0.7,0.4,-0.2]]],
        "nonsym":[{"matrix":[[0,0.5,-1],[-0.5,0,0.25],[1,-0.25,0]],"skew":true}],
        "vecs":[{"v":[0.1,-2.3,0.7]}]}"#;
    let f = write(dir.path(), "sys.json", text);
    let o = run(&["frame", "--input", &f]);
    assert!(o.status.success());
    let sys = SystemFile::parse(text).unwrap().to_system().unwrap();
    let inv = extract_invariants(&sys, &build_frame(&sys, DEFAULT_DEGENERACY_TOL).unwrap()).unwrap();
    let out = stdout(&o);
    let printed: Vec<(String, f64)> = out
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.parse().unwrap()))
        .collect();
    assert_eq!(printed.len(), inv.len());
    for ((k, v), (label, value)) in printed.iter().zip(&inv.entries) {
        assert_eq!(k, &label.to_string());
        assert_eq!(v.to_bits(), value.to_bits());
    }
}

#[test]
fn frame_degenerate_cases() {
    let dir = tempfile::tempdir().unwrap();
    let id = write(dir.path(), "id.json", r#"{"version":1,"sym":[[[1,0,0],[0,1,0],[0,0,1]]]}"#);
    let o = run(&["frame", "--input", &id]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("degeneracy: {1,2,3}") && out.contains("warning"));
    let d = write(dir.path(), "d.json", r#"{"version":1,"sym":[[[3,0,0],[0,2,0],[0,0,1]]]}"#);
    let out = stdout(&run(&["frame", "--input", &d]));
    assert!(out.contains("lambdas: 3 2 1") && out.contains("v1: 1 0 0") && !out.contains("warning"));
    let z = write(dir.path(), "z.json", r#"{"version":1,"vecs":[{"v":[0,0,0]}]}"#);
    assert_eq!(run(&["frame", "--input", &z]).status.code(), Some(1));
    let g = write(dir.path(), "g.json", r#"{"version":1,"nonsym":[{"matrix":[[1,2,0],[0,1,3],[0,0,2]]}]}"#);
    let out = stdout(&run(&["frame", "--input", &g, "--svd"]));
    assert!(out.contains("kind: Svd") && out.contains("u1:"));
}

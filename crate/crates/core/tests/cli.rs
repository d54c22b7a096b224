mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jetgeom"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

struct Fixture {
    _dir: tempfile::TempDir,
    flat: String,
    sphere: String,
    rheonomic: String,
    degenerate: String,
    dir: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_path_buf();
    let s = |name: &str, text: &str| write(&d, name, text).to_str().unwrap().to_string();
    let degenerate = "p = 1\nn = 2\nfamily = \"general_p1\"\nh = [[\"1\"]]\nL = \"v1_1^2\"\n";
    Fixture {
        flat: s("flat.toml", FLAT),
        sphere: s("sphere.toml", SPHERE_P1),
        rheonomic: s("rheonomic.toml", RHEONOMIC),
        degenerate: s("degenerate.toml", degenerate),
        dir: d,
        _dir: dir,
    }
}

#[test]
fn describe_flat_space() {
    let f = fixture();
    let o = run(&["describe", "--scenario", &f.flat, "--random", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let summary = doc["summary"].as_str().unwrap();
    assert!(summary.starts_with("Kronecker h-regular: PASS; family: electrodynamics"), "{summary}");
    assert!(summary.contains("signature of g: (+2, -0, 0:0)"));
    assert_eq!(doc["regularity"]["points"].as_array().unwrap().len(), 3);
}

#[test]
fn describe_degenerate_lagrangian_fails_with_offending_point() {
    let f = fixture();
    assert_eq!(run(&["describe", "--scenario", &f.degenerate, "--random", "2"]).status.code(), Some(2));
    let pts = write(&f.dir, "pts.toml", "[[point]]\nt = [0.0]\nx = [0.1, 0.2]\nv = [[0.3], [0.4]]\n");
    let o = run(&["describe", "--scenario", &f.degenerate, "--points", pts.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let summary = doc["summary"].as_str().unwrap();
    assert!(summary.contains("FAIL") && summary.contains("offending point"), "{summary}");
}

#[test]
fn geometry_sphere_einstein() {
    let f = fixture();
    let pts = write(&f.dir, "pts.toml", "[[point]]\nt = [0.2]\nx = [0.7853981633974483, 0.3]\nv = [[0.7], [-0.4]]\n");
    let o = run(&["geometry", "einstein", "--scenario", &f.sphere, "--points", pts.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = doc.as_array().unwrap();
    assert_eq!(reports.len(), 1);
    let r = reports[0]["scalars"].as_array().unwrap().iter().find(|s| s["name"] == "R").unwrap();
    assert_close(r["value"].as_f64().unwrap(), 2.0, 1e-9);
    assert!(reports[0]["residuals"].as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn geometry_sections_have_tables() {
    let f = fixture();
    for what in ["connection", "torsion", "curvature", "maxwell", "einstein", "conserve"] {
        let o = run(&["geometry", what, "--scenario", &f.flat, "--random", "1"]);
        assert_eq!(o.status.code(), Some(0), "{what}");
        let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(!doc[0]["residuals"].as_array().unwrap().is_empty(), "{what}");
    }
}

#[test]
fn verify_prints_one_line_per_class() {
    let f = fixture();
    let o = run(&["verify", "--scenario", &f.sphere, "--random", "4", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lines = doc["lines"].as_array().unwrap();
    assert!(lines.len() >= 8);
    assert!(lines.iter().all(|l| l.as_str().unwrap().ends_with("PASS")));
    assert!(lines.iter().any(|l| l.as_str().unwrap().starts_with("metricity")));
    assert_eq!(doc["summary"]["points"], 4);
}

#[test]
fn rheonomic_matter_fails_only_conservation() {
    let f = fixture();
    let o = run(&["verify", "--scenario", &f.rheonomic, "--random", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for l in doc["summary"]["lines"].as_array().unwrap() {
        assert_eq!(l["pass"] == true, l["class"] != "conservation", "{l}");
    }
}

#[test]
fn fault_injection_breaks_metricity() {
    let f = fixture();
    let o = run(&["verify", "--scenario", &f.flat, "--random", "2", "--fault", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let metricity = doc["summary"]["lines"].as_array().unwrap().iter().find(|l| l["class"] == "metricity").unwrap().clone();
    assert_eq!(metricity["pass"], false);
    assert!(metricity["max_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn csv_output_and_out_file() {
    let f = fixture();
    let out = f.dir.join("verify.csv");
    let o = run(&["verify", "--scenario", &f.flat, "--random", "2", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["class", "max_residual", "worst", "worst_point", "verdict"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert!(rows.iter().all(|r| &r[4] == "PASS"));

    let o = run(&["geometry", "connection", "--scenario", &f.flat, "--random", "1", "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("point,kind,name,index,value,verdict\n"));
    assert!(text.lines().any(|l| l.contains(",residual,")));

    let o = run(&["describe", "--scenario", &f.flat, "--random", "2", "--format", "csv"]);
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn runs_are_deterministic() {
    let f = fixture();
    let args = ["geometry", "curvature", "--scenario", &f.rheonomic, "--random", "3", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["geometry", "curvature", "--scenario", &f.rheonomic, "--random", "3", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sampling_box_is_respected() {
    let f = fixture();
    let o = run(&["describe", "--scenario", &f.flat, "--random", "5", "--box", "-0.1,0.1"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for p in doc["regularity"]["points"].as_array().unwrap() {
        let pt = &p["point"];
        let mut coords: Vec<f64> = pt["t"].as_array().unwrap().iter().chain(pt["x"].as_array().unwrap()).map(|v| v.as_f64().unwrap()).collect();
        for row in pt["v"].as_array().unwrap() {
            coords.extend(row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()));
        }
        assert!(coords.iter().all(|c| c.abs() <= 0.1));
    }
}

#[test]
fn input_errors_exit_with_two() {
    let f = fixture();
    assert_eq!(run(&["verify", "--scenario", "/nonexistent.toml"]).status.code(), Some(2));
    let bad = write(&f.dir, "bad.toml", "p = 1\nn = 1\nfamily = \"general_p1\"\nh = [[\"1\"]]\nL = \"v1_1^\"\n");
    let o = run(&["verify", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let pts = write(&f.dir, "short.toml", "[[point]]\nt = [0.1]\nx = [0.2]\nv = [[0.3]]\n");
    assert_eq!(run(&["verify", "--scenario", &f.flat, "--points", pts.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["geometry", "everything", "--scenario", &f.flat]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--scenario", &f.flat, "--points", pts.to_str().unwrap(), "--seed", "2"]).status.code(), Some(2));
}

#[test]
fn geometry_errors_exit_with_three() {
    let f = fixture();
    let pts = write(&f.dir, "pole.toml", "[[point]]\nt = [0.0]\nx = [0.0, 0.3]\nv = [[0.1], [0.2]]\n");
    let o = run(&["geometry", "connection", "--scenario", &f.sphere, "--points", pts.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn in_process_entry_point_matches_binary() {
    let f = fixture();
    let out = f.dir.join("x.json");
    let args = ["jetgeom", "verify", "--scenario", &f.flat, "--random", "2", "--out", out.to_str().unwrap()];
    assert_eq!(jetgeom::cli::main_with_args(args), 0);
    let written = std::fs::read_to_string(&out).unwrap();
    let o = run(&args[1..args.len() - 2]);
    assert_eq!(written, stdout(&o));
}

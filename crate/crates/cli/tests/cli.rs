use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surface-heights"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn interval_determinant_vanishes_at_half_length() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["det", "--interval", "--length", "0.5", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("Z'(0) = "));
    let det = json(tmp.path().join("out/det.json"));
    assert!(det["height"]["value"].as_f64().unwrap().abs() < 1e-6);
    let m = json(tmp.path().join("out/manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["partial"], false);
    assert_eq!(m["config"]["length"], "0.5");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    // recorded hashes match the files
    let bytes = fs::read(tmp.path().join("out/det.json")).unwrap();
    assert_eq!(m["outputs"]["det.json"], format!("{:x}", Sha256::digest(&bytes)));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["uniformize", "--mesh", "pants", "--vertices", "400", "--round-trip", "true", "--out", "out"];
    assert_eq!(code(&run(tmp.path(), &args)), 0);
    fs::rename(tmp.path().join("out"), tmp.path().join("first")).unwrap();
    assert_eq!(code(&run(tmp.path(), &args)), 0);
    let mut names: Vec<_> = fs::read_dir(tmp.path().join("first"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in names {
        let a = fs::read(tmp.path().join("first").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("out").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs between runs");
    }
}

#[test]
fn config_file_wins_with_warning() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), "# interval\nlength = 0.7\nt-min = 1e-4\n").unwrap();
    let o = run(
        tmp.path(),
        &["det", "--interval", "--length", "0.5", "--config", "run.cfg", "--out", "out"],
    );
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: config file overrides --length"));
    let m = json(tmp.path().join("out/manifest.json"));
    assert_eq!(m["config"]["length"], "0.7");
    assert_eq!(m["warnings"].as_array().unwrap().len(), 1);
    let z = json(tmp.path().join("out/det.json"))["height"]["value"].as_f64().unwrap();
    assert!((z + 1.4f64.ln()).abs() < 1e-6);

    // flags and file entries with the same value give the same hash
    fs::write(tmp.path().join("flags.cfg"), "interval = true\nlength = 0.7\nt_min = 1e-4\n").unwrap();
    assert_eq!(code(&run(tmp.path(), &["det", "--config", "flags.cfg", "--out", "again"])), 0);
    let again = json(tmp.path().join("again/manifest.json"));
    assert_eq!(again["config_hash"], m["config_hash"]);
}

#[test]
fn config_errors_exit_two_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.cfg"), "lenght = 0.7\n").unwrap();
    let o = run(tmp.path(), &["det", "--interval", "--config", "bad.cfg", "--out", "a"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`lenght`"));
    let m = json(tmp.path().join("a/manifest.json"));
    assert_eq!(m["status"], "config_error");
    assert_eq!(m["partial"], true);

    let o = run(tmp.path(), &["det", "--interval", "--length=-1", "--out", "b"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`length`"));

    let o = run(tmp.path(), &["sweep", "--l", "0.02:0.1", "--out", "c"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`l`"));

    // unparsable arguments still leave a manifest
    let o = run(tmp.path(), &["det", "--no-such-flag", "--out", "d"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(tmp.path().join("d/manifest.json"))["status"], "config_error");
}

#[test]
fn sweep_writes_rfc4180_csv_and_flags_spread() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        tmp.path(),
        &["sweep", "--kind", "SC_III", "--l", "0.02:0.1:5", "--max-spread", "0.5", "--out", "out"],
    );
    // the stated π²/12l leading term leaves an l-dependent residual
    assert_eq!(code(&o), 3);
    let csv = fs::read_to_string(tmp.path().join("out/sweep.csv")).unwrap();
    assert!(csv.starts_with("l,h,error,leading,residual\r\n"));
    assert_eq!(csv.matches("\r\n").count(), 6);
    let m = json(tmp.path().join("out/manifest.json"));
    assert_eq!(m["status"], "failed");
    assert_eq!(m["partial"], false);
    assert!(m["invariant_failures"][0].as_str().unwrap().starts_with("residual spread"));

    let o = run(
        tmp.path(),
        &["sweep", "--kind", "SC_III", "--l", "0.02:0.1:5", "--pi2-coeff", "0.1666666666666667", "--max-spread", "0.5", "--out", "fixed"],
    );
    assert_eq!(code(&o), 0);
}

#[test]
fn json_keys_are_sorted() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(tmp.path(), &["collar", "--direct", "false", "--out", "out"])), 0);
    for file in ["out/manifest.json", "out/collar.json"] {
        let text = fs::read_to_string(tmp.path().join(file)).unwrap();
        // keys at each indentation level appear in order within an object
        let mut stack: Vec<(usize, String)> = Vec::new();
        for line in text.lines() {
            let indent = line.len() - line.trim_start().len();
            let t = line.trim_start();
            stack.retain(|(i, _)| *i <= indent);
            if let Some(rest) = t.strip_prefix('"') {
                if let Some(end) = rest.find("\": ") {
                    let key = rest[..end].to_string();
                    if let Some((_, prev)) = stack.iter().rev().find(|(i, _)| *i == indent) {
                        assert!(*prev < key, "{file}: {prev} before {key}");
                    }
                    stack.retain(|(i, _)| *i != indent);
                    stack.push((indent, key));
                }
            }
            if t.ends_with('}') || t.ends_with("},") {
                stack.retain(|(i, _)| *i < indent);
            }
        }
    }
}

#[test]
fn verify_and_inequality_commands_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["verify", "--suite", "all", "--cases", "2", "--seed", "5", "--out", "v"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let reports = json(tmp.path().join("v/verify.json"));
    assert_eq!(reports.as_array().unwrap().len(), 5);

    let o = run(tmp.path(), &["polyakov", "--geometry", "mesh", "--vertices", "500", "--out", "p"]);
    assert_eq!(code(&o), 0);
    let hi = json(tmp.path().join("p/polyakov.json"));
    assert!(hi["slack"].as_f64().unwrap() > 0.0);

    let o = run(tmp.path(), &["polyakov", "--psi", "0.5", "--out", "s"]);
    assert_eq!(code(&o), 0);
    assert!(json(tmp.path().join("s/polyakov.json"))["scaling_law_gap"].as_f64().unwrap() < 1e-12);
}

#[test]
fn uniformize_rejects_wrong_topology() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["uniformize", "--mesh", "annulus", "--type", "I", "--out", "out"]);
    assert_eq!(code(&o), 2);
    let m = json(tmp.path().join("out/manifest.json"));
    assert!(m["errors"][0]["message"].as_str().unwrap().contains("topology"));
    let o = run(tmp.path(), &["uniformize", "--mesh", "annulus", "--type", "II", "--out", "two"]);
    assert_eq!(code(&o), 0);
}

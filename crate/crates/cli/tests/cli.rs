use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_steinprod");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn example() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/example_spec.json")
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn density_riemann_sum() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "pn.json", r#"{"version":1,"normal":{"count":1,"sigma":1}}"#);
    let out = dir.path().join("d.csv");
    let o = run(&["density", "--spec", spec.to_str().unwrap(), "--grid", "-4:4:101", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x,density,small_x\n") && text.ends_with('\n'));
    let r = rows(&text);
    assert_eq!(r.len(), 101);
    let sum: f64 = r.iter().map(|row| row[1]).sum::<f64>() * 0.08;
    assert!((sum - 1.0).abs() < 1e-3, "{sum}");
}

#[test]
fn reduced_operator_order() {
    let dir = tempfile::tempdir().unwrap();
    // b_1 = 1 with m = n = N = 1: order m + 2n + N = 4
    let spec = write(
        dir.path(),
        "s.json",
        r#"{"version":1,"beta":[[2,1]],"gamma":{"shapes":[1.5],"lambda":1},"normal":{"count":1,"sigma":1}}"#,
    );
    let o = run(&["operator", "--spec", spec.to_str().unwrap(), "--reduce"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("order 4 (unreduced 5)"), "{text}");
    let json: serde_json::Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert_eq!(json["operator"]["order"], 4);
    assert_eq!(json["kind"], "reduced");
}

#[test]
fn verify_example_spec_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = run(&[
            "verify", "--spec", example().to_str().unwrap(), "--suite", "all",
            "--samples", "20000", "--seed", "5", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    let v: serde_json::Value = serde_json::from_str(&ta).unwrap();
    assert_eq!(v["version"], 1);
    assert_eq!(v["allPassed"], true);
    let ids: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["testId"].as_str().unwrap()).collect();
    for kind in ["mellin", "adjoint", "ks"] {
        assert!(ids.iter().any(|id| id.contains(kind)), "{kind} missing from {ids:?}");
    }
}

#[test]
fn malformed_spec_exits_1_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.json", "{\"version\":1,\n\"normal\":{\"count\":1,}}");
    let o = run(&["density", "--spec", spec.to_str().unwrap(), "--grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(!err.contains("panicked"));

    let spec = write(dir.path(), "nover.json", r#"{"normal":{"count":1,"sigma":1}}"#);
    let o = run(&["density", "--spec", spec.to_str().unwrap(), "--grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("version"));

    let o = run(&["density", "--spec", spec.to_str().unwrap(), "--grid", "1:0:3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_2() {
    let o = run(&["gfunc", "--b", "0,0.5,1,1.5", "--x", "1e300"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["--debug", "gfunc", "--b", "0,0.5,1,1.5", "--x", "1e300"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Numerical("));
}

#[test]
fn stein_solve_csv() {
    let o = run(&["stein-solve", "--r1", "2", "--r2", "0.5", "--h", "sin", "--grid", "0.01:50:40"]);
    assert!(o.status.success());
    let r = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(r.len(), 40);
    assert!(r.iter().all(|row| row[2].abs() <= 1e-6), "{r:?}");
}

#[test]
fn gfunc_exponential() {
    let o = run(&["gfunc", "--b", "0", "--x", "0.5,2"]);
    let r = rows(&String::from_utf8(o.stdout).unwrap());
    for row in r {
        assert!((row[1] - (-row[0]).exp()).abs() < 1e-12);
    }
}

#[test]
fn samples_respect_seed_and_threads() {
    let s = example();
    let one = run(&["sample", "--spec", s.to_str().unwrap(), "--samples", "50", "--seed", "9"]);
    let again = Command::new(BIN)
        .args(["sample", "--spec", s.to_str().unwrap(), "--samples", "50", "--seed", "9"])
        .env("STEINPROD_THREADS", "1")
        .output()
        .unwrap();
    assert!(one.status.success() && again.status.success());
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(String::from_utf8(one.stdout).unwrap().lines().count(), 50);
    let bad = Command::new(BIN)
        .args(["sample", "--spec", s.to_str().unwrap()])
        .env("STEINPROD_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn tables_for_cf_tail_mellin() {
    let s = example();
    let s = s.to_str().unwrap();
    let cf = rows(&String::from_utf8(run(&["cf", "--spec", s, "--grid", "0:2:5"]).stdout).unwrap());
    assert_eq!(cf[0][1], 1.0);
    assert!(cf.iter().all(|r| r[1].abs() <= 1.0));
    let m = rows(&String::from_utf8(run(&["mellin", "--spec", s, "--grid", "0.5:3:6"]).stdout).unwrap());
    assert!(m.iter().all(|r| r[3] < 1e-10), "{m:?}");
    let t = rows(&String::from_utf8(run(&["tail", "--spec", s, "--grid", "2:30:4"]).stdout).unwrap());
    assert_eq!(t[0].len(), 5);
    assert!(run(&["example-spec"]).status.success());
}

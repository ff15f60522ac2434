use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

use qw1::format::{operator_to_value, process_to_value};
use qw1_core::classical::{marginal, StationaryProcess};
use qw1_core::random::{hs_mixed, rng_from_seed, traceless};
use qw1_core::{DensityMatrix, Region};

fn qw1(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qw1"))
        .args(args)
        .current_dir(dir)
        .env_remove("QW1_DIM_CAP")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn zz() -> Value {
    json!({"q": 2, "sites": [[0], [1]], "re": [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]})
}

#[test]
fn w1_of_zero_operator_is_zero() {
    let t = TempDir::new().unwrap();
    write(t.path(), "d.json", &json!({"q": 2, "sites": [[0], [1]], "re": vec![vec![0.0; 4]; 4]}));
    let o = qw1(&["w1", "d.json", "--json"], t.path());
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["primal"], json!(0.0));
    assert_eq!(v["converged"], json!(true));
}

#[test]
fn w1_of_diagonal_states_matches_dbar() {
    let t = TempDir::new().unwrap();
    let a = StationaryProcess::symmetric_flip(0.2).unwrap();
    let b = StationaryProcess::iid(vec![0.3, 0.7]).unwrap();
    let state = |p: &StationaryProcess| {
        let mu = marginal(p, 1).unwrap();
        DensityMatrix::diagonal(mu.region(), mu.probs()).unwrap()
    };
    write(t.path(), "rho.json", &operator_to_value(state(&a).op()));
    write(t.path(), "sigma.json", &operator_to_value(state(&b).op()));
    write(t.path(), "a.json", &process_to_value(&a));
    write(t.path(), "b.json", &process_to_value(&b));
    let w = stdout_json(&qw1(&["w1", "rho.json", "sigma.json", "--json"], t.path()));
    let d = stdout_json(&qw1(&["dbar", "a.json", "b.json", "--a-max", "1", "--json"], t.path()));
    let per_site = w["primal"].as_f64().unwrap() / 2.0;
    assert!((per_site - d["dbar"][0].as_f64().unwrap()).abs() < 2e-5, "{per_site} vs {}", d["dbar"][0]);
}

#[test]
fn malformed_input_exits_one_with_diagnostic() {
    let t = TempDir::new().unwrap();
    std::fs::write(t.path().join("bad.json"), "{not json").unwrap();
    let o = qw1(&["w1", "bad.json"], t.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed JSON"));
    let o = qw1(&["w1", "missing.json"], t.path());
    assert_eq!(code(&o), 1);
    write(t.path(), "rho.json", &json!({"q": 2, "sites": [[0]], "re": [[2, 0], [0, 0]]}));
    let o = qw1(&["w1", "rho.json", "rho.json"], t.path());
    assert_eq!(code(&o), 1, "trace-2 matrix is not a state");
}

#[test]
fn nonconvergence_exits_two_and_still_writes_certificate() {
    let t = TempDir::new().unwrap();
    let d = traceless(&mut rng_from_seed(3), &Region::chain(0, 3, 2).unwrap());
    write(t.path(), "d.json", &operator_to_value(&d));
    let o = qw1(&["w1", "d.json", "--max-iter", "3", "--out", "cert.json"], t.path());
    assert_eq!(code(&o), 2);
    let cert: Value = serde_json::from_str(&std::fs::read_to_string(t.path().join("cert.json")).unwrap()).unwrap();
    assert_eq!(cert["converged"], json!(false));
    assert!(cert["dual"].as_f64().unwrap() <= cert["primal"].as_f64().unwrap());
    assert!(t.path().join("cert.json.manifest.json").exists());
}

#[test]
fn lipschitz_examples() {
    let t = TempDir::new().unwrap();
    write(t.path(), "id.json", &json!({"q": 2, "sites": [[0], [1]], "re": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]}));
    write(t.path(), "zz.json", &zz());
    let v = stdout_json(&qw1(&["lipschitz", "id.json", "--all-sites", "--json"], t.path()));
    assert!(v["lipschitz"].as_f64().unwrap().abs() < 1e-12);
    let v = stdout_json(&qw1(&["lipschitz", "zz.json", "--json"], t.path()));
    for s in v["sites"].as_array().unwrap() {
        assert!((s["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    }
    let v = stdout_json(&qw1(&["lipschitz", "zz.json", "--site", "1", "--json"], t.path()));
    assert_eq!(v["sites"].as_array().unwrap().len(), 1);
    assert!(v.get("lipschitz").is_none());
    assert_eq!(code(&qw1(&["lipschitz", "zz.json", "--site", "7"], t.path())), 1);
    assert_eq!(code(&qw1(&["lipschitz", "zz.json", "--site", "x"], t.path())), 1);
}

fn ising(j: f64) -> Value {
    json!({"d": 1, "q": 2, "terms": [{"sites": [[0], [1]], "op": {"re": [[j, 0, 0, 0], [0, -j, 0, 0], [0, 0, -j, 0], [0, 0, 0, j]]}}]})
}

#[test]
fn pressure_examples() {
    let t = TempDir::new().unwrap();
    write(t.path(), "zero.json", &json!({"d": 1, "q": 3, "terms": []}));
    let v = stdout_json(&qw1(&["pressure", "zero.json", "--box", "1,2", "--json"], t.path()));
    for e in v["entries"].as_array().unwrap() {
        assert!((e["pressure"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-15);
    }
    write(t.path(), "ising.json", &ising(0.5));
    let v = stdout_json(&qw1(&["pressure", "ising.json", "--sizes", "4,7,10", "--json"], t.path()));
    for e in v["entries"].as_array().unwrap() {
        let n = e["sites"].as_f64().unwrap();
        let exact = 2f64.ln() + (n - 1.0) / n * 0.5f64.cosh().ln();
        assert!((e["pressure"].as_f64().unwrap() - exact).abs() < 1e-12);
    }
    let o = qw1(&["pressure", "ising.json", "--sizes", "4", "--out", "p.csv"], t.path());
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(t.path().join("p.csv")).unwrap();
    assert!(csv.starts_with("# manifest "));
    assert!(csv.contains("shape,size,sites,pressure\nchain,4,4,"));
}

#[test]
fn gibbs_state_is_normalized() {
    let t = TempDir::new().unwrap();
    write(t.path(), "ising.json", &ising(0.5));
    let v = stdout_json(&qw1(&["gibbs", "ising.json", "--box", "1", "--json"], t.path()));
    let state = qw1::format::parse_state(&v["state"]).unwrap();
    assert!((state.op().trace() - 1.0).abs() < 1e-12);
    let exact = (2.0 * (2.0 * 0.5f64.cosh())).ln();
    assert!((v["log_partition"].as_f64().unwrap() - exact).abs() < 1e-12);
}

#[test]
fn tci_matches_grid_oracle() {
    let t = TempDir::new().unwrap();
    let v = stdout_json(&qw1(&["tci", "--phi-r", "0.01", "--q", "2", "--N", "3", "--json"], t.path()));
    let f = |s: f64| qw1_core::lattice::tci_objective(s, 0.01, 2);
    let oracle = (0..=200_000).map(|i| f(i as f64 * 50.0 / 200_000.0)).fold(f64::INFINITY, f64::min);
    let m = v["M"].as_f64().unwrap();
    assert!(m <= oracle + 1e-12 && oracle - m < 1e-6, "{m} vs {oracle}");
    let v = stdout_json(&qw1(&["tci", "--phi-r", "0.01", "--q", "2", "--N", "1", "--json"], t.path()));
    assert_eq!(v["kappa"], json!(1.0));
    assert_eq!(code(&qw1(&["tci", "--phi-r", "0.01"], t.path())), 1);
}

#[test]
fn dbar_examples() {
    let t = TempDir::new().unwrap();
    write(t.path(), "a.json", &json!({"kind": "markov", "P": [[0.9, 0.1], [0.2, 0.8]], "pi": [2.0 / 3.0, 1.0 / 3.0]}));
    write(t.path(), "zero.json", &json!({"kind": "iid", "p": [1.0, 0.0]}));
    write(t.path(), "one.json", &json!({"kind": "iid", "p": [0.0, 1.0]}));
    let v = stdout_json(&qw1(&["dbar", "a.json", "a.json", "--a-max", "3", "--json"], t.path()));
    assert_eq!(v["dbar"], json!([0.0, 0.0, 0.0]));
    let v = stdout_json(&qw1(&["dbar", "zero.json", "one.json", "--a-max", "3", "--json"], t.path()));
    for x in v["dbar"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
    write(t.path(), "bad.json", &json!({"kind": "markov", "P": [[0.9, 0.1], [0.2, 0.8]], "pi": [0.5, 0.5]}));
    assert_eq!(code(&qw1(&["dbar", "bad.json", "a.json"], t.path())), 1);
}

#[test]
fn scaling_examples() {
    let t = TempDir::new().unwrap();
    let tau = hs_mixed(&mut rng_from_seed(1), &Region::chain(0, 1, 2).unwrap());
    let family: Vec<Value> = qw1::suite::product_family(&tau, 2)
        .unwrap()
        .iter()
        .map(|s| operator_to_value(s.op()))
        .collect();
    write(t.path(), "fam.json", &json!(family));
    let v = stdout_json(&qw1(&["scaling", "fam.json", "fam.json", "--json"], t.path()));
    assert_eq!(v["w1_per_site"], json!([0.0, 0.0]));

    let other = hs_mixed(&mut rng_from_seed(2), &Region::chain(0, 1, 2).unwrap());
    let mut broken: Vec<Value> = family.clone();
    broken[1] = operator_to_value(qw1::suite::product_family(&other, 2).unwrap()[1].op());
    write(t.path(), "broken.json", &json!(broken));
    let o = qw1(&["scaling", "broken.json", "fam.json"], t.path());
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("between volumes 1 and 2"), "{err}");

    write(t.path(), "m.json", &json!({"kind": "markov", "P": [[0.8, 0.2], [0.2, 0.8]], "pi": [0.5, 0.5]}));
    write(t.path(), "i.json", &json!({"kind": "iid", "p": [0.5, 0.5]}));
    let v = stdout_json(&qw1(&["scaling", "--process", "m.json", "i.json", "--a-max", "2", "--json"], t.path()));
    assert_eq!(v["nondecreasing"], json!(true));
    assert!(v["max_abs_deviation_from_dbar"].as_f64().unwrap() < 2e-5);
}

#[test]
fn verify_examples() {
    let t = TempDir::new().unwrap();
    let o = qw1(&["verify", "--samples", "0", "--json"], t.path());
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["total_failures"], json!(0));
    assert_eq!(v["records"], json!([]));
    assert_eq!(code(&qw1(&["verify", "--suite", "bogus"], t.path())), 1);
    let o = qw1(&["verify", "--samples", "2", "--sizes", "1,2", "--threads", "2"], t.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("total failures: 0"));
}

#[test]
fn outputs_are_deterministic_and_reference_manifest() {
    let t = TempDir::new().unwrap();
    write(t.path(), "m.json", &json!({"kind": "markov", "P": [[0.7, 0.3], [0.3, 0.7]], "pi": [0.5, 0.5]}));
    write(t.path(), "i.json", &json!({"kind": "iid", "p": [0.4, 0.6]}));
    let args = |out: &'static str| ["scaling", "--process", "m.json", "i.json", "--a-max", "2", "--out", out];
    assert_eq!(code(&qw1(&args("one.json"), t.path())), 0);
    assert_eq!(code(&qw1(&args("two.json"), t.path())), 0);
    let one = std::fs::read(t.path().join("one.json")).unwrap();
    assert_eq!(one, std::fs::read(t.path().join("two.json")).unwrap());
    let out: Value = serde_json::from_slice(&one).unwrap();
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(t.path().join("one.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(out["manifest"], side["hash"]);
    assert!(side["started_unix"].is_number());
}

#[test]
fn dimension_cap_env_is_honored() {
    let t = TempDir::new().unwrap();
    let d = traceless(&mut rng_from_seed(3), &Region::chain(0, 3, 2).unwrap());
    write(t.path(), "d.json", &operator_to_value(&d));
    let o = Command::new(env!("CARGO_BIN_EXE_qw1"))
        .args(["w1", "d.json"])
        .current_dir(t.path())
        .env("QW1_DIM_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
    let o = Command::new(env!("CARGO_BIN_EXE_qw1"))
        .args(["w1", "d.json"])
        .current_dir(t.path())
        .env("QW1_DIM_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

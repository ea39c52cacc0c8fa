use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

fn fhn_pas(args: &[&str], config: Option<&Value>, dir: &Path) -> (i32, Option<Value>, String) {
    let out = dir.join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fhn-pas"));
    cmd.arg("--out").arg(&out).args(args).env("RUST_LOG", "warn");
    if let Some(c) = config {
        let path = dir.join("config.json");
        std::fs::write(&path, serde_json::to_string_pretty(c).unwrap()).unwrap();
        cmd.arg("--config").arg(path);
    }
    let output = cmd.output().unwrap();
    let manifest = std::fs::read_to_string(out.join("manifest.json"))
        .ok()
        .map(|m| serde_json::from_str(&m).unwrap());
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    (output.status.code().unwrap(), manifest, stderr)
}

fn base(a: f64) -> Value {
    json!({
        "model": { "epsilon": 0.5, "gamma": 8.0, "beta": 6.0, "rho": 0.0 },
        "source": { "a": a, "b": a, "d1": 1.0, "d2": 1.0, "x0": 1.0, "omega1": 20.0, "eta": 1.0 },
        "grid": { "half_extent": 20.0, "n_points": 401 },
        "time": { "T": 0.5, "sample_every": 20 }
    })
}

#[test]
fn equilibrium_exits_zero_with_reference_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let (code, manifest, _) = fhn_pas(&["equilibrium"], None, dir.path());
    assert_eq!(code, 0);
    assert_eq!(manifest.unwrap()["all_passed"], true);
    assert!(dir.path().join("out/equilibrium.json").exists());
}

#[test]
fn silent_simulation_stays_at_rest() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = fhn_pas(&["simulate"], Some(&base(0.0)), dir.path());
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_path(dir.path().join("out/trajectory.csv")).unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(rec[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(rec[3].parse::<f64>().unwrap(), 0.0);
        rows += 1;
    }
    assert!(rows > 401);
}

#[test]
fn reruns_are_bit_identical() {
    let mut config = base(0.05);
    config["grid"]["half_extent"] = Value::Null;
    config["study"] = json!({ "kind": "simulate", "initial": { "amplitude_v": 0.1, "amplitude_w": 0.02 } });
    let csvs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let (code, _, _) = fhn_pas(&["simulate", "--seed", "7"], Some(&config), dir.path());
            assert_eq!(code, 0);
            std::fs::read(dir.path().join("out/trajectory.csv")).unwrap()
        })
        .collect();
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn short_sweep_writes_one_row_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base(0.004);
    config["study"] = json!({ "kind": "sweep", "omega_list": [20.0, 40.0, 80.0, 160.0], "pas_refinement": 1 });
    let (code, manifest, _) = fhn_pas(&["sweep"], Some(&config), dir.path());
    assert!(code == 0 || code == 1, "exit {code}");
    assert_eq!(manifest.unwrap()["all_passed"], code == 0);
    let mut rdr = csv::Reader::from_path(dir.path().join("out/sweep.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "omega1");
    assert_eq!(rdr.records().count(), 4);
}

#[test]
fn invalid_configuration_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base(0.004);
    config["model"]["gamma"] = json!(-1.0);
    let (code, manifest, stderr) = fhn_pas(&["equilibrium"], Some(&config), dir.path());
    assert_eq!(code, 2);
    assert!(manifest.is_none());
    assert!(stderr.contains("model.gamma"), "{stderr}");
}

#[test]
fn mismatched_study_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = base(0.004);
    config["study"] = json!({ "kind": "equilibrium" });
    let (code, _, _) = fhn_pas(&["admissible"], Some(&config), dir.path());
    assert_eq!(code, 2);
}

//! End-to-end checks of the command-line binary: determinism of reruns,
//! exit codes, plot-data round trips, and schema rejection.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qubench"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qubench-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const DB_CONFIG: &str = r#"{
  "protocol": "db",
  "seed": 42,
  "shots": 800,
  "pulse": {"axis": "x", "delta_theta_deg": 0.398, "delta_phi_deg": 0.426},
  "noise": {"t1_ns": 23360, "t2_ns": 44130},
  "db": {"max_repetitions": 120}
}"#;

#[test]
fn db_run_is_byte_reproducible() {
    let dir = tempdir("repro");
    let config = write(&dir, "db.json", DB_CONFIG);
    for out in ["a", "b"] {
        let status = bin()
            .args(["db", "--config"])
            .arg(&config)
            .args(["--out"])
            .arg(dir.join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(dir.join("a/db_results.json")).unwrap();
    let b = std::fs::read(dir.join("b/db_results.json")).unwrap();
    assert_eq!(a, b, "same config and seed must produce identical bytes");
}

#[test]
fn rerun_from_config_echo_reproduces_results() {
    let dir = tempdir("echo");
    let config = write(&dir, "db.json", DB_CONFIG);
    let status = bin()
        .args(["db", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(dir.join("first"))
        .status()
        .unwrap();
    assert!(status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("first/db_results.json")).unwrap())
            .unwrap();
    // the embedded echo alone reproduces the run
    let echo = write(&dir, "echo.json", &doc["config"].to_string());
    let status = bin()
        .args(["db", "--config"])
        .arg(&echo)
        .args(["--out"])
        .arg(dir.join("second"))
        .status()
        .unwrap();
    assert!(status.success());
    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("first/db_results.json")).unwrap())
            .unwrap();
    let b: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("second/db_results.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["curves"], b["curves"]);
}

#[test]
fn override_and_exact_mode() {
    let dir = tempdir("override");
    let config = write(&dir, "db.json", DB_CONFIG);
    let out = bin()
        .args(["db", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(dir.join("out"))
        .args(["--override", "shots=0", "--override", "db.max_repetitions=80"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/db_results.json")).unwrap())
            .unwrap();
    assert_eq!(doc["config"]["shots"], 0);
    assert_eq!(doc["curves"][0]["x"].as_array().unwrap().len(), 80);
}

#[test]
fn unknown_keys_exit_one_with_path() {
    let dir = tempdir("badkey");
    let config = write(
        &dir,
        "bad.json",
        r#"{"protocol": "rb", "seed": 1, "rb": {"sequencez": 4}}"#,
    );
    let out = bin()
        .args(["rb", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rb"), "stderr should carry the path: {err}");
}

#[test]
fn missing_seed_rejected() {
    let dir = tempdir("noseed");
    let config = write(&dir, "bad.json", r#"{"protocol": "rb"}"#);
    let out = bin()
        .args(["rb", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn protocol_subcommand_mismatch_rejected() {
    let dir = tempdir("mismatch");
    let config = write(&dir, "db.json", DB_CONFIG);
    let out = bin()
        .args(["rb", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plotdata_round_trip_preserves_values() {
    let dir = tempdir("plotdata");
    let config = write(
        &dir,
        "sim.json",
        r#"{
          "protocol": "simulate", "seed": 2, "shots": 0,
          "pulse": {"axis": "x", "delta_phi_deg": 0.9},
          "noise": {"t1_ns": 23360, "t2_ns": 44130},
          "simulate": {"preparation": "plus", "pair": "xx_bar", "max_repetitions": 50}
        }"#,
    );
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    let results = dir.join("out/simulate_results.json");
    let status = bin()
        .args(["plotdata", "--results"])
        .arg(&results)
        .args(["--out"])
        .arg(dir.join("plots"))
        .status()
        .unwrap();
    assert!(status.success());

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&results).unwrap()).unwrap();
    let label = doc["curves"][0]["label"].as_str().unwrap();
    let csv_name = format!(
        "simulate_{}.csv",
        label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect::<String>()
    );
    let csv = std::fs::read_to_string(dir.join("plots").join(csv_name)).unwrap();
    let curve = qubench_core::io::parse_curve_csv(&csv).unwrap();
    let y_json: Vec<f64> = doc["curves"][0]["y_mean"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(curve.y_mean, y_json, "re-parsed CSV must match exactly");
}

#[test]
fn fit_subcommand_reads_csv() {
    let dir = tempdir("fit");
    // synthetic decaying oscillation in the curve CSV format
    let mut csv = String::from("x,y_mean,y_sem,model_prediction\n");
    for i in 1..=60 {
        let t = i as f64;
        let y = 0.5 + 0.5 * (-t / 30.0).exp() * (2.0 * 0.4 * t).cos();
        csv.push_str(&format!("{t},{y},0,nan\n"));
    }
    let data = write(&dir, "curve.csv", &csv);
    let config = write(
        &dir,
        "fit.json",
        &format!(
            r#"{{"protocol": "fit", "seed": 1, "fit": {{"model": "db_fid", "data": {:?}}}}}"#,
            data.to_str().unwrap()
        ),
    );
    let out = bin()
        .args(["fit", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/fit_results.json")).unwrap())
            .unwrap();
    let params = doc["results"]["parameters"].as_array().unwrap();
    assert!((params[1].as_f64().unwrap() - 30.0).abs() < 0.1);
    assert!((params[2].as_f64().unwrap() - 0.4).abs() < 1e-6);
}

#[test]
fn simulate_then_import_records_into_db() {
    let dir = tempdir("import");
    // produce the four learning records with the simulate subcommand
    let specs = [
        ("free", "excited", "free"),
        ("xx", "plus", "xx"),
        ("yy", "plus", "yy"),
        ("xxbar", "plus", "xx_bar"),
    ];
    let mut record_paths = Vec::new();
    for (i, (name, prep, pair)) in specs.iter().enumerate() {
        let config = write(
            &dir,
            &format!("{name}.json"),
            &format!(
                r#"{{
                  "protocol": "simulate", "seed": {}, "shots": 800,
                  "pulse": {{"axis": "x", "delta_theta_deg": 0.398, "delta_phi_deg": 0.426}},
                  "noise": {{"t1_ns": 23360, "t2_ns": 44130}},
                  "simulate": {{"preparation": "{prep}", "pair": "{pair}", "max_repetitions": 300}}
                }}"#,
                100 + i
            ),
        );
        let out_dir = dir.join(format!("out_{name}"));
        let status = bin()
            .args(["simulate", "--config"])
            .arg(&config)
            .args(["--out"])
            .arg(&out_dir)
            .status()
            .unwrap();
        assert!(status.success());
        let record = out_dir.join("simulate_record.json");
        assert!(record.exists());
        record_paths.push(record.to_str().unwrap().to_string());
    }
    let import_config = write(
        &dir,
        "import.json",
        &serde_json::json!({
            "protocol": "db",
            "seed": 1,
            "pulse": {"axis": "x"},
            "db": {"import_records": record_paths}
        })
        .to_string(),
    );
    let out = bin()
        .args(["db", "--config"])
        .arg(&import_config)
        .args(["--out"])
        .arg(dir.join("fit"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("fit/db_results.json")).unwrap())
            .unwrap();
    let t1_us = doc["results"]["t1_ns"].as_f64().unwrap() / 1e3;
    let dphi = doc["results"]["delta_phi_deg"].as_f64().unwrap();
    assert!((t1_us - 23.36).abs() / 23.36 < 0.05, "T1 {t1_us}");
    assert!((dphi - 0.426).abs() / 0.426 < 0.10, "dphi {dphi}");
}

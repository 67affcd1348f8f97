use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn gkh(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkh"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--normalize-report")
        .arg("--quiet")
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn kepler_virial_run_passes() {
    let tmp = TempDir::new().unwrap();
    let o = gkh(&configs().join("virial_kepler.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["status"], "pass");
    assert!(r["checks"][0]["residual"].as_f64().unwrap() <= 1e-8);
    assert!(r.get("timing").is_none());
}

#[test]
fn dominance_violation_exits_with_error_name() {
    let tmp = TempDir::new().unwrap();
    let o = gkh(&configs().join("compare_dominance_violation.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("DominanceError") && err.contains("r = "), "{err}");
    let r = report(tmp.path());
    assert_eq!(r["status"], "error");
    assert_eq!(r["error"]["name"], "DominanceError");
}

#[test]
fn harmonic_simulation_returns_to_its_start() {
    let tmp = TempDir::new().unwrap();
    let o = gkh(&configs().join("simulate_harmonic.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,r1,r2,p1,p2,H,J"));
    let parse = |l: &str| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>();
    let first = parse(lines.next().unwrap());
    let last = parse(csv.lines().last().unwrap());
    assert!((last[0] - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    for i in 1..5 {
        assert!(
            (first[i] - last[i]).abs() <= 1e-9,
            "column {i}: {} vs {}",
            first[i],
            last[i]
        );
    }
    // seventeen significant digits
    assert!(csv.lines().nth(1).unwrap().contains("5.0000000000000000e-1"));
}

#[test]
fn stiffness_sweep_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let o = gkh(&configs().join("sweep_harmonic_stiffness.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let expected = [1.0, 2f64.sqrt(), 2.0];
    assert_eq!(rows.len(), 3);
    for (row, e) in rows.iter().zip(expected) {
        let got: f64 = row[1].parse().unwrap();
        assert!((got - e).abs() < 1e-9, "{got} vs {e}");
        assert_eq!(row[9], "");
    }
}

#[test]
fn interpolation_sweep_is_non_decreasing() {
    let tmp = TempDir::new().unwrap();
    let o = gkh(&configs().join("sweep_mu.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["results"]["non_decreasing_energy"], true);
    let e: Vec<f64> = r["results"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["energy"].as_f64().unwrap())
        .collect();
    assert!(e.windows(2).all(|w| w[1] >= w[0]), "{e:?}");
}

fn harmonic_system() -> Value {
    json!({
        "dimension": 1,
        "kinetic": {"kind": "nonrelativistic"},
        "potential": [{"kind": "harmonic", "stiffness": 1.0}],
    })
}

#[test]
fn single_point_sweep_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "system": harmonic_system(),
        "task": {"kind": "sweep", "parameter": "potential.harmonic.stiffness", "values": [1.0], "action": 1.0},
    });
    let o = gkh(&write_config(&tmp, "c.json", &cfg), &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("task.values"), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn sweep_rows_keep_their_errors() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "system": harmonic_system(),
        "task": {"kind": "sweep", "parameter": "potential.harmonic.stiffness", "values": [1.0, -1.0], "action": 1.0},
    });
    let o = gkh(&write_config(&tmp, "c.json", &cfg), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let bad = csv.lines().nth(2).unwrap();
    assert!(bad.starts_with("-1.0000000000000000e0,,"), "{bad}");
    assert!(bad.ends_with("Error"), "{bad}");
    assert_eq!(report(tmp.path())["results"]["failed_rows"], 1);
}

#[test]
fn schema_violations_name_the_field() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        (
            json!({"system": harmonic_system(), "task": {"kind": "virial", "energy": 1.0, "tolerance": 1.0}}),
            "task.tolerance",
        ),
        (
            json!({"system": harmonic_system(), "task": {"kind": "virial", "energy": "one"}}),
            "task.energy",
        ),
        (
            json!({"system": harmonic_system(), "task": {"kind": "dance"}}),
            "task.kind",
        ),
        (json!({"task": {"kind": "virial", "energy": 1.0}}), "system"),
        (
            json!({"system": {"dimension": 1, "kinetic": {"kind": "nonrelativistic"}, "potential": [{"kind": 3}]},
                "task": {"kind": "virial", "energy": 1.0}}),
            "system.potential[0].kind",
        ),
    ];
    for (cfg, path) in cases {
        let o = gkh(&write_config(&tmp, "c.json", &cfg), tmp.path(), &[]);
        assert_eq!(o.status.code(), Some(1), "{cfg}");
        let err = stderr(&o);
        assert!(
            err.contains("ConfigError") && err.contains(&format!("`{path}`")),
            "{err}"
        );
    }
    std::fs::write(tmp.path().join("broken.json"), "{\"task\": ").unwrap();
    let o = gkh(&tmp.path().join("broken.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1"));
}

#[test]
fn model_errors_carry_the_library_error_name() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "system": {"dimension": 1, "kinetic": {"kind": "nonrelativistic"}, "potential": [{"kind": "harmonic", "stifness": 1.0}]},
        "task": {"kind": "virial", "energy": 1.0},
    });
    let o = gkh(&write_config(&tmp, "c.json", &cfg), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("InvalidParameter"), "{}", stderr(&o));

    let cfg = json!({"system": harmonic_system(), "task": {"kind": "hellmann_feynman", "parameter": "kinetic.charge", "action": 1.0}});
    let o = gkh(&write_config(&tmp, "c.json", &cfg), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("UnknownParameter"), "{}", stderr(&o));
}

#[test]
fn failed_checks_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let o = gkh(&configs().join("validate_decreasing.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report(tmp.path())["results"]["admissible"], false);

    let cfg = json!({
        "system": harmonic_system(),
        "task": {"kind": "hellmann_feynman", "parameter": "potential.harmonic.stiffness", "action": 1.0, "tol": 1e-30},
    });
    let o = gkh(&write_config(&tmp, "c.json", &cfg), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report(tmp.path())["checks"][0]["verdict"], "fail");
}

#[test]
fn bad_flags_exit_with_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_gkh")).arg("--bogus").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_gkh")).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = configs().join("sweep_mu.json");
    assert_eq!(gkh(&cfg, &a, &["--jobs", "1"]).status.code(), Some(0));
    assert_eq!(gkh(&cfg, &b, &["--jobs", "4"]).status.code(), Some(0));
    for f in ["report.json", "sweep.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_echo_reruns_to_the_same_report() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(
        gkh(&configs().join("hf_harmonic_stiffness.json"), &a, &[])
            .status
            .code(),
        Some(0)
    );
    let first = report(&a);
    let echo = write_config(&tmp, "echo.json", &first["config"]);
    assert_eq!(gkh(&echo, &b, &[]).status.code(), Some(0));
    let second = report(&b);
    assert_eq!(first["config_hash"], second["config_hash"]);
    assert_eq!(first, second);
}

#[test]
fn timing_is_reported_unless_normalized() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gkh"))
        .arg("--config")
        .arg(configs().join("virial_kepler.json"))
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Virial"));
    assert!(report(tmp.path())["timing"]["elapsed_seconds"].as_f64().unwrap() >= 0.0);
    let names: Vec<_> = std::fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, ["report.json"]);
}

#[test]
fn output_names_are_configurable() {
    let tmp = TempDir::new().unwrap();
    let mut cfg: Value =
        serde_json::from_str(&std::fs::read_to_string(configs().join("simulate_harmonic.json")).unwrap()).unwrap();
    cfg["output"] = json!({"report": "run.json", "trajectory": "orbit.csv"});
    let o = gkh(&write_config(&tmp, "c.json", &cfg), &tmp.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(tmp.path().join("o/run.json").exists() && tmp.path().join("o/orbit.csv").exists());

    cfg["output"] = json!({"report": "../escape.json"});
    let o = gkh(&write_config(&tmp, "c.json", &cfg), &tmp.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("output.report"));
}

use std::process::{Command, Output};

fn qpartial(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpartial"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_temp(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("qpartial-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn optimize_k4_matches_closed_values() {
    let out = qpartial(&["optimize", "--Ktilde", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let eta: f64 = row[1].parse().unwrap();
    let alpha: f64 = row[2].parse().unwrap();
    assert!((eta - 2f64.sqrt().atan()).abs() < 1e-11);
    assert!((alpha - (1.0f64 / 3.0).acos() / 2.0).abs() < 1e-11);
}

#[test]
fn optimize_rejects_small_ktilde() {
    let out = qpartial(&["optimize", "--Ktilde", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of domain"));
}

#[test]
fn optimize_sweep_emits_one_row_per_value() {
    let out = qpartial(&["optimize", "--sweep", "2.5,3,4,16"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);
}

#[test]
fn simulate_default_schedule_is_rounded_optimum() {
    let out = qpartial(&["simulate", "--N", "1024", "--K", "4", "--t", "1", "--tau", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "asymptotic");
    assert_eq!((row[6], row[7], row[10]), ("10", "10", "21"));
}

#[test]
fn simulate_engines_agree() {
    let base = ["simulate", "--N", "256", "--K", "8", "--t", "2", "--tau", "2", "--j1", "3", "--j2", "2", "--json"];
    let full = qpartial(&[&base[..], &["--engine", "full"]].concat());
    let reduced = qpartial(&[&base[..], &["--engine", "reduced"]].concat());
    let a: serde_json::Value = serde_json::from_slice(&full.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&reduced.stdout).unwrap();
    let ma = a["marginals"].as_array().unwrap();
    let mb = b["marginals"].as_array().unwrap();
    assert_eq!(ma.len(), 8);
    for (x, y) in ma.iter().zip(mb) {
        assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn full_engine_respects_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_qpartial"))
        .args(["simulate", "--N", "1024", "--K", "4", "--t", "1", "--tau", "1", "--engine", "full"])
        .env("QPARTIAL_MAX_FULL_N", "512")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("512"));
}

#[test]
fn surephase_reaches_unit_mass() {
    let out = qpartial(&["surephase", "--N", "1024", "--K", "16", "--t", "2", "--tau", "4", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["run"]["residual"].as_f64().unwrap() <= 1e-10);
    assert!((v["run"]["target_mass"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert_eq!(v["solution"]["total_queries"].as_u64().unwrap(), 8);
}

#[test]
fn config_file_with_flag_override() {
    let cfg = write_temp("geom.cfg", "N = 64\nK = 4\nt = 1\ntau = 1\n");
    let out = qpartial(&["simulate", "--config", cfg.to_str().unwrap(), "--tau", "2", "--j1", "1", "--j2", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("exact,64,4,16,1,2,1,0"));
}

#[test]
fn sweep_is_deterministic_and_reports_failures() {
    let good = write_temp("good.spec", "mode = exact\nN = 64, 256\nK = 4, 8\nt = 1\ntau = 1, 2\nj1 = 0..3\nj2 = 0..2\n");
    let a = qpartial(&["sweep", good.to_str().unwrap()]);
    let b = qpartial(&["sweep", good.to_str().unwrap()]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 2 * 2 * 2 * 4 * 3);

    // K = 3 does not divide N = 64
    let bad = write_temp("bad.spec", "mode = asymptotic\nN = 64\nK = 3, 4\nt = 1\ntau = 1\n");
    let out = qpartial(&["sweep", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(stdout(&out).lines().count(), 3);
    assert!(!out.stderr.is_empty());
}

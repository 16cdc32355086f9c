use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kvwave"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("kvwave-cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn kvwave")
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tmp("zeros_a.csv");
    let b = tmp("zeros_b.csv");
    for out in [&a, &b] {
        let r = run(&[
            "bessel-zeros",
            "--alpha",
            "8",
            "--n-max",
            "6",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn print_config_round_trips_through_config_file() {
    let r = run(&["rays", "--grid", "6", "--print-config"]);
    assert!(r.status.success());
    let cfg_path = tmp("rays_cfg.json");
    fs::write(&cfg_path, &r.stdout).unwrap();

    let direct = tmp("rays_direct.csv");
    let loaded = tmp("rays_loaded.csv");
    let r1 = run(&["rays", "--grid", "6", "--out", direct.to_str().unwrap()]);
    assert!(r1.status.success());
    // config file wins over flags, including the output path, so rewrite it
    let mut cfg: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    cfg["out"] = serde_json::Value::String(loaded.to_str().unwrap().into());
    fs::write(&cfg_path, serde_json::to_vec(&cfg).unwrap()).unwrap();
    let r2 = run(&["rays", "--config", cfg_path.to_str().unwrap()]);
    assert!(r2.status.success(), "{}", String::from_utf8_lossy(&r2.stderr));
    assert_eq!(fs::read(&direct).unwrap(), fs::read(&loaded).unwrap());
}

#[test]
fn unknown_config_key_is_rejected() {
    let cfg_path = tmp("bad_cfg.json");
    fs::write(
        &cfg_path,
        r#"{"alpha": 8, "n_max": 4, "out": "x.csv", "surprise": 1}"#,
    )
    .unwrap();
    let r = run(&["bessel-zeros", "--config", cfg_path.to_str().unwrap()]);
    assert!(!r.status.success());
    let err: serde_json::Value =
        serde_json::from_slice(&r.stderr).expect("stderr is a JSON error record");
    assert!(err["error"].as_str().unwrap().contains("surprise"));
}

#[test]
fn failures_emit_json_error_and_nonzero_exit() {
    let r = run(&["resolvent-scan", "--lambda", "0:10:1", "--out", "/dev/null"]);
    assert!(!r.status.success());
    let err: serde_json::Value = serde_json::from_slice(&r.stderr).unwrap();
    assert!(err["error"].is_string());
}

#[test]
fn csv_headers_match_documented_schemas() {
    let zeros = tmp("schema_zeros.csv");
    let rays = tmp("schema_rays.csv");
    let r1 = run(&[
        "bessel-zeros",
        "--n-max",
        "2",
        "--out",
        zeros.to_str().unwrap(),
    ]);
    let r2 = run(&["rays", "--grid", "4", "--out", rays.to_str().unwrap()]);
    assert!(r1.status.success() && r2.status.success());
    let h1 = fs::read_to_string(&zeros).unwrap();
    let h2 = fs::read_to_string(&rays).unwrap();
    assert_eq!(h1.lines().next().unwrap(), "m,n,lambda,residual,ratio");
    assert_eq!(
        h2.lines().next().unwrap(),
        "start_r,start_angle,time_to_damping,first_r0,classification"
    );
    // every data row has the full column count
    for line in h2.lines().skip(1) {
        assert_eq!(line.split(',').count(), 5, "row: {line}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let one = tmp("threads_one.csv");
    let many = tmp("threads_many.csv");
    for (threads, out) in [("1", &one), ("4", &many)] {
        let r = bin()
            .env("KVWAVE_THREADS", threads)
            .args([
                "bessel-zeros",
                "--alpha",
                "4",
                "--n-max",
                "8",
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(r.status.success());
    }
    assert_eq!(fs::read(&one).unwrap(), fs::read(&many).unwrap());
}

#[test]
fn single_criterion_report_writes_summary_json() {
    let out = tmp("c12.json");
    let r = run(&["report", "--criterion", "12", "--out", out.to_str().unwrap()]);
    assert!(r.status.success());
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("criterion 12"), "stdout: {stdout}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["id"], 12);
    assert!(v["metrics"].is_object());
}

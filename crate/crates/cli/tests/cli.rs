//! End-to-end runs of the binary: simulate → track/count/screen → eval,
//! plus streaming ingestion and exit-code behaviour.

use std::io::Write;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermotrack"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "thermotrack {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        run_ok(&[
            "simulate",
            "--scene",
            "corridor3",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    assert_eq!(read(&a.join("frames.jsonl")), read(&b.join("frames.jsonl")));
    assert_eq!(read(&a.join("truth.jsonl")), read(&b.join("truth.jsonl")));

    let c = dir.path().join("c");
    run_ok(&["simulate", "--scene", "corridor3", "--seed", "8", "--out", c.to_str().unwrap()]);
    assert_ne!(read(&a.join("frames.jsonl")), read(&c.join("frames.jsonl")));
}

#[test]
fn track_then_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    run_ok(&["simulate", "--scene", "wall-walk", "--seed", "3", "--out", sim.to_str().unwrap()]);

    let est = dir.path().join("est.jsonl");
    run_ok(&[
        "track",
        "--frames",
        sim.join("frames.jsonl").to_str().unwrap(),
        "--out",
        est.to_str().unwrap(),
    ]);
    let est_text = read(&est);
    assert!(est_text.lines().count() > 100, "estimates written");
    let first: serde_json::Value = serde_json::from_str(est_text.lines().next().unwrap()).unwrap();
    assert!(first.get("roi").is_some());
    assert!(first.get("occupied").is_some());

    let csv_path = dir.path().join("rmse.csv");
    run_ok(&[
        "eval",
        "rmse",
        "--est",
        est.to_str().unwrap(),
        "--truth",
        sim.join("truth.jsonl").to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    let csv = read(&csv_path);
    assert!(csv.starts_with("true_d_m,n,rmse_d_m,rmse_theta_deg"));
    let overall = csv.lines().last().unwrap();
    assert!(overall.starts_with("overall,"));
    let rmse_d: f64 = overall.split(',').nth(2).unwrap().parse().unwrap();
    assert!(rmse_d < 1.0, "pipeline-level distance RMSE {rmse_d}");
}

#[test]
fn count_emits_occupancy_and_alerts() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    run_ok(&["simulate", "--scene", "corridor2", "--seed", "5", "--out", sim.to_str().unwrap()]);

    let occ = dir.path().join("occupancy.jsonl");
    let alerts = dir.path().join("alerts.jsonl");
    run_ok(&[
        "count",
        "--frames",
        sim.join("frames.jsonl").to_str().unwrap(),
        "--zeta",
        "2",
        "--threshold-m",
        "1.0",
        "--window-s",
        "3",
        "--out",
        occ.to_str().unwrap(),
        "--alerts-out",
        alerts.to_str().unwrap(),
    ]);
    let occ_text = read(&occ);
    assert!(occ_text.lines().count() > 10);
    let snap: serde_json::Value = serde_json::from_str(occ_text.lines().next().unwrap()).unwrap();
    assert_eq!(snap["r"].as_array().unwrap().len(), 12);
    // two subjects pass each other on adjacent lanes: alerts must fire
    let alerts_text = read(&alerts);
    assert!(!alerts_text.trim().is_empty(), "expected distancing alerts");
    let alert: serde_json::Value =
        serde_json::from_str(alerts_text.lines().next().unwrap()).unwrap();
    assert!(alert["distance_m"].as_f64().unwrap() < 1.0);
}

#[test]
fn screen_flags_fever_subject() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    run_ok(&["simulate", "--scene", "screening", "--seed", "9", "--out", sim.to_str().unwrap()]);

    let verdicts = dir.path().join("verdicts.jsonl");
    run_ok(&[
        "screen",
        "--frames",
        sim.join("frames.jsonl").to_str().unwrap(),
        "--radar",
        sim.join("radar.jsonl").to_str().unwrap(),
        "--out",
        verdicts.to_str().unwrap(),
    ]);
    let text = read(&verdicts);
    assert!(text.lines().count() > 20, "verdicts written");
    let mut f1 = 0usize;
    let mut total = 0usize;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        total += 1;
        if v["state"] == "F1" {
            f1 += 1;
        }
        let t_body = v["t_body_c"].as_f64().unwrap();
        assert!((30.0..45.0).contains(&t_body), "t_body {t_body}");
    }
    // simulated subject runs a 38.2 °C fever
    assert!(f1 * 2 > total, "majority of verdicts should be F1, got {f1}/{total}");
}

#[test]
fn track_ingests_from_socket() {
    use std::net::TcpListener;

    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    run_ok(&[
        "simulate",
        "--scene",
        "wall-walk",
        "--seed",
        "4",
        "--steps",
        "120",
        "--out",
        sim.to_str().unwrap(),
    ]);
    let frames = read(&sim.join("frames.jsonl"));

    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        let (mut stream, _) = listener.accept().unwrap();
        for line in frames.lines() {
            writeln!(stream, "{line}").unwrap();
        }
    });

    let est = dir.path().join("est.jsonl");
    run_ok(&[
        "track",
        "--connect",
        &addr.to_string(),
        "--out",
        est.to_str().unwrap(),
    ]);
    server.join().unwrap();
    assert!(read(&est).lines().count() > 50, "estimates from the socket stream");
}

#[test]
fn fit_srelu_from_samples_file() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.jsonl");
    let mut f = std::fs::File::create(&samples).unwrap();
    for i in 0..50 {
        let d = 0.25 + 0.065 * i as f64;
        let inc = (1.0 + (4.5f64 - 1.1 * d).exp()).ln();
        writeln!(f, r#"{{"d_m": {d}, "increase_c": {inc}}}"#).unwrap();
    }
    drop(f);
    let out = run_ok(&["fit", "srelu", "--samples", samples.to_str().unwrap()]);
    let sigma0: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("sigma0_c = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((sigma0 - 4.5).abs() < 1e-5, "sigma0 {sigma0}");
}

#[test]
fn usage_errors_exit_with_code_2() {
    let out = bin().args(["--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // runtime errors exit 1 with a diagnostic
    let out = bin().args(["track", "--frames", "/nonexistent.jsonl"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

use std::process::{Command, Output};
use std::time::Instant;

use lyapchi::{preimage_average, CircleMap};
use serde_json::Value;

fn lyapchi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyapchi"))
        .args(args)
        .env_remove("LYAPCHI_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn enumerate_csv() {
    let text = stdout(&lyapchi(&["enumerate", "--map", "linear:2", "--period", "3"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("branch,point,exponent,residual"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 7);
    for row in &rows {
        assert_eq!(row.split(',').nth(2), Some("0.6931471805599453"));
    }

    let text = stdout(&lyapchi(&["enumerate", "--map", "trigdoubling:0.01", "--period", "10"]));
    assert_eq!(text.lines().count(), 1024);
    let text = stdout(&lyapchi(&["enumerate", "--map", "blaschke:0.1", "--period", "2"]));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn enumerate_json_round_trips_numbers() {
    let text = stdout(&lyapchi(&["enumerate", "--map", "blaschke:0.1", "--period", "4", "--format", "json"]));
    let records: Vec<Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(records.len(), 15);
    let map = CircleMap::<f64>::blaschke(0.1).unwrap();
    let direct = lyapchi::enumerate_fix(&map, 4).unwrap();
    for (r, d) in records.iter().zip(&direct) {
        assert_eq!(r["point"].as_f64().unwrap().to_bits(), d.point.to_bits());
    }
}

#[test]
fn spectrum_reports() {
    let lin: Value = serde_json::from_str(&stdout(&lyapchi(&["spectrum", "--map", "linear:2"]))).unwrap();
    assert!((lin["chi_bar"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-14);
    assert_eq!(lin["degenerate_variance"], Value::Bool(true));

    let trig: Value =
        serde_json::from_str(&stdout(&lyapchi(&["spectrum", "--map", "trigdoubling:0.01", "--modes", "64"]))).unwrap();
    let map = CircleMap::<f64>::trig_doubling(0.01).unwrap();
    let h = map.log_derivative();
    let oracle = preimage_average(&map, |x| h.value(x), 18, 0.0).unwrap();
    assert!((trig["chi_bar"].as_f64().unwrap() - oracle).abs() < 1e-6);
    assert_eq!(trig["modes"], 64);

    let b: Value = serde_json::from_str(&stdout(&lyapchi(&[
        "spectrum", "--map", "blaschke:0.1", "--modes", "64", "--twist", "0.05",
    ])))
    .unwrap();
    let kappa = b["kappa"].as_array().unwrap();
    assert_eq!(kappa.len(), 3);
    for k in kappa {
        let (re, im) = (k["re"].as_f64().unwrap(), k["im"].as_f64().unwrap());
        assert!(re.hypot(im) <= 1.0 + 1e-12);
    }
}

#[test]
fn clt_exit_codes_and_decay() {
    let out = lyapchi(&["clt", "--map", "linear:2", "--periods", "8,10"]);
    assert_eq!(out.status.code(), Some(4));

    let out = lyapchi(&["clt-check", "--map", "blaschke:0.1", "--periods", "8,16"]);
    let study: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let reports = study["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    let d8 = reports[0]["ks_distance"].as_f64().unwrap();
    let d16 = reports[1]["ks_distance"].as_f64().unwrap();
    assert!(d16 < d8);
    assert!(study["ks_slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn configuration_errors_fail_fast() {
    let start = Instant::now();
    let out = lyapchi(&["enumerate", "--map", "trigdoubling:0.01", "--period", "40"]);
    assert_eq!(out.status.code(), Some(2));
    let out = lyapchi(&["clt", "--map", "trigdoubling:0.01", "--periods", "10,40"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(start.elapsed().as_secs_f64() < 2.0);

    assert_eq!(lyapchi(&["enumerate", "--map", "tent:2", "--period", "3"]).status.code(), Some(2));
    assert_eq!(lyapchi(&["clt", "--map", "blaschke:0.1", "--periods", "0,4"]).status.code(), Some(2));
    assert_eq!(lyapchi(&["enumerate", "--map", "blaschke:1.5", "--period", "3"]).status.code(), Some(2));
    assert_eq!(lyapchi(&["spectrum", "--map", "blaschke:0.1", "--twist", "0.9"]).status.code(), Some(2));
}

#[test]
fn histogram_csv() {
    let text = stdout(&lyapchi(&["histogram", "--map", "trigdoubling:0.01", "--period", "10", "--bins", "20"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin_left,bin_right,count"));
    let counts: u64 = lines.map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(counts, 1023);

    let text = stdout(&lyapchi(&[
        "histogram", "--map", "blaschke:0.1", "--period", "10", "--normalized",
    ]));
    assert_eq!(text.lines().count(), 101);

    let out = lyapchi(&["histogram", "--map", "linear:2", "--period", "5"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn output_file_and_thread_flag() {
    let dir = std::env::temp_dir().join(format!("lyapchi-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fix.csv");
    let out = lyapchi(&[
        "enumerate", "--map", "blaschke:0.1", "--period", "6", "--threads", "3", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let file = std::fs::read(&path).unwrap();
    let piped = lyapchi(&["enumerate", "--map", "blaschke:0.1", "--period", "6", "--threads", "1"]);
    assert_eq!(file, piped.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

use std::path::Path;
use std::process::{Command, Output};

use mixdetect::detector::{DetectorConfig, Detector, Rule};
use mixdetect_cli::config::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mixdetect"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn jsonl(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn value(recs: &[serde_json::Value], label: &str) -> f64 {
    recs.iter()
        .find(|r| r["label"] == label)
        .unwrap_or_else(|| panic!("no record {label}"))["value"]
        .as_f64()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// Deterministic pseudo-noise without an RNG dependency.
fn noise_rows(n: usize, t: usize, jump_at: usize, mu: f64) -> Vec<Vec<f64>> {
    let mut s: u64 = 0x2545_F491_4F6C_DD1D;
    (0..t)
        .map(|i| {
            (0..n)
                .map(|j| {
                    s ^= s << 13;
                    s ^= s >> 7;
                    s ^= s << 17;
                    let u = (s >> 11) as f64 / (1u64 << 53) as f64;
                    let shift = if i >= jump_at && j < 3 { mu } else { 0.0 };
                    2.0 * (u - 0.5) * 1.7 + shift
                })
                .collect()
        })
        .collect()
}

fn to_csv(rows: &[Vec<f64>], header: bool) -> String {
    let mut s = String::new();
    if header {
        let names: Vec<String> = (1..=rows[0].len()).map(|i| format!("s{i}")).collect();
        s.push_str(&names.join(","));
        s.push('\n');
    }
    for r in rows {
        let f: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        s.push_str(&f.join(","));
        s.push('\n');
    }
    s
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "rule = \"t2\"\np0 = 0.1\nb = 19.5\nN = 100\nm1 = 200\n");
    let a = run(&["analytic", "--config", &cfg, "--format", "jsonl"]);
    let b = run(&["analytic", "--rule", "t2", "--p0", "0.1", "-b", "19.5", "-N", "100", "--m1", "200", "--format", "jsonl"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(value(&jsonl(&a), "ARL"), value(&jsonl(&b), "ARL"));
    // A flag overrides the file.
    let c = run(&["analytic", "--config", &cfg, "-b", "20.4", "--format", "jsonl"]);
    assert!(value(&jsonl(&c), "ARL") > value(&jsonl(&a), "ARL"));
    let parsed = RunConfig::load(Path::new(&cfg)).unwrap();
    assert_eq!(RunConfig::from_toml(&parsed.to_toml().unwrap()).unwrap(), parsed);
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "rule = \"t2\"\nthreshhold = 3\n");
    let out = run(&["analytic", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshhold"));
}

#[test]
fn detect_on_zeros_exhausts_input() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "zeros.csv", &"0,0,0,0\n".repeat(30));
    let out = run(&["detect", "--rule", "t2", "--p0", "0.1", "-b", "19.5", "--input", &data]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jump_fires_max_and_mixture_together() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = vec![vec![0.0; 5]; 10];
    rows.push(vec![20.0, 0.0, 0.0, 0.0, 0.0]);
    let data = write(dir.path(), "jump.csv", &to_csv(&rows, true));
    let max = run(&["detect", "--rule", "max", "-b", "12.8", "--input", &data, "--format", "jsonl"]);
    let t2 = run(&["detect", "--rule", "t2", "--p0", "0.1", "-b", "19.5", "--input", &data, "--format", "jsonl"]);
    assert_eq!(max.status.code(), Some(0));
    assert_eq!(t2.status.code(), Some(0));
    let (a, b) = (jsonl(&max), jsonl(&t2));
    assert_eq!(value(&a, "stopping time"), 11.0);
    assert_eq!(value(&b, "stopping time"), 11.0);
    assert_eq!(value(&a, "estimated change-point"), 10.0);
    assert_eq!(value(&b, "U of stream 1"), 20.0);
    assert_eq!(a[3]["label"], "U of stream 1");
}

#[test]
fn detect_matches_programmatic_run() {
    let rows = noise_rows(12, 120, 40, 1.2);
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "noise.csv", &to_csv(&rows, false));
    let out = run(&["detect", "--rule", "t2", "--p0", "0.25", "-b", "9", "--m1", "50", "--input", &data, "--format", "jsonl"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = jsonl(&out);

    let mut det = Detector::new(DetectorConfig::new(Rule::T2 { p0: 0.25 }, 9.0, 1, 50), 12).unwrap();
    let d = det.run(rows.iter().map(|r| r.as_slice())).unwrap().unwrap();
    assert_eq!(value(&recs, "stopping time"), d.time as f64);
    assert_eq!(value(&recs, "estimated change-point"), d.argmax_k.unwrap() as f64);
    assert_eq!(value(&recs, "score"), d.score);
}

#[test]
fn malformed_rows_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "bad.csv", "1,2\n3,oops\n");
    let out = run(&["detect", "--rule", "max", "-b", "5", "--input", &data]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 2") && err.contains("column 2"), "{err}");
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "simulate", "--mode", "edd", "--rule", "t2", "--p0", "0.1", "-b", "12", "-N", "30", "--m1", "60", "--fraction",
        "0.1", "--mu", "1", "--trials", "40", "--seed", "9", "--format", "jsonl",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let recs = jsonl(&a);
    assert!(recs[0]["config_hash"].as_str().unwrap().len() == 64);
    assert_eq!(recs[0]["seed"], 9);
}

#[test]
fn zero_threshold_stops_at_minimum_window() {
    let out = run(&[
        "simulate", "--rule", "t2", "--p0", "0.1", "-b", "0", "-N", "8", "--m0", "3", "--m1", "20", "--trials", "25",
        "--format", "jsonl",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = jsonl(&out);
    assert_eq!(value(&recs, "ARL"), 3.0);
    assert_eq!(recs[0]["std_error"], 0.0);
}

#[test]
fn calibration_rejects_trivial_targets() {
    let out = run(&["calibrate", "--rule", "t2", "--p0", "0.1", "-N", "100", "--target-arl", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let ok = run(&["calibrate", "--rule", "t2", "--p0", "0.1", "-N", "100", "--target-arl", "5000", "--format", "jsonl"]);
    let b = value(&jsonl(&ok), "threshold");
    assert!((b - 19.48).abs() < 0.01, "{b}");
}

#[test]
fn unknown_table_is_a_usage_error() {
    let out = run(&["reproduce", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["reproduce", "1", "--theory-only", "--format", "jsonl"]);
    assert!(out.status.success());
    assert_eq!(jsonl(&out).len(), 12);
}

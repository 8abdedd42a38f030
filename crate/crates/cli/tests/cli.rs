use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn tsmorph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsmorph")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_series(path: &Path, values: &[f64]) {
    let mut text = String::from("t,value\n");
    for (t, v) in values.iter().enumerate() {
        text.push_str(&format!("{t},{v}\n"));
    }
    fs::write(path, text).unwrap();
}

fn read_values(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1.parse().unwrap())
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn wave(len: usize, period: f64, phase: f64) -> Vec<f64> {
    (0..len).map(|t| (2.0 * PI * t as f64 / period + phase).sin() + 0.01 * t as f64).collect()
}

#[test]
fn morph_writes_steps_and_meta() {
    let dir = TempDir::new().unwrap();
    let (src, tgt, out) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("out"));
    write_series(&src, &[0.0, 0.0, 0.0]);
    write_series(&tgt, &[10.0, 20.0, 30.0]);
    let res = tsmorph(&["morph", "--source", p(&src), "--target", p(&tgt), "-n", "3", "-o", p(&out)]);
    assert!(res.status.success(), "{}", stderr(&res));
    assert_eq!(read_values(&out.join("step_000.csv")), vec![0.0, 0.0, 0.0]);
    assert_eq!(read_values(&out.join("step_001.csv")), vec![5.0, 10.0, 15.0]);
    assert_eq!(read_values(&out.join("step_002.csv")), vec![10.0, 20.0, 30.0]);
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("morph_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["n"], 3);
    assert_eq!(meta["alphas"], serde_json::json!([0.0, 0.5, 1.0]));
    assert_eq!(meta["source_id"], "a");
    assert_eq!(meta["target_id"], "b");
}

#[test]
fn morph_eleven_steps_on_long_series() {
    let dir = TempDir::new().unwrap();
    let (src, tgt, out) = (dir.path().join("s.csv"), dir.path().join("t.csv"), dir.path().join("m"));
    let a = wave(735, 7.0, 0.0);
    let b = wave(735, 30.0, 1.0);
    write_series(&src, &a);
    write_series(&tgt, &b);
    let res = tsmorph(&["morph", "--source", p(&src), "--target", p(&tgt), "-n", "11", "-o", p(&out)]);
    assert!(res.status.success(), "{}", stderr(&res));
    for i in 0..11 {
        assert_eq!(read_values(&out.join(format!("step_{i:03}.csv"))).len(), 735);
    }
    assert!(!out.join("step_011.csv").exists());
    assert_eq!(read_values(&out.join("step_000.csv")), a);
    assert_eq!(read_values(&out.join("step_010.csv")), b);
}

#[test]
fn morph_length_mismatch_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let (src, tgt) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_series(&src, &[1.0; 10]);
    write_series(&tgt, &[1.0; 12]);
    let res = tsmorph(&["morph", "--source", p(&src), "--target", p(&tgt), "-n", "3", "-o", p(dir.path())]);
    assert_eq!(res.status.code(), Some(2));
    let err = stderr(&res);
    assert!(err.contains("length mismatch: 10 vs 12"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn parse_error_reports_location() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "t,value\n1,1.0\n2,2.0\n3,3.0\n4,abc\n").unwrap();
    let res = tsmorph(&["features", p(&bad)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains(":5:2:"), "{}", stderr(&res));
}

#[test]
fn features_of_a_cosine() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("cos8.csv");
    let values: Vec<f64> = (0..256).map(|t| (2.0 * PI * t as f64 / 8.0).cos()).collect();
    write_series(&f, &values);
    let res = tsmorph(&["features", p(&f)]);
    assert!(res.status.success(), "{}", stderr(&res));
    let json: Value = serde_json::from_slice(&res.stdout).unwrap();
    let centroid = json["cos8"]["centroid_frequency"].as_f64().unwrap();
    assert!((centroid - PI / 4.0).abs() < 1e-12);
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.find("forecast_error").unwrap() < text.find("centroid_frequency").unwrap());
}

#[test]
fn evaluate_requires_horizon() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("x.csv");
    write_series(&f, &wave(50, 7.0, 0.0));
    let res = tsmorph(&["evaluate", p(&f), "--forecaster", "naive"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn evaluate_naive_record() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("ramp.csv");
    write_series(&f, &(1..=10).map(f64::from).collect::<Vec<_>>());
    let out = dir.path().join("eval.json");
    let res = tsmorph(&["evaluate", p(&f), "--forecaster", "naive", "--horizon", "2", "-o", p(&out)]);
    assert!(res.status.success(), "{}", stderr(&res));
    let json: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(json[0]["series_id"], "ramp");
    assert_eq!(json[0]["forecasts"], serde_json::json!([8.0, 8.0]));
    assert_eq!(json[0]["mase"], 1.5);
    assert_eq!(json[0]["season"], 1);
}

#[test]
fn evaluate_unknown_forecaster_and_bad_param() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("x.csv");
    write_series(&f, &wave(50, 7.0, 0.0));
    let res = tsmorph(&["evaluate", p(&f), "--forecaster", "lstm", "--horizon", "2"]);
    assert_eq!(res.status.code(), Some(2));
    let res = tsmorph(&["evaluate", p(&f), "--forecaster", "ses", "--param", "alpha=2", "--horizon", "2"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn evaluate_constant_series_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("flat.csv");
    write_series(&f, &[5.0; 20]);
    let res = tsmorph(&["evaluate", p(&f), "--forecaster", "naive", "--horizon", "4"]);
    assert_eq!(res.status.code(), Some(3));
    assert!(stderr(&res).contains("flat"));
}

const NAIVE_STUB: &str = r#"tail -n 1 | cut -d, -f2 | { read v; i=0; while [ "$i" -lt "$TSMORPH_HORIZON" ]; do echo "$v"; i=$((i+1)); done; }"#;

#[test]
fn external_stub_matches_naive() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("w.csv");
    write_series(&f, &wave(80, 7.0, 0.3));
    let run = |args: &[&str]| -> Value {
        let res = tsmorph(args);
        assert!(res.status.success(), "{}", stderr(&res));
        serde_json::from_slice(&res.stdout).unwrap()
    };
    let naive = run(&["evaluate", p(&f), "--forecaster", "naive", "--horizon", "5"]);
    let command = format!("command={NAIVE_STUB}");
    let external = run(&["evaluate", p(&f), "--forecaster", "external", "--param", &command, "--horizon", "5"]);
    assert_eq!(naive[0]["forecasts"], external[0]["forecasts"]);
    assert_eq!(naive[0]["mase"], external[0]["mase"]);

    let res = tsmorph(&["evaluate", p(&f), "--forecaster", "external", "--param", "command=exit 1", "--horizon", "5"]);
    assert_eq!(res.status.code(), Some(3));
    assert!(stderr(&res).contains("exit"), "{}", stderr(&res));
}

fn synth_corpus(dir: &Path, kind: &str, count: &str, seed: &str) -> PathBuf {
    let out = dir.join(format!("{kind}-{seed}"));
    let res = tsmorph(&[
        "synth", "--kind", kind, "--count", count, "--length", "120", "--seed", seed, "-o", p(&out),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    out
}

#[test]
fn synth_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = synth_corpus(dir.path(), "sine", "4", "11");
    let b = synth_corpus(&dir.path().join("again"), "sine", "4", "11");
    for i in 0..4 {
        let name = format!("series_{i:03}.csv");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
    assert!(!a.join("series_004.csv").exists());
}

#[test]
fn synth_rejects_zero_count() {
    let dir = TempDir::new().unwrap();
    let res = tsmorph(&["synth", "--kind", "noise", "--count", "0", "--length", "10", "--seed", "1", "-o", p(dir.path())]);
    assert_eq!(res.status.code(), Some(2));
}

fn analyze(corpus: &Path, report: &Path, jobs: &str) -> Output {
    tsmorph(&[
        "analyze", "--corpus", p(corpus), "--forecaster", "seasonal_naive", "--param", "m=7", "--horizon", "14",
        "--season", "1", "-n", "5", "--pairs", "3", "--seed", "42", "--jobs", jobs, "-o", p(report),
    ])
}

#[test]
fn analyze_is_independent_of_jobs() {
    let dir = TempDir::new().unwrap();
    let corpus = synth_corpus(dir.path(), "sine", "6", "3");
    let (r1, r8) = (dir.path().join("r1.json"), dir.path().join("r8.json"));
    let res = analyze(&corpus, &r1, "1");
    assert!(res.status.success(), "{}", stderr(&res));
    let res = analyze(&corpus, &r8, "8");
    assert!(res.status.success(), "{}", stderr(&res));
    let text = fs::read_to_string(&r1).unwrap();
    assert_eq!(text, fs::read_to_string(&r8).unwrap());
    let json: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["schema"], "tsmorph-report/1");
    assert_eq!(json["per_pair"].as_array().unwrap().len(), 3);
}

#[test]
fn analyze_small_corpus_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let corpus = synth_corpus(dir.path(), "sine", "2", "3");
    let res = analyze(&corpus, &dir.path().join("r.json"), "1");
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn analyze_rejects_tiny_n() {
    let dir = TempDir::new().unwrap();
    let corpus = synth_corpus(dir.path(), "sine", "4", "3");
    let res = tsmorph(&[
        "analyze", "--corpus", p(&corpus), "--forecaster", "naive", "--horizon", "5", "--season", "1", "-n", "1",
        "--pairs", "1", "-o", p(&dir.path().join("r.json")),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

#[test]
fn plot_matches_golden_svg() {
    let dir = TempDir::new().unwrap();
    let res = tsmorph(&[
        "plot", "--report", p(&fixture("report.json")), "--feature", "forecast_error", "-o", p(dir.path()),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let produced = fs::read_to_string(dir.path().join("forecast_error.svg")).unwrap();
    let golden = fs::read_to_string(fixture("forecast_error.svg")).unwrap();
    assert_eq!(produced, golden);
}

#[test]
fn plot_markers_use_ramp_endpoints() {
    let dir = TempDir::new().unwrap();
    let res = tsmorph(&[
        "plot", "--report", p(&fixture("three_steps.json")), "--feature", "forecast_error", "--low-color", "0,0,255",
        "--high-color", "255,0,0", "-o", p(dir.path()),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let svg = fs::read_to_string(dir.path().join("forecast_error.svg")).unwrap();
    let markers: Vec<&str> = svg.lines().filter(|l| l.contains(r#"class="marker""#)).collect();
    assert_eq!(markers.len(), 3);
    assert!(markers[0].contains(r#"fill="rgb(0,0,255)""#), "{}", markers[0]);
    assert!(markers[1].contains(r#"fill="rgb(128,0,128)""#), "{}", markers[1]);
    assert!(markers[2].contains(r#"fill="rgb(255,0,0)""#), "{}", markers[2]);
    assert!(svg.contains("<title>forecast_error</title>"));
}

#[test]
fn plot_unknown_feature_fails() {
    let dir = TempDir::new().unwrap();
    let res = tsmorph(&["plot", "--report", p(&fixture("three_steps.json")), "--feature", "nope", "-o", p(dir.path())]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("nope"));
}

#[test]
fn plot_defaults_to_every_feature() {
    let dir = TempDir::new().unwrap();
    let res = tsmorph(&["plot", "--report", p(&fixture("report.json")), "-o", p(dir.path())]);
    assert!(res.status.success(), "{}", stderr(&res));
    for name in ["forecast_error", "centroid_frequency", "low_frequency_power", "whiten_timescale", "mean", "std", "acf_lag1"] {
        assert!(dir.path().join(format!("{name}.svg")).exists(), "{name}");
    }
}

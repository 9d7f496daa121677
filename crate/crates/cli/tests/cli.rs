//! End-to-end runs of the command-line binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_costspace")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn write_csv(dir: &TempDir, name: &str, rows: &[(f64, u8)]) -> PathBuf {
    let path = dir.path().join(name);
    let body: String = rows.iter().map(|(s, l)| format!("{s},{l}\n")).collect();
    fs::write(&path, format!("score,label\n{body}")).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn loss_of(report: &Value, method: &str) -> f64 {
    report["results"].as_array().unwrap().iter().find(|r| r["method"] == method).unwrap()["loss"].as_f64().unwrap()
}

const FOUR: [(f64, u8); 4] = [(0.2, 0), (0.4, 0), (0.6, 1), (0.8, 1)];

fn mixed_rows() -> Vec<(f64, u8)> {
    (0..40).map(|i| (((i * 37) % 41) as f64 / 40.0, u8::from((i * 7) % 5 < 2))).collect()
}

/// Balanced sample on quantile grids: class 0 on [0, 1], class 1 on [a, 1 + a] with AUC 1 - (1 - a)^2 / 2,
/// rescaled into [0, 1].
fn shifted_uniform(n: usize, auc: f64) -> Vec<(f64, u8)> {
    let a = 1.0 - (2.0 * (1.0 - auc)).sqrt();
    let half = n / 2;
    let q = |i: usize| (i as f64 + 0.5) / half as f64;
    let scale = 1.0 + a;
    (0..half).map(|i| (q(i) / scale, 0)).chain((0..half).map(|i| ((a + q(i)) / scale, 1))).collect()
}

#[test]
fn metrics_of_a_small_dataset() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "d.csv", &FOUR);
    let m = json(&["metrics", s(&path)]);
    assert!((m["mae"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert!((m["bs"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert_eq!(m["auc"].as_f64(), Some(1.0));
    let crisp = write_csv(&dir, "crisp.csv", &[(0.0, 0), (1.0, 1), (0.0, 0)]);
    let m = json(&["metrics", s(&crisp), "--fixed-threshold", "0.5"]);
    assert_eq!((m["mae"].as_f64(), m["bs"].as_f64(), m["auc"].as_f64(), m["acc"].as_f64()), (Some(0.0), Some(0.0), Some(1.0), Some(1.0)));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let single = write_csv(&dir, "single.csv", &[(0.2, 0), (0.4, 0)]);
    let out = run(&["metrics", s(&single)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("single class"));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "score,label\n0.2,0\n0.4,7\n").unwrap();
    let out = run(&["metrics", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let good = write_csv(&dir, "d.csv", &FOUR);
    assert_eq!(run(&["loss", s(&good), "--method", "xx"]).status.code(), Some(2));
    assert_eq!(run(&["loss", s(&good), "--weight", "beta:0,1"]).status.code(), Some(2));
    assert_eq!(run(&["curves", s(&good), "--grid", "1"]).status.code(), Some(2));
    assert_eq!(run(&["metrics", "/nonexistent/file.csv"]).status.code(), Some(2));
    assert_eq!(run(&["continuous-demo", "--model", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn score_driven_loss_is_the_brier_score() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "m.csv", &mixed_rows());
    let bs = json(&["metrics", s(&path)])["bs"].as_f64().unwrap();
    let report = json(&["loss", s(&path), "--method", "sd", "--weight", "uniform", "--condition", "cost"]);
    assert!((loss_of(&report, "sd") - bs).abs() <= 1e-12);
    assert!(report["results"][0]["abs_gap"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn methods_can_be_repeated_or_listed() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "m.csv", &mixed_rows());
    let a = json(&["loss", s(&path), "--method", "sd,opt", "--method", "ru", "--fixed-rate", "0.3"]);
    let names: Vec<&str> = a["results"].as_array().unwrap().iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(names, ["sd", "opt", "ru", "rf=0.3"]);
    let skew = json(&["loss", s(&path), "--method", "su", "--condition", "skew", "--weight", "beta:2,2"]);
    assert_eq!(skew["results"][0]["closed_form"], Value::Null);
}

#[test]
fn optimal_loss_of_separable_data_is_zero() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "sep.csv", &FOUR);
    assert_eq!(loss_of(&json(&["loss", s(&path), "--method", "opt"]), "opt"), 0.0);
}

#[test]
fn rate_driven_loss_follows_the_auc() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "big.csv", &shifted_uniform(10_000, 0.79));
    let auc = json(&["metrics", s(&path)])["auc"].as_f64().unwrap();
    assert!((auc - 0.79).abs() < 1e-3, "{auc}");
    let rd = loss_of(&json(&["loss", s(&path), "--method", "rd"]), "rd");
    assert!((rd - 0.188).abs() <= 0.01, "{rd}");
}

fn compare_rows(out: &Value) -> Vec<(String, Vec<f64>, Vec<u64>)> {
    out["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let losses = r["losses"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            let best = r["best"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
            (r["method"].as_str().unwrap().to_string(), losses, best)
        })
        .collect()
}

#[test]
fn compare_flags_the_lowest_loss() {
    let dir = TempDir::new().unwrap();
    // A ranks perfectly with scores squeezed around 0.5; B is sharper but misranks
    let a: Vec<(f64, u8)> = (0..10).map(|i| (0.49 + i as f64 * 1e-3, 0)).chain((0..10).map(|i| (0.501 + i as f64 * 1e-3, 1))).collect();
    let b: Vec<(f64, u8)> = [(0.1, 0); 8].into_iter().chain([(0.9, 0); 2]).chain([(0.9, 1); 8]).chain([(0.1, 1); 2]).collect();
    let (pa, pb) = (write_csv(&dir, "a.csv", &a), write_csv(&dir, "b.csv", &b));
    let json_out = dir.path().join("cmp.json");
    let table = ok(&["compare", s(&pa), s(&pb), "--method", "rd,sd", "--out", s(&json_out)]);
    assert!(table.contains('*'));
    let v: Value = serde_json::from_str(&fs::read_to_string(&json_out).unwrap()).unwrap();
    assert_eq!(v["models"], serde_json::json!(["a", "b"]));
    let rows = compare_rows(&v);
    assert_eq!((rows[0].0.as_str(), rows[0].2.as_slice()), ("rd", &[0u64][..]));
    assert_eq!((rows[1].0.as_str(), rows[1].2.as_slice()), ("sd", &[1u64][..]));

    let same = dir.path().join("same.json");
    ok(&["compare", s(&pa), s(&pa), "--out", s(&same)]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&same).unwrap()).unwrap();
    for (_, losses, best) in compare_rows(&v) {
        assert_eq!(losses[0], losses[1]);
        assert_eq!(best, [0, 1]);
    }
}

#[test]
fn calibrated_copy_scores_like_the_optimum() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "m.csv", &mixed_rows());
    let cal = ok(&["calibrate", s(&path), "--method", "pav"]);
    let mut rdr = csv::Reader::from_reader(cal.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["score", "label", "calibrated_score"]);
    let rows: Vec<(f64, u8)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[2].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    let cal_path = write_csv(&dir, "cal.csv", &rows);
    let sd = loss_of(&json(&["loss", s(&cal_path), "--method", "sd"]), "sd");
    let opt = loss_of(&json(&["loss", s(&path), "--method", "opt"]), "opt");
    // calibrated scores pass through 9 significant digits
    assert!((sd - opt).abs() <= 1e-8, "{sd} vs {opt}");
}

#[test]
fn evenly_spaced_calibration() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "e.csv", &[(0.3, 0), (0.5, 1), (0.9, 1)]);
    let out = dir.path().join("out.csv");
    ok(&["calibrate", s(&path), "--method", "est", "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let col: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(col, ["0", "0.5", "1"]);
}

#[test]
fn optimal_curve_of_a_diagonal_model_has_area_one_quarter() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "diag.csv", &[(0.1, 0), (0.1, 1), (0.9, 0), (0.9, 1)]);
    let text = ok(&["curves", s(&path), "--type", "optimal", "--grid", "11"]);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["c", "loss", "area"]);
    let area: f64 = rdr.records().map(|r| r.unwrap()[2].parse::<f64>().unwrap()).sum();
    assert!((area - 0.25).abs() <= 1e-6, "{area}");
}

#[test]
fn refinement_curve_matches_the_optimal_curve() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "m.csv", &mixed_rows());
    let area = |t: &str| -> f64 {
        let text = ok(&["curves", s(&path), "--type", t, "--grid", "51"]);
        csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()[2].parse::<f64>().unwrap()).sum()
    };
    let opt = loss_of(&json(&["loss", s(&path), "--method", "opt"]), "opt");
    assert!((area("optimal") - opt).abs() < 1e-6);
    assert!((area("refinement") - opt).abs() < 1e-6);
}

#[test]
fn continuous_demo_reports_and_writes_curves() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("curves");
    let v = json(&["continuous-demo", "--model", "fig9", "--out", s(&out), "--grid", "21"]);
    assert!((v["L_opt"].as_f64().unwrap() - 0.10245).abs() <= 1e-3);
    let sum = v["lambda_bij"].as_f64().unwrap() + v["lambda_sing"].as_f64().unwrap();
    assert!((sum - v["L_opt"].as_f64().unwrap()).abs() < 1e-9);
    let bs = v["CL"].as_f64().unwrap() + v["RL"].as_f64().unwrap();
    assert!((bs - v["BS"].as_f64().unwrap()).abs() < 1e-9);
    assert_eq!(v["intervals"][0]["kind"], "bijective");
    for (file, header) in [("optimal_loss.csv", "c,loss"), ("lambda.csv", "t,integrand"), ("refinement.csv", "t,density")] {
        let text = fs::read_to_string(out.join(file)).unwrap();
        assert_eq!(text.lines().next(), Some(header));
        assert_eq!(text.lines().count(), 22);
    }
    let nested = json(&["continuous", "demo", "--model", "strictly-convex"]);
    assert_eq!(nested["L_opt"], v["L_opt"]);
    let wiggle = json(&["continuous", "demo", "--model", "parabola-wiggle"]);
    assert_eq!(wiggle["convexified"], true);
    let list = json(&["continuous", "list"]);
    assert!(list.as_array().unwrap().iter().any(|m| m["name"] == "piecewise-convex"));
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = write_csv(&dir, "m.csv", &mixed_rows());
    for args in [
        vec!["metrics", s(&path)],
        vec!["loss", s(&path), "--method", "su,sd,ru,rd,opt", "--weight", "beta:2,3"],
        vec!["curves", s(&path), "--type", "cost", "--method", "rd", "--condition", "skew"],
        vec!["calibrate", s(&path), "--method", "pav"],
        vec!["compare", s(&path), s(&path)],
        vec!["continuous-demo", "--model", "fig10"],
    ] {
        assert_eq!(run(&args).stdout, run(&args).stdout, "{args:?}");
    }
}

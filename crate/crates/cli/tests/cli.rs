use std::path::Path;
use std::process::{Command, Output};

use blockmerge::ExactRational;
use serde_json::Value;

fn blockmerge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockmerge"))
        .args(args)
        .env_remove("BLOCKMERGE_OUT")
        .output()
        .expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = blockmerge(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn rational(v: &Value) -> ExactRational {
    serde_json::from_value(v.clone()).expect("exact value")
}

/// Data rows of a CSV artifact, skipping `#` lines and the header.
fn csv_rows(stdout: &[u8]) -> Vec<Vec<String>> {
    let text = String::from_utf8_lossy(stdout);
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn note(stdout: &[u8], key: &str) -> String {
    let text = String::from_utf8_lossy(stdout);
    let prefix = format!("# {key}: ");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_default().to_string()
}

#[test]
fn mean_of_three() {
    let v = json_of(&["moments", "--n-max", "3", "--order", "1", "--mode", "exact"]);
    let mu = &v["result"]["table"]["mu"];
    assert_eq!(rational(&mu[2]), ExactRational::new(10, 3));
    assert_eq!(v["manifest"]["command"], "moments");
}

#[test]
fn mean_of_one_is_zero() {
    let v = json_of(&["moments", "--n-max", "1"]);
    assert_eq!(rational(&v["result"]["table"]["mu"][0]), ExactRational::zero());
}

#[test]
fn fourth_central_ratio_trends_to_one() {
    let out = blockmerge(&["moments", "--n-max", "60", "--order", "4", "--mode", "exact", "--format", "csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&out.stdout);
    // columns: n, mu, raw_1..raw_4, central_2..central_4, ratio_2..ratio_4
    let ratio4 = |n: usize| rows[n - 1][11].parse::<f64>().unwrap();
    assert!((ratio4(60) - 1.0).abs() < (ratio4(20) - 1.0).abs());
    assert!((ratio4(60) - 1.0).abs() < 0.5);
}

#[test]
fn pmf_of_two_is_geometric() {
    let out = blockmerge(&["pmf", "--n", "2", "--m-max", "10", "--format", "csv"]);
    assert!(out.status.success());
    for (i, row) in csv_rows(&out.stdout).iter().enumerate() {
        let p: ExactRational = row[1].parse().unwrap();
        assert_eq!(p, ExactRational::new(1, 2).pow(i as i32 + 1));
    }
}

#[test]
fn pmf_of_one_is_terminal() {
    let v = json_of(&["pmf", "--n", "1"]);
    assert_eq!(v["result"]["pmf"]["terminal"], true);
    assert_eq!(rational(&v["result"]["pmf"]["residual"]), ExactRational::zero());
}

#[test]
fn automatic_truncation_reaches_target() {
    let out = blockmerge(&["pmf", "--n", "10", "--m-max", "auto", "--format", "csv"]);
    let r: ExactRational = note(&out.stdout, "residual").parse().unwrap();
    assert!(r.to_f64() < 1e-30);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(blockmerge(&["simulate", "--n", "5", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(blockmerge(&["exact", "--identities", "nosuch"]).status.code(), Some(2));
    assert_eq!(blockmerge(&["simulate", "--n", "5", "--samples", "9", "--backend", "x"]).status.code(), Some(2));
    assert_eq!(blockmerge(&["nosuch"]).status.code(), Some(2));
}

#[test]
fn identity_suite_passes() {
    assert_eq!(blockmerge(&["exact", "--n-max", "1"]).status.code(), Some(0));
    let out = blockmerge(&["exact", "--n-max", "200", "--identities", "all", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn simulation_matches_exact_law() {
    let v = json_of(&["simulate", "--n", "10", "--samples", "1000000", "--seed", "7", "--backend", "chain"]);
    assert!(v["result"]["tv_vs_exact"].as_f64().unwrap() < 0.005);
    assert_eq!(v["manifest"]["seeds"][0], 7);
}

#[test]
fn clt_at_ten_thousand() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = blockmerge(&[
        "clt", "--n", "10000", "--samples", "200000", "--seed", "7", "--plot-data", "plot.csv", "--out", d,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("clt.json")).unwrap()).unwrap();
    assert!(v["result"]["report"]["ks_statistic"].as_f64().unwrap() < 0.05);
    let plot = std::fs::read_to_string(dir.path().join("plot.csv")).unwrap();
    assert!(plot.lines().any(|l| l.starts_with("normal,")));
    assert!(plot.lines().any(|l| l.starts_with("histogram,")));
}

fn xi_column(v: &Value) -> Vec<ExactRational> {
    v["result"]["xi"].as_array().unwrap().iter().map(rational).collect()
}

#[test]
fn unit_forcing_gives_the_means() {
    let v = json_of(&["recurrence", "--lambda-const", "1", "--initial", "0,2", "--n-max", "40", "--mode", "exact"]);
    let m = json_of(&["moments", "--n-max", "40", "--mode", "exact"]);
    let mu: Vec<ExactRational> = m["result"]["table"]["mu"].as_array().unwrap().iter().map(rational).collect();
    assert_eq!(xi_column(&v), mu);
}

#[test]
fn zero_forcing_gives_zeros() {
    let v = json_of(&["recurrence", "--lambda-const", "0", "--initial", "0,0", "--n-max", "30", "--mode", "exact"]);
    assert!(xi_column(&v).iter().all(|x| x.is_zero()));
}

#[test]
fn linear_forcing_trend() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("lambda.txt");
    let text: String = (1..=200).map(|n| format!("{n}\n")).collect();
    std::fs::write(&file, text).unwrap();
    let v = json_of(&[
        "recurrence", "--L", "1", "--M", "1", "--lambda-file", file.to_str().unwrap(), "--initial", "0,2", "--n-max", "200",
    ]);
    let rows = v["result"]["rows"].as_array().unwrap();
    let trend = |i: usize| rows[i]["trend"].as_f64().unwrap();
    assert!((trend(199) - 1.0).abs() < (trend(49) - 1.0).abs());
    assert!((trend(199) - 1.0).abs() < 0.1);
}

fn replay_matches(dir: &Path, args: &[&str], artifact: &str) {
    let first = dir.join("first");
    let second = dir.join("second");
    let mut a: Vec<&str> = args.to_vec();
    a.extend(["--out", first.to_str().unwrap()]);
    assert!(blockmerge(&a).status.success());
    let command = args[0];
    let manifest = first.join(format!("{command}.manifest.json"));
    let out = blockmerge(&["replay", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let x = std::fs::read(first.join(artifact)).unwrap();
    let y = std::fs::read(second.join(artifact)).unwrap();
    assert_eq!(x, y, "{artifact} differs after replay");
}

#[test]
fn manifest_replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    replay_matches(&dir.path().join("m"), &["moments", "--n-max", "30", "--order", "4", "--mode", "exact"], "moments.json");
    replay_matches(&dir.path().join("c"), &["pmf", "--n", "6", "--format", "csv"], "pmf.csv");
    replay_matches(&dir.path().join("s"), &["simulate", "--n", "12", "--samples", "20000", "--seed", "3", "--workers", "2"], "simulate.json");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_blockmerge"))
        .args(["pmf", "--n", "3", "--m-max", "4"])
        .env("BLOCKMERGE_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("pmf.json").exists());
    assert!(dir.path().join("pmf.manifest.json").exists());
}

#[test]
fn bad_manifest_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, "{}").unwrap();
    assert_eq!(blockmerge(&["replay", path.to_str().unwrap()]).status.code(), Some(2));
}

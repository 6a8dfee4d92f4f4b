use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use helmholtz_lab::experiment::{CSV_HEADER, PRESETS};

fn helmholtz(dir: &Path, args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helmholtz"))
        .args(args)
        .current_dir(dir)
        .env("HELMHOLTZ_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn run_config(dir: &Path, name: &str, text: &str, threads: &str) -> (Output, String) {
    let path = dir.join(format!("{name}.cfg"));
    fs::write(&path, text).unwrap();
    let out = helmholtz(dir, &["run", path.to_str().unwrap()], threads);
    let csv = fs::read_to_string(dir.join(format!("{name}.csv"))).unwrap_or_default();
    (out, csv)
}

#[test]
fn empty_k_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = run_config(
        dir.path(),
        "bad",
        "method = fem\ndomain = interval\nk =\nn_elements = 4\n",
        "1",
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`k`"));
}

#[test]
fn unknown_preset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = helmholtz(dir.path(), &["preset", "fig9"], "1");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3_and_keeps_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = "method = nodal_exact\ndomain = interval\nk = 100\nn_elements = 10, 40\n";
    let (out, csv) = run_config(dir.path(), "fail", text, "1");
    assert_eq!(out.status.code(), Some(3));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].contains(",error,"));
    assert!(!rows[2].contains("error"));
}

#[test]
fn runs_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = "preset = fig1_1d_pollution\nk = 10\np = 1,2\nn_elements = 10,20,40\n";
    let (a, csv_a) = run_config(dir.path(), "a", text, "1");
    let (b, csv_b) = run_config(dir.path(), "b", text, "3");
    assert!(a.status.success() && b.status.success());
    assert_eq!(csv_a.lines().next(), Some(CSV_HEADER));
    assert_eq!(csv_a.lines().count(), 7);
    assert_eq!(csv_a, csv_b);
    assert_eq!(a.stdout.len(), b.stdout.len());
}

#[test]
fn pollution_series_reports_a_slope() {
    let dir = tempfile::tempdir().unwrap();
    let text = "preset = fig1_1d_pollution\nk = 10\np = 1\n";
    let (out, csv) = run_config(dir.path(), "fig1", text, "2");
    assert!(out.status.success());
    let n_lambda: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(8).unwrap().parse().unwrap())
        .collect();
    assert!(n_lambda.windows(2).all(|w| w[1] > w[0]));
    let err: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(9).unwrap().parse().unwrap())
        .collect();
    assert!(err[err.len() - 1] < err[err.len() - 2]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("slope") && stdout.contains("k=10 p=1"), "{stdout}");
}

#[test]
fn list_presets_names_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = helmholtz(dir.path(), &["list-presets"], "1");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("fig1_1d_pollution"));
    let line = text.lines().find(|l| l.starts_with("lshape_singular")).unwrap();
    assert!(line.contains("Example 5.3"));
    for p in PRESETS {
        assert!(text.contains(p.name));
    }
}

#[test]
fn every_listed_preset_runs() {
    let reduced = |name: &str| -> &'static str {
        match name {
            "fig1_1d_pollution" | "nodal_exact_1d" => "k = 10\np = 1\nn_elements = 20,40,80\n",
            "fig2_square" => "k = 4\np = 1\nh = 0.5,0.25\n",
            "fig3_lshape_pfem" => "k = 4\np = 1,2\n",
            "lshape_singular" => "k = 1\np = 1,2\nh = 0.5\n",
            "uwvf_square" | "ls_square" => "p = 3,5\nh = 0.5\n",
            "infsup_1d" => "k = 4,8\np = 1\n",
            "approx_trefftz" => "h = 0.5\n",
            other => panic!("no reduced run for {other}"),
        }
    };
    let dir = tempfile::tempdir().unwrap();
    let out = helmholtz(dir.path(), &["list-presets"], "1");
    let listing = String::from_utf8(out.stdout).unwrap();
    for line in listing.lines() {
        let name = line.split_whitespace().next().unwrap();
        let text = format!("preset = {name}\n{}", reduced(name));
        let (out, csv) = run_config(dir.path(), name, &text, "2");
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(csv.lines().count() >= 2, "{name}");
    }
}

#[test]
fn preset_writes_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = helmholtz(dir.path(), &["preset", "nodal_exact_1d", "--out", "res"], "1");
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("res/nodal_exact_1d.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
}

#[test]
fn mesh_dump_with_grading() {
    let dir = tempfile::tempdir().unwrap();
    let header = |args: &[&str]| -> Vec<usize> {
        let out = helmholtz(dir.path(), args, "1");
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        text.lines()
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect()
    };
    let plain = header(&["mesh-dump", "lshape", "0.5"]);
    let graded = header(&["mesh-dump", "lshape", "0.5", "--grade", "0.125,3"]);
    assert_eq!(plain[0], 2);
    assert!(graded[2] > plain[2]);
    let out = helmholtz(dir.path(), &["mesh-dump", "circle", "0.5"], "1");
    assert_eq!(out.status.code(), Some(2));
}

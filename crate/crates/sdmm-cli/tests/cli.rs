//! End-to-end runs of the sdmm binary: exit codes, output shape, and
//! byte-stability of generated CSV.

use std::path::PathBuf;
use std::process::{Command, Output};

fn sdmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdmm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn scratch(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("sdmm-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn thresholds_reproduce_the_fixed_series() {
    let out = sdmm(&["thresholds", "100", "100", "30", "1..99"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,sbp_r_th,sbp_upload,mm_gasp_r_th,mm_gasp_upload");
    assert_eq!(lines.len(), 100);
    assert_eq!(lines[1], "1,13129,2,11127,2");
    assert_eq!(lines[2], "2,13258,3,13857,4");
    assert_eq!(lines[99], "99,25771,100,25939,198");
}

#[test]
fn thresholds_accept_a_single_value() {
    let out = sdmm(&["thresholds", "2", "2", "1", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().nth(1), Some("2,10,3,11,4"));
}

#[test]
fn thresholds_empty_range_prints_header_only() {
    let out = sdmm(&["thresholds", "5", "5", "2", "9..1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn thresholds_reject_subtask_counts_beyond_the_column_blocks() {
    let out = sdmm(&["thresholds", "4", "4", "2", "1..5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_output_is_byte_stable_across_runs() {
    let conf = scratch("stable.conf");
    let csv_a = scratch("a.csv");
    let csv_b = scratch("b.csv");
    let base = "\
scheme = sbp
k = 4
l = 4
t = 2
nu = 0.001
classes = 1000:10, 10:10
ucb = 10, 60, 100
trials = 5
seed = 99
";
    for (csv, tag) in [(&csv_a, "a"), (&csv_b, "b")] {
        std::fs::write(&conf, format!("{base}output = {}\n", csv.display())).unwrap();
        let out = sdmm(&["simulate", conf.to_str().unwrap()]);
        assert!(out.status.success(), "run {tag}: {out:?}");
    }
    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("ucb,scheme,c,m,r_th,act_mean,act_std,feasible_frac,trials,seed\n"));
    assert!(!text.contains('\r'));
    for p in [conf, csv_a, csv_b] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn simulate_relative_output_lands_next_to_the_config() {
    let dir = scratch("outdir");
    std::fs::create_dir_all(&dir).unwrap();
    let conf = dir.join("sweep.conf");
    std::fs::write(
        &conf,
        "scheme = sbp\nk = 2\nl = 2\nt = 1\nnu = 0.001\nclasses = 100:8\n\
         ucb = 40\ntrials = 3\nseed = 4\noutput = sweep.csv\n",
    )
    .unwrap();
    let out = sdmm(&["simulate", conf.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let written = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(written.starts_with("ucb,"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn simulate_rejects_config_mistakes() {
    let conf = scratch("broken.conf");
    std::fs::write(&conf, "scheme = sbp\nbogus_key = 1\n").unwrap();
    let out = sdmm(&["simulate", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&conf, "scheme = sbp\nscheme = sbp\n").unwrap();
    let out = sdmm(&["simulate", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(conf);
}

#[test]
fn simulate_rejects_missing_file() {
    let out = sdmm(&["simulate", "/nonexistent/run.conf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decode_roundtrip_passes_and_reports() {
    let out = sdmm(&["decode-roundtrip", "2", "2", "1", "2", "2147483647", "42"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("pass"));
}

#[test]
fn decode_roundtrip_rejects_nondivisible_shapes() {
    let out = sdmm(&["decode-roundtrip", "2", "2", "1", "2", "2147483647", "42", "--rows", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn privacy_scan_passes_on_a_valid_key() {
    let out = sdmm(&["privacy-scan", "1", "1", "1", "1", "5"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("all 1-subsets private"));
}

#[test]
fn privacy_scan_names_the_leaking_worker_on_a_zero_point() {
    let out = sdmm(&["privacy-scan", "1", "1", "1", "1", "5", "--zero-x", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("[0]"), "{err}");
}

#[test]
fn privacy_scan_beyond_collusion_bound_is_informational() {
    let out = sdmm(&["privacy-scan", "1", "1", "1", "1", "5", "--subset-size", "2"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("out of model"));
}

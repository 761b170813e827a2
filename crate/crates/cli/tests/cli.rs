//! Golden tests for the command-line interface: pinned output schemas,
//! exit codes, and reproducibility flags.

use std::process::{Command, Output};

fn strahler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strahler"))
        .args(args)
        .env_remove("STRAHLER_MODE")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn dist_exact_golden() {
    let out = strahler(&["dist", "--r", "2", "--n", "4", "--mode", "exact"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "{\"config\":{\"subcommand\":\"dist\",\"r\":2,\"n\":4,\"mode\":\"exact\"},\
         \"support\":[{\"num\":1,\"den\":1,\"p_num\":4,\"p_den\":5},\
         {\"num\":2,\"den\":1,\"p_num\":1,\"p_den\":5}]}\n"
    );
}

#[test]
fn enumerate_count_only_golden() {
    let out = strahler(&["enumerate", "--n", "3", "--count-only"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "2\n");
}

#[test]
fn enumerate_respects_cap() {
    let out = strahler(&["enumerate", "--n", "13", "--count-only"]);
    assert_eq!(out.status.code(), Some(2));
    let out = strahler(&["enumerate", "--n", "13", "--count-only", "--cap", "13"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "208012\n");
}

#[test]
fn randomized_commands_refuse_without_seed() {
    for args in [
        vec!["sample", "--n", "4"],
        vec!["clt", "--kind", "count", "--r", "1", "--n", "64", "--samples", "10"],
        vec!["horton", "--r", "1", "--n", "64", "--samples", "10"],
    ] {
        let out = strahler(&args);
        assert_eq!(out.status.code(), Some(2), "args: {args:?}");
    }
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = strahler(&["dist", "--r", "2", "--n", "4", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_is_seed_deterministic() {
    let a = strahler(&["sample", "--n", "9", "--seed", "5", "--count", "4"]);
    let b = strahler(&["sample", "--n", "9", "--seed", "5", "--count", "4"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let c = strahler(&["sample", "--n", "9", "--seed", "6", "--count", "4"]);
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn strahler_profile_golden() {
    let out = strahler(&["strahler", "(((()())())((()())()))"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "{\"config\":{\"subcommand\":\"strahler\",\"n\":6},\
         \"magnitude\":6,\"strahler_number\":3,\"counts\":[6,2,1]}\n"
    );
}

#[test]
fn mgf_exact_golden() {
    let out = strahler(&["mgf", "--n", "4", "--x-num", "2", "--x-den", "1"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "{\"config\":{\"subcommand\":\"mgf\",\"n\":4,\"x-num\":2,\"x-den\":1,\"mode\":\"exact\"},\
         \"x\":{\"num\":2,\"den\":1},\"hypergeometric\":{\"num\":12,\"den\":5},\
         \"direct\":{\"num\":12,\"den\":5},\"residual\":{\"num\":0,\"den\":1}}\n"
    );
}

#[test]
fn moments_csv_schema() {
    let out = strahler(&["moments", "--kind", "central", "--k", "2", "--n-max", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: subcommand=moments kind=central"));
    assert_eq!(lines[1], "kind,k,l,n,numerator,denominator");
    assert_eq!(lines[2], "central,2,0,2,1,4");
    assert_eq!(lines[3], "central,2,0,3,1,16");
    assert_eq!(lines[4], "central,2,0,4,1,5");
}

#[test]
fn moments_mode_env_and_flag() {
    let base = ["moments", "--kind", "raw", "--k", "1", "--n-max", "4", "--n-min", "4"];
    let float = Command::new(env!("CARGO_BIN_EXE_strahler"))
        .args(base)
        .env("STRAHLER_MODE", "float")
        .output()
        .expect("binary runs");
    assert!(stdout(&float).ends_with("raw,1,0,4,1.2\n"));
    let beaten = Command::new(env!("CARGO_BIN_EXE_strahler"))
        .args(base)
        .arg("--mode")
        .arg("exact")
        .env("STRAHLER_MODE", "float")
        .output()
        .expect("binary runs");
    assert!(stdout(&beaten).ends_with("raw,1,0,4,6,5\n"));
    let bad = Command::new(env!("CARGO_BIN_EXE_strahler"))
        .args(base)
        .env("STRAHLER_MODE", "quantum")
        .output()
        .expect("binary runs");
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn clt_csv_schema_and_determinism() {
    let args = [
        "clt", "--kind", "count", "--r", "1", "--n", "128", "--samples", "400", "--seed", "9",
    ];
    let a = strahler(&args);
    assert!(a.status.success());
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: subcommand=clt"));
    assert_eq!(
        lines[1],
        "kind,q,r,n,samples,mean,variance,predicted_variance,m3,m4,ks,zero_freq"
    );
    assert!(lines[2].starts_with("count,0,1,128,400,"));
    let b = strahler(&args);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn clt_count_equals_gap_one_ratio() {
    // The count statistic is the ratio statistic with unit denominator
    // order; identical seeds must give identical summaries.
    let count = strahler(&[
        "clt", "--kind", "count", "--r", "1", "--n", "100", "--samples", "300", "--seed", "21",
    ]);
    let ratio = strahler(&[
        "clt", "--kind", "ratio", "--q", "1", "--r", "1", "--n", "100", "--samples", "300",
        "--seed", "21",
    ]);
    let row = |o: &Output| stdout(o).lines().last().unwrap().to_string();
    let strip_kind = |line: String| line.splitn(3, ',').nth(2).unwrap().to_string();
    assert_eq!(strip_kind(row(&count)), strip_kind(row(&ratio)));
}

#[test]
fn clt_json_histogram() {
    let out = strahler(&[
        "clt", "--kind", "count", "--r", "1", "--n", "64", "--samples", "200", "--seed", "2",
        "--out", "json", "--hist-bins", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("{\"config\":"));
    assert!(text.contains("\"histogram\":{\"edges\":["));
    // 3 bins hold every sample.
    let counts = text.split("\"counts\":[").nth(1).unwrap();
    let counts: u64 = counts
        .split(']')
        .next()
        .unwrap()
        .split(',')
        .map(|c| c.parse::<u64>().unwrap())
        .sum();
    assert_eq!(counts, 200);
}

#[test]
fn horton_reports_exceedance() {
    let out = strahler(&[
        "horton", "--r", "1", "--n", "512", "--samples", "500", "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("{\"config\":{\"subcommand\":\"horton\",\"r\":1,\"n\":512,"));
    assert!(text.contains("\"exceed_frequency\":"));
}

#[test]
fn verify_all_skip_mc_passes() {
    let out = strahler(&["verify-all", "--skip-mc"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let pass_lines = text.lines().filter(|l| l.starts_with("PASS")).count();
    assert_eq!(pass_lines, 11, "output:\n{text}");
    assert!(!text.contains("FAIL"));
}

use std::process::{Command, Output};

fn exh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exh"))
        .args(args)
        .env_remove("EXH_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn constant_table_as_csv() {
    let out = exh(&["integrate", "--fn", "1", "--a", "0", "--b", "1", "--max-level", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2), "level cap before tolerance");
    assert_eq!(
        stdout(&out),
        "level,A_n,partial,error_ratio\n\
         1,5.0000000000000000e-1,5.0000000000000000e-1,5.0000000000000000e-1\n\
         2,2.5000000000000000e-1,7.5000000000000000e-1,5.0000000000000000e-1\n\
         3,1.2500000000000000e-1,8.7500000000000000e-1,\n"
    );
}

#[test]
fn converged_json_report() {
    let out = exh(&["integrate", "--fn", "3*x^2 - 2*x", "--a", "-1", "--b", "2", "--tol", "1e-3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["value", "error_estimate", "levels_used", "eval_count", "converged", "termination", "per_level"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["termination"], "tolerance_met");
    assert!((v["value"].as_f64().unwrap() - 6.0).abs() < 1e-2);
    let row = &v["per_level"][0];
    assert!(row.get("A_n").is_some() && row.get("n").is_some());
}

#[test]
fn reversed_bounds_negate() {
    let fwd = exh(&["integrate", "--fn", "x", "--a", "0", "--b", "1", "--max-level", "8", "--format", "csv"]);
    let back = exh(&["integrate", "--fn", "x", "--a", "1", "--b", "0", "--max-level", "8", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&back)).unwrap();
    let last = stdout(&fwd).lines().last().unwrap().split(',').nth(2).unwrap().parse::<f64>().unwrap();
    assert_eq!(v["value"].as_f64().unwrap(), -last);
}

#[test]
fn parse_errors_exit_3() {
    for args in [
        vec!["integrate", "--fn", "sin(", "--a", "0", "--b", "1"],
        vec!["integrate", "--fn", "foo(x)", "--a", "0", "--b", "1"],
        vec!["integrate", "--fn", "x", "--a", "1", "--b", "nan"],
        vec!["integrate", "--fn", "x", "--a", "0"],
        vec!["series", "--id", "ln", "--levels", "20", "--x", "-1"],
        vec!["series", "--id", "nope", "--levels", "20"],
        vec!["diffract", "--aperture", "unit", "--k", "1", "--slice", "y=1", "--extent", "1", "--samples", "3"],
        vec!["frobnicate"],
    ] {
        let out = exh(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn non_finite_sample_exit_4() {
    let out = exh(&["integrate", "--fn", "ln(x - 0.5)", "--a", "0", "--b", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["termination"], "non_finite_sample");
    assert_eq!(v["x"].as_f64(), Some(0.5));
    let out = exh(&["improper", "--fn", "ln(x - 2.5)", "--max-level", "6"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn help_documents_precedence() {
    let out = exh(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("-2^2 = -(2^2) = -4"));
    assert!(text.contains("EXH_THREADS"));
    assert_eq!(exh(&["--version"]).status.code(), Some(0));
}

#[test]
fn leading_minus_expression() {
    let out = exh(&["integrate", "--fn", "-2^2", "--a", "0", "--b", "1", "--max-level", "1", "--format", "csv"]);
    assert!(stdout(&out).contains("1,-2.0000000000000000e0,-2.0000000000000000e0,"));
}

#[test]
fn improper_exponential() {
    let out = exh(&["improper", "--fn", "exp(-x)", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-5);
    assert_eq!(v["tail_met"], true);
    let csv = exh(&["improper", "--fn", "exp(-x)", "--tol", "1e-6", "--format", "csv"]);
    assert!(stdout(&csv).starts_with("block,lo,hi,value,error_estimate,levels_used,converged\n0,"));
}

#[test]
fn improper_oscillatory_does_not_converge() {
    let out = exh(&["improper", "--fn", "sin(x)/x", "--max-blocks", "30", "--max-level", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn series_values() {
    let out = exh(&["series", "--id", "sin", "--levels", "20", "--x", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let value: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((value - 1f64.sin()).abs() < 1e-5);
    let out = exh(&["series", "--id", "gaussian", "--levels", "20", "--a", "1", "--b", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["id"], "gaussian");
    assert!((v["value"].as_f64().unwrap() - 0.882_081_390_762_422).abs() < 1e-5);
}

#[test]
fn diffract_slice_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let spectrum = dir.path().join("spectrum.csv");
    let out = exh(&[
        "diffract",
        "--aperture",
        "rect",
        "--wx",
        "2",
        "--wy",
        "1",
        "--k",
        "1",
        "--slice",
        "z=5",
        "--extent",
        "2",
        "--samples",
        "3",
        "--levels",
        "4",
        "--spectrum",
        spectrum.to_str().unwrap(),
        "--spectrum-levels",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,z,re_phi,im_phi,abs_phi"));
    assert_eq!(lines.count(), 9);
    let table = std::fs::read_to_string(&spectrum).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "n,m,p,q,kx,ky,weight,kz,group_speed_z,evanescent");
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("1,1,1,1,5.0000000000000000e-1,5.0000000000000000e-1,"));
    assert!(rows[1].ends_with(",7.0710678118654757e-1,7.0710678118654757e-1,false"));
}

#[test]
fn bench_default_table() {
    let out = exh(&["bench", "--suite", "default", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("function,method,level,eval_count,abs_error\n"));
    // five functions, four methods, fifteen budgets
    assert_eq!(text.lines().count(), 1 + 5 * 4 * 15);
}

#[test]
fn reports_are_deterministic() {
    let runs = [
        vec!["integrate", "--fn", "sin(7*x) + sqrt(x)", "--a", "0", "--b", "2", "--max-level", "16"],
        vec!["bench", "--suite", "random", "--seed", "11", "--count", "2", "--format", "json"],
    ];
    for args in runs {
        let first = exh(&args);
        assert_eq!(first.stdout, exh(&args).stdout, "{args:?}");
        let threaded = Command::new(env!("CARGO_BIN_EXE_exh"))
            .args(&args)
            .env("EXH_THREADS", "3")
            .output()
            .unwrap();
        assert_eq!(first.stdout, threaded.stdout, "{args:?} with threads");
    }
    let a = exh(&["bench", "--suite", "random", "--seed", "1", "--count", "1"]);
    let b = exh(&["bench", "--suite", "random", "--seed", "2", "--count", "1"]);
    assert_ne!(a.stdout, b.stdout);
}

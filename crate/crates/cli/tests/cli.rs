//! Command-line behaviour: exit codes, output schemas, caches, tables and
//! report emission.

use std::io::Write;
use std::process::Command;

use serde_json::Value;
use thetalift::{Check, VerificationReport, SCHEMA_VERSION};
use thetalift_cli::{emit_report, run, Format, Outcome, TabulatedFunction};

fn cli(args: &[&str]) -> Outcome {
    run(std::iter::once("thetalift").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let out = cli(args);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(bytes: &[u8]) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes)
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn help_and_usage_errors() {
    let help = cli(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout_text().contains("Usage"));
    assert_eq!(cli(&["bogus"]).code, 2);
    assert_eq!(cli(&["classgroup", "--disc", "abc"]).code, 2);
    assert_eq!(cli(&["classgroup", "--disc", "-23", "--unknown-flag"]).code, 2);
    // arithmetic validation of the arguments
    assert_eq!(cli(&["classgroup", "--disc", "-12"]).code, 2);
    assert_eq!(cli(&["heegner", "--N", "5", "--disc", "-3"]).code, 2);
    assert_eq!(cli(&["greens", "--kind", "resolvent", "--s", "2", "--z", "0.1,-1", "--z2", "0,2"]).code, 2);
    assert_eq!(cli(&["weil"]).code, 2);
}

#[test]
fn classgroup_schema() {
    let v = json(&["classgroup", "--disc", "-23"]);
    assert_eq!(v["version"], SCHEMA_VERSION);
    assert_eq!(v["h"], 3);
    assert_eq!(v["forms"][0], serde_json::json!([1, 1, 6]));
    let table = v["table"].as_array().unwrap();
    assert_eq!(table.len(), 3);
    assert_eq!(v["characters"].as_array().unwrap().len(), 3);
    let narrow = json(&["classgroup", "--disc", "12", "--narrow"]);
    assert_eq!(narrow["h"], 2);
    assert_eq!(json(&["classgroup", "--disc", "12"])["h"], 1);
}

#[test]
fn lattice_schema() {
    let v = json(&["lattice", "--family", "sig12", "--N", "37"]);
    assert_eq!(v["signature"], serde_json::json!([1, 2]));
    assert_eq!(v["level"], 148);
    assert_eq!(v["disc_module"]["order"], 74);
    let la = json(&["lattice", "--family", "la", "--disc", "-4"]);
    assert_eq!(la["signature"], serde_json::json!([2, 2]));
    assert_eq!(cli(&["lattice", "--family", "la"]).code, 2);
}

#[test]
fn theta_csv() {
    let out = cli(&["theta", "--disc", "-4", "--prec", "10"]);
    assert_eq!(out.code, 0);
    let rows = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0], ["m", "r_A(m)"]);
    // m = 5 = 1 + 4: the ideals (2 + i) and (2 - i)
    assert_eq!(rows[6], ["5", "2"]);
    assert_eq!(rows[4], ["3", "0"]);
}

#[test]
fn ap_cache_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ap37.txt");
    let p = path.to_str().unwrap();
    let first = cli(&["ap", "--curve", "0,0,1,-1,0", "--pmax", "30", "--cache", p]);
    assert_eq!(first.code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# curve 0,0,1,-1,0\n"));
    assert!(text.contains("\n2 -2\n") && text.contains("\n29 6\n"));
    assert_eq!(first.stdout_text().lines().count(), 10);
    // a covering cache is read back rather than recomputed
    std::fs::write(&path, text.replace("\n29 6\n", "\n29 7\n")).unwrap();
    let second = cli(&["ap", "--curve", "37a", "--pmax", "30", "--cache", p]);
    assert!(second.stdout_text().contains("29 7"));
    assert_eq!(cli(&["ap", "--curve", "1,2,3", "--pmax", "10"]).code, 2);
}

#[test]
fn cache_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_thetalift"))
        .args(["ap", "--curve", "389a", "--pmax", "20"])
        .env(thetalift_cli::CACHE_ENV, dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    let text = std::fs::read_to_string(files[0].as_ref().unwrap().path()).unwrap();
    assert!(text.starts_with("# curve 0,1,1,-2,0"));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
}

#[test]
fn heegner_points_json() {
    let v = json(&["heegner", "--N", "37", "--disc", "-139"]);
    assert_eq!(v["count"], 3);
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
    for p in v["points"].as_array().unwrap() {
        let f: Vec<i64> = p["form"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
        assert_eq!(f[1] * f[1] - 4 * f[0] * f[2], -139);
        assert_eq!(f[0] % 37, 0);
    }
    let d4 = json(&["heegner", "--N", "1", "--disc", "-4"]);
    assert_eq!(d4["degree"], "1/2");
}

#[test]
fn traces_of_j() {
    for (d, expect) in [("-3", -248.0), ("-4", 492.0), ("-7", -4119.0), ("-8", 7256.0)] {
        let v = json(&["trace", "--kind", "cm", "--fn", "j744", "--disc", d]);
        assert!((v["trace"][0].as_f64().unwrap() - expect).abs() < 1e-6, "D = {d}: {v}");
    }
    let a = json(&["trace", "--kind", "geo", "--fn", "j744", "--form", "1,1,-1", "--quad-points", "64"]);
    let b = json(&["trace", "--kind", "geo", "--fn", "j744", "--form", "1,1,-1", "--quad-points", "128"]);
    assert!((a["trace"][0].as_f64().unwrap() - b["trace"][0].as_f64().unwrap()).abs() < 1e-8);
    assert_eq!(cli(&["trace", "--kind", "geo", "--fn", "j744", "--form", "1,0,-4"]).code, 2);
}

fn cubic(x: f64, y: f64) -> f64 {
    x * x * y + y * y * y - 2.0 * x
}

fn write_table(path: &std::path::Path) {
    let mut f = std::fs::File::create(path).unwrap();
    writeln!(f, "re,im,value").unwrap();
    for i in -6..=6 {
        for j in 10..=26 {
            let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
            writeln!(f, "{x},{y},{}", cubic(x, y)).unwrap();
        }
    }
}

#[test]
fn tabulated_trace_is_exact_for_cubics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    write_table(&path);
    let v = json(&["trace", "--kind", "cm", "--fn", "file", "--table", path.to_str().unwrap(), "--disc", "-23"]);
    let s = 23f64.sqrt();
    let expect = cubic(-0.5, s / 2.0) + cubic(0.25, s / 4.0) + cubic(-0.25, s / 4.0);
    assert!((v["trace"][0].as_f64().unwrap() - expect).abs() < 1e-10, "{v} vs {expect}");
    // D = -3 puts the point at height 0.866, outside the table
    let out = cli(&["trace", "--kind", "cm", "--fn", "file", "--table", path.to_str().unwrap(), "--disc", "-3"]);
    assert_eq!(out.code, 2, "{}", out.stderr);
}

#[test]
fn table_validation() {
    let full = "0,1,1\n0,2,2\n1,1,3\n1,2,4\n";
    let t = TabulatedFunction::from_csv(full.as_bytes(), 1).unwrap();
    assert!((t.eval(num_complex::Complex64::new(0.5, 1.5)).unwrap().re - 2.5).abs() < 1e-14);
    assert!(TabulatedFunction::from_csv("0,1,1\n0,2,2\n1,1,3\n".as_bytes(), 1).is_err());
    assert!(TabulatedFunction::from_csv(full.as_bytes(), 2).is_err());
    assert!(TabulatedFunction::from_csv(full.as_bytes(), 0).is_err());
    assert!(TabulatedFunction::from_csv("0,1,1\n0,1,2\n1,1,3\n1,2,4\n".as_bytes(), 1).is_err());
}

#[test]
fn greens_grids() {
    let out = cli(&["greens", "--kind", "resolvent", "--s", "2", "--z", "0.1,1.3", "--z2", "0,2", "--steps", "2", "--width", "0.1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let rows = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 26);
    assert_eq!(rows[0], ["x", "y", "value", "tail_estimate"]);
    assert!(rows[1..].iter().all(|r| r[2].parse::<f64>().unwrap() < 0.0));
    // the lift grid around i crosses the CM point of discriminant -4
    let lift = cli(&["greens", "--kind", "lift", "--disc", "-4", "--s", "1.5", "--z", "0,1", "--steps", "2", "--width", "0.2"]);
    assert_eq!(lift.code, 0, "{}", lift.stderr);
    let rows = csv_rows(&lift.stdout);
    assert_eq!(rows[13][2], "NaN");
    // cells where the summand argument 1/cosh² d(z, i) exceeds 0.99 are left empty
    for r in &rows[1..] {
        let (x, y): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let cosh = 1.0 + (x * x + (y - 1.0).powi(2)) / (2.0 * y);
        let near = 1.0 / (cosh * cosh) > 0.99;
        assert_eq!(r[2] == "NaN", near, "{r:?}");
    }
    let hilbert = cli(&["greens", "--kind", "hilbert", "--disc", "-4", "--s", "2.2", "--z", "0.2,1.1", "--z2", "-0.3,0.9", "--steps", "1"]);
    assert_eq!(hilbert.code, 0, "{}", hilbert.stderr);
    assert_eq!(csv_rows(&hilbert.stdout).len(), 10);
}

#[test]
fn lfunc_commands() {
    let v = json(&["lfunc", "rs", "--curve", "37a", "--disc", "-139", "--prec", "20000"]);
    assert_eq!(v["sign"], -1.0);
    assert!(v["lambda"][0].as_f64().unwrap().abs() < 1e-8);
    assert!(v["residual"].as_f64().unwrap() < 1e-5);
    let a = json(&["lfunc", "rs", "--curve", "37a", "--disc", "-7", "--eval", "0.8,0.3", "--prec", "4000"]);
    let b = json(&["lfunc", "rs", "--curve", "37a", "--disc", "-7", "--eval", "1.3,0.3", "--classical", "--prec", "4000"]);
    assert_eq!(a["value"], b["value"]);
    let d = json(&["lfunc", "deriv", "--curve", "0,0,1,-1,0", "--N", "37", "--fricke", "1"]);
    assert!((d["value"].as_f64().unwrap() - 0.3059997738).abs() < 1e-8);
    assert!(d["agreement"].as_f64().unwrap() < 1e-6);
    // too few coefficients is a computation failure
    assert_eq!(cli(&["lfunc", "rs", "--curve", "37a", "--disc", "-139", "--prec", "50"]).code, 1);
    assert_eq!(cli(&["lfunc", "deriv", "--curve", "0,0,1,-1,0"]).code, 2);
}

#[test]
fn weil_check_report() {
    let out = cli(&["weil", "--check", "--format", "csv"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let rows = csv_rows(&out.stdout);
    // five relations for each of N = 1, 2, 37 and one (2, 2) module
    assert_eq!(rows.len(), 1 + 5 * 4);
    assert!(rows[1..].iter().all(|r| r[5] == "true"));
}

#[test]
fn verify_gz37_report() {
    let v = json(&["verify", "gz37", "--disc", "-139"]);
    let check = |id: &str| v["checks"].as_array().unwrap().iter().find(|c| c["id"] == id).unwrap().clone();
    assert_eq!(check("sign")["computed"], -1.0);
    assert!(check("lambda_half")["computed"].as_f64().unwrap() < 1e-8);
    assert_eq!(check("heegner_count")["computed"], 3.0);
    assert!(v["observations"].as_array().unwrap().iter().any(|o| o["id"] == "lambda_prime_half"));
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn failing_checks_exit_one() {
    // the sign for 37a over Q(sqrt -8) is +1
    let out = cli(&["verify", "gz37", "--disc", "-8", "--prec", "4000"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("failed: sign"));
    let report = VerificationReport::from_json(&out.stdout_text()).unwrap();
    assert!(!report.all_pass());
}

#[test]
fn verify_suites_pass_and_are_deterministic() {
    for suite in [["verify", "classnumber", "--max-disc", "100"], ["verify", "theta", "--max-m", "50"], ["verify", "eisenstein", "--seed", "3"]] {
        let a = cli(&suite);
        assert_eq!(a.code, 0, "{suite:?}: {}", a.stderr);
        let b = cli(&suite);
        let mut ra = VerificationReport::from_json(&a.stdout_text()).unwrap();
        let mut rb = VerificationReport::from_json(&b.stdout_text()).unwrap();
        ra.wall_time_s = 0.0;
        rb.wall_time_s = 0.0;
        assert_eq!(ra.to_json().unwrap(), rb.to_json().unwrap());
    }
    let text = cli(&["verify", "traces", "--format", "text"]).stdout_text();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn report_emission() {
    let empty = VerificationReport::new("empty");
    let parsed: Value = serde_json::from_slice(&emit_report(&empty, Format::Json).unwrap()).unwrap();
    assert_eq!(parsed["checks"], serde_json::json!([]));
    assert_eq!(parsed["version"], SCHEMA_VERSION);
    assert_eq!(csv_rows(&emit_report(&empty, Format::Csv).unwrap()).len(), 1);
    let mut r = VerificationReport::new("demo");
    r.push(Check::new("a", "close", 1.0, 1.0 + 1e-9, 1e-6));
    r.push(Check::exact("b", "count", 3, 4));
    r.push(Check::new("c, quoted", "needs \"quoting\"", 0.0, f64::NAN, 1.0));
    r.observe("x", 0.25);
    let back = VerificationReport::from_json(std::str::from_utf8(&emit_report(&r, Format::Json).unwrap()).unwrap()).unwrap();
    assert_eq!(back.checks.len(), 3);
    assert_eq!(back.checks[0], r.checks[0]);
    assert!(back.checks[2].computed.is_nan() && !back.checks[2].pass);
    assert_eq!(back.observations, r.observations);
    let rows = csv_rows(&emit_report(&r, Format::Csv).unwrap());
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3][0], "c, quoted");
}

#[test]
fn out_flag_writes_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = cli(&["verify", "traces", "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
}

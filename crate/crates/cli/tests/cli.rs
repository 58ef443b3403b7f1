use std::path::Path;
use std::process::{Command, Output};

use fstest::{Cell, Table};

fn fstest(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fstest"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("FSTEST_THREADS", t),
        None => cmd.env_remove("FSTEST_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = fstest(args, None);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn stderr_of_failure(args: &[&str], threads: Option<&str>) -> String {
    let out = fstest(args, threads);
    assert!(!out.status.success(), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn number(cell: &Cell) -> f64 {
    cell.as_f64().unwrap_or_else(|| panic!("not a number: {cell:?}"))
}

const SMALL_TABLE3: [&str; 11] =
    ["table3", "--family", "gaussian,cauchy", "--n", "10", "--d", "2,4", "--reps", "200", "--seed", "7"];

#[test]
fn output_is_identical_for_any_thread_count() {
    let runs: Vec<Vec<u8>> = ["1", "3", "8"]
        .iter()
        .map(|t| {
            let out = fstest(&SMALL_TABLE3, Some(t));
            assert!(out.status.success());
            out.stdout
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
    let power = [
        "power-table", "--reps", "20", "--mc-samples", "200", "--n", "30", "--beta-grid", "0,0.5", "--seed", "3",
    ];
    assert_eq!(fstest(&power, Some("1")).stdout, fstest(&power, Some("5")).stdout);
}

#[test]
fn table3_rerun_is_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let mut args = SMALL_TABLE3.to_vec();
        args.extend(["--out", path.to_str().unwrap()]);
        stdout_ok(&args);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "temporary files left behind: {names:?}");
}

#[test]
fn every_csv_round_trips_through_the_parser() {
    let outputs = [
        stdout_ok(&SMALL_TABLE3),
        stdout_ok(&["table4"]),
        stdout_ok(&["breakdown", "--n", "10", "--seed", "1"]),
        stdout_ok(&["critical-value", "--family", "cauchy", "--calibration", "formula", "--mc-samples", "10000", "--seed", "2"]),
        stdout_ok(&["power-table", "--reps", "1", "--mc-samples", "50", "--n", "20", "--beta-grid", "0,1", "--seed", "4"]),
        stdout_ok(&["table2", "--family", "gaussian", "--reps", "100", "--mc-samples", "10000", "--delta", "0.5", "--seed", "5"]),
    ];
    for csv in outputs {
        let table = Table::from_csv("t", &csv).unwrap();
        assert_eq!(table.to_csv(), csv);
    }
}

#[test]
fn single_replication_power_is_zero_or_one() {
    let csv = stdout_ok(&["power-table", "--reps", "1", "--mc-samples", "50", "--n", "20", "--seed", "9"]);
    let table = Table::from_csv("p", &csv).unwrap();
    assert_eq!(table.rows().len(), 12);
    for (j, name) in table.columns().iter().enumerate() {
        if name.starts_with("power_") {
            for row in table.rows() {
                let p = number(&row[j]);
                assert!(p == 0.0 || p == 1.0, "{name}: {p}");
            }
        }
    }
}

#[test]
fn table4_gaussian_rows_match_closed_forms() {
    let table = Table::from_csv("t4", &stdout_ok(&["table4", "--family", "gaussian", "--d", "2,4,100"])).unwrap();
    let gamma: f64 = 0.5;
    let pi = std::f64::consts::PI;
    let closed = |estimator: &str, d: f64| -> f64 {
        let e = match estimator {
            "sample mean" => gamma / (2.0 * pi).powf(d / 2.0),
            "cw median" => gamma * pi.powf(1.0 - d / 2.0) / 2f64.powf(1.0 + d / 2.0),
            _ => gamma * pi.powf(1.0 - d / 2.0) / (3.0 * 2f64.powf(d / 2.0)),
        };
        e.powf(1.0 / d)
    };
    for row in table.rows() {
        let Cell::Text(estimator) = &row[1] else { panic!("estimator cell") };
        for (k, d) in [2.0, 4.0, 100.0].into_iter().enumerate() {
            let got = number(&row[3 + k]);
            assert!((got - closed(estimator, d)).abs() < 5e-4, "{estimator} d={d}: {got}");
        }
    }
    let first: Vec<f64> = table.rows()[0][3..].iter().map(number).collect();
    assert_eq!(format!("{:.2}", first[0]), "0.28");
}

#[test]
fn table2_cauchy_mean_column_is_zero() {
    let csv = stdout_ok(&[
        "table2", "--family", "cauchy", "--reps", "200", "--mc-samples", "10000", "--delta", "0.5,-5", "--seed", "11",
    ]);
    let table = Table::from_csv("t2", &csv).unwrap();
    assert_eq!(table.rows().len(), 2);
    for cell in table.column("T2").unwrap() {
        assert_eq!(number(cell), 0.0);
    }
}

#[test]
fn data_at_anchor_retains_with_zero_p_value() {
    let dir = tempfile::tempdir().unwrap();
    let rows = "1.5,-2,0.25\n".repeat(200);
    let data = write(dir.path(), "flat.csv", &format!("x,y,z\n{rows}"));
    let json = stdout_ok(&[
        "test", "--data", &data, "--mu0", "1.5,-2,0.25", "--bootstrap", "100", "--mc-samples", "200", "--seed", "1",
    ]);
    let reports: serde_json::Value = serde_json::from_str(&json).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 4);
    for r in reports {
        assert_eq!(r["schema"], "fstest/1");
        assert_eq!(r["value"], 0.0);
        assert_eq!(r["p_value"], 0.0);
        assert_eq!(r["decision"], "retain");
    }
}

#[test]
fn shifted_anchor_rejects_for_every_kind() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..200 {
        let a = ((i * 37 % 101) as f64 / 101.0 - 0.5) * 2.0;
        let b = ((i * 53 % 97) as f64 / 97.0 - 0.5) * 2.0;
        text.push_str(&format!("{a},{b}\n"));
    }
    let data = write(dir.path(), "g.csv", &text);
    for calibration in ["formula", "empirical"] {
        let mc = if calibration == "formula" { "10000" } else { "300" };
        let csv = stdout_ok(&[
            "test", "--data", &data, "--mu0", "5,5", "--calibration", calibration, "--mc-samples", mc, "--seed", "2",
            "--format", "csv",
        ]);
        let table = Table::from_csv("test", &csv).unwrap();
        assert_eq!(table.rows().len(), 4);
        for cell in table.column("decision").unwrap() {
            assert_eq!(cell, &Cell::Text("reject".into()));
        }
    }
}

#[test]
fn single_kind_report_is_one_json_object() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "0.1,0.2\n-0.3,0.4\n0.5,-0.6\n");
    let json = stdout_ok(&["test", "--data", &data, "--kind", "T3", "--mc-samples", "100", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["statistic"], "T3");
    assert_eq!(v["schema"], "fstest/1");
    assert!(v["p_value"].is_null());
}

#[test]
fn validation_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "a,b\n1,2\n3,oops\n");
    let err = stderr_of_failure(&["test", "--data", &bad, "--seed", "1"], None);
    assert!(err.contains("row 3, column 2"), "{err}");

    let ragged = write(dir.path(), "ragged.csv", "1,2\n3\n");
    let err = stderr_of_failure(&["test", "--data", &ragged, "--seed", "1"], None);
    assert!(err.contains("row 2"), "{err}");

    let good = write(dir.path(), "good.csv", "1,2\n3,4\n");
    let err = stderr_of_failure(&["test", "--data", &good, "--mu0", "0,0,0", "--seed", "1"], None);
    assert!(err.contains("dimension mismatch"), "{err}");

    let not_spd = write(dir.path(), "sigma.csv", "1,2\n2,1\n");
    let err = stderr_of_failure(&["test", "--data", &good, "--sigma", &not_spd, "--seed", "1"], None);
    assert!(err.contains("positive definite"), "{err}");

    let wrong_dim = write(dir.path(), "sigma3.csv", "1,0,0\n0,1,0\n0,0,1\n");
    stderr_of_failure(&["test", "--data", &good, "--sigma", &wrong_dim, "--seed", "1"], None);

    stderr_of_failure(&["breakdown", "--gamma", "1.5", "--seed", "1"], None);
    stderr_of_failure(&["power-table", "--beta-grid", "0,2", "--reps", "2", "--seed", "1"], None);
    stderr_of_failure(&["table4", "--family", "laplace"], None);
    stderr_of_failure(&["table4"], Some("zero"));
    let missing_seed = fstest(&["breakdown"], None);
    assert!(!missing_seed.status.success());
}

#[test]
fn failed_run_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    stderr_of_failure(&["breakdown", "--gamma", "0", "--seed", "1", "--out", out.to_str().unwrap()], None);
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn json_tables_carry_schema() {
    let json = stdout_ok(&["breakdown", "--n", "10", "--seed", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema"], "fstest/1");
    assert_eq!(v["table"], "breakdown");
    assert_eq!(v["rows"].as_array().unwrap().len(), 9);
}

#[test]
fn sigma_file_with_header_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "sigma.csv", "s1,s2\n2,0.5\n0.5,1\n");
    let csv = stdout_ok(&[
        "critical-value", "--d", "2", "--sigma", &sigma, "--calibration", "formula", "--kind", "T2", "--mc-samples",
        "20000", "--seed", "4",
    ]);
    let table = Table::from_csv("cv", &csv).unwrap();
    let cv = number(table.column("critical_value").unwrap()[0]);
    // the limit law has mean trace(Σ) = 3
    assert!(cv > 3.0 && cv < 20.0, "{cv}");
}

#[test]
fn gaussian_fixture_at_true_location_is_not_significant() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/gaussian_d3_n200.csv");
    let json = stdout_ok(&[
        "test", "--data", data, "--mu0=1,-0.5,2", "--bootstrap", "300", "--mc-samples", "300", "--seed", "17",
    ]);
    let reports: serde_json::Value = serde_json::from_str(&json).unwrap();
    for r in reports.as_array().unwrap() {
        assert!(r["p_value"].as_f64().unwrap() > 0.05, "{r}");
        assert_eq!(r["decision"], "retain");
    }
}

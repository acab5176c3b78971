use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pimdb(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pimdb"));
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("spawn pimdb")
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn gen(dir: &Path, sf: &str) -> PathBuf {
    let data = dir.join("data");
    let out = pimdb(&["--out", s(&data), "--seed", "3", "gen", "--sf", sf], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    data
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn gen_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (da, db) = (gen(a.path(), "0.002"), gen(b.path(), "0.002"));
    for f in ["ssb.store", "manifest.json"] {
        assert_eq!(std::fs::read(da.join(f)).unwrap(), std::fs::read(db.join(f)).unwrap());
    }
}

#[test]
fn invalid_scale_factor_is_a_validation_error() {
    let t = tempfile::tempdir().unwrap();
    let out = pimdb(&["--out", s(t.path()), "gen", "--sf", "0"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid");
}

#[test]
fn missing_store_is_an_io_error() {
    let t = tempfile::tempdir().unwrap();
    let out = pimdb(&["--out", s(t.path()), "run", "--store", s(&t.path().join("nope")), "--query", "q1.1"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "io");
}

#[test]
fn one_point_sweep_matches_run() {
    let t = tempfile::tempdir().unwrap();
    let data = gen(t.path(), "0.002");
    let run_dir = t.path().join("run");
    let out = pimdb(
        &["--out", s(&run_dir), "run", "--store", s(&data), "--query", "q2.1", "--denorm", "D2", "--level", "subarray", "--salp", "4"],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), std::fs::read_to_string(run_dir.join("result.csv")).unwrap());

    let spec = t.path().join("spec.json");
    std::fs::write(&spec, r#"{"denorm": ["D2"], "levels": [{"level": "subarray", "salp": 4}], "queries": ["q2.1"]}"#).unwrap();
    let sweep_dir = t.path().join("sweep");
    let out = pimdb(&["--out", s(&sweep_dir), "sweep", "--spec", s(&spec), "--store", s(&data)], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let run = csv_rows(&std::fs::read_to_string(run_dir.join("metrics.csv")).unwrap());
    let sweep: Vec<_> = csv_rows(&std::fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap())
        .into_iter()
        .filter(|r| r[6] == "q2.1")
        .collect();
    assert_eq!(run, sweep);
    assert!(sweep.iter().any(|r| r[7] == "speedup"));
}

#[test]
fn report_tables_are_consistent() {
    let t = tempfile::tempdir().unwrap();
    let data = gen(t.path(), "0.002");
    let spec = t.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"denorm": ["D1", "D3"], "levels": [{"level": "rank"}, {"level": "bank_ab"}],
            "synthetic": {"rows": 20000, "selectivities": [0.001, 0.1]}}"#,
    )
    .unwrap();
    let sweep_dir = t.path().join("sweep");
    assert!(pimdb(&["--out", s(&sweep_dir), "sweep", "--spec", s(&spec), "--store", s(&data)], &[]).status.success());
    let rep = t.path().join("report");
    let out = pimdb(&["--out", s(&rep), "report", "--input", s(&sweep_dir)], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let ops = csv_rows(&std::fs::read_to_string(rep.join("operator_breakdown.csv")).unwrap());
    assert_eq!(ops.len(), 2 * 2 * 13 + 2 * 2);
    for r in &ops {
        let total: f64 = r[5..].iter().map(|x| x.parse::<f64>().unwrap()).sum();
        assert!((total - 100.0).abs() <= 0.1, "{r:?}");
    }
    let sel = csv_rows(&std::fs::read_to_string(rep.join("speedup_vs_selectivity.csv")).unwrap());
    for r in &sel {
        assert!((0.0..=1.0).contains(&r[5].parse::<f64>().unwrap()));
    }

    // Breakdown rows equal the matrix values they came from.
    let matrix = csv_rows(&std::fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap());
    let speedup = matrix
        .iter()
        .find(|r| r[1] == "D3" && r[2] == "bank_ab" && r[6] == "q3.1" && r[7] == "speedup")
        .map(|r| r[8].clone())
        .unwrap();
    assert!(sel.iter().any(|r| r[1] == "D3" && r[2] == "bank_ab" && r[4] == "q3.1" && r[6] == speedup));

    let mem = csv_rows(&std::fs::read_to_string(rep.join("memory_overhead.csv")).unwrap());
    assert_eq!(mem.len(), 2);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(rep.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["errors"], 0);
}

#[test]
fn empty_matrix_is_rejected() {
    let t = tempfile::tempdir().unwrap();
    let input = t.path().join("sweep.json");
    std::fs::write(&input, "[]").unwrap();
    let out = pimdb(&["--out", s(t.path()), "report", "--input", s(&input)], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_grid_points_are_recorded_and_exit_3() {
    let t = tempfile::tempdir().unwrap();
    let data = gen(t.path(), "0.002");
    let spec = t.path().join("spec.json");
    // The TPC-H workload cannot be analyzed over SSB data.
    std::fs::write(&spec, r#"{"workload": "tpch", "denorm": ["D1"], "levels": [{"level": "bank_ab"}]}"#).unwrap();
    let sweep_dir = t.path().join("sweep");
    let out = pimdb(&["--out", s(&sweep_dir), "sweep", "--spec", s(&spec), "--store", s(&data)], &[]);
    assert_eq!(out.status.code(), Some(3));
    let text = std::fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert!(csv_rows(&text).iter().any(|r| r[7] == "error"));
}

#[test]
fn invalid_sweep_spec_is_a_validation_error() {
    let t = tempfile::tempdir().unwrap();
    let spec = t.path().join("spec.json");
    std::fs::write(&spec, r#"{"levels": [{"level": "subarray", "salp": 0}]}"#).unwrap();
    let out = pimdb(&["--out", s(t.path()), "sweep", "--spec", s(&spec)], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn env_overrides_reach_the_timing_model() {
    let t = tempfile::tempdir().unwrap();
    let data = gen(t.path(), "0.002");
    let total = |env: &[(&str, &str)], dir: &str| {
        let d = t.path().join(dir);
        let out = pimdb(&["--out", s(&d), "run", "--store", s(&data), "--query", "q1.1"], env);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let rows = csv_rows(&std::fs::read_to_string(d.join("metrics.csv")).unwrap());
        rows.iter().find(|r| r[7] == "op_pim_filter_ns").unwrap()[8].parse::<f64>().unwrap()
    };
    let base = total(&[], "a");
    let slow = total(&[("PIMDB_CFG__TIMING__T_RCD", "60")], "b");
    assert!(slow > base, "{slow} <= {base}");
    let bad = pimdb(&["run", "--store", s(&data), "--query", "q1.1"], &[("PIMDB_CFG__CHANNELS", "0")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn denorm_writes_plan_and_rewritten_queries() {
    let t = tempfile::tempdir().unwrap();
    let out = pimdb(&["--out", s(t.path()), "denorm", "--level", "D3", "--workload", "tpch"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["level"], "D3");
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(t.path().join("plan.json")).unwrap()).unwrap();
    assert_eq!(plan["residual_joins"]["q10"].as_array().unwrap().len(), 1);
    assert!(t.path().join("queries/q10.json").exists());
}

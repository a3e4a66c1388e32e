use gek_cli::output::CurveRecord;
use gek_core::finite_n::{g_real_b1, Beta, EnsembleSpec};
use gek_core::Complex64;
use std::path::Path;
use std::process::{Command, Output};

fn gek(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gek")).args(args).output().expect("gek runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_record(o: &Output) -> CurveRecord {
    CurveRecord::from_csv(&String::from_utf8_lossy(&o.stdout)).expect("csv on stdout")
}

fn file_record(p: &Path) -> CurveRecord {
    CurveRecord::from_csv(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn limit_density_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = gek(&["density", "--beta", "2", "--regime", "limit", "--sigma", "1", "--grid", "-6:2:81", "--y", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = file_record(&out);
    assert_eq!(r.rows.len(), 81);
    assert_eq!(r.meta("sigma"), Some("1"));
    assert_eq!(r.meta("n"), Some("limit"));
    assert!(r.meta("command").unwrap().starts_with("gek density --beta 2"));
    assert!(r.meta("version").is_some());
    assert!(r.column("density").unwrap().iter().all(|&v| v > 0.0));
}

#[test]
fn beta4_density_vanishes_on_axis() {
    let o = gek(&["density", "--beta", "4", "--regime", "limit", "--sigma", "1", "--grid", "-4:2:41", "--ygrid", "0:3:31"]);
    assert_eq!(code(&o), 0);
    let r = stdout_record(&o);
    assert_eq!(r.rows.len(), 41 * 31);
    let (ys, d) = (r.column("y").unwrap(), r.column("density").unwrap());
    let on_axis: Vec<f64> = ys.iter().zip(&d).filter(|(y, _)| **y == 0.0).map(|(_, v)| *v).collect();
    assert_eq!(on_axis.len(), 41);
    assert!(on_axis.iter().all(|&v| v == 0.0));
    assert!(d.iter().any(|&v| v > 0.0));
}

#[test]
fn finite_real_density_matches_library() {
    let o = gek(&["density", "--beta", "1", "--regime", "finite", "--n", "6", "--tau", "0.5", "--channel", "real", "--grid", "-5:5:101"]);
    assert_eq!(code(&o), 0);
    let r = stdout_record(&o);
    let spec = EnsembleSpec::new(Beta::One, 6, 0.5).unwrap();
    for (x, d) in r.column("x").unwrap().iter().zip(r.column("density").unwrap()) {
        let want = -g_real_b1(Complex64::new(*x, 0.0), *x, &spec).unwrap().re;
        assert!((d - want).abs() <= 1e-12 * want.abs().max(1.0), "x={x}");
    }
}

#[test]
fn kernel_subcommand() {
    let o = gek(&["kernel", "--beta", "2", "--regime", "strong", "--grid", "-1:1:5", "--x2", "0.2", "--y2", "-0.3"]);
    assert_eq!(code(&o), 0);
    let r = stdout_record(&o);
    assert_eq!(r.columns, ["x", "y", "x2", "y2", "re", "im"]);
    assert_eq!(r.rows.len(), 5);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["density", "--beta", "2", "--regime", "finite", "--n", "8", "--grid", "0:1:3"][..],
        &["density", "--beta", "2", "--regime", "limit", "--tau", "0.5", "--grid", "0:1:3"],
        &["density", "--beta", "3", "--regime", "limit", "--sigma", "1", "--grid", "0:1:3"],
        &["density", "--beta", "2", "--regime", "limit", "--sigma", "1", "--grid", "1:0:3"],
        &["check", "nonsense"],
        &["sample", "--beta", "2", "--n", "10", "--tau", "0.1", "--sigma", "1"],
        &["sample", "--beta", "1", "--n", "9", "--tau", "0.1", "--trials", "2"],
    ] {
        assert_eq!(code(&gek(args)), 2, "{args:?}");
    }
}

#[test]
fn bad_quadrature_env_is_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_gek"))
        .args(["density", "--beta", "2", "--regime", "strong", "--grid", "0:1:3"])
        .env("GEK_QUAD_RTOL", "tight")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn capacity_errors_exit_3() {
    assert_eq!(code(&gek(&["sample", "--beta", "2", "--n", "600", "--tau", "0.1", "--trials", "1"])), 3);
}

#[test]
fn check_suites_pass() {
    for suite in ["identities", "poisson", "bulk"] {
        let o = gek(&["check", suite]);
        assert_eq!(code(&o), 0, "{suite}: {}", String::from_utf8_lossy(&o.stdout));
        let r = stdout_record(&o);
        assert!(r.rows.iter().all(|row| row[4].as_f64().is_none()));
    }
    let r = stdout_record(&gek(&["check", "poisson"]));
    let k = r.rows.iter().position(|row| matches!(&row[1], gek_cli::output::Cell::Text(s) if s == "zero_when_y1_ne_minus_y2")).unwrap();
    assert_eq!(r.rows[k][2].as_f64(), Some(0.0));
}

#[test]
fn hermitian_check_sweep() {
    let o = gek(&["check", "hermitian"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = stdout_record(&o);
    let sweep: Vec<f64> = r
        .rows
        .iter()
        .filter(|row| matches!(&row[1], gek_cli::output::Cell::Text(s) if s.starts_with("beta2_ridge_density")))
        .map(|row| row[2].as_f64().unwrap())
        .collect();
    assert_eq!(sweep.len(), 4);
    assert!(sweep.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn sampling_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (eig, hist) = (dir.path().join("e.csv"), dir.path().join("h.csv"));
    let args = ["sample", "--beta", "2", "--n", "100", "--sigma", "1", "--trials", "100", "--seed", "7", "--out", eig.to_str().unwrap(), "--hist-out", hist.to_str().unwrap()];
    assert_eq!(code(&gek(&args)), 0);
    let (e1, h1) = (std::fs::read(&eig).unwrap(), std::fs::read(&hist).unwrap());
    assert_eq!(code(&gek(&args)), 0);
    assert_eq!(e1, std::fs::read(&eig).unwrap());
    assert_eq!(h1, std::fs::read(&hist).unwrap());
    let r = file_record(&eig);
    assert_eq!(r.columns, ["trial", "re", "im", "channel"]);
    assert_eq!(r.rows.len(), 100 * 100);
    assert_eq!(r.meta("seed"), Some("7"));
    let h = file_record(&hist);
    assert_eq!(h.columns, ["x", "y", "count", "density", "error"]);
    assert_eq!(h.rows.len(), 12 * 6);
}

#[test]
fn gumbel_report() {
    let o = gek(&["sample", "--beta", "1", "--n", "50", "--tau", "0", "--trials", "1000", "--gumbel"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_record(&o);
    assert_eq!(r.columns, ["location", "scale", "ks_statistic", "p_value", "samples"]);
    let ks = r.column("ks_statistic").unwrap()[0];
    assert!(ks > 0.0 && ks < 0.1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("gumbel fit"));
}

#[test]
fn beta4_limit_comparison() {
    let o = gek(&["sample", "--beta", "4", "--n", "32", "--sigma", "0.5", "--trials", "200", "--compare", "limit", "--ygrid", "0:1.5:4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_record(&o);
    let z = r.column("z").unwrap();
    let tested: Vec<bool> = r.rows.iter().map(|row| matches!(&row[7], gek_cli::output::Cell::Text(s) if s == "true")).collect();
    let used: Vec<f64> = z.iter().zip(&tested).filter(|(_, t)| **t).map(|(z, _)| *z).collect();
    assert!(!used.is_empty());
    let inside = used.iter().filter(|z| z.abs() < 3.0).count() as f64 / used.len() as f64;
    assert!(inside >= 0.9, "{inside}");
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (c, j) = (dir.path().join("d.csv"), dir.path().join("d.json"));
    let base = ["density", "--beta", "1", "--regime", "limit", "--sigma", "0.7", "--grid", "-2:1:7", "--ygrid", "0.1:0.5:3"];
    let mut a = base.to_vec();
    a.extend(["--out", c.to_str().unwrap()]);
    assert_eq!(code(&gek(&a)), 0);
    let mut b = base.to_vec();
    b.extend(["--out", j.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&gek(&b)), 0);
    let rc = file_record(&c);
    let rj = CurveRecord::from_json(&std::fs::read_to_string(&j).unwrap()).unwrap();
    assert_eq!(rc.rows, rj.rows);
    assert_eq!(rc.columns, rj.columns);
}

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade-qed")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&run(args))).unwrap()
}

/// Data rows of a CSV stream, after the schema comment and header.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema-version: 1"));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn scratch_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cascade-qed-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn simulate_reports_table_row() {
    let v =
        json(&["simulate", "--g1", "500", "--kappa1", "360", "--g2", "30", "--kappa2", "5", "--gamma-star", "2500"]);
    for key in ["params", "master", "closed", "diagnostics"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["eta", "ind", "r1", "r2", "pb_decay_rate"] {
        assert!(v["closed"].get(key).is_some(), "missing closed.{key}");
    }
    for key in ["t_max", "method", "fallback"] {
        assert!(v["diagnostics"].get(key).is_some(), "missing diagnostics.{key}");
    }
    assert!((num(&v["master"]["ind"]) - 0.950).abs() <= 0.01);
    assert!((num(&v["master"]["eta"]) - 0.0076).abs() <= 0.0005);
    assert_eq!(num(&v["params"]["gamma_star"]), 2500.0);
}

#[test]
fn simulate_single_cavity() {
    let v = json(&["simulate", "--single", "--g", "500", "--kappa", "667", "--gamma-star", "2500"]);
    assert!((num(&v["master"]["ind"]) - 0.267).abs() <= 0.01);
    assert!((num(&v["master"]["eta"]) - 0.995).abs() <= 0.003);
    assert_eq!(v["mode"], "a");
    assert!(v["closed"]["ind"].is_null());
}

#[test]
fn dark_system_has_undefined_indistinguishability() {
    let v = json(&["simulate", "--g1", "0", "--g2", "0", "--kappa1", "50", "--kappa2", "1"]);
    assert_eq!(num(&v["master"]["eta"]), 0.0);
    assert!(v["master"]["ind"].is_null());
    assert_eq!(v["diagnostics"]["ind_undefined"], true);
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(run(&["simulate", "--g1", "1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--g1", "1", "--kappa1", "-3", "--g2", "1", "--kappa2", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["sweep", "--g1", "1", "--kappa1", "1", "--g2", "1", "--axis1", "kappa2:5:1:3"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["convert"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_3() {
    let out = run(&["convert", "--q", "1e5", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn one_point_sweep_matches_simulate() {
    let point = ["--g1", "500", "--kappa1", "360", "--g2", "30"];
    let mut sweep_args = vec!["sweep"];
    sweep_args.extend(point);
    sweep_args.extend(["--axis1", "kappa2:5:5:1"]);
    let (header, rows) = csv_rows(&stdout(&run(&sweep_args)));
    assert_eq!(header.join(","), "axis1,axis2,eta_master,i_master,eta_closed,i_closed,r1,r2,regime,note");
    assert_eq!(rows.len(), 1);

    let mut sim_args = vec!["simulate", "--format", "csv", "--kappa2", "5"];
    sim_args.extend(point);
    let (sim_header, sim_rows) = csv_rows(&stdout(&run(&sim_args)));
    for col in ["eta_master", "i_master", "eta_closed", "i_closed", "r1", "r2", "regime"] {
        let a = &rows[0][header.iter().position(|h| h == col).unwrap()];
        let b = &sim_rows[0][sim_header.iter().position(|h| h == col).unwrap()];
        assert_eq!(a, b, "{col}");
    }
}

#[test]
fn fig3a_sweep_closed_and_master_agree_in_silicon_vacancy_units() {
    let text = stdout(&run(&[
        "sweep",
        "--g1",
        "1500",
        "--kappa1",
        "50",
        "--g2",
        "5",
        "--gamma-star",
        "2500",
        "--axis1",
        "kappa2:0.1:100:6:log",
    ]));
    let (header, rows) = csv_rows(&text);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let master: f64 = row[col("i_master")].parse().unwrap();
        let closed: f64 = row[col("i_closed")].parse().unwrap();
        assert!((master - closed).abs() < 0.02, "{row:?}");
    }
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let args =
        ["sweep", "--g1", "500", "--kappa1", "100", "--axis1", "g2:1:300:3:log", "--axis2", "kappa2:1:1000:3:log"];
    let a = run(&args);
    let b =
        Command::new(env!("CARGO_BIN_EXE_cascade-qed")).args(args).env("CASCADE_QED_THREADS", "1").output().unwrap();
    assert_eq!(stdout(&a), stdout(&b));
    let (_, rows) = csv_rows(&stdout(&a));
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][0], rows[1][0]);
}

#[test]
fn bad_thread_setting_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_cascade-qed"))
        .args(["convert", "--q", "1e5"])
        .env("CASCADE_QED_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_bare_emitter_columns_coincide() {
    let text = stdout(&run(&["compare", "--g1", "0", "--kappa1", "50", "--g2", "10", "--kappa2", "1"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header.join(","), "t,p_e_master,p_a_master,p_b_master,p_e_rate,p_a_rate,p_b_rate");
    assert!(rows.len() >= 64);
    for row in &rows {
        let v: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        for k in 1..4 {
            assert!((v[k] - v[k + 3]).abs() < 1e-8, "{row:?}");
        }
    }
}

#[test]
fn diffusion_zero_width_row_matches_simulate() {
    let point = ["--g1", "500", "--kappa1", "50", "--g2", "3", "--kappa2", "10"];
    let mut args = vec!["diffusion", "--fwhm", "0,300,1000"];
    args.extend(point);
    let (header, rows) = csv_rows(&stdout(&run(&args)));
    assert_eq!(header.join(","), "fwhm,eta_ensemble,i_ensemble,eta_delta0,i_delta0");
    assert_eq!(rows.len(), 3);
    let mut sim = vec!["simulate"];
    sim.extend(point);
    let v = json(&sim);
    let eta: f64 = rows[0][1].parse().unwrap();
    let ind: f64 = rows[0][2].parse().unwrap();
    assert_eq!(eta, num(&v["master"]["eta"]));
    assert_eq!(ind, num(&v["master"]["ind"]));
}

#[test]
fn convert_quality_factors() {
    let v = json(&["convert", "--q", "50e6"]);
    assert!((num(&v["kappa"]) - 0.05).abs() < 1e-12);
    let v = json(&["convert", "--q", "3.75e3"]);
    assert!((num(&v["kappa"]) / 667.0 - 1.0).abs() < 0.005);
    let v = json(&["convert", "--kappa", "0.05"]);
    assert!((num(&v["q"]) / 50e6 - 1.0).abs() < 1e-9);
    let v = json(&["convert", "--rate", "400e9"]);
    assert_eq!(num(&v["rate"]), 2500.0);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let path =
        scratch_file("reg1.conf", "# table row\ng1 = 500\nkappa1 = 360\ng2 = 30\nkappa2 = 5\ngamma_star = 2500\n");
    let path = path.to_str().unwrap();
    let from_file = json(&["simulate", "--config", path]);
    assert_eq!(num(&from_file["params"]["kappa1"]), 360.0);
    assert_eq!(num(&from_file["params"]["gamma_star"]), 2500.0);
    let overridden = json(&["simulate", "--config", path, "--kappa2", "7"]);
    assert_eq!(num(&overridden["params"]["kappa2"]), 7.0);
    assert_eq!(num(&overridden["params"]["g1"]), 500.0);
    assert_eq!(run(&["simulate", "--config", "/nonexistent.conf"]).status.code(), Some(2));
}

#[test]
fn optimize_degenerate_box_returns_its_point() {
    // Q ≤ 500k gives κ ≥ 5, so κ_max = 5 pins both cavities.
    let v = json(&[
        "optimize",
        "--kappa-max",
        "5",
        "--g2-min",
        "120",
        "--g2-max",
        "120",
        "--gamma-star",
        "2500",
        "--grid",
        "3",
    ]);
    let p = &v["params"];
    assert_eq!(num(&p["g1"]), 500.0);
    assert_eq!(num(&p["g2"]), 120.0);
    assert!((num(&p["kappa1"]) - 5.0).abs() < 1e-9);
    assert!((num(&p["kappa2"]) - 5.0).abs() < 1e-9);
    let eta_ind = num(&v["eta"]) * num(&v["ind"]);
    assert!((num(&v["eta_ind"]) - eta_ind).abs() < 1e-8);
}

#[test]
fn optimize_empty_box_is_infeasible() {
    let out = run(&["optimize", "--kappa-max", "1"]);
    assert_eq!(out.status.code(), Some(4));
}

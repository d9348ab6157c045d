use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use weakdwell_cli::data_section;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, body: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

fn weakdwell(args: &[&str], config: &Path, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_weakdwell"));
    cmd.args(&args[..1]).arg("--config").arg(config).args(&args[1..]);
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

const DWELL: &str = "omega = 1\nomega_prime = -1\nT = 1\n";

#[test]
fn dwell_json_record() {
    let sb = Sandbox::new();
    let cfg = sb.config("d.cfg", DWELL);
    let v: Value = serde_json::from_str(&stdout(&weakdwell(&["dwell", "--format", "json"], &cfg, None))).unwrap();
    let data = &v["data"];
    assert!((data["tau_quadrature"].as_f64().unwrap() - 0.37048).abs() < 1e-5);
    assert!((data["tau_coth_paper"].as_f64().unwrap() - 0.5998151).abs() < 1e-7);
    assert!(data["relative_discrepancy"].as_f64().unwrap() > 0.6);
    assert_eq!(data["coth_exceeds_window"], Value::Bool(false));
    assert_eq!(v["metadata"]["config"]["omega_prime"], "-1");
    assert!(v["metadata"]["wall_time_s"].is_number());

    let bare: Value =
        serde_json::from_str(&stdout(&weakdwell(&["dwell", "--format", "json", "--no-metadata"], &cfg, None))).unwrap();
    assert_eq!(&bare, data);
}

#[test]
fn dwell_csv_is_two_lines_and_round_trips() {
    let sb = Sandbox::new();
    let cfg = sb.config("d.cfg", DWELL);
    let text = stdout(&weakdwell(&["dwell", "--no-metadata"], &cfg, None));
    assert_eq!(text.lines().count(), 2);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let get = |name: &str| -> f64 { row[header.iter().position(|h| h == name).unwrap()].parse().unwrap() };
    assert_eq!(get("gamma"), 3.0 / 2f64.sqrt());
    assert_eq!(get("T"), 1.0);
}

#[test]
fn config_error_names_key_and_writes_nothing() {
    let sb = Sandbox::new();
    let cfg = sb.config("bad.cfg", "omega = 1\nomega_prime = 3\nT = 1\n");
    let out = sb.path("out.csv");
    let o = weakdwell(&["dwell"], &cfg, Some(&out));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("omega_prime"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(sb.dir.path()).unwrap().count(), 1);
}

#[test]
fn exit_codes() {
    let sb = Sandbox::new();
    let missing = sb.path("nope.cfg");
    assert_eq!(weakdwell(&["dwell"], &missing, None).status.code(), Some(4));

    let cfg = sb.config("flat.cfg", "omega = 1\nomega_prime = 2\nT = 3\n");
    let o = weakdwell(&["dwell"], &cfg, None);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("T/2 = 1.5"));

    let cfg = sb.config("typo.cfg", "omega = 1\nomega_prim = -1\nT = 1\n");
    assert_eq!(weakdwell(&["dwell"], &cfg, None).status.code(), Some(2));

    let cfg = sb.config("d.cfg", DWELL);
    let unwritable = sb.path("no/such/dir/out.csv");
    assert_eq!(weakdwell(&["dwell"], &cfg, Some(&unwritable)).status.code(), Some(4));
    assert_eq!(weakdwell(&["dwell", "--workers", "0"], &cfg, None).status.code(), Some(2));
}

#[test]
fn log_sweep_columns_and_monotone_tau() {
    let sb = Sandbox::new();
    let cfg = sb.config(
        "s.cfg",
        "variable = T\nstart = 0.1\nstop = 20\nsteps = 100\nscale = log\nomega = 1\nomega_prime = -1\n",
    );
    let out = sb.path("s.csv");
    let o = weakdwell(&["sweep", "--workers", "3"], &cfg, Some(&out));
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# weakdwell "));
    let data = data_section(&text);
    let mut rdr = csv::Reader::from_reader(data.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["T", "gamma", "tau_quadrature", "tau_tanh", "tau_coth_paper"]
    );
    let rows: Vec<Vec<f64>> = rdr.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 100);
    assert_eq!((rows[0][0], rows[99][0]), (0.1, 20.0));
    // Past γT ≈ 25 the true increments fall below the 1e-10 quadrature tolerance.
    let tol = weakdwell_core::quad::DEFAULT_TOLERANCE;
    assert!(rows.windows(2).all(|w| w[1][2] >= w[0][2] - tol));
    assert!(rows.windows(2).all(|w| w[1][3] >= w[0][3]));
    assert!(rows[0][2] < rows[50][2]);
}

#[test]
fn sweep_over_omega_prepends_column() {
    let sb = Sandbox::new();
    let cfg = sb.config("s.cfg", "variable = omega\nstart = 1\nstop = 4\nsteps = 4\nomega_prime = -1\nT = 2\n");
    let text = stdout(&weakdwell(&["sweep", "--no-metadata", "--workers", "2"], &cfg, None));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega,T,gamma,tau_quadrature,tau_tanh,tau_coth_paper");
    let omegas: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(omegas, vec![1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn sweep_validation_fails_fast() {
    let sb = Sandbox::new();
    for (body, key) in [
        ("start = 1\nstop = 2\nsteps = 1\nomega = 1\nomega_prime = -1\n", "steps"),
        ("start = 2\nstop = 1\nsteps = 5\nomega = 1\nomega_prime = -1\n", "start"),
        ("start = 0\nstop = 1\nsteps = 5\nscale = log\nomega = 1\nomega_prime = -1\n", "start"),
        ("start = 0.1\nstop = 1\nsteps = 5\nomega = 1\n", "omega_prime"),
    ] {
        let cfg = sb.config("s.cfg", body);
        let out = sb.path("s.csv");
        let o = weakdwell(&["sweep"], &cfg, Some(&out));
        assert_eq!(o.status.code(), Some(2), "{body}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(key), "{body}");
        assert!(!out.exists());
    }
}

#[test]
fn survival_table() {
    let sb = Sandbox::new();
    let cfg = sb.config("p.cfg", "gamma = 1\nt_i = 0\nt_f = 2\npoints = 5\n");
    let text = stdout(&weakdwell(&["survival"], &cfg, None));
    assert!(text.contains("# summary: tau_quadrature = 7.6159415595"));
    let data = data_section(&text);
    let rows: Vec<&str> = data.lines().collect();
    assert_eq!(rows[0], "t,re_pw,im_pw");
    assert_eq!(rows.len(), 6);
    assert!(rows[1].starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
    assert!(rows[5].starts_with("2.0000000000000000e0,0.0000000000000000e0,"));

    let cfg = sb.config("a.cfg", "gamma = 0.5\nt_f = 4\nkind = asymptotic\nk = 3\ndelta_e = 0.2\npoints = 9\n");
    let text = stdout(&weakdwell(&["survival", "--no-metadata"], &cfg, None));
    let im_nonzero = text.lines().skip(2).take(6).any(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap() != 0.0);
    assert!(im_nonzero);
}

#[test]
fn pointer_sim_reads_out_weak_value() {
    let sb = Sandbox::new();
    let cfg = sb.config("p.cfg", "pre = x+\npost_theta = 0.4\noperator = sigma_z\ncoupling = 0.02\ndelta = 1\n");
    let v: Value = serde_json::from_str(&stdout(&weakdwell(&["pointer-sim", "--format", "json"], &cfg, None))).unwrap();
    let s = &v["metadata"]["summary"];
    let re = s["weak_value_re"].as_f64().unwrap();
    assert!((s["re_estimate"].as_f64().unwrap() - re).abs() < 1e-3);
    let rows = v["data"].as_array().unwrap();
    assert_eq!(rows.len(), 2048);
    let dq = rows[1]["q"].as_f64().unwrap() - rows[0]["q"].as_f64().unwrap();
    let total: f64 = rows.iter().map(|r| r["prob"].as_f64().unwrap()).sum::<f64>() * dq;
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn bath_sim_trajectory() {
    let sb = Sandbox::new();
    let cfg = sb.config(
        "b.cfg",
        "n_levels = 200\ndelta_e = 0.01\ncoupling = 0.02\nt_max = 5\ndt = 0.01\nstride = 50\nfit_start = 0.5\nfit_end = 4\n",
    );
    let text = stdout(&weakdwell(&["bath-sim"], &cfg, None));
    assert!(text.contains("# summary: gamma_fit = "));
    let data = data_section(&text);
    let mut lines = data.lines();
    assert_eq!(lines.next().unwrap(), "t,re_a0,im_a0,abs_a0,norm_total");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| (r[4] - 1.0).abs() < 1e-6));
    assert!(rows.windows(2).all(|w| w[1][3] < w[0][3]));

    let cfg = sb.config("fast.cfg", "n_levels = 4000\ndelta_e = 0.001\ncoupling = 0.01\nt_max = 1\ndt = 0.1\n");
    let o = weakdwell(&["bath-sim"], &cfg, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let sb = Sandbox::new();
    let cfg = sb.config("d.cfg", DWELL);
    for exp in ["dwell", "survival"] {
        let cfg = if exp == "dwell" { cfg.clone() } else { sb.config("s.cfg", "gamma = 0.3\nt_f = 7\n") };
        let a = weakdwell(&[exp, "--no-metadata", "--format", "json"], &cfg, None).stdout;
        let b = weakdwell(&[exp, "--no-metadata", "--format", "json"], &cfg, None).stdout;
        assert_eq!(a, b);
    }
}

#[test]
fn sweep_bytes_independent_of_worker_count() {
    let sb = Sandbox::new();
    let cfg = sb.config("s.cfg", "variable = omega_prime\nstart = -3\nstop = 1.9\nsteps = 40\nomega = 1.2\nT = 0.7\n");
    let runs: Vec<Vec<u8>> = [1, 1, 4, 7]
        .iter()
        .map(|w| weakdwell(&["sweep", "--no-metadata", "--workers", &w.to_string()], &cfg, None).stdout)
        .collect();
    assert!(runs[0].len() > 1000);
    assert!(runs.iter().all(|r| *r == runs[0]));
}

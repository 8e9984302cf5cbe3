use std::io::Write;
use std::process::{Command, Output};

use sinr_outage::cumulants::{omega_cumulant, FadingModel, NetworkGeometry};

fn run(args: &[&str], config: &str) -> Output {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(config.as_bytes()).unwrap();
    let path = file.path().to_str().unwrap().to_string();
    let mut full: Vec<&str> = args.to_vec();
    full.push(&path);
    Command::new(env!("CARGO_BIN_EXE_sinr-outage")).args(&full).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const BINOMIAL: &str = "\
[model]
case = a_binomial
theta = -10
theta_unit = db
L = 10
p = 0.2

[method]
methods = gil_pelaez, spa:normal, mc
mc_trials = 5000
mc_seed = 42

[sweep]
variable = L
lo = 10
hi = 40
steps = 4
";

#[test]
fn sweep_csv_layout() {
    let o = run(&["run"], BINOMIAL);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "sweep_value,method,p_out,diag_err,diag_note");
    assert_eq!(lines.len(), 1 + 4 * 3);
    let methods: Vec<&str> = lines[1..4].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(methods, ["gil_pelaez", "spa:normal", "mc"]);
    // nine significant digits
    assert_eq!(lines[1].split(',').next().unwrap(), "1.00000000e1");
    // Gil-Pelaez and SPA agree in the Gaussian regime
    for chunk in lines[1..].chunks(3) {
        let p = |l: &str| l.split(',').nth(2).unwrap().parse::<f64>().unwrap();
        assert!((p(chunk[0]) - p(chunk[1])).abs() < 0.01, "{chunk:?}");
    }
}

#[test]
fn sweep_grid_round_trips() {
    let out = stdout(&run(&["run"], &BINOMIAL.replace("gil_pelaez, spa:normal, mc", "spa:normal")));
    let grid: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(grid, vec![10.0, 20.0, 30.0, 40.0]);
}

#[test]
fn mc_is_reproducible() {
    let a = run(&["run"], BINOMIAL);
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(BINOMIAL.as_bytes()).unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_sinr-outage"))
        .env("SINR_OUTAGE_THREADS", "3")
        .arg("run")
        .arg(f.path())
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, run(&["run"], BINOMIAL).stdout);
}

#[test]
fn db_and_linear_configs_match() {
    let lin = BINOMIAL.replace("theta = -10\ntheta_unit = db", "theta = 0.1\ntheta_unit = linear");
    assert_eq!(run(&["run"], BINOMIAL).stdout, run(&["run"], &lin).stdout);
}

#[test]
fn config_errors_exit_1() {
    let o = run(&["run"], &BINOMIAL.replace("p = 0.2", "q = 0.2"));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 6, column 1") && err.contains("unknown key"), "{err}");
    assert!(o.stdout.is_empty());
    let o = Command::new(env!("CARGO_BIN_EXE_sinr-outage")).args(["run", "/nonexistent.ini"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_sinr-outage")).env("SINR_OUTAGE_THREADS", "zero").args(["run", "/nonexistent.ini"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn all_na_exits_2() {
    let cfg = "[model]\ncase = c\nfading = lognormal\nsigma_ln = 1\ntheta = 1\ntheta_unit = linear\nnum_bs = 200\n[method]\nmethods = gil_pelaez, spa:normal\n";
    let o = run(&["run"], cfg);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.lines().skip(1).all(|l| l.starts_with("NA,") && l.split(',').nth(2) == Some("NA")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no MGF"));
    // one computable method is enough for success
    let o = run(&["run"], &cfg.replace("spa:normal", "charlier:hermite"));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn cumulants_command() {
    let cfg = "[model]\ncase = b\ntheta = 0\ntheta_unit = db\nnum_bs = 200\nalpha = 4\n[method]\nmethods = gil_pelaez\n[sweep]\nvariable = num_bs\nlo = 200\nhi = 400\nsteps = 2\n";
    let o = run(&["cumulants"], cfg);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["sweep_value", "k1", "k2", "k3", "k4", "k5", "k6", "k7", "k8", "skew", "ex_kurt"]);
    let g = NetworkGeometry::from_bs_count(200.0, 1000.0, 30.0, 150.0, 4.0, 1.0).unwrap();
    let k1: f64 = rows[1][1].parse().unwrap();
    let want = omega_cumulant(1, &g, &FadingModel::Unit, 1.0).unwrap();
    assert!(((k1 - want) / want).abs() < 1e-8);
    // doubling the intensity halves skewness²
    let s = |r: &Vec<&str>| r[9].parse::<f64>().unwrap().powi(2);
    assert!((s(&rows[1]) / s(&rows[2]) - 2.0).abs() < 1e-6);
}

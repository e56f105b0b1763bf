use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lbra_cli::compare::{compare, Verdict};
use lbra_cli::config::parse_config_str;
use lbra_cli::output::{parse_csv, CSV_HEADER};
use lbra_core::Policy;

const SMALL: &str = "[deployment]\nwindow = 500.0\nseed = 5\n\n[simulation]\ntrials = 20\nresolution = 64\nanalytic_samples = 1000\n";

fn lbra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbra")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let csv = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    let out = lbra(&[
        "sweep",
        "--config",
        &cfg,
        "--values",
        "1e-3,2e-3,3e-3",
        "--out",
        csv.to_str().unwrap(),
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&csv).unwrap();
    let file = parse_csv(&text).unwrap();
    assert_eq!(file.command.as_deref(), Some("sweep"));
    assert_eq!(file.rows.len(), 6);
    let order: Vec<(Policy, f64)> = file.rows.iter().map(|r| (r.policy, r.value)).collect();
    assert_eq!(order[0], (Policy::Npra, 1e-3));
    assert_eq!(order[1], (Policy::Lbra, 1e-3));
    assert_eq!(order[5], (Policy::Lbra, 3e-3));
    for r in &file.rows {
        // capacity = lambda_D (1 - epsilon), up to the printed precision
        assert!((r.capacity - r.value * (1.0 - r.epsilon)).abs() <= 1e-8 * r.value, "{r:?}");
        assert_eq!(r.no_outage_capacity, r.value);
        assert_eq!((r.trials, r.seed), (20, 5));
    }
    assert!(file.config.contains("seed = 5"));

    let svg = fs::read_to_string(svg).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains(r#"data-series="lbra""#));
}

#[test]
fn simulate_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = lbra(&["simulate", "--config", &cfg, "--policy", "npra", "--seed", "8"]);
    assert!(out.status.success());
    let file = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(file.rows.len(), 1);
    assert_eq!(file.rows[0].policy, Policy::Npra);
    assert_eq!(file.rows[0].seed, 8);
}

#[test]
fn analytic_sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = lbra(&["analytic", "--config", &cfg, "--sweep", "--axis", "lambda_g", "--values", "1e-4,2e-4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(file.rows.len(), 4);
    assert!(file.rows.iter().all(|r| r.epsilon_ci.is_nan() && (0.0..=1.0).contains(&r.epsilon)));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);

    let bad_alpha = lbra(&["simulate", "--config", &cfg, "--set", "radio.alpha=2"]);
    assert_eq!(bad_alpha.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_alpha.stderr).contains("radio.alpha"));

    let unknown = lbra(&["simulate", "--config", &cfg, "--set", "radio.gain=2"]);
    assert_eq!(unknown.status.code(), Some(2));

    let missing = lbra(&["simulate", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(missing.status.code(), Some(2));

    let no_devices = lbra(&["simulate", "--config", &cfg, "--set", "deployment.lambda_d=1e-12", "--trials", "2"]);
    assert_eq!(no_devices.status.code(), Some(3));

    let ok = lbra(&["simulate", "--config", &cfg, "--trials", "2"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn dump_and_explain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);

    let dump = lbra(&["dump", "--config", &cfg, "--trial", "3"]);
    assert!(dump.status.success());
    let text = String::from_utf8(dump.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,x,y"));
    let mut gateways = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[0] == "device" || f[0] == "gateway");
        gateways += usize::from(f[0] == "gateway");
        for v in &f[1..] {
            let v: f64 = v.parse().unwrap();
            assert!((0.0..500.0).contains(&v));
        }
    }
    assert!(gateways >= 2);

    let explain = lbra(&["explain", "--config", &cfg, "--trial", "3"]);
    assert!(explain.status.success());
    let text = String::from_utf8(explain.stdout).unwrap();
    assert!(text.starts_with("donor,receiver,k_change\n"));
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2).unwrap().parse::<usize>().unwrap() >= 1));

    let npra = lbra(&["explain", "--config", &cfg, "--policy", "npra"]);
    assert_eq!(String::from_utf8(npra.stdout).unwrap(), "donor,receiver,k_change\n");
}

#[test]
fn csv_metadata_reproduces_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    assert!(lbra(&["simulate", "--config", &cfg, "--out", first.to_str().unwrap()]).status.success());
    assert!(lbra(&["simulate", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()])
        .status
        .success());
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    assert!(fs::read_to_string(&first).unwrap().lines().any(|l| l == CSV_HEADER));
}

#[test]
fn self_comparison_is_neutral() {
    let cfg = parse_config_str(SMALL, &[]).unwrap();
    let c = compare(&cfg, Policy::Lbra, Policy::Lbra).unwrap();
    assert_eq!(c.sim_gains.capacity_db, 0.0);
    assert_eq!(c.sim_gains.outage_db, 0.0);
    assert_eq!(c.analytic_gains.capacity_db, 0.0);
    assert_eq!(c.verdict, Verdict::Tie);
}

#[test]
fn sparse_gateways_favour_nearest_association() {
    let cfg = parse_config_str(
        "[deployment]\nwindow = 500.0\nlambda_d = 2e-3\nlambda_g = 0.25e-4\n\n[simulation]\ntrials = 300\nresolution = 64\nanalytic_samples = 2000\n",
        &[],
    )
    .unwrap();
    let c = compare(&cfg, Policy::Npra, Policy::Lbra).unwrap();
    assert!(c.sim_gains.capacity_db < 0.0, "{c}");
    assert_eq!(c.verdict, Verdict::Regression);
    let report = c.to_string();
    assert!(report.contains("capacity_db = 10 log10(C_lbra / C_npra)"));
    assert!(report.contains("regression"));
}

#[test]
fn compare_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let report = dir.path().join("cmp.txt");
    let out = lbra(&["compare", "--config", &cfg, "--out", report.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(report).unwrap();
    assert!(text.contains("simulation,npra,"));
    assert!(text.contains("analytic,lbra,"));
    assert!(text.contains("(95%, paired)"));
}

#[test]
fn workers_flag_is_validated() {
    let out = lbra(&["--workers", "0", "simulate", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

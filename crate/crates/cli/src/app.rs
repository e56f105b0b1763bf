//! Command-line surface and dispatch.

use clap::{Args, Parser, Subcommand};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use lbra_core::montecarlo::{sample_snapshot, trace_trial};
use lbra_core::{analytic, sweep, Axis, Policy, SweepRow};

use crate::compare::compare;
use crate::config::{parse_config, parse_override, RunConfig};
use crate::error::CliError;
use crate::output::write_csv;
use crate::plot::render_svg;

#[derive(Debug, Parser)]
#[command(name = "lbra", version, about = "Gateway relay simulator and analytic calculator")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one operating point.
    Simulate(Common),
    /// Evaluate the closed-form model.
    Analytic {
        #[command(flatten)]
        common: Common,
        /// Evaluate every sweep value instead of the single point.
        #[arg(long)]
        sweep: bool,
    },
    /// Simulate every sweep value for each policy.
    Sweep(Common),
    /// Compare LBRA against NPRA at one point.
    Compare(Common),
    /// Write the devices and gateways of one trial.
    Dump {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Write the LBRA transfer plan of one trial.
    Explain {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
}

#[derive(Debug, Args, Default, Clone)]
pub struct Common {
    /// TOML configuration, or a CSV produced by this tool.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Generic override, `section.key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub policy: Option<Policy>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub axis: Option<Axis>,
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub log_y: bool,
    /// Plot metric: capacity or outage.
    #[arg(long)]
    pub metric: Option<String>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, toml::Value)>, CliError> {
        let mut out = Vec::new();
        for raw in &self.set {
            out.push(parse_override(raw)?);
        }
        let s = |v: &str| toml::Value::String(v.to_string());
        if let Some(p) = self.policy {
            out.push(("simulation.policy".into(), s(p.as_str())));
        }
        if let Some(t) = self.trials {
            out.push(("simulation.trials".into(), toml::Value::Integer(t as i64)));
        }
        if let Some(seed) = self.seed {
            let seed = i64::try_from(seed).map_err(|_| CliError::config("deployment.seed", "must fit in 63 bits"))?;
            out.push(("deployment.seed".into(), toml::Value::Integer(seed)));
        }
        if let Some(a) = self.axis {
            out.push(("sweep.axis".into(), s(a.as_str())));
        }
        if let Some(v) = &self.values {
            out.push(("sweep.values".into(), toml::Value::Array(v.iter().map(|&x| x.into()).collect())));
        }
        if let Some(p) = &self.out {
            out.push(("output.csv".into(), s(&p.display().to_string())));
        }
        if let Some(p) = &self.plot {
            out.push(("output.plot".into(), s(&p.display().to_string())));
        }
        if self.log_y {
            out.push(("output.log_y".into(), toml::Value::Boolean(true)));
        }
        if let Some(m) = &self.metric {
            out.push(("output.metric".into(), s(m)));
        }
        Ok(out)
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        parse_config(self.config.as_deref(), &self.overrides()?)
    }
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => match io::stdout().write_all(bytes) {
            // a closed pipe (`lbra dump | head`) is not an error
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            }),
            _ => Ok(()),
        },
    }
}

fn emit_rows(cfg: &RunConfig, command: &str, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, command, &cfg.to_toml(), rows).map_err(|e| CliError::Plot(e.to_string()))?;
    write_to(cfg.output().csv.as_deref(), &buf)?;
    if let Some(plot) = &cfg.output().plot {
        let svg = render_svg(rows, cfg.output().metric, cfg.output().log_y)?;
        write_to(Some(plot), svg.as_bytes())?;
    }
    Ok(())
}

fn analytic_row(cfg: &RunConfig, policy: Policy, axis: Axis, value: f64) -> Result<SweepRow, CliError> {
    let mut point = cfg.analytic_point();
    match axis {
        Axis::LambdaD => point.lambda_d = value,
        Axis::LambdaG => point.lambda_g = value,
    }
    let r = analytic::outage(&point, policy)?;
    Ok(SweepRow {
        policy,
        axis,
        value,
        lambda_d: point.lambda_d,
        epsilon: r.epsilon,
        epsilon_ci: f64::NAN,
        capacity: r.capacity,
        no_outage_capacity: point.lambda_d,
        trials: point.samples,
        seed: point.seed,
        mean_load: point.lambda_d / point.lambda_g,
        capture_rate: analytic::p_c_in_v(point.lambda_d, cfg.plan.u1(), point.lambda_g, &cfg.radio),
        resample_count: 0,
    })
}

/// Produces the CSV rows of `simulate`, `sweep` or `analytic`.
pub fn rows_for(cfg: &RunConfig, command: &str, analytic_sweep: bool) -> Result<Vec<SweepRow>, CliError> {
    let policies = cfg.policies();
    let mut rows = Vec::new();
    match command {
        "simulate" => {
            for &p in &policies {
                rows.push(lbra_core::run_experiment(&cfg.experiment(p))?);
            }
        }
        "sweep" => {
            let s = &cfg.file.sweep;
            rows = sweep(s.axis, &s.values, &cfg.experiment(policies[0]), &policies)?;
        }
        "analytic" => {
            let (axis, values) = if analytic_sweep {
                (cfg.file.sweep.axis, cfg.file.sweep.values.clone())
            } else {
                (Axis::LambdaD, vec![cfg.deployment.lambda_d])
            };
            for v in values {
                for &p in &policies {
                    rows.push(analytic_row(cfg, p, axis, v)?);
                }
            }
        }
        other => unreachable!("no rows for {other}"),
    }
    Ok(rows)
}

fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(c) => {
            let cfg = c.resolve()?;
            emit_rows(&cfg, "simulate", &rows_for(&cfg, "simulate", false)?)
        }
        Command::Sweep(c) => {
            let cfg = c.resolve()?;
            emit_rows(&cfg, "sweep", &rows_for(&cfg, "sweep", false)?)
        }
        Command::Analytic { common, sweep } => {
            let cfg = common.resolve()?;
            let name = if *sweep { "analytic --sweep" } else { "analytic" };
            emit_rows(&cfg, name, &rows_for(&cfg, "analytic", *sweep)?)
        }
        Command::Compare(c) => {
            let cfg = c.resolve()?;
            let report = compare(&cfg, Policy::Npra, Policy::Lbra)?;
            write_to(cfg.output().csv.as_deref(), report.to_string().as_bytes())
        }
        Command::Dump { common, trial } => {
            let cfg = common.resolve()?;
            let (snapshot, _) = sample_snapshot(&cfg.deployment, *trial)?;
            let mut buf = Vec::new();
            snapshot.write_csv(&mut buf).expect("in-memory write");
            write_to(cfg.output().csv.as_deref(), &buf)
        }
        Command::Explain { common, trial } => {
            let cfg = common.resolve()?;
            let policy = cfg.file.simulation.policy.unwrap_or(Policy::Lbra);
            let trace = trace_trial(&cfg.experiment(policy), *trial)?;
            let mut buf = Vec::new();
            trace.plan.write_csv(&mut buf).expect("in-memory write");
            write_to(cfg.output().csv.as_deref(), &buf)
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match cli.workers {
        Some(0) => Err(CliError::config("--workers", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("--workers", e.to_string()))?
            .install(|| execute(&cli.command)),
        None => execute(&cli.command),
    }
}

//! End-to-end Monte Carlo trials and their aggregation.
//!
//! A trial samples devices and gateways, groups devices with the nearest
//! gateway, applies the grouping policy, assigns channels, resolves captures
//! and selects packets to relay. Each stage draws from its own substream keyed
//! by `(base_seed, trial_index, purpose)`, so results do not depend on how the
//! trials are scheduled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::domain::{relay_budget_exact, DeploymentParams, RadioParams, SpectrumPlan};
use crate::error::{ModelError, Result};
use crate::geometry::{assign_nearest, sample_ppp, NetworkSnapshot, MIN_RESOLUTION};
use crate::lbra::{regroup, Policy, TransferPlan};
use crate::phy::{assign_channels, relay_select, resolve_captures, TrialResult};
use crate::rng::{Purpose, StreamKey};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Gateway draws with fewer than two points are retried at most this often.
const MAX_GATEWAY_ATTEMPTS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub deployment: DeploymentParams,
    pub radio: RadioParams,
    pub plan: SpectrumPlan,
    pub policy: Policy,
    pub trials: usize,
    /// Grid cells per axis for the cell-area estimate.
    pub resolution: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(ModelError::param("trials", "at least one trial is required"));
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(ModelError::param(
                "resolution",
                format!("{} is below the minimum of {MIN_RESOLUTION}", self.resolution),
            ));
        }
        DeploymentParams::new(
            self.deployment.lambda_d,
            self.deployment.lambda_g,
            self.deployment.window,
            self.deployment.base_seed,
        )?;
        Ok(())
    }

    pub fn with_policy(mut self, policy: Policy) -> Self {
        self.policy = policy;
        self
    }
}

/// Snapshot of trial `index`, together with the number of discarded gateway draws.
pub fn sample_snapshot(deployment: &DeploymentParams, index: u64) -> Result<(NetworkSnapshot, u32)> {
    let seed = deployment.base_seed;
    let window = deployment.window;
    let devices = sample_ppp(deployment.lambda_d, window, &mut StreamKey::new(seed, index, Purpose::Devices).rng());
    let mut key = StreamKey::new(seed, index, Purpose::Gateways);
    let mut resamples = 0u32;
    loop {
        let gateways = sample_ppp(deployment.lambda_g, window, &mut key.rng());
        if gateways.len() >= 2 {
            return Ok((NetworkSnapshot::new(devices, gateways, window)?, resamples));
        }
        resamples += 1;
        key = key.next_attempt();
        if key.attempt >= MAX_GATEWAY_ATTEMPTS {
            return Err(ModelError::Degenerate(format!(
                "trial {index}: {MAX_GATEWAY_ATTEMPTS} gateway draws had fewer than two points"
            )));
        }
    }
}

/// Everything a trial produced, for inspection tools.
#[derive(Debug, Clone)]
pub struct TrialTrace {
    pub snapshot: NetworkSnapshot,
    pub plan: TransferPlan,
    pub result: TrialResult,
}

/// Runs trial `index` and keeps the intermediate state.
pub fn trace_trial(spec: &ExperimentSpec, index: u64) -> Result<TrialTrace> {
    let seed = spec.deployment.base_seed;
    let (snapshot, resamples) = sample_snapshot(&spec.deployment, index)?;
    let nearest = assign_nearest(&snapshot, spec.resolution)?;
    let (grouping, plan) = regroup(&nearest, &snapshot, spec.policy);

    let assignment = assign_channels(
        snapshot.devices.len(),
        spec.plan.u1(),
        &mut StreamKey::new(seed, index, Purpose::Channels).rng(),
    );
    let captured = resolve_captures(
        &grouping,
        &assignment,
        &snapshot,
        &spec.radio,
        &mut StreamKey::new(seed, index, Purpose::Fades).rng(),
    );

    let total_hits = (grouping.resolution * grouping.resolution) as u64;
    let budgets: Vec<u32> = grouping
        .hits
        .iter()
        .map(|&h| relay_budget_exact(h, total_hits, &spec.plan))
        .collect();
    let mut captured_by_gateway = vec![Vec::new(); grouping.gateway_count()];
    for (d, &c) in captured.iter().enumerate() {
        if c {
            captured_by_gateway[grouping.owner[d]].push(d);
        }
    }
    let relayed = relay_select(
        &captured_by_gateway,
        &budgets,
        snapshot.devices.len(),
        &mut StreamKey::new(seed, index, Purpose::Relay).rng(),
    );
    let result = TrialResult::from_flags(&grouping, &captured, &relayed, &budgets, resamples, plan.devices_moved());
    Ok(TrialTrace { snapshot, plan, result })
}

/// Runs trial `index` of `spec`.
pub fn run_trial(spec: &ExperimentSpec, index: u64) -> Result<TrialResult> {
    trace_trial(spec, index).map(|t| t.result)
}

/// Integer counts kept from each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TrialSummary {
    pub n_devices: usize,
    pub n_captured: usize,
    pub n_relayed: usize,
    pub n_gateways: usize,
    pub resample_count: u32,
    pub transferred: usize,
}

impl From<&TrialResult> for TrialSummary {
    fn from(r: &TrialResult) -> Self {
        TrialSummary {
            n_devices: r.n_devices,
            n_captured: r.n_captured,
            n_relayed: r.n_relayed,
            n_gateways: r.per_gateway.len(),
            resample_count: r.resample_count,
            transferred: r.transferred,
        }
    }
}

impl TrialSummary {
    pub fn outage(&self) -> Option<f64> {
        (self.n_devices > 0).then(|| 1.0 - self.n_relayed as f64 / self.n_devices as f64)
    }
}

/// Aggregate of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    /// Ratio-of-sums outage estimate.
    pub epsilon: f64,
    /// 95% half-width from the per-trial outage sample; NaN with fewer than two trials.
    pub epsilon_ci: f64,
    pub capacity: f64,
    pub capture_rate: f64,
    pub mean_load: f64,
    pub devices: usize,
    pub relayed: usize,
    /// Trials with at least one device.
    pub effective_trials: usize,
    pub resample_count: u64,
    pub mean_transferred: f64,
    pub per_trial: Vec<TrialSummary>,
}

/// Runs every trial of `spec` on the current rayon pool and aggregates.
pub fn run_trials(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let per_trial: Vec<TrialSummary> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(spec, i).map(|r| TrialSummary::from(&r)))
        .collect::<Result<_>>()?;
    aggregate(spec.deployment.lambda_d, per_trial)
}

/// Combines per-trial counts. Only integer sums feed the point estimate, so the
/// result is independent of trial order.
pub fn aggregate(lambda_d: f64, per_trial: Vec<TrialSummary>) -> Result<ExperimentOutcome> {
    let devices: usize = per_trial.iter().map(|t| t.n_devices).sum();
    if devices == 0 {
        return Err(ModelError::Degenerate("no trial produced any device".into()));
    }
    let relayed: usize = per_trial.iter().map(|t| t.n_relayed).sum();
    let captured: usize = per_trial.iter().map(|t| t.n_captured).sum();
    let gateways: usize = per_trial.iter().map(|t| t.n_gateways).sum();
    let transferred: usize = per_trial.iter().map(|t| t.transferred).sum();
    let epsilon = 1.0 - relayed as f64 / devices as f64;

    let outages: Vec<f64> = per_trial.iter().filter_map(TrialSummary::outage).collect();
    let epsilon_ci = half_width(&outages);

    Ok(ExperimentOutcome {
        epsilon,
        epsilon_ci,
        capacity: lambda_d * (1.0 - epsilon),
        capture_rate: captured as f64 / devices as f64,
        mean_load: devices as f64 / gateways.max(1) as f64,
        devices,
        relayed,
        effective_trials: outages.len(),
        resample_count: per_trial.iter().map(|t| u64::from(t.resample_count)).sum(),
        mean_transferred: transferred as f64 / per_trial.len() as f64,
        per_trial,
    })
}

/// `z * s / sqrt(n)` with the unbiased sample deviation; NaN when `n < 2`.
fn half_width(sample: &[f64]) -> f64 {
    let n = sample.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Z95 * (var / n as f64).sqrt()
}

/// Outage difference `eps_a - eps_b` between two policies run on the same
/// trials, with a 95% half-width from the paired ratio-estimator variance.
///
/// Both runs must share the seed and trial count, so trial `t` sees the same
/// devices in each.
pub fn paired_outage_difference(a: &ExperimentOutcome, b: &ExperimentOutcome) -> Result<(f64, f64)> {
    if a.per_trial.len() != b.per_trial.len()
        || a.per_trial.iter().zip(&b.per_trial).any(|(x, y)| x.n_devices != y.n_devices)
    {
        return Err(ModelError::param("trials", "paired comparison needs runs over identical snapshots"));
    }
    let n = a.devices as f64;
    let diff = (b.relayed as f64 - a.relayed as f64) / n;
    let m = a.effective_trials;
    if m < 2 {
        return Ok((diff, f64::NAN));
    }
    let ss: f64 = a
        .per_trial
        .iter()
        .zip(&b.per_trial)
        .map(|(x, y)| {
            let z = y.n_relayed as f64 - x.n_relayed as f64;
            (z - diff * x.n_devices as f64).powi(2)
        })
        .sum();
    let var = ss * m as f64 / (m - 1) as f64 / (n * n);
    Ok((diff, Z95 * var.sqrt()))
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    LambdaD,
    LambdaG,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::LambdaD => "lambda_d",
            Axis::LambdaG => "lambda_g",
        }
    }

    pub fn apply(&self, deployment: &mut DeploymentParams, value: f64) {
        match self {
            Axis::LambdaD => deployment.lambda_d = value,
            Axis::LambdaG => deployment.lambda_g = value,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "lambda_d" => Ok(Axis::LambdaD),
            "lambda_g" => Ok(Axis::LambdaG),
            other => Err(format!("unknown axis `{other}` (expected lambda_d or lambda_g)")),
        }
    }
}

/// One output row of an experiment or sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub policy: Policy,
    pub axis: Axis,
    pub value: f64,
    pub lambda_d: f64,
    pub epsilon: f64,
    pub epsilon_ci: f64,
    pub capacity: f64,
    /// Capacity without outage, `lambda_d`.
    pub no_outage_capacity: f64,
    pub trials: usize,
    pub seed: u64,
    pub mean_load: f64,
    pub capture_rate: f64,
    pub resample_count: u64,
}

impl SweepRow {
    /// Reports `outcome` of `spec` as a row of a sweep along `axis`.
    pub fn from_outcome(spec: &ExperimentSpec, axis: Axis, outcome: &ExperimentOutcome) -> Self {
        let value = match axis {
            Axis::LambdaD => spec.deployment.lambda_d,
            Axis::LambdaG => spec.deployment.lambda_g,
        };
        SweepRow {
            policy: spec.policy,
            axis,
            value,
            lambda_d: spec.deployment.lambda_d,
            epsilon: outcome.epsilon,
            epsilon_ci: outcome.epsilon_ci,
            capacity: outcome.capacity,
            no_outage_capacity: spec.deployment.lambda_d,
            trials: spec.trials,
            seed: spec.deployment.base_seed,
            mean_load: outcome.mean_load,
            capture_rate: outcome.capture_rate,
            resample_count: outcome.resample_count,
        }
    }
}

/// Runs `spec` and reports it as a row of a sweep along `axis`.
pub fn run_experiment_on(spec: &ExperimentSpec, axis: Axis) -> Result<SweepRow> {
    Ok(SweepRow::from_outcome(spec, axis, &run_trials(spec)?))
}

/// Runs `spec` as a single-point experiment on the device-density axis.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SweepRow> {
    run_experiment_on(spec, Axis::LambdaD)
}

/// One experiment per value and policy, value-major.
pub fn sweep(axis: Axis, values: &[f64], template: &ExperimentSpec, policies: &[Policy]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(ModelError::param("values", "sweep needs at least one value"));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ModelError::param("values", "sweep values must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(values.len() * policies.len());
    for &v in values {
        for &policy in policies {
            let mut spec = template.with_policy(policy);
            axis.apply(&mut spec.deployment, v);
            rows.push(run_experiment_on(&spec, axis)?);
        }
    }
    Ok(rows)
}

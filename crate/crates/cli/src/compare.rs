//! Two-policy comparison at one operating point.
//!
//! Gains are `10 log10` of linear ratios: capacity `C_cand / C_base` and
//! outage `eps_base / eps_cand`, so a positive number favours the candidate.
//! The verdict uses the paired outage difference over shared snapshots.

use std::fmt;

use lbra_core::{analytic, paired_outage_difference, run_trials, ExperimentOutcome, ModelError, Policy};

use crate::config::RunConfig;
use crate::output::sig9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Improvement,
    Tie,
    Regression,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Improvement => "improvement",
            Verdict::Tie => "tie",
            Verdict::Regression => "regression",
        })
    }
}

/// Verdict for an outage reduction `diff` with 95% half-width `half`.
pub fn verdict(diff: f64, half: f64) -> Verdict {
    if !half.is_finite() {
        return Verdict::Tie;
    }
    if diff - half > 0.0 {
        Verdict::Improvement
    } else if diff + half < 0.0 {
        Verdict::Regression
    } else {
        Verdict::Tie
    }
}

/// `10 log10(num / den)`; zero when the two are equal.
pub fn db(num: f64, den: f64) -> f64 {
    if num == den {
        0.0
    } else {
        10.0 * (num / den).log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub capacity_ratio: f64,
    pub capacity_db: f64,
    pub outage_ratio: f64,
    pub outage_db: f64,
}

impl Gains {
    pub fn new(base_epsilon: f64, cand_epsilon: f64, lambda_d: f64) -> Self {
        let (cb, cc) = (lambda_d * (1.0 - base_epsilon), lambda_d * (1.0 - cand_epsilon));
        let ratio = |a: f64, b: f64| if a == b { 1.0 } else { a / b };
        Gains {
            capacity_ratio: ratio(cc, cb),
            capacity_db: db(cc, cb),
            outage_ratio: ratio(base_epsilon, cand_epsilon),
            outage_db: db(base_epsilon, cand_epsilon),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub baseline: Policy,
    pub candidate: Policy,
    pub lambda_d: f64,
    pub lambda_g: f64,
    pub sim_baseline: ExperimentOutcome,
    pub sim_candidate: ExperimentOutcome,
    pub sim_gains: Gains,
    /// `eps_base - eps_cand` and its paired 95% half-width.
    pub outage_reduction: f64,
    pub outage_reduction_ci: f64,
    pub verdict: Verdict,
    pub analytic_baseline: f64,
    pub analytic_candidate: f64,
    pub analytic_gains: Gains,
}

/// Runs both policies at the configured point, by simulation and analytically.
pub fn compare(cfg: &RunConfig, baseline: Policy, candidate: Policy) -> Result<Comparison, ModelError> {
    let sim_baseline = run_trials(&cfg.experiment(baseline))?;
    let sim_candidate = run_trials(&cfg.experiment(candidate))?;
    let (reduction, half) = paired_outage_difference(&sim_baseline, &sim_candidate)?;
    let point = cfg.analytic_point();
    let analytic_baseline = analytic::outage(&point, baseline)?.epsilon;
    let analytic_candidate = analytic::outage(&point, candidate)?.epsilon;
    let lambda_d = cfg.deployment.lambda_d;
    Ok(Comparison {
        baseline,
        candidate,
        lambda_d,
        lambda_g: cfg.deployment.lambda_g,
        sim_gains: Gains::new(sim_baseline.epsilon, sim_candidate.epsilon, lambda_d),
        sim_baseline,
        sim_candidate,
        outage_reduction: reduction,
        outage_reduction_ci: half,
        verdict: verdict(reduction, half),
        analytic_gains: Gains::new(analytic_baseline, analytic_candidate, lambda_d),
        analytic_baseline,
        analytic_candidate,
    })
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {} vs {} at lambda_d={} lambda_g={}", self.candidate, self.baseline, self.lambda_d, self.lambda_g)?;
        writeln!(f, "# capacity_db = 10 log10(C_{} / C_{})", self.candidate, self.baseline)?;
        writeln!(f, "# outage_db = 10 log10(eps_{} / eps_{})", self.baseline, self.candidate)?;
        writeln!(f, "method,policy,epsilon,epsilon_ci,capacity")?;
        for (policy, out) in [(self.baseline, &self.sim_baseline), (self.candidate, &self.sim_candidate)] {
            writeln!(f, "simulation,{policy},{},{},{}", sig9(out.epsilon), sig9(out.epsilon_ci), sig9(out.capacity))?;
        }
        for (policy, eps) in [(self.baseline, self.analytic_baseline), (self.candidate, self.analytic_candidate)] {
            writeln!(f, "analytic,{policy},{},NaN,{}", sig9(eps), sig9(self.lambda_d * (1.0 - eps)))?;
        }
        writeln!(f)?;
        writeln!(f, "method,capacity_ratio,capacity_db,outage_ratio,outage_db")?;
        for (method, g) in [("simulation", &self.sim_gains), ("analytic", &self.analytic_gains)] {
            writeln!(
                f,
                "{method},{},{},{},{}",
                sig9(g.capacity_ratio),
                sig9(g.capacity_db),
                sig9(g.outage_ratio),
                sig9(g.outage_db)
            )?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "outage reduction {} +/- {} (95%, paired): {}",
            sig9(self.outage_reduction),
            sig9(self.outage_reduction_ci),
            self.verdict
        )
    }
}

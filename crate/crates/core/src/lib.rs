//! Stochastic-geometry model of gateway relaying for machine-type devices.
//!
//! Devices and gateways are homogeneous Poisson processes on a torus. Each
//! gateway captures packets on a set of uplink channels and forwards as many as
//! its share of the relay spectrum allows. [`lbra`] balances group sizes between
//! neighbouring gateways before transmission; [`montecarlo`] simulates the whole
//! pipeline and [`analytic`] evaluates the matching closed-form approximation.

pub mod analytic;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod lbra;
pub mod montecarlo;
pub mod phy;
pub mod quadrature;
pub mod rng;

pub use analytic::{outage as analytic_outage, AnalyticPoint, AnalyticResult, PathMeans};
pub use domain::{compute_k_alpha, db_to_linear, relay_budget, DeploymentParams, RadioParams, SpectrumPlan};
pub use error::{ModelError, Result};
pub use geometry::{NetworkSnapshot, Point};
pub use lbra::{Policy, TransferPlan};
pub use montecarlo::{
    paired_outage_difference, run_experiment, run_trials, sweep, Axis, ExperimentOutcome, ExperimentSpec, SweepRow,
};
pub use phy::TrialResult;

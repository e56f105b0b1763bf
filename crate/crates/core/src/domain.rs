//! Validated model parameters and the scalar constants derived from them.
//!
//! Thresholds enter in dB at the configuration boundary and are stored as
//! linear ratios. Transmit power is intentionally absent: with equal powers
//! and no noise floor the SIR does not depend on it.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ModelError, Result};
use crate::quadrature;

/// Converts a decibel value to a linear power ratio.
pub fn db_to_linear(x_db: f64) -> Result<f64> {
    if !x_db.is_finite() {
        return Err(ModelError::param("db", format!("{x_db} is not finite")));
    }
    Ok(10f64.powf(x_db / 10.0))
}

/// `K_alpha = \int_0^inf dt / (1 + t^{alpha/2})`, by quadrature.
///
/// With `a = alpha/2`, the tail over `[1, inf)` becomes `\int_0^1 s^{a-2}/(1+s^a) ds`
/// under `t = 1/s`. Its endpoint singularity `s^{a-2}` is integrated exactly, which
/// leaves `1/(a-1) + \int_0^1 (1 - s^{2a-2}) / (1 + s^a) ds` with a bounded integrand.
pub fn compute_k_alpha(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 2.0 {
        return Err(ModelError::DivergentIntegral { alpha });
    }
    let a = alpha / 2.0;
    let est = quadrature::unit_interval(|s, _| (1.0 - s.powf(2.0 * a - 2.0)) / (1.0 + s.powf(a)), 1e-14);
    Ok(1.0 / (a - 1.0) + est.value)
}

/// Closed form `(2 pi / alpha) / sin(2 pi / alpha)`; used as a cross-check only.
pub fn k_alpha_closed_form(alpha: f64) -> f64 {
    let x = 2.0 * PI / alpha;
    x / x.sin()
}

/// SIR threshold and path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadioParams {
    pub eta_db: f64,
    pub eta: f64,
    pub alpha: f64,
    pub k_alpha: f64,
}

impl RadioParams {
    pub fn new(eta_db: f64, alpha: f64) -> Result<Self> {
        let eta = db_to_linear(eta_db)
            .map_err(|_| ModelError::param("eta_db", format!("{eta_db} is not finite")))?;
        let k_alpha = compute_k_alpha(alpha)?;
        Ok(RadioParams {
            eta_db,
            eta,
            alpha,
            k_alpha,
        })
    }

    /// `eta^{2/alpha}`, the threshold factor in every capture expression.
    pub fn eta_factor(&self) -> f64 {
        self.eta.powf(2.0 / self.alpha)
    }
}

impl Default for RadioParams {
    /// 3 dB threshold, path-loss exponent 5.
    fn default() -> Self {
        RadioParams::new(3.0, 5.0).expect("default radio parameters are valid")
    }
}

/// Resource-block budgets for the device->gateway and gateway->DAC links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumPlan {
    pub r1: u32,
    pub r2: u32,
    pub omega1: u32,
    pub omega2: u32,
    u1: u32,
}

impl SpectrumPlan {
    pub fn new(r1: u32, r2: u32, omega1: u32, omega2: u32) -> Result<Self> {
        for (name, v) in [("r1", r1), ("r2", r2), ("omega1", omega1), ("omega2", omega2)] {
            if v == 0 {
                return Err(ModelError::param(name, "must be a positive integer"));
            }
        }
        let u1 = r1 / omega1;
        if u1 == 0 {
            return Err(ModelError::param(
                "r1",
                format!("floor(r1/omega1) = floor({r1}/{omega1}) leaves no data channel"),
            ));
        }
        Ok(SpectrumPlan {
            r1,
            r2,
            omega1,
            omega2,
            u1,
        })
    }

    /// Number of device->gateway data channels `U1`.
    pub fn u1(&self) -> u32 {
        self.u1
    }

    /// Packets the whole gateway->DAC link could carry, `floor(r2/omega2)`.
    pub fn total_relay_packets(&self) -> u32 {
        self.r2 / self.omega2
    }
}

impl Default for SpectrumPlan {
    /// R1 = R2 = 1800 RBs, 30 RBs per uplink packet, 5 RBs per relayed packet.
    fn default() -> Self {
        SpectrumPlan::new(1800, 1800, 30, 5).expect("default plan is valid")
    }
}

/// `U1 = floor(r1 / omega1)`.
pub fn channel_count(plan: &SpectrumPlan) -> u32 {
    plan.u1()
}

/// Relay budget `U2 = floor(gamma * r2 / omega2)` of a gateway with spectrum share `gamma`.
pub fn relay_budget(gamma: f64, plan: &SpectrumPlan) -> Result<u32> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ModelError::param("gamma", format!("{gamma} outside [0, 1]")));
    }
    // the epsilon absorbs representation error when gamma*r2/omega2 is integral
    let raw = gamma * f64::from(plan.r2) / f64::from(plan.omega2);
    Ok((raw + 1e-9).floor() as u32)
}

/// Relay budget for a share given exactly as `hits / total`.
pub fn relay_budget_exact(hits: u64, total: u64, plan: &SpectrumPlan) -> u32 {
    debug_assert!(hits <= total && total > 0);
    let num = u128::from(hits) * u128::from(plan.r2);
    let den = u128::from(total) * u128::from(plan.omega2);
    (num / den) as u32
}

/// Point-process densities and the simulation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeploymentParams {
    pub lambda_d: f64,
    pub lambda_g: f64,
    /// Side of the square torus.
    pub window: f64,
    pub base_seed: u64,
}

impl DeploymentParams {
    pub fn new(lambda_d: f64, lambda_g: f64, window: f64, base_seed: u64) -> Result<Self> {
        for (name, v) in [("lambda_d", lambda_d), ("lambda_g", lambda_g), ("window", window)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::param(name, format!("{v} must be positive and finite")));
            }
        }
        let expected_gateways = lambda_g * window * window;
        if expected_gateways < 4.0 {
            return Err(ModelError::param(
                "lambda_g",
                format!("expected gateway count lambda_g*L^2 = {expected_gateways:.3} is below 4"),
            ));
        }
        Ok(DeploymentParams {
            lambda_d,
            lambda_g,
            window,
            base_seed,
        })
    }

    pub fn area(&self) -> f64 {
        self.window * self.window
    }
}

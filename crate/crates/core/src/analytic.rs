//! Closed-form outage pipeline.
//!
//! The per-device success probability is split into three event paths: the
//! device stays with its nearest gateway while that gateway receives devices
//! (`p1`), the device is transferred in (`p2`), or the device's own gateway
//! donates and the device stays (`p3`). Each path multiplies a capture
//! probability by the relay success `min(1, U2 / (k_c p_c))`.
//!
//! The expectation over the gateway process has no closed form, so `outage`
//! averages the path sum over sampled geometry: the pair distance from the
//! nearest-neighbour law, cell areas from the Gamma(3.5) Voronoi-area
//! approximation, and Poisson group sizes.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::{gamma_lr, gamma_ur};
use std::f64::consts::PI;

use crate::domain::{relay_budget, RadioParams, SpectrumPlan};
use crate::error::{ModelError, Result};
use crate::lbra::{k_change, Policy};
use crate::rng::{Purpose, StreamKey};

/// Shape of the Gamma approximation to planar Poisson-Voronoi cell areas.
pub const VORONOI_AREA_SHAPE: f64 = 3.5;

/// Minimum geometry sample count accepted for reported results.
pub const MIN_SAMPLES: usize = 1000;

/// `Pr{k_i >= k0}` for `k_i ~ Poisson(lambda_d * area)`.
pub fn prob_transfer_in(lambda_d: f64, area: f64, k0: u64) -> f64 {
    if k0 == 0 {
        return 1.0;
    }
    let mean = lambda_d * area;
    if mean <= 0.0 {
        return 0.0;
    }
    gamma_lr(k0 as f64, mean)
}

/// `Pr{k_i < k0}`, the complement of [`prob_transfer_in`].
pub fn prob_transfer_out(lambda_d: f64, area: f64, k0: u64) -> f64 {
    if k0 == 0 {
        return 0.0;
    }
    let mean = lambda_d * area;
    if mean <= 0.0 {
        return 1.0;
    }
    gamma_ur(k0 as f64, mean)
}

/// Density-weighted interference exponent `pi (lambda_d/U1) eta^{2/alpha} K_alpha`.
fn interference_rate(lambda_d: f64, u1: u32, radio: &RadioParams) -> f64 {
    PI * lambda_d / f64::from(u1) * radio.eta_factor() * radio.k_alpha
}

/// Capture probability of a device at distance `r` from its gateway.
pub fn capture_conditional(r: f64, lambda_d: f64, u1: u32, radio: &RadioParams) -> f64 {
    (-interference_rate(lambda_d, u1, radio) * r * r).exp()
}

/// Capture probability averaged over the nearest-gateway distance.
pub fn p_c_in_v(lambda_d: f64, u1: u32, lambda_g: f64, radio: &RadioParams) -> f64 {
    1.0 / (lambda_d * radio.eta_factor() * radio.k_alpha / (f64::from(u1) * lambda_g) + 1.0)
}

/// Capture probability of a device transferred in from a neighbour at gateway
/// distance `d`: the distance average starts at `d / 2`.
pub fn p_c_in_t(lambda_d: f64, u1: u32, lambda_g: f64, radio: &RadioParams, d: f64) -> f64 {
    let rate = interference_rate(lambda_d, u1, radio) + PI * lambda_g;
    p_c_in_v(lambda_d, u1, lambda_g, radio) * (-rate * d * d / 4.0).exp()
}

/// Capture probability in a donating group of size `k0` that gives away `k_change`.
pub fn p_c_out(lambda_d: f64, u1: u32, lambda_g: f64, radio: &RadioParams, k0: u64, k_change: u64) -> Result<f64> {
    if k0 == 0 {
        return Err(ModelError::UndefinedGroup);
    }
    if k_change > k0 {
        return Err(ModelError::param("k_change", format!("{k_change} exceeds group size {k0}")));
    }
    Ok(p_c_in_v(lambda_d, u1, lambda_g, radio) * (k0 - k_change) as f64 / k0 as f64)
}

/// Relay success `min(1, u2 / (k_c p_c))`; one when nothing competes.
pub fn relay_success(u2: u32, k_c: u64, p_c: f64) -> f64 {
    let load = k_c as f64 * p_c;
    if load <= 0.0 {
        return 1.0;
    }
    (f64::from(u2) / load).min(1.0)
}

/// Parameters of one analytic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticPoint {
    pub radio: RadioParams,
    pub plan: SpectrumPlan,
    pub lambda_d: f64,
    pub lambda_g: f64,
    /// Side of the region whose relay spectrum is shared; `gamma_0 = S_0 / L^2`.
    pub window: f64,
    pub samples: usize,
    pub seed: u64,
}

impl AnalyticPoint {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_d", self.lambda_d), ("lambda_g", self.lambda_g), ("window", self.window)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::param(name, format!("{v} must be positive and finite")));
            }
        }
        if self.samples == 0 {
            return Err(ModelError::param("samples", "at least one geometry sample is required"));
        }
        Ok(())
    }
}

/// One sampled geometry: pair distance, both cell areas and both group sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub pair_distance: f64,
    pub area0: f64,
    pub area_i: f64,
    pub k0: u64,
    pub k_i: u64,
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
    }
}

/// Draws the geometry for sample `index` from its own substream.
pub fn sample_geometry(point: &AnalyticPoint, index: u64) -> GeometrySample {
    let mut rng = StreamKey::new(point.seed, index, Purpose::Analytic).rng();
    let e: f64 = Exp1.sample(&mut rng);
    let pair_distance = (e / (PI * point.lambda_g)).sqrt();
    let cells = Gamma::new(VORONOI_AREA_SHAPE, 1.0 / (VORONOI_AREA_SHAPE * point.lambda_g))
        .expect("positive shape and scale");
    let area0 = cells.sample(&mut rng);
    let area_i = cells.sample(&mut rng);
    let k0 = poisson(point.lambda_d * area0, &mut rng);
    let k_i = poisson(point.lambda_d * area_i, &mut rng);
    GeometrySample {
        pair_distance,
        area0,
        area_i,
        k0,
        k_i,
    }
}

/// Event-path probabilities for one geometry sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PathProbabilities {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub prob_a1: f64,
    pub k_change: u64,
    pub relay_budget: u32,
}

impl PathProbabilities {
    pub fn total(&self) -> f64 {
        self.p1 + self.p2 + self.p3
    }
}

/// Evaluates `p1`, `p2`, `p3` on a fixed geometry.
pub fn path_probabilities(point: &AnalyticPoint, geo: &GeometrySample, policy: Policy) -> PathProbabilities {
    let u1 = point.plan.u1();
    let radio = &point.radio;
    let gamma0 = (geo.area0 / (point.window * point.window)).min(1.0);
    let u2 = relay_budget(gamma0, &point.plan).expect("share clamped to [0, 1]");
    let pv = p_c_in_v(point.lambda_d, u1, point.lambda_g, radio);
    let prob_a1 = prob_transfer_in(point.lambda_d, geo.area_i, geo.k0);

    if policy == Policy::Npra {
        return PathProbabilities {
            p1: relay_success(u2, geo.k0, pv) * pv,
            prob_a1,
            relay_budget: u2,
            ..Default::default()
        };
    }

    let kc = k_change(geo.k_i as usize, geo.k0 as usize) as u64;
    let pair_total = geo.k0 + geo.k_i;
    let mut out = PathProbabilities {
        prob_a1,
        k_change: kc,
        relay_budget: u2,
        ..Default::default()
    };
    if geo.k_i >= geo.k0 {
        // receiving side
        let grown = geo.k0 + kc;
        out.p1 = relay_success(u2, grown, pv) * pv;
        if kc > 0 {
            let pt = p_c_in_t(point.lambda_d, u1, point.lambda_g, radio, geo.pair_distance);
            out.p2 = relay_success(u2, grown, pt) * pt * kc as f64 / pair_total as f64;
        }
    } else {
        // donating side; k0 > k_i >= 0 so k0 >= 1
        let kept = geo.k0 - kc;
        let pout = p_c_out(point.lambda_d, u1, point.lambda_g, radio, geo.k0, kc)
            .expect("donor group is non-empty");
        out.p3 = relay_success(u2, kept, pout) * pout * kept as f64 / pair_total as f64;
    }
    out
}

/// Mean event-path probabilities over the sampled geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathMeans {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// Mean of the clamped per-sample success `clamp(p1 + p2 + p3, 0, 1)`.
    pub success: f64,
    pub clamp_events: usize,
    pub mean_prob_a1: f64,
    pub mean_k_change: f64,
    pub samples: usize,
}

/// Averages the event paths over `point.samples` geometry draws.
///
/// Per-sample values are collected in sample order before summation, so the
/// result does not depend on the rayon worker count.
pub fn end_to_end_success(point: &AnalyticPoint, policy: Policy) -> Result<PathMeans> {
    point.validate()?;
    let per_sample: Vec<PathProbabilities> = (0..point.samples as u64)
        .into_par_iter()
        .map(|i| path_probabilities(point, &sample_geometry(point, i), policy))
        .collect();

    let n = per_sample.len() as f64;
    let mut acc = PathMeans {
        p1: 0.0,
        p2: 0.0,
        p3: 0.0,
        success: 0.0,
        clamp_events: 0,
        mean_prob_a1: 0.0,
        mean_k_change: 0.0,
        samples: per_sample.len(),
    };
    for p in &per_sample {
        acc.p1 += p.p1;
        acc.p2 += p.p2;
        acc.p3 += p.p3;
        let total = p.total();
        let clamped = total.clamp(0.0, 1.0);
        if clamped != total {
            acc.clamp_events += 1;
        }
        acc.success += clamped;
        acc.mean_prob_a1 += p.prob_a1;
        acc.mean_k_change += p.k_change as f64;
    }
    acc.p1 /= n;
    acc.p2 /= n;
    acc.p3 /= n;
    acc.success /= n;
    acc.mean_prob_a1 /= n;
    acc.mean_k_change /= n;
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticResult {
    pub policy: Policy,
    pub epsilon: f64,
    /// `lambda_d * (1 - epsilon)`.
    pub capacity: f64,
    pub paths: PathMeans,
}

/// End-to-end outage and transmission capacity.
pub fn outage(point: &AnalyticPoint, policy: Policy) -> Result<AnalyticResult> {
    let paths = end_to_end_success(point, policy)?;
    let epsilon = 1.0 - paths.success;
    Ok(AnalyticResult {
        policy,
        epsilon,
        capacity: point.lambda_d * (1.0 - epsilon),
        paths,
    })
}

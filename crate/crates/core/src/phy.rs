//! Physical layer of one snapshot.
//!
//! Every device sends one packet on a uniformly chosen channel. Links carry
//! i.i.d. unit-mean exponential power fades and `r^-alpha` path loss. A packet
//! is captured when its SIR at the serving gateway exceeds the threshold,
//! with interference summed over every co-channel device in the network.
//! Each gateway then forwards at most `U2` captured packets, chosen uniformly.

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::domain::RadioParams;
use crate::geometry::{torus_distance_sq, Grouping, NetworkSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChannelAssignment {
    pub channel: Vec<u32>,
    pub u1: u32,
}

impl ChannelAssignment {
    /// Device indices per channel, ascending within each channel.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.u1 as usize];
        for (d, &c) in self.channel.iter().enumerate() {
            out[c as usize].push(d);
        }
        out
    }
}

/// Draws an independent uniform channel in `[0, u1)` for each device.
pub fn assign_channels<R: Rng + ?Sized>(n_devices: usize, u1: u32, rng: &mut R) -> ChannelAssignment {
    assert!(u1 >= 1, "at least one channel is required");
    let channel = (0..n_devices).map(|_| rng.random_range(0..u1)).collect();
    ChannelAssignment { channel, u1 }
}

/// Power fade on the link from a device to a gateway.
pub trait FadeSource {
    fn fade(&self, device: usize, gateway: usize) -> f64;
}

/// Rayleigh fades derived from a per-trial key.
///
/// The fade of link `(device, gateway)` is a fixed function of the key and
/// the two indices, so every link has exactly one draw regardless of the
/// order in which links are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkFades {
    key: u64,
}

impl LinkFades {
    pub fn from_rng<R: Rng + ?Sized>(rng: &mut R) -> Self {
        LinkFades { key: rng.random() }
    }

    pub fn from_key(key: u64) -> Self {
        LinkFades { key }
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl FadeSource for LinkFades {
    #[inline]
    fn fade(&self, device: usize, gateway: usize) -> f64 {
        let h = mix64(self.key ^ (device as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let h = mix64(h ^ (gateway as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f).wrapping_add(0x1656_67b1_9e37_79f9));
        // uniform on (0, 1]
        let u = ((h >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        -u.ln()
    }
}

/// No fading: every link gain is one.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitFades;

impl FadeSource for UnitFades {
    fn fade(&self, _device: usize, _gateway: usize) -> f64 {
        1.0
    }
}

#[inline]
fn received_power<F: FadeSource + ?Sized>(
    snapshot: &NetworkSnapshot,
    fades: &F,
    device: usize,
    gateway: usize,
    half_alpha: f64,
) -> f64 {
    let d2 = torus_distance_sq(snapshot.devices[device], snapshot.gateways[gateway], snapshot.window);
    fades.fade(device, gateway) * d2.powf(-half_alpha)
}

fn sir_among<F: FadeSource + ?Sized>(
    device: usize,
    gateway: usize,
    co_channel: &[usize],
    snapshot: &NetworkSnapshot,
    fades: &F,
    alpha: f64,
) -> f64 {
    let half_alpha = alpha / 2.0;
    let signal = received_power(snapshot, fades, device, gateway, half_alpha);
    let interference: f64 = co_channel
        .iter()
        .filter(|&&j| j != device)
        .map(|&j| received_power(snapshot, fades, j, gateway, half_alpha))
        .sum();
    if interference == 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}

/// SIR of `device` at `gateway`, interfered by every other device on its channel.
pub fn sir<F: FadeSource + ?Sized>(
    device: usize,
    gateway: usize,
    assignment: &ChannelAssignment,
    snapshot: &NetworkSnapshot,
    fades: &F,
    alpha: f64,
) -> f64 {
    let ch = assignment.channel[device];
    let co_channel: Vec<usize> = (0..assignment.channel.len())
        .filter(|&j| assignment.channel[j] == ch)
        .collect();
    sir_among(device, gateway, &co_channel, snapshot, fades, alpha)
}

/// SIR of every device at its serving gateway.
pub fn serving_sirs<F: FadeSource + ?Sized>(
    grouping: &Grouping,
    assignment: &ChannelAssignment,
    snapshot: &NetworkSnapshot,
    fades: &F,
    alpha: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; snapshot.devices.len()];
    for members in assignment.members() {
        for &d in &members {
            out[d] = sir_among(d, grouping.owner[d], &members, snapshot, fades, alpha);
        }
    }
    out
}

/// Capture flags for a given fade realization.
pub fn resolve_captures_with<F: FadeSource + ?Sized>(
    grouping: &Grouping,
    assignment: &ChannelAssignment,
    snapshot: &NetworkSnapshot,
    radio: &RadioParams,
    fades: &F,
) -> Vec<bool> {
    serving_sirs(grouping, assignment, snapshot, fades, radio.alpha)
        .into_iter()
        .map(|s| s > radio.eta)
        .collect()
}

/// Draws fresh link fades from `rng` and resolves captures at serving gateways.
pub fn resolve_captures<R: Rng + ?Sized>(
    grouping: &Grouping,
    assignment: &ChannelAssignment,
    snapshot: &NetworkSnapshot,
    radio: &RadioParams,
    rng: &mut R,
) -> Vec<bool> {
    let fades = LinkFades::from_rng(rng);
    resolve_captures_with(grouping, assignment, snapshot, radio, &fades)
}

/// Uniform selection of at most `budgets[g]` captured packets per gateway.
///
/// `captured[g]` lists the captured device indices at gateway `g`.
pub fn relay_select<R: Rng + ?Sized>(
    captured: &[Vec<usize>],
    budgets: &[u32],
    n_devices: usize,
    rng: &mut R,
) -> Vec<bool> {
    assert_eq!(captured.len(), budgets.len());
    let mut relayed = vec![false; n_devices];
    for (list, &budget) in captured.iter().zip(budgets) {
        let budget = budget as usize;
        if list.len() <= budget {
            for &d in list {
                relayed[d] = true;
            }
        } else {
            for i in index::sample(rng, list.len(), budget) {
                relayed[list[i]] = true;
            }
        }
    }
    relayed
}

/// Per-gateway accounting for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GatewayTally {
    /// Devices served after regrouping.
    pub k: usize,
    pub captured: usize,
    pub budget: u32,
    pub relayed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialResult {
    pub n_devices: usize,
    pub n_captured: usize,
    pub n_relayed: usize,
    /// Captured and relayed, per device.
    pub success: Vec<bool>,
    pub per_gateway: Vec<GatewayTally>,
    /// Gateway draws discarded for having fewer than two points.
    pub resample_count: u32,
    /// Devices moved by the grouping policy.
    pub transferred: usize,
}

impl TrialResult {
    /// Assembles the tallies from capture and relay flags.
    pub fn from_flags(
        grouping: &Grouping,
        captured: &[bool],
        relayed: &[bool],
        budgets: &[u32],
        resample_count: u32,
        transferred: usize,
    ) -> Self {
        let g = grouping.gateway_count();
        let mut per_gateway: Vec<GatewayTally> = (0..g)
            .map(|i| GatewayTally {
                k: grouping.counts[i],
                captured: 0,
                budget: budgets[i],
                relayed: 0,
            })
            .collect();
        let mut success = vec![false; captured.len()];
        for (d, &owner) in grouping.owner.iter().enumerate() {
            if captured[d] {
                per_gateway[owner].captured += 1;
            }
            if relayed[d] {
                per_gateway[owner].relayed += 1;
            }
            success[d] = captured[d] && relayed[d];
        }
        TrialResult {
            n_devices: captured.len(),
            n_captured: captured.iter().filter(|&&c| c).count(),
            n_relayed: success.iter().filter(|&&s| s).count(),
            success,
            per_gateway,
            resample_count,
            transferred,
        }
    }

    /// `1 - relayed/devices`; `None` when the trial has no devices.
    pub fn outage(&self) -> Option<f64> {
        if self.n_devices == 0 {
            None
        } else {
            Some(1.0 - self.n_relayed as f64 / self.n_devices as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SpectrumPlan;
    use crate::geometry::{assign_nearest, sample_ppp, Point};
    use crate::rng::{stream, Purpose};

    fn snapshot(seed: u64, lambda_d: f64, window: f64) -> NetworkSnapshot {
        let mut rng = stream(seed, 0, Purpose::Auxiliary);
        let devices = sample_ppp(lambda_d, window, &mut rng);
        let mut gateways = sample_ppp(1e-4, window, &mut rng);
        while gateways.len() < 2 {
            gateways = sample_ppp(1e-4, window, &mut rng);
        }
        NetworkSnapshot::new(devices, gateways, window).unwrap()
    }

    #[test]
    fn single_channel_puts_everyone_on_zero() {
        let a = assign_channels(50, 1, &mut stream(1, 0, Purpose::Channels));
        assert!(a.channel.iter().all(|&c| c == 0));
    }

    #[test]
    fn channel_assignment_is_deterministic() {
        let a = assign_channels(500, 60, &mut stream(9, 3, Purpose::Channels));
        let b = assign_channels(500, 60, &mut stream(9, 3, Purpose::Channels));
        assert_eq!(a, b);
    }

    #[test]
    fn channel_counts_follow_multinomial_moments() {
        // 6000 devices on 60 channels, 100 trials: per-channel mean 100,
        // aggregated mean within 4 sigma of the multinomial variance
        let trials = 100;
        let mut counts = vec![0usize; 60];
        for t in 0..trials {
            let a = assign_channels(6000, 60, &mut stream(11, t, Purpose::Channels));
            for c in a.channel {
                counts[c as usize] += 1;
            }
        }
        let sigma = (100.0 * (1.0 - 1.0 / 60.0) / trials as f64).sqrt();
        for c in counts {
            let mean = c as f64 / trials as f64;
            assert!((mean - 100.0).abs() < 4.0 * sigma, "mean {mean}");
        }
    }

    #[test]
    fn fades_have_unit_mean() {
        let fades = LinkFades::from_rng(&mut stream(3, 0, Purpose::Fades));
        let n = 200_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for i in 0..n {
            let h = fades.fade(i % 997, i / 997);
            sum += h;
            sq += h * h;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
        assert_eq!(fades.fade(5, 7), fades.fade(5, 7));
        assert_ne!(fades.fade(5, 7), fades.fade(7, 5));
    }

    fn fixed_pair_snapshot() -> (NetworkSnapshot, Grouping) {
        // two devices equidistant from gateway 0
        let gws = vec![Point::new(500.0, 500.0), Point::new(100.0, 100.0)];
        let devices = vec![Point::new(520.0, 500.0), Point::new(480.0, 500.0)];
        let snap = NetworkSnapshot::new(devices, gws, 1000.0).unwrap();
        let grouping = assign_nearest(&snap, 64).unwrap();
        (snap, grouping)
    }

    #[test]
    fn lone_transmitter_has_infinite_sir() {
        let (snap, _) = fixed_pair_snapshot();
        let assignment = ChannelAssignment { channel: vec![0, 1], u1: 2 };
        assert_eq!(sir(0, 0, &assignment, &snap, &UnitFades, 5.0), f64::INFINITY);
    }

    #[test]
    fn symmetric_interferers_give_unit_sir() {
        let (snap, _) = fixed_pair_snapshot();
        let assignment = ChannelAssignment { channel: vec![0, 0], u1: 1 };
        assert!((sir(0, 0, &assignment, &snap, &UnitFades, 5.0) - 1.0).abs() < 1e-12);
        assert!((sir(1, 0, &assignment, &snap, &UnitFades, 5.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_threshold_captures_everything() {
        let snap = snapshot(4, 2e-3, 500.0);
        let grouping = assign_nearest(&snap, 64).unwrap();
        let assignment = assign_channels(snap.devices.len(), 10, &mut stream(4, 0, Purpose::Channels));
        let radio = RadioParams::new(-300.0, 5.0).unwrap();
        let captured = resolve_captures(&grouping, &assignment, &snap, &radio, &mut stream(4, 0, Purpose::Fades));
        assert!(captured.iter().all(|&c| c));
    }

    #[test]
    fn at_most_one_capture_per_channel_when_threshold_above_one() {
        let snap = snapshot(8, 3e-3, 500.0);
        let grouping = assign_nearest(&snap, 64).unwrap();
        let plan = SpectrumPlan::default();
        let assignment = assign_channels(snap.devices.len(), plan.u1(), &mut stream(8, 0, Purpose::Channels));
        let radio = RadioParams::new(0.5, 5.0).unwrap();
        assert!(radio.eta >= 1.0);
        let captured = resolve_captures(&grouping, &assignment, &snap, &radio, &mut stream(8, 0, Purpose::Fades));
        let mut seen = std::collections::HashSet::new();
        for (d, &c) in captured.iter().enumerate() {
            if c {
                assert!(seen.insert((grouping.owner[d], assignment.channel[d])));
            }
        }
    }

    #[test]
    fn captures_non_increasing_in_threshold() {
        let snap = snapshot(12, 2e-3, 500.0);
        let grouping = assign_nearest(&snap, 64).unwrap();
        let assignment = assign_channels(snap.devices.len(), 60, &mut stream(12, 0, Purpose::Channels));
        let fades = LinkFades::from_rng(&mut stream(12, 0, Purpose::Fades));
        let mut last = usize::MAX;
        for eta_db in [-10.0, -3.0, 0.0, 1.0, 3.0, 6.0, 10.0, 20.0] {
            let radio = RadioParams::new(eta_db, 5.0).unwrap();
            let n = resolve_captures_with(&grouping, &assignment, &snap, &radio, &fades)
                .iter()
                .filter(|&&c| c)
                .count();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn serving_sirs_agree_with_pointwise_sir() {
        let snap = snapshot(21, 1e-3, 500.0);
        let grouping = assign_nearest(&snap, 64).unwrap();
        let assignment = assign_channels(snap.devices.len(), 20, &mut stream(21, 0, Purpose::Channels));
        let fades = LinkFades::from_key(77);
        let all = serving_sirs(&grouping, &assignment, &snap, &fades, 5.0);
        for d in 0..snap.devices.len() {
            assert_eq!(all[d], sir(d, grouping.owner[d], &assignment, &snap, &fades, 5.0));
        }
    }

    #[test]
    fn relay_under_budget_and_zero_budget() {
        let captured = vec![vec![0, 1], vec![2, 3, 4]];
        let relayed = relay_select(&captured, &[3, 0], 5, &mut stream(1, 0, Purpose::Relay));
        assert_eq!(relayed, vec![true, true, false, false, false]);
    }

    #[test]
    fn relay_over_budget_is_uniform() {
        let captured = vec![vec![0, 1, 2, 3, 4]];
        let draws = 20_000;
        let mut hits = [0usize; 5];
        for t in 0..draws {
            let relayed = relay_select(&captured, &[3], 5, &mut stream(2, t, Purpose::Relay));
            assert_eq!(relayed.iter().filter(|&&r| r).count(), 3);
            for (d, &r) in relayed.iter().enumerate() {
                hits[d] += r as usize;
            }
        }
        // p = 3/5; 4-sigma band
        let sigma = (0.6f64 * 0.4 / draws as f64).sqrt();
        for h in hits {
            assert!((h as f64 / draws as f64 - 0.6).abs() < 4.0 * sigma);
        }
    }
}

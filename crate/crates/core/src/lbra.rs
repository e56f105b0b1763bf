//! Grouping policies.
//!
//! NPRA keeps the nearest-gateway grouping. LBRA then walks the matched
//! nearest-gateway pairs once, in ascending pair distance, and moves
//! `floor(|k_a - k_b| / 2)` devices from the larger group to the smaller one.
//! The devices that move are the donor's members closest to the receiving
//! gateway. Spectrum shares stay with the territory, so `gamma` is untouched.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::geometry::{nearest_gateway_pairs, torus_distance_sq, GatewayPair, Grouping, NetworkSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Nearest-gateway association only.
    Npra,
    /// Nearest association followed by pairwise load balancing.
    Lbra,
}

impl Policy {
    pub const ALL: [Policy; 2] = [Policy::Npra, Policy::Lbra];

    pub fn as_str(&self) -> &'static str {
        match self {
            Policy::Npra => "npra",
            Policy::Lbra => "lbra",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "npra" => Ok(Policy::Npra),
            "lbra" => Ok(Policy::Lbra),
            other => Err(format!("unknown policy `{other}` (expected npra or lbra)")),
        }
    }
}

/// Number of devices moved between two groups: `floor(|k_i - k_0| / 2)`.
pub fn k_change(k_i: usize, k_0: usize) -> usize {
    k_i.abs_diff(k_0) / 2
}

/// One donor->receiver transfer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Move {
    pub donor: usize,
    pub receiver: usize,
    pub k_change: usize,
    /// Moved device indices, nearest to the receiver first.
    pub devices: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TransferPlan {
    pub moves: Vec<Move>,
}

impl TransferPlan {
    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn devices_moved(&self) -> usize {
        self.moves.iter().map(|m| m.k_change).sum()
    }

    /// `donor,receiver,k_change` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "donor,receiver,k_change")?;
        for m in &self.moves {
            writeln!(out, "{},{},{}", m.donor, m.receiver, m.k_change)?;
        }
        Ok(())
    }
}

/// Balances one gateway pair in place. Returns `None` when the counts differ by
/// less than two.
pub fn balance_pair(grouping: &mut Grouping, snapshot: &NetworkSnapshot, pair: &GatewayPair) -> Option<Move> {
    let (ka, kb) = (grouping.counts[pair.a], grouping.counts[pair.b]);
    let moved = k_change(ka, kb);
    if moved == 0 {
        return None;
    }
    let (donor, receiver) = if ka > kb { (pair.a, pair.b) } else { (pair.b, pair.a) };
    let target = snapshot.gateways[receiver];

    let mut candidates: Vec<(f64, usize)> = grouping
        .members(donor)
        .into_iter()
        .map(|d| (torus_distance_sq(snapshot.devices[d], target, snapshot.window), d))
        .collect();
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let devices: Vec<usize> = candidates.into_iter().take(moved).map(|(_, d)| d).collect();
    for &d in &devices {
        grouping.reassign(d, receiver);
    }
    Some(Move {
        donor,
        receiver,
        k_change: moved,
        devices,
    })
}

/// Applies `policy` to a nearest-association grouping.
pub fn regroup(grouping: &Grouping, snapshot: &NetworkSnapshot, policy: Policy) -> (Grouping, TransferPlan) {
    let mut out = grouping.clone();
    let mut plan = TransferPlan::default();
    if policy == Policy::Lbra {
        for pair in nearest_gateway_pairs(snapshot) {
            if let Some(m) = balance_pair(&mut out, snapshot, &pair) {
                plan.moves.push(m);
            }
        }
    }
    (out, plan)
}

//! Point-process sampling and nearest-gateway geometry on a square torus.
//!
//! All distances wrap around both axes, which removes window edge effects.
//! Nearest-gateway ties are always resolved towards the lowest gateway index.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use std::io::{self, Write};

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Draws a Poisson number of i.i.d. uniform points on `[0, window)^2`.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, window: f64, rng: &mut R) -> Vec<Point> {
    let mean = density * window * window;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let n = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    (0..n)
        .map(|_| {
            let x = wrap(rng.random::<f64>() * window, window);
            let y = wrap(rng.random::<f64>() * window, window);
            Point { x, y }
        })
        .collect()
}

#[inline]
fn wrap(v: f64, window: f64) -> f64 {
    if v >= window {
        v - window
    } else {
        v
    }
}

#[inline]
fn axis_delta(a: f64, b: f64, window: f64) -> f64 {
    let d = (a - b).abs();
    d.min(window - d)
}

/// Squared torus distance.
#[inline]
pub fn torus_distance_sq(a: Point, b: Point, window: f64) -> f64 {
    let dx = axis_delta(a.x, b.x, window);
    let dy = axis_delta(a.y, b.y, window);
    dx * dx + dy * dy
}

/// Euclidean distance with per-axis wraparound; never exceeds `window / sqrt(2)`.
#[inline]
pub fn torus_distance(a: Point, b: Point, window: f64) -> f64 {
    torus_distance_sq(a, b, window).sqrt()
}

/// One realization of the device and gateway processes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSnapshot {
    pub devices: Vec<Point>,
    pub gateways: Vec<Point>,
    pub window: f64,
}

impl NetworkSnapshot {
    pub fn new(devices: Vec<Point>, gateways: Vec<Point>, window: f64) -> Result<Self> {
        if gateways.len() < 2 {
            return Err(ModelError::param(
                "gateways",
                format!("need at least 2 gateways, got {}", gateways.len()),
            ));
        }
        let in_window = |p: &Point| (0.0..window).contains(&p.x) && (0.0..window).contains(&p.y);
        if !devices.iter().chain(gateways.iter()).all(in_window) {
            return Err(ModelError::param("points", format!("coordinates must lie in [0, {window})")));
        }
        Ok(NetworkSnapshot {
            devices,
            gateways,
            window,
        })
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        torus_distance(a, b, self.window)
    }

    /// Writes the `kind,x,y` debugging dump.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "kind,x,y")?;
        for p in &self.devices {
            writeln!(out, "device,{},{}", p.x, p.y)?;
        }
        for p in &self.gateways {
            writeln!(out, "gateway,{},{}", p.x, p.y)?;
        }
        Ok(())
    }
}

/// Bucket grid over the gateways for nearest-gateway queries on the torus.
///
/// Results are identical to an exhaustive scan, including the lowest-index
/// tie-break.
#[derive(Debug, Clone)]
pub struct GatewayLocator<'a> {
    gateways: &'a [Point],
    window: f64,
    cells: usize,
    cell_width: f64,
    buckets: Vec<Vec<u32>>,
}

impl<'a> GatewayLocator<'a> {
    pub fn new(gateways: &'a [Point], window: f64) -> Self {
        let cells = ((gateways.len() as f64).sqrt().floor() as usize).max(1);
        let cell_width = window / cells as f64;
        let mut buckets = vec![Vec::new(); cells * cells];
        for (i, g) in gateways.iter().enumerate() {
            let (cx, cy) = Self::cell_of(*g, cell_width, cells);
            buckets[cy * cells + cx].push(i as u32);
        }
        GatewayLocator {
            gateways,
            window,
            cells,
            cell_width,
            buckets,
        }
    }

    fn cell_of(p: Point, width: f64, cells: usize) -> (usize, usize) {
        let cx = ((p.x / width) as usize).min(cells - 1);
        let cy = ((p.y / width) as usize).min(cells - 1);
        (cx, cy)
    }

    /// Index of the nearest gateway to `p`.
    pub fn nearest(&self, p: Point) -> usize {
        // (squared distance, index) compared lexicographically
        let mut best = (f64::INFINITY, usize::MAX);
        let consider = |i: u32, best: &mut (f64, usize)| {
            let i = i as usize;
            let d = torus_distance_sq(p, self.gateways[i], self.window);
            if d < best.0 || (d == best.0 && i < best.1) {
                *best = (d, i);
            }
        };

        let n = self.cells as isize;
        if n < 5 {
            for i in 0..self.gateways.len() {
                consider(i as u32, &mut best);
            }
            return best.1;
        }

        let (cx, cy) = Self::cell_of(p, self.cell_width, self.cells);
        let (cx, cy) = (cx as isize, cy as isize);
        let mut ring: isize = 0;
        loop {
            if 2 * ring + 1 > n {
                // rings now wrap onto themselves: everything has been seen
                break;
            }
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let bx = (cx + dx).rem_euclid(n) as usize;
                    let by = (cy + dy).rem_euclid(n) as usize;
                    for &i in &self.buckets[by * self.cells + bx] {
                        consider(i, &mut best);
                    }
                }
            }
            // anything outside rings 0..=ring is at least ring*width away
            let reach = ring as f64 * self.cell_width;
            if best.1 != usize::MAX && best.0 < reach * reach {
                return best.1;
            }
            ring += 1;
        }
        if 2 * ring + 1 > n {
            // finish with a full scan so wrapped rings cannot hide a tie
            best = (f64::INFINITY, usize::MAX);
            for i in 0..self.gateways.len() {
                consider(i as u32, &mut best);
            }
        }
        best.1
    }
}

/// Nearest gateway by exhaustive scan.
pub fn nearest_gateway_scan(gateways: &[Point], p: Point, window: f64) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, g) in gateways.iter().enumerate() {
        let d = torus_distance_sq(p, *g, window);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Grid estimate of each gateway's Voronoi cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellAreas {
    /// Grid-cell centres assigned to each gateway; sums to `resolution^2`.
    pub hits: Vec<u64>,
    pub resolution: usize,
    pub window: f64,
}

impl CellAreas {
    pub fn total_hits(&self) -> u64 {
        (self.resolution * self.resolution) as u64
    }

    pub fn area(&self, gateway: usize) -> f64 {
        let cell = self.window / self.resolution as f64;
        self.hits[gateway] as f64 * cell * cell
    }

    pub fn gamma(&self, gateway: usize) -> f64 {
        self.hits[gateway] as f64 / self.total_hits() as f64
    }
}

pub const MIN_RESOLUTION: usize = 64;

/// Assigns each of `resolution^2` grid-cell centres to its nearest gateway.
pub fn cell_areas(snapshot: &NetworkSnapshot, resolution: usize) -> Result<CellAreas> {
    if resolution < MIN_RESOLUTION {
        return Err(ModelError::param(
            "resolution",
            format!("{resolution} is below the minimum of {MIN_RESOLUTION}"),
        ));
    }
    let locator = GatewayLocator::new(&snapshot.gateways, snapshot.window);
    let step = snapshot.window / resolution as f64;
    let mut hits = vec![0u64; snapshot.gateways.len()];
    for iy in 0..resolution {
        let y = (iy as f64 + 0.5) * step;
        for ix in 0..resolution {
            let x = (ix as f64 + 0.5) * step;
            hits[locator.nearest(Point { x, y })] += 1;
        }
    }
    Ok(CellAreas {
        hits,
        resolution,
        window: snapshot.window,
    })
}

/// Device-to-gateway grouping with per-gateway load and spectrum share.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grouping {
    /// Serving gateway of each device.
    pub owner: Vec<usize>,
    /// Devices per gateway (`k_i`).
    pub counts: Vec<usize>,
    /// Spectrum-division coefficient `gamma_i`, proportional to cell area.
    pub gamma: Vec<f64>,
    /// Cell area `S_{Y_i}`.
    pub areas: Vec<f64>,
    /// Exact grid hits behind `gamma`, kept for integer relay budgets.
    pub hits: Vec<u64>,
    pub resolution: usize,
}

impl Grouping {
    pub fn gateway_count(&self) -> usize {
        self.counts.len()
    }

    /// Device indices served by `gateway`, ascending.
    pub fn members(&self, gateway: usize) -> Vec<usize> {
        self.owner
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == gateway)
            .map(|(d, _)| d)
            .collect()
    }

    /// Re-owns `device` to `gateway`, keeping the counts consistent.
    pub fn reassign(&mut self, device: usize, gateway: usize) {
        let old = self.owner[device];
        self.counts[old] -= 1;
        self.counts[gateway] += 1;
        self.owner[device] = gateway;
    }
}

/// Associates every device with its nearest gateway and attaches cell shares.
pub fn assign_nearest(snapshot: &NetworkSnapshot, resolution: usize) -> Result<Grouping> {
    if snapshot.gateways.len() < 2 {
        return Err(ModelError::param("gateways", "need at least 2 gateways"));
    }
    let cells = cell_areas(snapshot, resolution)?;
    let locator = GatewayLocator::new(&snapshot.gateways, snapshot.window);
    let owner: Vec<usize> = snapshot.devices.iter().map(|&d| locator.nearest(d)).collect();
    let mut counts = vec![0usize; snapshot.gateways.len()];
    for &g in &owner {
        counts[g] += 1;
    }
    let n = snapshot.gateways.len();
    Ok(Grouping {
        owner,
        counts,
        gamma: (0..n).map(|i| cells.gamma(i)).collect(),
        areas: (0..n).map(|i| cells.area(i)).collect(),
        hits: cells.hits,
        resolution,
    })
}

/// Unordered pair of gateways, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GatewayPair {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
}

/// Greedy matching of mutually-near gateways.
///
/// Each gateway proposes its nearest other gateway; the deduplicated
/// proposals are sorted by distance (then index) and accepted greedily so
/// that every gateway appears in at most one pair.
pub fn nearest_gateway_pairs(snapshot: &NetworkSnapshot) -> Vec<GatewayPair> {
    let gws = &snapshot.gateways;
    let g = gws.len();
    if g < 2 {
        return Vec::new();
    }
    let mut candidates: Vec<GatewayPair> = Vec::with_capacity(g);
    for i in 0..g {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in 0..g {
            if j == i {
                continue;
            }
            let d = torus_distance_sq(gws[i], gws[j], snapshot.window);
            if d < best.0 {
                best = (d, j);
            }
        }
        let (a, b) = if i < best.1 { (i, best.1) } else { (best.1, i) };
        candidates.push(GatewayPair {
            a,
            b,
            distance: best.0.sqrt(),
        });
    }
    candidates.sort_by(|p, q| {
        p.distance
            .total_cmp(&q.distance)
            .then(p.a.cmp(&q.a))
            .then(p.b.cmp(&q.b))
    });
    candidates.dedup_by(|p, q| p.a == q.a && p.b == q.b);

    let mut used = vec![false; g];
    candidates
        .into_iter()
        .filter(|p| {
            if used[p.a] || used[p.b] {
                return false;
            }
            used[p.a] = true;
            used[p.b] = true;
            true
        })
        .collect()
}

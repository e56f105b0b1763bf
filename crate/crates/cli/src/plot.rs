//! Static SVG chart of a sweep.

use std::fmt::Write as _;

use lbra_core::{Policy, SweepRow};

use crate::config::Metric;
use crate::error::CliError;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn color(policy: Policy) -> &'static str {
    match policy {
        Policy::Npra => "#1f77b4",
        Policy::Lbra => "#d62728",
    }
}

fn label(policy: Policy) -> &'static str {
    match policy {
        Policy::Npra => "NPRA",
        Policy::Lbra => "LBRA",
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let s = format!("{v:.2e}");
    let (mantissa, exp) = s.split_once('e').unwrap();
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    if exp == "0" {
        mantissa.to_string()
    } else {
        format!("{mantissa}e{exp}")
    }
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    from: f64,
    to: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        let t = if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        };
        self.from + t * (self.to - self.from)
    }
}

/// One point with its whisker, in data units.
struct Datum {
    x: f64,
    y: f64,
    lo: f64,
    hi: f64,
}

fn datum(r: &SweepRow, metric: Metric) -> Datum {
    let (y, half) = match metric {
        Metric::Outage => (r.epsilon, r.epsilon_ci),
        Metric::Capacity => (r.capacity, r.lambda_d * r.epsilon_ci),
    };
    let half = if half.is_finite() { half } else { 0.0 };
    let (lo, hi) = match metric {
        Metric::Outage => ((y - half).max(0.0), (y + half).min(1.0)),
        Metric::Capacity => ((y - half).max(0.0), y + half),
    };
    Datum { x: r.value, y, lo, hi }
}

/// Renders `rows` of a single sweep.
pub fn render_svg(rows: &[SweepRow], metric: Metric, log_y: bool) -> Result<String, CliError> {
    let first = rows.first().ok_or_else(|| CliError::Plot("no rows to plot".into()))?;
    if rows.iter().any(|r| r.axis != first.axis) {
        return Err(CliError::Plot("rows come from sweeps over different axes".into()));
    }

    let mut xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let (mut x_lo, mut x_hi) = (xs[0], xs[xs.len() - 1]);
    if x_hi == x_lo {
        let pad = if x_lo == 0.0 { 1.0 } else { 0.1 * x_lo.abs() };
        x_lo -= pad;
        x_hi += pad;
    }

    let data: Vec<(Policy, Datum)> = rows.iter().map(|r| (r.policy, datum(r, metric))).collect();
    let reference: Vec<(f64, f64)> = match metric {
        Metric::Capacity => rows.iter().map(|r| (r.value, r.no_outage_capacity)).collect(),
        Metric::Outage => xs.iter().map(|&x| (x, 0.0)).collect(),
    };

    let (y_lo, y_hi) = if log_y {
        let positive = data
            .iter()
            .flat_map(|(_, d)| [d.y, d.lo])
            .chain(reference.iter().map(|p| p.1))
            .filter(|v| *v > 0.0)
            .fold(f64::INFINITY, f64::min);
        if !positive.is_finite() {
            return Err(CliError::Plot("log scale needs at least one positive value".into()));
        }
        let top = data
            .iter()
            .map(|(_, d)| d.hi)
            .chain(reference.iter().map(|p| p.1))
            .fold(positive, f64::max);
        let mut hi = 10f64.powf(top.log10().ceil());
        if metric == Metric::Outage {
            hi = hi.min(1.0);
        }
        let lo = 10f64.powf(positive.log10().floor());
        (lo, if hi > lo { hi } else { lo * 10.0 })
    } else {
        match metric {
            Metric::Outage => (0.0, 1.0),
            Metric::Capacity => {
                let top = data
                    .iter()
                    .map(|(_, d)| d.hi)
                    .chain(reference.iter().map(|p| p.1))
                    .fold(0.0, f64::max);
                (0.0, if top > 0.0 { top * 1.05 } else { 1.0 })
            }
        }
    };

    let sx = Scale {
        lo: x_lo,
        hi: x_hi,
        log: false,
        from: LEFT,
        to: WIDTH - RIGHT,
    };
    let sy = Scale {
        lo: y_lo,
        hi: y_hi,
        log: log_y,
        from: HEIGHT - BOTTOM,
        to: TOP,
    };
    let visible = |v: f64| !log_y || v > 0.0;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();

    // axes
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    writeln!(svg, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#).unwrap();
    for &x in &xs {
        let px = sx.map(x);
        writeln!(svg, r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0).unwrap();
        writeln!(svg, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 20.0, tick(x)).unwrap();
    }
    let y_ticks: Vec<f64> = if log_y {
        let (a, b) = (y_lo.log10().round() as i32, y_hi.log10().round() as i32);
        (a..=b).map(|e| 10f64.powi(e)).collect()
    } else {
        (0..=5).map(|i| y_lo + (y_hi - y_lo) * i as f64 / 5.0).collect()
    };
    for y in y_ticks {
        let py = sy.map(y);
        writeln!(svg, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0).unwrap();
        writeln!(svg, r##"<line x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="#dddddd"/>"##).unwrap();
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, tick(y)).unwrap();
    }
    let x_title = match first.axis {
        lbra_core::Axis::LambdaD => "device density lambda_D",
        lbra_core::Axis::LambdaG => "gateway density lambda_G",
    };
    let y_title = match metric {
        Metric::Capacity => "transmission capacity",
        Metric::Outage => "outage probability",
    };
    writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_title}</text>"#, (x0 + x1) / 2.0, HEIGHT - 15.0).unwrap();
    writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{y_title}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();

    // no-outage reference
    let mut reference: Vec<(f64, f64)> = reference.into_iter().filter(|p| visible(p.1)).collect();
    reference.sort_by(|a, b| a.0.total_cmp(&b.0));
    reference.dedup_by(|a, b| a.0 == b.0);
    let mut legend: Vec<(&str, &str, bool)> = Vec::new();
    if !reference.is_empty() {
        let pts: Vec<String> = reference.iter().map(|(x, y)| format!("{:.2},{:.2}", sx.map(*x), sy.map(*y))).collect();
        writeln!(
            svg,
            r##"<polyline class="series" data-series="no-outage" points="{}" fill="none" stroke="#555555" stroke-dasharray="6 4"/>"##,
            pts.join(" ")
        )
        .unwrap();
        legend.push(("no outage", "#555555", true));
    }

    for policy in Policy::ALL {
        let mut pts: Vec<&Datum> = data.iter().filter(|(p, _)| *p == policy).map(|(_, d)| d).collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| a.x.total_cmp(&b.x));
        let c = color(policy);
        let line: Vec<String> = pts
            .iter()
            .filter(|d| visible(d.y))
            .map(|d| format!("{:.2},{:.2}", sx.map(d.x), sy.map(d.y)))
            .collect();
        writeln!(
            svg,
            r#"<polyline class="series" data-series="{}" points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            policy,
            line.join(" ")
        )
        .unwrap();
        for d in pts.iter().filter(|d| visible(d.y)) {
            let px = sx.map(d.x);
            if d.hi > d.lo {
                let lo = if visible(d.lo) { d.lo } else { y_lo };
                writeln!(
                    svg,
                    r#"<line class="ci" x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{c}"/>"#,
                    sy.map(lo),
                    sy.map(d.hi)
                )
                .unwrap();
            }
            writeln!(svg, r#"<circle cx="{px:.2}" cy="{:.2}" r="3.5" fill="{c}"/>"#, sy.map(d.y)).unwrap();
        }
        legend.push((label(policy), c, false));
    }

    for (i, (name, c, dashed)) in legend.iter().enumerate() {
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let dash = if *dashed { r#" stroke-dasharray="6 4""# } else { "" };
        writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"{dash}/>"#,
            lx + 25.0
        )
        .unwrap();
        writeln!(svg, r#"<text x="{}" y="{}">{name}</text>"#, lx + 32.0, ly + 4.0).unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

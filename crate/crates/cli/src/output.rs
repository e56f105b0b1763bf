//! Result CSV.
//!
//! The file opens with `# ` comment lines: the producing command, then the
//! resolved configuration as TOML. Feeding the file back as `--config`
//! reproduces it.

use std::fmt::Write as _;
use std::io::{self, Write};

use lbra_core::{Axis, Policy, SweepRow};

pub const CSV_HEADER: &str = "policy,axis,value,epsilon,epsilon_ci,capacity,no_outage_capacity,trials,seed";

const COMMAND_PREFIX: &str = "lbra ";

/// Decimal notation with nine significant digits.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    // round first so that the exponent reflects the printed value
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let exponent = rounded.abs().log10().floor() as i32;
    let decimals = (8 - exponent).max(0) as usize;
    format!("{rounded:.decimals$}")
}

/// Writes rows after the metadata block.
pub fn write_csv<W: Write>(mut out: W, command: &str, config_toml: &str, rows: &[SweepRow]) -> io::Result<()> {
    if rows.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no rows to write"));
    }
    let mut text = String::new();
    writeln!(text, "# {COMMAND_PREFIX}{command}").unwrap();
    for line in config_toml.lines() {
        if line.is_empty() {
            text.push_str("#\n");
        } else {
            writeln!(text, "# {line}").unwrap();
        }
    }
    writeln!(text, "{CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            r.policy,
            r.axis,
            sig9(r.value),
            sig9(r.epsilon),
            sig9(r.epsilon_ci),
            sig9(r.capacity),
            sig9(r.no_outage_capacity),
            r.trials,
            r.seed
        )
        .unwrap();
    }
    out.write_all(text.as_bytes())
}

/// One data row as read back.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub policy: Policy,
    pub axis: Axis,
    pub value: f64,
    pub epsilon: f64,
    pub epsilon_ci: f64,
    pub capacity: f64,
    pub no_outage_capacity: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub command: Option<String>,
    pub config: String,
    pub rows: Vec<CsvRow>,
}

fn field<T: std::str::FromStr>(s: &str, name: &str, line: usize) -> Result<T, String> {
    s.parse().map_err(|_| format!("line {line}: bad {name} `{s}`"))
}

pub fn parse_csv(text: &str) -> Result<CsvFile, String> {
    let mut command = None;
    let mut config = String::new();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if !header_seen {
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.strip_prefix(' ').unwrap_or(rest);
                match rest.strip_prefix(COMMAND_PREFIX) {
                    Some(cmd) if command.is_none() && config.is_empty() => command = Some(cmd.to_string()),
                    _ => {
                        config.push_str(rest);
                        config.push('\n');
                    }
                }
                continue;
            }
            if line != CSV_HEADER {
                return Err(format!("line {n}: expected header `{CSV_HEADER}`"));
            }
            header_seen = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(format!("line {n}: expected 9 fields, found {}", f.len()));
        }
        rows.push(CsvRow {
            policy: field(f[0], "policy", n)?,
            axis: field(f[1], "axis", n)?,
            value: field(f[2], "value", n)?,
            epsilon: field(f[3], "epsilon", n)?,
            epsilon_ci: field(f[4], "epsilon_ci", n)?,
            capacity: field(f[5], "capacity", n)?,
            no_outage_capacity: field(f[6], "no_outage_capacity", n)?,
            trials: field(f[7], "trials", n)?,
            seed: field(f[8], "seed", n)?,
        });
    }
    if !header_seen {
        return Err("missing header".into());
    }
    Ok(CsvFile { command, config, rows })
}

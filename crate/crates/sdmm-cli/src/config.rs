//! Flat key = value run configuration.
//!
//! One assignment per line, `#` lines and blank lines ignored. Every key
//! must belong to the schema, appear at most once, and apply to the scheme
//! and stability actually configured — a `rho` in a stable config is a typo,
//! not a default to silently ignore.

use sdmm_core::sim::{RatelessSpec, RedrawLaw, SchemeKind, Stability, SweepConfig};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub sweep: SweepConfig,
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "scheme",
    "k",
    "l",
    "t",
    "nu",
    "classes",
    "stability",
    "rho",
    "redraw",
    "redraw_choices",
    "redraw_lo",
    "redraw_hi",
    "ucb",
    "trials",
    "seed",
    "clusters",
    "eps",
    "gate_on_fastest",
    "estimation_counts_budget",
    "cluster_by_true_speed",
    "resync_on_deviation",
    "m_a",
    "m_b",
    "output",
];

/// Assignments plus a record of which keys the active scheme consulted, so
/// leftovers can be rejected at the end.
struct Assignments<'a> {
    kv: BTreeMap<&'a str, &'a str>,
    used: Vec<&'a str>,
}

impl<'a> Assignments<'a> {
    fn take(&mut self, key: &'static str) -> Option<&'a str> {
        self.used.push(key);
        self.kv.get(key).copied()
    }

    fn require(&mut self, key: &'static str) -> Result<&'a str, String> {
        self.take(key).ok_or_else(|| format!("missing required key {key:?}"))
    }

    fn unused(&self) -> Option<&&str> {
        self.kv.keys().find(|key| !self.used.contains(key))
    }
}

pub fn parse(text: &str) -> Result<RunSpec, String> {
    let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value, got {line:?}", idx + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(format!("line {}: unknown key {key:?}", idx + 1));
        }
        if value.is_empty() {
            return Err(format!("line {}: key {key:?} has no value", idx + 1));
        }
        if kv.insert(key, value).is_some() {
            return Err(format!("line {}: duplicate key {key:?}", idx + 1));
        }
    }
    let mut a = Assignments { kv, used: Vec::new() };

    let scheme_id = a.require("scheme")?;
    let k = parse_num::<usize>("k", a.require("k")?)?;
    let l = parse_num::<usize>("l", a.require("l")?)?;
    let t = parse_num::<usize>("t", a.require("t")?)?;
    let nu = parse_num::<f64>("nu", a.require("nu")?)?;
    let classes = parse_classes(a.require("classes")?)?;
    let ucbs = parse_list::<u64>("ucb", a.require("ucb")?)?;
    let trials = parse_num::<usize>("trials", a.require("trials")?)?;
    let seed = parse_num::<u64>("seed", a.require("seed")?)?;
    let output = a.take("output").map(PathBuf::from);

    let stability = match a.take("stability").unwrap_or("stable") {
        "stable" => Stability::Stable,
        "mostly-stable" => {
            let rho = parse_num::<f64>("rho", a.require("rho")?)?;
            if !(0.0..=1.0).contains(&rho) {
                return Err(format!("rho must lie in [0, 1], got {rho}"));
            }
            let law = match a.require("redraw")? {
                "choices" => match a.take("redraw_choices") {
                    Some(v) => RedrawLaw::Choices(parse_list::<f64>("redraw_choices", v)?),
                    // default: deviate into one of the configured class rates
                    None => RedrawLaw::Choices(classes.iter().map(|&(r, _)| r).collect()),
                },
                kind @ ("interval" | "log-interval" | "pair") => {
                    let lo = parse_num::<f64>("redraw_lo", a.require("redraw_lo")?)?;
                    let hi = parse_num::<f64>("redraw_hi", a.require("redraw_hi")?)?;
                    match kind {
                        "interval" => RedrawLaw::Interval(lo, hi),
                        "log-interval" => RedrawLaw::LogInterval(lo, hi),
                        _ => RedrawLaw::Pair(lo, hi),
                    }
                }
                other => return Err(format!("unknown redraw law {other:?}")),
            };
            Stability::MostlyStable { rho, law }
        }
        other => return Err(format!("unknown stability {other:?}")),
    };

    let scheme = match scheme_id {
        "sbp" => SchemeKind::Sbp,
        "mm-gasp" => SchemeKind::MmGasp,
        "rateless" => {
            let defaults = RatelessSpec::default();
            SchemeKind::Rateless(RatelessSpec {
                clusters: parse_num::<usize>("clusters", a.require("clusters")?)?,
                eps: match a.take("eps") {
                    Some(v) => parse_num::<f64>("eps", v)?,
                    None => defaults.eps,
                },
                gate_on_fastest: parse_bool_or("gate_on_fastest", a.take("gate_on_fastest"), defaults.gate_on_fastest)?,
                estimation_counts_budget: parse_bool_or(
                    "estimation_counts_budget",
                    a.take("estimation_counts_budget"),
                    defaults.estimation_counts_budget,
                )?,
                cluster_by_true_speed: parse_bool_or(
                    "cluster_by_true_speed",
                    a.take("cluster_by_true_speed"),
                    defaults.cluster_by_true_speed,
                )?,
                resync_on_deviation: parse_bool_or(
                    "resync_on_deviation",
                    a.take("resync_on_deviation"),
                    defaults.resync_on_deviation,
                )?,
            })
        }
        "naive" => SchemeKind::Naive {
            m_a: parse_num::<usize>("m_a", a.require("m_a")?)?,
            m_b: parse_num::<usize>("m_b", a.require("m_b")?)?,
        },
        other => return Err(format!("unknown scheme {other:?}")),
    };

    if let Some(key) = a.unused() {
        return Err(format!(
            "key {key:?} does not apply to scheme {scheme_id:?} with this stability"
        ));
    }

    Ok(RunSpec {
        sweep: SweepConfig {
            scheme,
            k,
            l,
            t,
            nu,
            classes,
            stability,
            ucbs,
            trials,
            seed,
        },
        output,
    })
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("key {key:?}: cannot parse {value:?}"))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, String> {
    value.split(',').map(|item| parse_num::<T>(key, item.trim())).collect()
}

/// `rate:count` pairs, comma separated.
fn parse_classes(value: &str) -> Result<Vec<(f64, usize)>, String> {
    value
        .split(',')
        .map(|item| {
            let (rate, count) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("classes: expected rate:count, got {item:?}"))?;
            Ok((
                parse_num::<f64>("classes", rate.trim())?,
                parse_num::<usize>("classes", count.trim())?,
            ))
        })
        .collect()
}

fn parse_bool_or(key: &str, value: Option<&str>, default: bool) -> Result<bool, String> {
    match value {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(other) => Err(format!("key {key:?}: expected true or false, got {other:?}")),
    }
}

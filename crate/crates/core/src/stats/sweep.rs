//! Cross-seed aggregation of one metric over several training arms.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// `seed -> arm -> metric value`.
pub type PerSeed = BTreeMap<u64, BTreeMap<String, f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmAggregate {
    pub mean: f64,
    /// Divisor-n standard deviation across seeds.
    pub sd_population: f64,
}

/// Per-seed `arm - baseline` differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDelta {
    pub arm: String,
    pub baseline: String,
    pub per_seed: BTreeMap<u64, f64>,
    pub paired_delta_mean: f64,
    pub sign_positive_count: usize,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSweep {
    pub baseline: String,
    pub per_seed: PerSeed,
    pub arms: BTreeMap<String, ArmAggregate>,
    pub deltas: Vec<PairedDelta>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sd_population(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Aggregates every arm and pairs each non-baseline arm with `baseline`.
pub fn cross_seed_aggregate(per_seed: &PerSeed, baseline: &str) -> Result<SeedSweep> {
    if per_seed.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "cross-seed aggregation needs at least 2 seeds, got {}",
            per_seed.len()
        )));
    }
    let arms: BTreeSet<&String> = per_seed.values().flat_map(|m| m.keys()).collect();
    if !arms.iter().any(|a| a.as_str() == baseline) {
        return Err(Error::Missing(format!(
            "baseline arm '{baseline}' not present in any seed"
        )));
    }
    let mut missing = Vec::new();
    for (seed, values) in per_seed {
        for arm in &arms {
            match values.get(*arm) {
                None => missing.push(format!("seed {seed} is missing arm '{arm}'")),
                Some(v) if !v.is_finite() => {
                    missing.push(format!("seed {seed} arm '{arm}' is not finite"))
                }
                Some(_) => {}
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Missing(missing.join("; ")));
    }

    let column = |arm: &str| -> Vec<f64> { per_seed.values().map(|m| m[arm]).collect() };
    let aggregates = arms
        .iter()
        .map(|a| {
            let xs = column(a);
            (
                (*a).clone(),
                ArmAggregate {
                    mean: mean(&xs),
                    sd_population: sd_population(&xs),
                },
            )
        })
        .collect();
    let deltas = arms
        .iter()
        .filter(|a| a.as_str() != baseline)
        .map(|a| {
            let d: BTreeMap<u64, f64> = per_seed
                .iter()
                .map(|(s, m)| (*s, m[a.as_str()] - m[baseline]))
                .collect();
            let values: Vec<f64> = d.values().copied().collect();
            PairedDelta {
                arm: (*a).clone(),
                baseline: baseline.to_string(),
                paired_delta_mean: mean(&values),
                sign_positive_count: values.iter().filter(|&&x| x > 0.0).count(),
                n_seeds: values.len(),
                per_seed: d,
            }
        })
        .collect();
    Ok(SeedSweep {
        baseline: baseline.to_string(),
        per_seed: per_seed.clone(),
        arms: aggregates,
        deltas,
    })
}

/// Metric keys tried, in order, when an arm entry is an object instead of a number.
pub const METRIC_KEYS: [&str; 4] = ["macro_auc_evaluable", "macro_auc", "auc", "value"];

fn parse_seed(key: &str) -> Option<u64> {
    let digits = key.trim_start_matches(|c: char| !c.is_ascii_digit());
    digits.parse().ok()
}

fn metric_of(v: &Value, metric: Option<&str>) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::Object(o) => match metric {
            Some(k) => o.get(k).and_then(Value::as_f64),
            None => METRIC_KEYS
                .iter()
                .find_map(|k| o.get(*k).and_then(Value::as_f64)),
        },
        _ => None,
    }
}

/// Reads a cross-seed summary document into `seed -> arm -> value`.
///
/// Accepted layouts:
/// * `{"seeds": {"41": {"rgb": 0.789, ...}, ...}}` (also under `per_seed`)
/// * `{"arms": {"rgb": {"41": 0.789, ...}, ...}}`
/// * `[{"seed": 41, "arm": "rgb", "macro_auc": 0.789}, ...]` (also under `records`)
///
/// Arm entries may be numbers or objects holding `metric` (or one of
/// [`METRIC_KEYS`]). Anything unrecognised is reported, never guessed.
pub fn parse_seed_summary(doc: &Value, metric: Option<&str>) -> Result<PerSeed> {
    let mut out = PerSeed::new();
    let mut issues = Vec::new();
    let mut put = |seed_key: &str, arm: &str, v: &Value, issues: &mut Vec<String>| {
        let Some(seed) = parse_seed(seed_key) else {
            issues.push(format!("cannot read a seed number from '{seed_key}'"));
            return;
        };
        match metric_of(v, metric) {
            Some(x) => {
                out.entry(seed).or_default().insert(arm.to_string(), x);
            }
            None => issues.push(format!("seed {seed} arm '{arm}': no numeric metric value")),
        }
    };

    let records = match doc {
        Value::Array(a) => Some(a),
        Value::Object(o) => o.get("records").and_then(Value::as_array),
        _ => None,
    };
    if let Some(records) = records {
        for (i, r) in records.iter().enumerate() {
            let seed = r.get("seed").map(|s| match s {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            });
            let arm = r.get("arm").and_then(Value::as_str);
            match (seed, arm) {
                (Some(s), Some(a)) => put(&s, a, r, &mut issues),
                _ => issues.push(format!("record {i}: needs 'seed' and 'arm'")),
            }
        }
    } else if let Some(seeds) = doc
        .get("seeds")
        .or_else(|| doc.get("per_seed"))
        .and_then(Value::as_object)
    {
        for (s, arms) in seeds {
            match arms.as_object() {
                Some(arms) => arms.iter().for_each(|(a, v)| put(s, a, v, &mut issues)),
                None => issues.push(format!("seed '{s}': expected an object of arms")),
            }
        }
    } else if let Some(arms) = doc.get("arms").and_then(Value::as_object) {
        for (a, seeds) in arms {
            match seeds.as_object() {
                Some(seeds) => seeds.iter().for_each(|(s, v)| put(s, a, v, &mut issues)),
                None => issues.push(format!("arm '{a}': expected an object of seeds")),
            }
        }
    } else {
        issues.push("no 'seeds', 'per_seed', 'arms' or 'records' entry found".into());
    }
    if !issues.is_empty() {
        return Err(Error::validation("seed summary", issues));
    }
    Ok(out)
}

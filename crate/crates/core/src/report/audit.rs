//! Best-checkpoint vs last-checkpoint comparison across training arms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    csv_text, ensure_dir, fmt6, fmt6_signed, json_doc, md_table, write_file, OutputFormat,
    Provenance,
};
use crate::error::{Error, Result};

pub const AUDIT_METRICS: [&str; 4] = [
    "accuracy",
    "weighted_f1",
    "macro_f1_evaluable",
    "macro_auc_evaluable",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointTag {
    Best,
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub arm: String,
    pub tag: CheckpointTag,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Improving,
    Regressing,
    Unchanged,
}

impl Direction {
    fn of(delta: f64) -> Self {
        if delta > 0.0 {
            Direction::Improving
        } else if delta < 0.0 {
            Direction::Regressing
        } else {
            Direction::Unchanged
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Direction::Improving => "↑",
            Direction::Regressing => "↓",
            Direction::Unchanged => "=",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Improving => "improving",
            Direction::Regressing => "regressing",
            Direction::Unchanged => "unchanged",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub arm: String,
    pub metric: String,
    pub best: f64,
    pub last: f64,
    /// `last - best`.
    pub delta: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditMetricSummary {
    pub arms: usize,
    pub last_better: usize,
    pub best_better: usize,
    pub unchanged: usize,
    /// `last` when it wins on more than half of the arms, else `best`.
    pub recommended: CheckpointTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditTable {
    /// Arms in first-seen order.
    pub arms: Vec<String>,
    pub rows: Vec<AuditRow>,
    pub summary: BTreeMap<String, AuditMetricSummary>,
    pub recommendation: String,
}

/// Pairs best/last entries per arm and tabulates `last - best` per metric.
pub fn audit_best_vs_last(entries: &[AuditEntry]) -> Result<AuditTable> {
    let mut arms: Vec<String> = Vec::new();
    let mut pairs: BTreeMap<&str, (Option<&AuditEntry>, Option<&AuditEntry>)> = BTreeMap::new();
    let mut issues = Vec::new();
    for e in entries {
        if !arms.contains(&e.arm) {
            arms.push(e.arm.clone());
        }
        let slot = pairs.entry(e.arm.as_str()).or_default();
        let target = match e.tag {
            CheckpointTag::Best => &mut slot.0,
            CheckpointTag::Last => &mut slot.1,
        };
        if target.replace(e).is_some() {
            issues.push(format!("arm '{}' has two {:?} entries", e.arm, e.tag));
        }
    }
    let mut rows = Vec::new();
    for arm in &arms {
        let (best, last) = match pairs[arm.as_str()] {
            (Some(b), Some(l)) => (b, l),
            (None, _) => {
                issues.push(format!("arm '{arm}' has no best checkpoint entry"));
                continue;
            }
            (_, None) => {
                issues.push(format!("arm '{arm}' has no last checkpoint entry"));
                continue;
            }
        };
        for metric in AUDIT_METRICS {
            match (best.metrics.get(metric), last.metrics.get(metric)) {
                (Some(&b), Some(&l)) => {
                    let delta = l - b;
                    rows.push(AuditRow {
                        arm: arm.clone(),
                        metric: metric.into(),
                        best: b,
                        last: l,
                        delta,
                        direction: Direction::of(delta),
                    });
                }
                _ => issues.push(format!("arm '{arm}' lacks '{metric}' for one checkpoint")),
            }
        }
    }
    if arms.is_empty() {
        issues.push("no audit entries".into());
    }
    if !issues.is_empty() {
        return Err(Error::validation("audit", issues));
    }

    let mut summary = BTreeMap::new();
    for metric in AUDIT_METRICS {
        let of: Vec<&AuditRow> = rows.iter().filter(|r| r.metric == metric).collect();
        let count = |d: Direction| of.iter().filter(|r| r.direction == d).count();
        let last_better = count(Direction::Improving);
        summary.insert(
            metric.to_string(),
            AuditMetricSummary {
                arms: of.len(),
                last_better,
                best_better: count(Direction::Regressing),
                unchanged: count(Direction::Unchanged),
                recommended: if 2 * last_better > of.len() {
                    CheckpointTag::Last
                } else {
                    CheckpointTag::Best
                },
            },
        );
    }
    let pick = |tag: CheckpointTag| -> Vec<&str> {
        AUDIT_METRICS
            .iter()
            .copied()
            .filter(|m| summary[*m].recommended == tag)
            .collect()
    };
    let (on_last, on_best) = (pick(CheckpointTag::Last), pick(CheckpointTag::Best));
    let mut parts = Vec::new();
    if !on_best.is_empty() {
        parts.push(format!(
            "{} headline uses the best checkpoint",
            on_best.join(" / ")
        ));
    }
    if !on_last.is_empty() {
        parts.push(format!(
            "{} headline uses the last checkpoint",
            on_last.join(" / ")
        ));
    }
    let recommendation = format!("Headline metric per checkpoint: {}.", parts.join("; "));
    Ok(AuditTable {
        arms,
        rows,
        summary,
        recommendation,
    })
}

fn metrics_from(v: &Value) -> BTreeMap<String, f64> {
    let report = v
        .pointer("/eval/report")
        .or_else(|| v.get("report"))
        .or_else(|| v.get("metrics"))
        .unwrap_or(v);
    AUDIT_METRICS
        .iter()
        .filter_map(|m| {
            report
                .get(*m)
                .and_then(Value::as_f64)
                .map(|x| (m.to_string(), x))
        })
        .collect()
}

/// Reads one checkpoint's per-arm metrics.
///
/// Accepts `{"arms": {arm: metrics}}`, a bare `{arm: metrics}` object, or a
/// list of `{"arm": .., "metrics": {..}}`. Metric objects may also be full
/// eval reports. List order is preserved; object layouts are sorted by arm.
pub fn parse_audit_file(doc: &Value, tag: CheckpointTag) -> Result<Vec<AuditEntry>> {
    let mut out = Vec::new();
    let mut issues = Vec::new();
    let arms = doc.get("arms").unwrap_or(doc);
    match arms {
        Value::Array(list) => {
            for (i, item) in list.iter().enumerate() {
                match item.get("arm").and_then(Value::as_str) {
                    Some(arm) => out.push(AuditEntry {
                        arm: arm.into(),
                        tag,
                        metrics: metrics_from(item),
                    }),
                    None => issues.push(format!("entry {i}: missing 'arm'")),
                }
            }
        }
        Value::Object(map) => {
            for (arm, m) in map {
                if m.is_object() {
                    out.push(AuditEntry {
                        arm: arm.clone(),
                        tag,
                        metrics: metrics_from(m),
                    });
                } else {
                    issues.push(format!("arm '{arm}': expected an object of metrics"));
                }
            }
        }
        _ => issues.push("expected an object or list of arms".into()),
    }
    if !issues.is_empty() {
        return Err(Error::validation(
            format!("{tag:?} checkpoint file"),
            issues,
        ));
    }
    Ok(out)
}

pub fn write_audit_outputs(
    table: &AuditTable,
    prov: &Provenance,
    out: &Path,
    formats: &BTreeSet<OutputFormat>,
) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let mut written = Vec::new();
    if formats.contains(&OutputFormat::Json) {
        written.push(write_file(
            out,
            "best_vs_last.json",
            json_doc(prov, "audit", table)?,
        )?);
    }
    if formats.contains(&OutputFormat::Csv) {
        let rows: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.arm.clone(),
                    r.metric.clone(),
                    fmt6(r.best),
                    fmt6(r.last),
                    fmt6_signed(r.delta),
                    r.direction.to_string(),
                ]
            })
            .collect();
        written.push(write_file(
            out,
            "best_vs_last.csv",
            csv_text(
                prov,
                &["arm", "metric", "best", "last", "delta", "direction"],
                &rows,
            )?,
        )?);
    }
    if formats.contains(&OutputFormat::Md) {
        let mut md =
            String::from("# Best vs last checkpoint\n\nCells are best -> last (delta).\n\n");
        let rows: Vec<Vec<String>> = table
            .arms
            .iter()
            .map(|arm| {
                std::iter::once(arm.clone())
                    .chain(AUDIT_METRICS.iter().map(|m| {
                        let r = table
                            .rows
                            .iter()
                            .find(|r| &r.arm == arm && r.metric == *m)
                            .expect("complete table");
                        format!(
                            "{} -> {} ({} {})",
                            fmt6(r.best),
                            fmt6(r.last),
                            fmt6_signed(r.delta),
                            r.direction.arrow()
                        )
                    }))
                    .collect()
            })
            .collect();
        let mut header = vec!["Arm"];
        header.extend(AUDIT_METRICS);
        md += &md_table(&header, &rows);
        md += "\n## Summary\n\n";
        for m in AUDIT_METRICS {
            let s = &table.summary[m];
            md += &format!(
                "- {m}: last better on {}/{} arms, best better on {}, unchanged on {}\n",
                s.last_better, s.arms, s.best_better, s.unchanged
            );
        }
        md += &format!("\n{}\n", table.recommendation);
        md += &prov.markdown_footer();
        written.push(write_file(out, "best_vs_last.md", md)?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(arm: &str, tag: CheckpointTag, vals: [f64; 4]) -> AuditEntry {
        AuditEntry {
            arm: arm.into(),
            tag,
            metrics: AUDIT_METRICS
                .iter()
                .map(|m| m.to_string())
                .zip(vals)
                .collect(),
        }
    }

    #[test]
    fn identical_checkpoints_give_zero_deltas() {
        let v = [0.5, 0.4, 0.3, 0.7];
        let t = audit_best_vs_last(&[
            entry("a", CheckpointTag::Best, v),
            entry("a", CheckpointTag::Last, v),
        ])
        .unwrap();
        assert!(t
            .rows
            .iter()
            .all(|r| r.delta == 0.0 && r.direction == Direction::Unchanged));
        assert!(t
            .summary
            .values()
            .all(|s| s.recommended == CheckpointTag::Best));
    }

    #[test]
    fn unpaired_arm_is_an_error() {
        let v = [0.5; 4];
        let err = audit_best_vs_last(&[
            entry("a", CheckpointTag::Best, v),
            entry("b", CheckpointTag::Last, v),
        ])
        .unwrap_err()
        .to_string();
        assert!(
            err.contains("'a' has no last") && err.contains("'b' has no best"),
            "{err}"
        );
    }

    #[test]
    fn majority_rule_picks_checkpoint() {
        let t = audit_best_vs_last(&[
            entry("a", CheckpointTag::Best, [0.5, 0.5, 0.5, 0.8]),
            entry("a", CheckpointTag::Last, [0.6, 0.6, 0.6, 0.7]),
            entry("b", CheckpointTag::Best, [0.5, 0.5, 0.5, 0.8]),
            entry("b", CheckpointTag::Last, [0.6, 0.4, 0.6, 0.9]),
        ])
        .unwrap();
        assert_eq!(t.summary["accuracy"].recommended, CheckpointTag::Last);
        assert_eq!(t.summary["weighted_f1"].recommended, CheckpointTag::Best);
        assert_eq!(t.summary["macro_auc_evaluable"].last_better, 1);
        assert!(t
            .recommendation
            .contains("accuracy / macro_f1_evaluable headline uses the last checkpoint"));
    }

    #[test]
    fn file_layouts() {
        let obj = serde_json::json!({"arms": {"rgb": {"accuracy": 0.5, "weighted_f1": 0.4, "macro_f1_evaluable": 0.2, "macro_auc_evaluable": 0.7}}});
        let list = serde_json::json!([{"arm": "rgb", "metrics": {"accuracy": 0.5, "weighted_f1": 0.4, "macro_f1_evaluable": 0.2, "macro_auc_evaluable": 0.7}}]);
        let a = parse_audit_file(&obj, CheckpointTag::Best).unwrap();
        assert_eq!(a, parse_audit_file(&list, CheckpointTag::Best).unwrap());
        assert_eq!(a[0].metrics.len(), 4);
        assert!(
            parse_audit_file(&serde_json::json!([{"metrics": {}}]), CheckpointTag::Last).is_err()
        );
    }
}

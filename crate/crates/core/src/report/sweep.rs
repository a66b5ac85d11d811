//! Reading per-seed reports from a directory and rendering the cross-seed table.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::{
    csv_text, ensure_dir, fmt6, fmt6_signed, json_doc, md_table, write_file, OutputFormat,
    Provenance,
};
use crate::error::{Error, Result};
use crate::stats::{parse_seed_summary, PerSeed, SeedSweep};

fn json_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            json_files(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "json") {
            out.push(p);
        }
    }
    Ok(())
}

/// Finds `seed<digits>` (optionally `seed_` / `seed-`) in `s`.
fn seed_in(s: &str) -> Option<(u64, String)> {
    let lower = s.to_ascii_lowercase();
    let pos = lower.find("seed")?;
    let rest = lower[pos + 4..].trim_start_matches(['_', '-']);
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    let seed = digits.parse().ok()?;
    let end = lower.len() - rest.len() + digits.len();
    let remainder = format!("{}{}", &s[..pos], &s[end..]);
    Some((seed, remainder.trim_matches(['_', '-', ' ']).to_string()))
}

/// Arm and seed from a path relative to the sweep root, e.g. `rgb/seed_41/x.json`
/// or `rgb_seed41.json`.
pub(crate) fn infer_arm_seed(rel: &Path) -> Option<(String, u64)> {
    let parts: Vec<String> = rel
        .with_extension("")
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    let mut seed = None;
    let mut arm = None;
    for p in &parts {
        match seed_in(p) {
            Some((s, rest)) => {
                seed.get_or_insert(s);
                if arm.is_none() && !rest.is_empty() {
                    arm = Some(rest);
                }
            }
            None if arm.is_none() => arm = Some(p.clone()),
            None => {}
        }
    }
    Some((arm?, seed?))
}

fn eval_metric(doc: &Value, metric: &str) -> Option<f64> {
    let report = doc
        .pointer("/eval/report")
        .or_else(|| doc.get("report"))
        .unwrap_or(doc);
    report.get(metric).and_then(Value::as_f64)
}

fn is_eval_report(doc: &Value) -> bool {
    doc.pointer("/eval/report").is_some()
        || doc.get("per_class").is_some()
        || doc.pointer("/report/per_class").is_some()
}

/// Gathers `seed -> arm -> metric` from every JSON file under `dir`.
///
/// Eval reports take arm and seed from their provenance config (`arm`,
/// `seed`) or, failing that, from the path. Other JSON files must be seed
/// summaries. Duplicates and unreadable files are reported together.
pub fn collect_sweep_inputs(dir: &Path, metric: &str) -> Result<PerSeed> {
    let mut files = Vec::new();
    json_files(dir, &mut files)?;
    let mut out = PerSeed::new();
    let mut issues = Vec::new();
    let mut add = |seed: u64, arm: String, v: f64, from: &Path, issues: &mut Vec<String>| {
        if out
            .entry(seed)
            .or_default()
            .insert(arm.clone(), v)
            .is_some()
        {
            issues.push(format!(
                "{}: duplicate value for seed {seed} arm '{arm}'",
                from.display()
            ));
        }
    };
    for path in &files {
        let doc: Value = crate::json::read_json(path)?;
        let rel = path.strip_prefix(dir).unwrap_or(path);
        if is_eval_report(&doc) {
            let cfg = doc.pointer("/provenance/config");
            let arm = cfg
                .and_then(|c| c.get("arm"))
                .and_then(Value::as_str)
                .map(String::from);
            let seed = cfg.and_then(|c| c.get("seed")).and_then(Value::as_u64);
            let (arm, seed) = match (arm, seed, infer_arm_seed(rel)) {
                (Some(a), Some(s), _) => (a, s),
                (a, s, Some((ia, is))) => (a.unwrap_or(ia), s.unwrap_or(is)),
                _ => {
                    issues.push(format!("{}: cannot determine arm and seed", rel.display()));
                    continue;
                }
            };
            match eval_metric(&doc, metric) {
                Some(v) => add(seed, arm, v, rel, &mut issues),
                None => issues.push(format!("{}: no numeric '{metric}'", rel.display())),
            }
        } else {
            match parse_seed_summary(&doc, Some(metric)).or_else(|_| parse_seed_summary(&doc, None))
            {
                Ok(per_seed) => {
                    for (s, arms) in per_seed {
                        for (a, v) in arms {
                            add(s, a, v, rel, &mut issues);
                        }
                    }
                }
                Err(e) => issues.push(format!("{}: {e}", rel.display())),
            }
        }
    }
    if files.is_empty() {
        issues.push("no JSON reports found".into());
    }
    if !issues.is_empty() {
        return Err(Error::validation(dir.display(), issues));
    }
    Ok(out)
}

pub fn write_sweep_outputs(
    sweep: &SeedSweep,
    metric: &str,
    prov: &Provenance,
    out: &Path,
    formats: &BTreeSet<OutputFormat>,
) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let arms: Vec<&String> = sweep.arms.keys().collect();
    let mut header: Vec<String> = std::iter::once("seed".to_string())
        .chain(arms.iter().map(|a| a.to_string()))
        .collect();
    header.extend(
        sweep
            .deltas
            .iter()
            .map(|d| format!("delta ({} - {})", d.arm, d.baseline)),
    );
    let mut rows: Vec<Vec<String>> = sweep
        .per_seed
        .iter()
        .map(|(seed, vals)| {
            let mut r = vec![seed.to_string()];
            r.extend(arms.iter().map(|a| fmt6(vals[a.as_str()])));
            r.extend(sweep.deltas.iter().map(|d| fmt6_signed(d.per_seed[seed])));
            r
        })
        .collect();
    let mut mean_row = vec!["mean".to_string()];
    mean_row.extend(arms.iter().map(|a| fmt6(sweep.arms[a.as_str()].mean)));
    mean_row.extend(
        sweep
            .deltas
            .iter()
            .map(|d| fmt6_signed(d.paired_delta_mean)),
    );
    let mut sd_row = vec!["sd_population".to_string()];
    sd_row.extend(
        arms.iter()
            .map(|a| fmt6(sweep.arms[a.as_str()].sd_population)),
    );
    sd_row.extend(sweep.deltas.iter().map(|_| String::new()));
    let mut sign_row = vec!["sign_positive".to_string()];
    sign_row.extend(arms.iter().map(|_| String::new()));
    sign_row.extend(
        sweep
            .deltas
            .iter()
            .map(|d| format!("{}/{}", d.sign_positive_count, d.n_seeds)),
    );
    rows.extend([mean_row, sd_row, sign_row]);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut written = Vec::new();
    if formats.contains(&OutputFormat::Json) {
        let mut doc = serde_json::to_value(sweep).map_err(|source| Error::Json {
            context: "sweep".into(),
            source,
        })?;
        doc["metric"] = metric.into();
        written.push(write_file(
            out,
            "sweep.json",
            json_doc(prov, "sweep", &doc)?,
        )?);
    }
    if formats.contains(&OutputFormat::Csv) {
        written.push(write_file(
            out,
            "sweep.csv",
            csv_text(prov, &header, &rows)?,
        )?);
    }
    if formats.contains(&OutputFormat::Md) {
        let mut md = format!(
            "# Cross-seed {metric}\n\nBaseline arm: {}. SD uses divisor n.\n\n",
            sweep.baseline
        );
        let mut md_rows = rows[..rows.len() - 3].to_vec();
        let mut pm = vec!["**mean ± SD**".to_string()];
        pm.extend(arms.iter().map(|a| {
            let g = &sweep.arms[a.as_str()];
            format!("{} ± {}", fmt6(g.mean), fmt6(g.sd_population))
        }));
        pm.extend(
            sweep
                .deltas
                .iter()
                .map(|d| fmt6_signed(d.paired_delta_mean)),
        );
        md_rows.push(pm);
        md_rows.push(
            rows[rows.len() - 1]
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        "**sign-positive seeds**".into()
                    } else {
                        c.clone()
                    }
                })
                .collect(),
        );
        md += &md_table(&header, &md_rows);
        md += &prov.markdown_footer();
        written.push(write_file(out, "sweep.md", md)?);
    }
    Ok(written)
}

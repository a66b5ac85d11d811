use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    csv_text, ensure_dir, fmt6, fmt6_signed, json_doc, md_table, write_file, OutputFormat,
    Provenance,
};
use crate::classes::{ClassSet, CLASS_NAMES};
use crate::error::{Error, Result};
use crate::io::PredictionSet;
use crate::stats::{
    bonferroni, delong_paired, mcnemar_from_predictions, McNemarResult, PairedTestResult,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassComparison {
    pub class: String,
    pub index: usize,
    pub n_pos: usize,
    pub test: PairedTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub n_frames: usize,
    pub bonferroni_m: usize,
    pub per_class: Vec<ClassComparison>,
    /// Evaluable classes that could not be tested, with the reason.
    pub skipped: Vec<(String, String)>,
    pub macro_auc_a: Option<f64>,
    pub macro_auc_b: Option<f64>,
    pub mcnemar: McNemarResult,
}

impl CompareReport {
    pub fn any_degenerate(&self) -> bool {
        self.per_class.iter().any(|c| c.test.degenerate)
    }
}

/// Per-class paired DeLong tests of `b` against `a`, Bonferroni-adjusted over
/// `m` tests, plus McNemar on argmax correctness. Frames are paired by id.
pub fn compare_predictions(
    a: &PredictionSet,
    b: &PredictionSet,
    evaluable: &ClassSet,
    m: usize,
) -> Result<CompareReport> {
    if a.len() != b.len() {
        return Err(Error::validation(
            "compare",
            vec![format!(
                "dumps differ in size: {} vs {} frames",
                a.len(),
                b.len()
            )],
        ));
    }
    let index: HashMap<&str, usize> = b
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.frame_id.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(a.len());
    let mut issues = Vec::new();
    for r in &a.records {
        match index.get(r.frame_id.as_str()) {
            Some(&j) if b.records[j].true_label != r.true_label => issues.push(format!(
                "frame {} has different labels in the two dumps",
                r.frame_id
            )),
            Some(&j) => order.push(j),
            None => issues.push(format!("frame {} missing from the second dump", r.frame_id)),
        }
    }
    if !issues.is_empty() {
        return Err(Error::validation("compare", issues));
    }
    let b = b.subset(&order);
    let labels = a.labels();

    let mut tests = Vec::new();
    let mut skipped = Vec::new();
    for c in evaluable.iter() {
        let l: Vec<bool> = labels.iter().map(|&x| x == c).collect();
        let n_pos = l.iter().filter(|&&x| x).count();
        match delong_paired(&a.class_scores(c), &b.class_scores(c), &l) {
            Ok(t) => tests.push(ClassComparison {
                class: CLASS_NAMES[c].into(),
                index: c,
                n_pos,
                test: t,
            }),
            Err(Error::Undefined(why)) => skipped.push((CLASS_NAMES[c].to_string(), why)),
            Err(e) => return Err(e),
        }
    }
    let p: Vec<f64> = tests.iter().map(|t| t.test.p_two_sided).collect();
    let adjusted = bonferroni(&p, m)?;
    for (t, adj) in tests.iter_mut().zip(adjusted) {
        t.test.p_bonferroni = Some(adj);
    }
    let mean = |f: fn(&PairedTestResult) -> f64| {
        (!tests.is_empty())
            .then(|| tests.iter().map(|t| f(&t.test)).sum::<f64>() / tests.len() as f64)
    };
    Ok(CompareReport {
        n_frames: a.len(),
        bonferroni_m: m,
        macro_auc_a: mean(|t| t.auc_a),
        macro_auc_b: mean(|t| t.auc_b),
        per_class: tests,
        skipped,
        mcnemar: mcnemar_from_predictions(a, &b)?,
    })
}

pub fn write_compare_outputs(
    report: &CompareReport,
    prov: &Provenance,
    out: &Path,
    formats: &BTreeSet<OutputFormat>,
) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let mut written = Vec::new();
    let rows: Vec<Vec<String>> = report
        .per_class
        .iter()
        .map(|c| {
            let t = &c.test;
            vec![
                c.class.clone(),
                c.n_pos.to_string(),
                fmt6(t.auc_a),
                fmt6(t.auc_b),
                fmt6_signed(t.delta),
                fmt6(t.z),
                fmt6(t.p_two_sided),
                t.p_bonferroni.map(fmt6).unwrap_or_default(),
                t.degenerate.to_string(),
            ]
        })
        .collect();
    let header = [
        "class",
        "n_pos",
        "auc_a",
        "auc_b",
        "delta",
        "z",
        "p",
        "p_bonferroni",
        "degenerate",
    ];
    if formats.contains(&OutputFormat::Json) {
        written.push(write_file(
            out,
            "compare.json",
            json_doc(prov, "compare", report)?,
        )?);
    }
    if formats.contains(&OutputFormat::Csv) {
        written.push(write_file(
            out,
            "compare.csv",
            csv_text(prov, &header, &rows)?,
        )?);
    }
    if formats.contains(&OutputFormat::Md) {
        let mut md = String::from("# Paired comparison (B vs A)\n\n");
        md += &format!(
            "Frames: {}. Bonferroni m = {}. Macro AUC over tested classes: {} -> {}.\n\n",
            report.n_frames,
            report.bonferroni_m,
            report.macro_auc_a.map(fmt6).unwrap_or_else(|| "n/a".into()),
            report.macro_auc_b.map(fmt6).unwrap_or_else(|| "n/a".into()),
        );
        md += &md_table(
            &[
                "Class",
                "n_pos",
                "AUC A",
                "AUC B",
                "Delta",
                "z",
                "p",
                "p_Bonf",
                "Degenerate",
            ],
            &rows,
        );
        if !report.skipped.is_empty() {
            md += "\nNot tested:\n\n";
            for (c, why) in &report.skipped {
                md += &format!("- {c}: {why}\n");
            }
        }
        let mc = &report.mcnemar;
        md += &format!(
            "\n## McNemar (argmax correctness)\n\nA wrong / B right: {}. A right / B wrong: {}. Net {} for B. chi2 = {}, p = {}.\n",
            mc.b,
            mc.c,
            if mc.net > 0 { format!("+{}", mc.net) } else { mc.net.to_string() },
            fmt6(mc.chi2),
            fmt6(mc.p)
        );
        md += &prov.markdown_footer();
        written.push(write_file(out, "compare.md", md)?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::NUM_CLASSES;
    use crate::io::{PredictionRecord, ScoreKind};

    fn dump(noise: f64, reverse: bool) -> PredictionSet {
        let mut records: Vec<PredictionRecord> = (0..60)
            .map(|i| {
                let label = i % 3;
                let mut scores = [0.0; NUM_CLASSES];
                for (c, s) in scores.iter_mut().enumerate().take(3) {
                    let wobble = ((i * 7 + c * 13) % 10) as f64 / 10.0;
                    *s = if c == label { 1.0 } else { 0.0 } + noise * wobble;
                }
                PredictionRecord {
                    frame_id: format!("f{i:02}"),
                    video_id: "v".into(),
                    true_label: label,
                    scores,
                }
            })
            .collect();
        if reverse {
            records.reverse();
        }
        PredictionSet::new(records, ScoreKind::Logits).unwrap()
    }

    #[test]
    fn pairs_by_frame_id_and_adjusts() {
        let a = dump(2.0, false);
        let b = dump(0.5, true);
        let r = compare_predictions(&a, &b, &ClassSet::from_indices([0, 1, 2, 5]), 11).unwrap();
        assert_eq!(r.per_class.len(), 3);
        assert_eq!(r.skipped.len(), 1);
        for c in &r.per_class {
            assert!(c.test.delta >= 0.0);
            assert_eq!(
                c.test.p_bonferroni,
                Some((c.test.p_two_sided * 11.0).min(1.0))
            );
        }
        // identical-order control: comparing a dump to itself is a null
        let same = compare_predictions(&a, &dump(2.0, true), &ClassSet::from_indices([0, 1, 2]), 3)
            .unwrap();
        assert!(same.per_class.iter().all(|c| c.test.p_two_sided == 1.0));
        assert_eq!((same.mcnemar.b, same.mcnemar.c), (0, 0));
    }

    #[test]
    fn mismatched_frames_are_rejected() {
        let a = dump(1.0, false);
        let mut recs = dump(1.0, false).records;
        recs[0].frame_id = "other".into();
        let b = PredictionSet::new(recs, ScoreKind::Logits).unwrap();
        let err = compare_predictions(&a, &b, &ClassSet::all(), 14)
            .unwrap_err()
            .to_string();
        assert!(err.contains("f00"), "{err}");
    }

    #[test]
    fn too_small_m_is_rejected() {
        let a = dump(1.0, false);
        assert!(compare_predictions(&a, &a, &ClassSet::from_indices([0, 1, 2]), 2).is_err());
    }
}

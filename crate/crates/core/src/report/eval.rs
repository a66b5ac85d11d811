use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::svg::{heatmap_svg, roc_svg, Series};
use super::{
    csv_text, ensure_dir, fmt6, fmt6_opt, json_doc, md_table, write_file, OutputFormat, Provenance,
};
use crate::classes::{class_name, CLASS_NAMES};
use crate::error::Result;
use crate::io::PredictionSet;
use crate::metrics::{
    annotate_confusion, macro_average_roc, per_class_roc, AnnotatedCell, EvalReport, RocCurve,
};

/// Off-diagonal cells at or above this row share get value labels.
pub const ANNOTATION_THRESHOLD: f64 = 0.10;

/// An [`EvalReport`] plus the curve and heatmap data derived from the dump.
#[derive(Debug, Clone)]
pub struct EvalArtifacts {
    pub report: EvalReport,
    pub roc: Vec<(usize, RocCurve)>,
    /// Mean TPR over evaluable classes on the union FPR grid.
    pub macro_roc: Vec<(f64, f64)>,
    pub confusion_normalized: Vec<Vec<f64>>,
    pub annotations: Vec<AnnotatedCell>,
}

impl EvalArtifacts {
    pub fn new(report: EvalReport, preds: &PredictionSet) -> Self {
        let roc = per_class_roc(preds);
        let evaluable: Vec<RocCurve> = roc
            .iter()
            .filter(|(c, _)| report.per_class[*c].evaluable)
            .map(|(_, r)| r.clone())
            .collect();
        let macro_roc = macro_average_roc(&evaluable);
        let confusion_normalized = report.confusion.row_normalized();
        let annotations = annotate_confusion(&confusion_normalized, ANNOTATION_THRESHOLD);
        EvalArtifacts {
            report,
            roc,
            macro_roc,
            confusion_normalized,
            annotations,
        }
    }
}

fn matrix_rows<T: Copy>(m: &[Vec<T>], cell: impl Fn(T) -> String) -> Vec<Vec<String>> {
    m.iter()
        .enumerate()
        .map(|(i, row)| {
            std::iter::once(CLASS_NAMES[i].to_string())
                .chain(row.iter().map(|&v| cell(v)))
                .collect()
        })
        .collect()
}

fn summary_rows(r: &EvalReport) -> Vec<(&'static str, String)> {
    vec![
        ("macro_auc_evaluable", fmt6_opt(r.macro_auc_evaluable)),
        ("accuracy", fmt6(r.accuracy)),
        ("macro_f1_evaluable", fmt6_opt(r.macro_f1_evaluable)),
        ("weighted_f1", fmt6(r.weighted_f1)),
        ("cross_entropy", fmt6(r.cross_entropy)),
        ("n_frames", r.n_frames.to_string()),
    ]
}

pub fn write_eval_outputs(
    art: &EvalArtifacts,
    prov: &Provenance,
    out: &Path,
    formats: &BTreeSet<OutputFormat>,
) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let r = &art.report;
    let mut written = Vec::new();
    let per_class_rows: Vec<Vec<String>> = r
        .per_class
        .iter()
        .map(|m| {
            vec![
                m.class.clone(),
                m.n_pos.to_string(),
                m.evaluable.to_string(),
                fmt6_opt(m.auc),
                fmt6_opt(m.ci_lo),
                fmt6_opt(m.ci_hi),
                fmt6(m.precision),
                fmt6(m.recall),
                fmt6(m.f1),
            ]
        })
        .collect();
    let per_class_header = [
        "class",
        "n_pos",
        "evaluable",
        "auc",
        "ci_lo",
        "ci_hi",
        "precision",
        "recall",
        "f1",
    ];
    let matrix_header: Vec<&str> = std::iter::once("true \\ predicted")
        .chain(CLASS_NAMES)
        .collect();

    if formats.contains(&OutputFormat::Json) {
        let roc: serde_json::Map<String, serde_json::Value> = art
            .roc
            .iter()
            .map(|(c, curve)| (class_name(*c).unwrap_or_default().to_string(), json!(curve)))
            .collect();
        let doc = json!({
            "report": r,
            "roc": roc,
            "macro_roc": art.macro_roc,
            "confusion_normalized": art.confusion_normalized,
            "annotations": art.annotations,
        });
        written.push(write_file(
            out,
            "eval_report.json",
            json_doc(prov, "eval", &doc)?,
        )?);
    }
    if formats.contains(&OutputFormat::Csv) {
        written.push(write_file(
            out,
            "per_class.csv",
            csv_text(prov, &per_class_header, &per_class_rows)?,
        )?);
        let mut summary: Vec<Vec<String>> = summary_rows(r)
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), v])
            .collect();
        summary.sort();
        written.push(write_file(
            out,
            "summary.csv",
            csv_text(prov, &["metric", "value"], &summary)?,
        )?);
        written.push(write_file(
            out,
            "confusion.csv",
            csv_text(
                prov,
                &matrix_header,
                &matrix_rows(&r.confusion.counts, |v| v.to_string()),
            )?,
        )?);
        written.push(write_file(
            out,
            "confusion_normalized.csv",
            csv_text(
                prov,
                &matrix_header,
                &matrix_rows(&art.confusion_normalized, fmt6),
            )?,
        )?);
        let mut roc_rows = Vec::new();
        for (c, curve) in &art.roc {
            for p in &curve.points {
                roc_rows.push(vec![
                    CLASS_NAMES[*c].to_string(),
                    fmt6(p.fpr),
                    fmt6(p.tpr),
                    fmt6(p.threshold),
                ]);
            }
        }
        for &(f, t) in &art.macro_roc {
            roc_rows.push(vec!["macro".into(), fmt6(f), fmt6(t), String::new()]);
        }
        written.push(write_file(
            out,
            "roc_points.csv",
            csv_text(prov, &["class", "fpr", "tpr", "threshold"], &roc_rows)?,
        )?);
    }
    if formats.contains(&OutputFormat::Md) {
        let mut md = String::from("# Evaluation report\n\n");
        md += &format!(
            "Frames: {}. Score kind: {}.\n\n## Per-class metrics\n\n",
            r.n_frames, r.score_kind
        );
        let md_rows: Vec<Vec<String>> = per_class_rows
            .iter()
            .map(|row| {
                let ci = if row[4] == "n/a" {
                    "n/a".to_string()
                } else {
                    format!("[{}, {}]", row[4], row[5])
                };
                vec![
                    row[0].clone(),
                    row[1].clone(),
                    row[2].clone(),
                    row[3].clone(),
                    ci,
                    row[6].clone(),
                    row[7].clone(),
                    row[8].clone(),
                ]
            })
            .collect();
        md += &md_table(
            &[
                "Class",
                "n_pos",
                "Evaluable",
                "AUC",
                "95% CI",
                "Precision",
                "Recall",
                "F1",
            ],
            &md_rows,
        );
        md += "\n## Summary\n\n";
        let summary: Vec<Vec<String>> = summary_rows(r)
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), v])
            .collect();
        md += &md_table(&["Metric", "Value"], &summary);
        md += &format!(
            "\n## Confusion highlights (row share >= {})\n\n",
            fmt6(ANNOTATION_THRESHOLD)
        );
        let cells: Vec<Vec<String>> = art
            .annotations
            .iter()
            .filter(|a| a.true_class != a.predicted_class || r.confusion.support(a.true_class) > 0)
            .map(|a| {
                vec![
                    CLASS_NAMES[a.true_class].into(),
                    CLASS_NAMES[a.predicted_class].into(),
                    fmt6(a.value),
                ]
            })
            .collect();
        md += &md_table(&["True", "Predicted", "Row share"], &cells);
        md += &prov.markdown_footer();
        written.push(write_file(out, "eval_report.md", md)?);
    }
    if formats.contains(&OutputFormat::Svg) {
        let curves: Vec<(String, Vec<(f64, f64)>)> = art
            .roc
            .iter()
            .map(|(c, curve)| {
                let auc = fmt6(curve.auc);
                (
                    format!("{} ({auc})", CLASS_NAMES[*c]),
                    curve.points.iter().map(|p| (p.fpr, p.tpr)).collect(),
                )
            })
            .collect();
        let mut series: Vec<Series> = curves
            .iter()
            .map(|(l, p)| Series {
                label: l.clone(),
                points: p,
                emphasis: false,
            })
            .collect();
        series.push(Series {
            label: format!("macro, evaluable ({})", fmt6_opt(r.macro_auc_evaluable)),
            points: &art.macro_roc,
            emphasis: true,
        });
        written.push(write_file(
            out,
            "roc.svg",
            roc_svg(&series, &prov.compact()),
        )?);
        written.push(write_file(
            out,
            "confusion.svg",
            heatmap_svg(
                &art.confusion_normalized,
                &CLASS_NAMES,
                &art.annotations,
                &prov.compact(),
            ),
        )?);
    }
    Ok(written)
}

//! Per-class ranking metrics and argmax classification metrics.

mod auc;
mod classification;
mod roc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use auc::{auc_ovr, auc_pos_neg, midranks};
pub use classification::{
    annotate_confusion, class_weights, cross_entropy, AnnotatedCell, ConfusionMatrix,
};
pub use roc::{macro_average_roc, roc_curve, RocCurve, RocPoint};

use crate::classes::{class_name, ClassSet, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::io::{PredictionSet, ScoreKind};
use crate::stats::{bootstrap_ci_with, BootstrapConfig, ScoreTable, Statistic};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Per-class AUC intervals; skipped when `None`.
    pub bootstrap: Option<BootstrapConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub index: usize,
    pub n_pos: usize,
    pub evaluable: bool,
    /// `None` when the class has no positives (or no negatives).
    pub auc: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_frames: usize,
    pub score_kind: ScoreKind,
    pub evaluable_classes: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub macro_auc_evaluable: Option<f64>,
    pub accuracy: f64,
    pub macro_f1_evaluable: Option<f64>,
    pub weighted_f1: f64,
    pub cross_entropy: f64,
    pub confusion: ConfusionMatrix,
}

/// Full evaluation of one prediction dump.
///
/// The macro AUC averages the classes in `evaluable` that have positives in
/// the dump; it is `None` if any evaluable class lacks negatives.
pub fn evaluate(
    preds: &PredictionSet,
    evaluable: &ClassSet,
    options: &EvalOptions,
) -> Result<EvalReport> {
    if preds.is_empty() {
        return Err(Error::InvalidArgument("no predictions to evaluate".into()));
    }
    let table = ScoreTable::new(preds);
    let all: Vec<usize> = (0..preds.len()).collect();
    let confusion = table.confusion(&all);

    let per_class = (0..NUM_CLASSES)
        .into_par_iter()
        .map(|c| {
            let auc = table.class_auc(c, &all);
            let ci = match (&options.bootstrap, auc) {
                (Some(cfg), Some(_)) => {
                    let stat = Statistic::ClassAuc(c);
                    Some(bootstrap_ci_with(&table.labels, cfg, |idx| {
                        stat.evaluate(&table, idx)
                    })?)
                }
                _ => None,
            };
            Ok(ClassMetrics {
                class: class_name(c).unwrap_or_default().to_string(),
                index: c,
                n_pos: confusion.support(c) as usize,
                evaluable: evaluable.contains(c),
                auc,
                ci_lo: ci.map(|ci| ci.lo),
                ci_hi: ci.map(|ci| ci.hi),
                precision: confusion.precision(c),
                recall: confusion.recall(c),
                f1: confusion.f1(c),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let scored: Vec<&ClassMetrics> = per_class
        .iter()
        .filter(|m| m.evaluable && m.n_pos > 0)
        .collect();
    let macro_auc_evaluable = if scored.is_empty() {
        None
    } else {
        scored
            .iter()
            .map(|m| m.auc)
            .sum::<Option<f64>>()
            .map(|s| s / scored.len() as f64)
    };

    Ok(EvalReport {
        n_frames: preds.len(),
        score_kind: preds.score_kind,
        evaluable_classes: evaluable
            .iter()
            .filter_map(class_name)
            .map(String::from)
            .collect(),
        per_class,
        macro_auc_evaluable,
        accuracy: confusion.accuracy(),
        macro_f1_evaluable: confusion.macro_f1(evaluable),
        weighted_f1: confusion.weighted_f1(),
        cross_entropy: cross_entropy(preds)?,
        confusion,
    })
}

/// One ROC curve per class that has both positives and negatives.
pub fn per_class_roc(preds: &PredictionSet) -> Vec<(usize, RocCurve)> {
    let labels = preds.labels();
    (0..NUM_CLASSES)
        .filter_map(|c| {
            let l: Vec<bool> = labels.iter().map(|&x| x == c).collect();
            roc_curve(&preds.class_scores(c), &l).ok().map(|r| (c, r))
        })
        .collect()
}

//! Seeded percentile bootstrap over frames.
//!
//! Resample `i` draws from `Pcg64::new(seed, i)`, so each resample owns an
//! independent stream and the parallel result matches a serial run exactly.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngExt};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{ClassSet, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::io::PredictionSet;
use crate::metrics::{auc_ovr, ConfusionMatrix};
use crate::prior::{percentile_sorted, PercentileMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratification {
    /// Preserve each true class's frame count in every resample.
    #[default]
    Class,
    /// Plain frame resampling; rare classes may vanish and force redraws.
    Uniform,
}

impl FromStr for Stratification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "class" | "stratified" => Ok(Stratification::Class),
            "uniform" | "none" => Ok(Stratification::Uniform),
            other => Err(Error::InvalidArgument(format!(
                "unknown stratification '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Stratification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stratification::Class => "class",
            Stratification::Uniform => "uniform",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub level: f64,
    pub seed: u64,
    pub stratification: Stratification,
    /// Redraws allowed per resample when the statistic is undefined on it.
    pub max_retries: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 1000,
            level: 0.95,
            seed: 0,
            stratification: Stratification::Class,
            max_retries: 100,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_resamples == 0 {
            return Err(Error::InvalidArgument(
                "n_resamples must be at least 1".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "level {} outside (0, 1)",
                self.level
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub n_resamples: usize,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Draws one resample of frame indices.
pub struct Resampler {
    n: usize,
    strata: Vec<Vec<usize>>,
    stratification: Stratification,
}

impl Resampler {
    pub fn new(labels: &[usize], stratification: Stratification) -> Self {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut strata = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            strata[l].push(i);
        }
        strata.retain(|s| !s.is_empty());
        Resampler {
            n: labels.len(),
            strata,
            stratification,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        match self.stratification {
            Stratification::Uniform => (0..self.n).map(|_| rng.random_range(0..self.n)).collect(),
            Stratification::Class => {
                let mut out = Vec::with_capacity(self.n);
                for s in &self.strata {
                    out.extend((0..s.len()).map(|_| s[rng.random_range(0..s.len())]));
                }
                out
            }
        }
    }
}

pub fn resample_rng(seed: u64, index: usize) -> Pcg64 {
    Pcg64::new(seed as u128, index as u128)
}

/// Bootstrap replicates of `stat`, one per resample, in resample order.
///
/// `stat` receives frame indices into the original data. A `None` triggers a
/// redraw from the same stream, up to `max_retries` times.
pub fn bootstrap_distribution<F>(
    labels: &[usize],
    cfg: &BootstrapConfig,
    stat: F,
) -> Result<Vec<f64>>
where
    F: Fn(&[usize]) -> Option<f64> + Sync,
{
    cfg.validate()?;
    if labels.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot bootstrap an empty set".into(),
        ));
    }
    let identity: Vec<usize> = (0..labels.len()).collect();
    if stat(&identity).is_none() {
        return Err(Error::Undefined(
            "statistic is undefined on the full data".into(),
        ));
    }
    let resampler = Resampler::new(labels, cfg.stratification);
    (0..cfg.n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = resample_rng(cfg.seed, i);
            for _ in 0..=cfg.max_retries {
                if let Some(v) = stat(&resampler.draw(&mut rng)) {
                    return Ok(v);
                }
            }
            Err(Error::Undefined(format!(
                "statistic undefined on resample {i} after {} redraws",
                cfg.max_retries
            )))
        })
        .collect()
}

/// Linear-interpolated percentiles at `(1 - level) / 2` and `(1 + level) / 2`.
pub fn percentile_interval(replicates: &[f64], level: f64) -> ConfidenceInterval {
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0 * 100.0;
    ConfidenceInterval {
        lo: percentile_sorted(&sorted, tail, PercentileMethod::Linear),
        hi: percentile_sorted(&sorted, 100.0 - tail, PercentileMethod::Linear),
        level,
        n_resamples: replicates.len(),
    }
}

pub fn bootstrap_ci_with<F>(
    labels: &[usize],
    cfg: &BootstrapConfig,
    stat: F,
) -> Result<ConfidenceInterval>
where
    F: Fn(&[usize]) -> Option<f64> + Sync,
{
    let reps = bootstrap_distribution(labels, cfg, stat)?;
    Ok(percentile_interval(&reps, cfg.level))
}

/// Column view of a prediction set for statistics evaluated on index lists.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub labels: Vec<usize>,
    pub argmax: Vec<usize>,
    /// `scores[c][i]` is frame `i`'s score for class `c`.
    pub scores: Vec<Vec<f64>>,
    /// Log-probability assigned to each frame's true class.
    pub true_log_prob: Vec<f64>,
}

impl ScoreTable {
    pub fn new(preds: &PredictionSet) -> Self {
        ScoreTable {
            labels: preds.labels(),
            argmax: preds.records.iter().map(|r| r.argmax()).collect(),
            scores: (0..NUM_CLASSES).map(|c| preds.class_scores(c)).collect(),
            true_log_prob: preds
                .records
                .iter()
                .map(|r| r.log_probability(preds.score_kind, r.true_label))
                .collect(),
        }
    }

    pub fn class_auc(&self, class: usize, idx: &[usize]) -> Option<f64> {
        let s: Vec<f64> = idx.iter().map(|&i| self.scores[class][i]).collect();
        let l: Vec<bool> = idx.iter().map(|&i| self.labels[i] == class).collect();
        auc_ovr(&s, &l).ok()
    }

    pub fn confusion(&self, idx: &[usize]) -> ConfusionMatrix {
        let mut counts = vec![vec![0u64; NUM_CLASSES]; NUM_CLASSES];
        for &i in idx {
            counts[self.labels[i]][self.argmax[i]] += 1;
        }
        ConfusionMatrix { counts }
    }
}

/// Metrics that can be bootstrapped by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    ClassAuc(usize),
    /// Mean one-vs-rest AUC over the given classes.
    MacroAuc(ClassSet),
    Accuracy,
    MacroF1(ClassSet),
    WeightedF1,
    CrossEntropy,
    Constant(f64),
}

impl Statistic {
    pub fn evaluate(&self, table: &ScoreTable, idx: &[usize]) -> Option<f64> {
        match *self {
            Statistic::ClassAuc(c) => table.class_auc(c, idx),
            Statistic::MacroAuc(set) => {
                if set.is_empty() {
                    return None;
                }
                let mut sum = 0.0;
                for c in set.iter() {
                    sum += table.class_auc(c, idx)?;
                }
                Some(sum / set.len() as f64)
            }
            Statistic::Accuracy => Some(table.confusion(idx).accuracy()),
            Statistic::MacroF1(set) => table.confusion(idx).macro_f1(&set),
            Statistic::WeightedF1 => Some(table.confusion(idx).weighted_f1()),
            Statistic::CrossEntropy => {
                Some(-idx.iter().map(|&i| table.true_log_prob[i]).sum::<f64>() / idx.len() as f64)
            }
            Statistic::Constant(v) => Some(v),
        }
    }
}

pub fn bootstrap_ci(
    preds: &PredictionSet,
    statistic: Statistic,
    cfg: &BootstrapConfig,
) -> Result<ConfidenceInterval> {
    let table = ScoreTable::new(preds);
    bootstrap_ci_with(&table.labels, cfg, |idx| statistic.evaluate(&table, idx))
}

/// Closed-form AUC standard error of Hanley and McNeil (1982).
pub fn hanley_mcneil_se(auc: f64, n_pos: usize, n_neg: usize) -> f64 {
    let (m, n) = (n_pos as f64, n_neg as f64);
    let q1 = auc / (2.0 - auc);
    let q2 = 2.0 * auc * auc / (1.0 + auc);
    let var =
        (auc * (1.0 - auc) + (m - 1.0) * (q1 - auc * auc) + (n - 1.0) * (q2 - auc * auc)) / (m * n);
    var.max(0.0).sqrt()
}

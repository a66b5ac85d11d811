use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classes::{class_index, class_name, NUM_CLASSES};
use crate::error::{Error, Result};

/// Whether per-class scores are raw logits or softmax probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Logits,
    Probabilities,
}

impl FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logits" => Ok(ScoreKind::Logits),
            "probabilities" | "probs" => Ok(ScoreKind::Probabilities),
            other => Err(Error::InvalidArgument(format!(
                "unknown score kind {other:?} (expected logits|probabilities)"
            ))),
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreKind::Logits => "logits",
            ScoreKind::Probabilities => "probabilities",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpFormat {
    Csv,
    Jsonl,
}

impl DumpFormat {
    /// `.jsonl` / `.ndjson` are JSON lines, everything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => DumpFormat::Jsonl,
            _ => DumpFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub frame_id: String,
    pub video_id: String,
    pub true_label: usize,
    pub scores: [f64; NUM_CLASSES],
}

impl PredictionRecord {
    /// Highest-scoring class; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate().skip(1) {
            if s > self.scores[best] {
                best = i;
            }
        }
        best
    }

    /// Softmax probabilities (identity for probability dumps).
    pub fn probabilities(&self, kind: ScoreKind) -> [f64; NUM_CLASSES] {
        match kind {
            ScoreKind::Probabilities => self.scores,
            ScoreKind::Logits => {
                let max = self
                    .scores
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut out = self.scores.map(|s| (s - max).exp());
                let z: f64 = out.iter().sum();
                out.iter_mut().for_each(|p| *p /= z);
                out
            }
        }
    }

    /// Natural log of the probability assigned to `class`.
    pub fn log_probability(&self, kind: ScoreKind, class: usize) -> f64 {
        match kind {
            ScoreKind::Probabilities => self.scores[class].max(f64::MIN_POSITIVE).ln(),
            ScoreKind::Logits => {
                let max = self
                    .scores
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                let lse = self
                    .scores
                    .iter()
                    .map(|s| (s - max).exp())
                    .sum::<f64>()
                    .ln()
                    + max;
                self.scores[class] - lse
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub records: Vec<PredictionRecord>,
    pub score_kind: ScoreKind,
}

impl PredictionSet {
    /// Validates the set-level invariants (unique ids, finite scores, probability sums).
    pub fn new(records: Vec<PredictionRecord>, score_kind: ScoreKind) -> Result<Self> {
        let set = PredictionSet {
            records,
            score_kind,
        };
        let lines: Vec<usize> = (1..=set.records.len()).collect();
        let issues = set.issues(&lines, "record");
        if issues.is_empty() {
            Ok(set)
        } else {
            Err(Error::validation("prediction set", issues))
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.true_label).collect()
    }

    /// Score column for one class across all frames.
    pub fn class_scores(&self, class: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.scores[class]).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> PredictionSet {
        PredictionSet {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            score_kind: self.score_kind,
        }
    }

    fn issues(&self, lines: &[usize], unit: &str) -> Vec<String> {
        let mut issues = Vec::new();
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (r, &line) in self.records.iter().zip(lines) {
            if r.true_label >= NUM_CLASSES {
                issues.push(format!(
                    "{unit} {line}: class index {} out of range",
                    r.true_label
                ));
            }
            if let Some(i) = r.scores.iter().position(|s| !s.is_finite()) {
                issues.push(format!("{unit} {line}: score_{i:02} is not finite"));
            }
            if self.score_kind == ScoreKind::Probabilities {
                let sum: f64 = r.scores.iter().sum();
                if (sum - 1.0).abs() > 1e-4 {
                    issues.push(format!(
                        "{unit} {line}: probabilities sum to {sum} (expected 1 within 1e-4)"
                    ));
                }
            }
            if let Some(first) = seen.insert(&r.frame_id, line) {
                issues.push(format!(
                    "{unit} {line}: duplicate frame_id {:?} (first at {unit} {first})",
                    r.frame_id
                ));
            }
        }
        issues
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    frame_id: String,
    video_id: String,
    true_label: String,
    scores: Vec<f64>,
}

fn csv_header() -> Vec<String> {
    let mut h = vec![
        "frame_id".to_string(),
        "video_id".to_string(),
        "true_label".to_string(),
    ];
    h.extend((0..NUM_CLASSES).map(|i| format!("score_{i:02}")));
    h
}

/// Parses a dump from memory. `origin` is only used in error messages.
pub fn parse_predictions(
    text: &str,
    format: DumpFormat,
    score_kind: ScoreKind,
    origin: &str,
) -> Result<PredictionSet> {
    let mut records = Vec::new();
    let mut lines = Vec::new();
    let mut issues = Vec::new();
    let mut push = |line: usize,
                    frame_id: String,
                    video_id: String,
                    label: &str,
                    scores: Vec<f64>,
                    issues: &mut Vec<String>| {
        let Some(true_label) = class_index(label) else {
            issues.push(format!("line {line}: unknown class name {label:?}"));
            return;
        };
        let Ok(scores) = <[f64; NUM_CLASSES]>::try_from(scores.as_slice()) else {
            issues.push(format!(
                "line {line}: expected {NUM_CLASSES} scores, found {}",
                scores.len()
            ));
            return;
        };
        records.push(PredictionRecord {
            frame_id,
            video_id,
            true_label,
            scores,
        });
        lines.push(line);
    };

    match format {
        DumpFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .flexible(true)
                .from_reader(text.as_bytes());
            let header: Vec<String> = reader
                .headers()
                .map_err(|e| Error::validation(origin, vec![format!("header: {e}")]))?
                .iter()
                .map(str::to_string)
                .collect();
            let expected = csv_header();
            if header[..header.len().min(3)] != expected[..3] {
                return Err(Error::validation(
                    origin,
                    vec![format!(
                        "line 1: header must start with frame_id,video_id,true_label, found {}",
                        header.join(",")
                    )],
                ));
            }
            for row in reader.records() {
                let row = row.map_err(|e| Error::validation(origin, vec![e.to_string()]))?;
                let line = row.position().map_or(0, |p| p.line() as usize);
                if row.len() < 3 {
                    issues.push(format!("line {line}: expected at least 3 fields"));
                    continue;
                }
                let mut scores = Vec::with_capacity(row.len() - 3);
                let mut bad = false;
                for (j, cell) in row.iter().skip(3).enumerate() {
                    match cell.trim().parse::<f64>() {
                        Ok(v) => scores.push(v),
                        Err(_) => {
                            issues.push(format!(
                                "line {line}: score_{j:02} {cell:?} is not a number"
                            ));
                            bad = true;
                        }
                    }
                }
                if !bad {
                    push(
                        line,
                        row[0].to_string(),
                        row[1].to_string(),
                        &row[2],
                        scores,
                        &mut issues,
                    );
                }
            }
        }
        DumpFormat::Jsonl => {
            for (i, raw) in text.lines().enumerate() {
                let line = i + 1;
                if raw.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<JsonRecord>(raw) {
                    Ok(r) => push(
                        line,
                        r.frame_id,
                        r.video_id,
                        &r.true_label,
                        r.scores,
                        &mut issues,
                    ),
                    Err(e) => issues.push(format!("line {line}: {e}")),
                }
            }
        }
    }

    let set = PredictionSet {
        records,
        score_kind,
    };
    issues.extend(set.issues(&lines, "line"));
    if issues.is_empty() {
        Ok(set)
    } else {
        Err(Error::validation(origin, issues))
    }
}

pub fn load_predictions(
    path: &Path,
    format: DumpFormat,
    score_kind: ScoreKind,
) -> Result<PredictionSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&text, format, score_kind, &path.display().to_string())
}

/// Writes a dump that [`load_predictions`] reads back exactly.
pub fn write_predictions(path: &Path, set: &PredictionSet, format: DumpFormat) -> Result<()> {
    let text = match format {
        DumpFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
            w.write_record(csv_header()).map_err(io_err)?;
            for r in &set.records {
                let mut row = vec![
                    r.frame_id.clone(),
                    r.video_id.clone(),
                    class_name(r.true_label).unwrap_or("?").to_string(),
                ];
                row.extend(r.scores.iter().map(|s| format!("{s:?}")));
                w.write_record(&row).map_err(io_err)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
            String::from_utf8(bytes).expect("csv output is utf-8")
        }
        DumpFormat::Jsonl => {
            let mut out = String::new();
            for r in &set.records {
                let rec = JsonRecord {
                    frame_id: r.frame_id.clone(),
                    video_id: r.video_id.clone(),
                    true_label: class_name(r.true_label).unwrap_or("?").to_string(),
                    scores: r.scores.to_vec(),
                };
                out.push_str(&serde_json::to_string(&rec).map_err(|source| Error::Json {
                    context: path.display().to_string(),
                    source,
                })?);
                out.push('\n');
            }
            out
        }
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

//! Report generation: deterministic JSON, CSV, Markdown and SVG artifacts.
//!
//! Every file carries a [`Provenance`] block echoing the invoking config.
//! JSON keeps full precision; CSV, Markdown and SVG use six significant digits.

mod audit;
mod compare;
mod eval;
mod format;
mod prior_out;
mod svg;
mod sweep;
mod zeroshot;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use audit::{
    audit_best_vs_last, parse_audit_file, write_audit_outputs, AuditEntry, AuditMetricSummary,
    AuditRow, AuditTable, CheckpointTag, Direction, AUDIT_METRICS,
};
pub use compare::{compare_predictions, write_compare_outputs, ClassComparison, CompareReport};
pub use eval::{write_eval_outputs, EvalArtifacts};
pub use format::{fmt6, fmt6_opt, fmt6_signed};
pub use prior_out::{list_images, write_prior_outputs, PriorFrameSummary};
pub use svg::{escape, heatmap_svg, roc_svg, Series};
pub use sweep::{collect_sweep_inputs, write_sweep_outputs};
pub use zeroshot::{zero_shot_separation, ZeroShotResult};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Md,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "md" | "markdown" => Ok(OutputFormat::Md),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(Error::InvalidArgument(format!(
                "unknown output format '{other}'"
            ))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Md => "md",
            OutputFormat::Svg => "svg",
        })
    }
}

/// Parses a comma-separated format list such as `csv,md`.
pub fn parse_formats(s: &str) -> Result<BTreeSet<OutputFormat>> {
    let set: BTreeSet<OutputFormat> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if set.is_empty() {
        return Err(Error::InvalidArgument("no output formats given".into()));
    }
    Ok(set)
}

pub fn all_formats() -> BTreeSet<OutputFormat> {
    [
        OutputFormat::Json,
        OutputFormat::Csv,
        OutputFormat::Md,
        OutputFormat::Svg,
    ]
    .into()
}

/// Where an artifact came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config: Value,
    pub split_fingerprint: Option<String>,
}

impl Provenance {
    pub fn new(subcommand: &str, config: &impl Serialize) -> Result<Self> {
        let config = serde_json::to_value(config).map_err(|source| Error::Json {
            context: "config".into(),
            source,
        })?;
        Ok(Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            config,
            split_fingerprint: None,
        })
    }

    pub fn with_fingerprint(mut self, fingerprint: Option<String>) -> Self {
        self.split_fingerprint = fingerprint;
        self
    }

    /// Single-line JSON form used in CSV, Markdown and SVG headers.
    pub fn compact(&self) -> String {
        // Value maps are BTreeMaps, so key order is stable.
        serde_json::to_value(self)
            .map(|v| v.to_string())
            .unwrap_or_default()
    }

    pub fn csv_header(&self) -> String {
        format!("# provenance: {}\n", self.compact())
    }

    pub fn markdown_footer(&self) -> String {
        format!("\n## Provenance\n\n```json\n{}\n```\n", self.compact())
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// CSV text with the provenance comment line first.
pub(crate) fn csv_text(prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| Error::Encode(e.to_string());
    w.write_record(header).map_err(enc)?;
    for r in rows {
        w.write_record(r).map_err(enc)?;
    }
    let body = w.into_inner().map_err(|e| Error::Encode(e.to_string()))?;
    Ok(prov.csv_header() + &String::from_utf8(body).map_err(|e| Error::Encode(e.to_string()))?)
}

/// Pipe table; cells must not contain `|`.
pub(crate) fn md_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("| {} |\n", header.join(" | "));
    s += &format!("|{}\n", header.iter().map(|_| "---|").collect::<String>());
    for r in rows {
        s += &format!("| {} |\n", r.join(" | "));
    }
    s
}

/// JSON document `{"provenance": ..., <key>: value}` with sorted keys.
pub(crate) fn json_doc(prov: &Provenance, key: &str, value: &impl Serialize) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|source| Error::Json {
        context: key.into(),
        source,
    })?;
    let mut map = serde_json::Map::new();
    map.insert(
        "provenance".into(),
        serde_json::to_value(prov).expect("provenance serializes"),
    );
    map.insert(key.into(), v);
    crate::json::to_sorted_json(&Value::Object(map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_parse() {
        let f = parse_formats("csv, md").unwrap();
        assert_eq!(f, [OutputFormat::Csv, OutputFormat::Md].into());
        assert!(parse_formats("csv,pdf").is_err());
        assert!(parse_formats("").is_err());
    }

    #[test]
    fn provenance_is_stable() {
        let p = Provenance::new("eval", &serde_json::json!({"b": 1, "a": [2]})).unwrap();
        assert!(p.compact().contains(r#""config":{"a":[2],"b":1}"#));
        assert!(p.csv_header().starts_with("# provenance: {"));
    }

    #[test]
    fn csv_quotes_and_prefixes() {
        let p = Provenance::new("x", &()).unwrap();
        let t = csv_text(
            &p,
            &["class", "v"],
            &[vec!["Blood - fresh, x".into(), "1".into()]],
        )
        .unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("# provenance"));
        assert_eq!(lines[1], "class,v");
        assert_eq!(lines[2], "\"Blood - fresh, x\",1");
    }
}

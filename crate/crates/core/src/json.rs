//! Deterministic JSON output: keys sorted, pretty-printed, trailing newline.

use serde::Serialize;

use crate::error::{Error, Result};

pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    let ctx = |source| Error::Json {
        context: "serialize".into(),
        source,
    };
    // serde_json::Map is a BTreeMap without the preserve_order feature.
    let v = serde_json::to_value(value).map_err(ctx)?;
    let mut s = serde_json::to_string_pretty(&v).map_err(ctx)?;
    s.push('\n');
    Ok(s)
}

pub fn write_sorted_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    std::fs::write(path, to_sorted_json(value)?).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        context: path.display().to_string(),
        source,
    })
}

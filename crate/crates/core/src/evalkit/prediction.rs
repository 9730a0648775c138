use std::path::Path;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::decimal_number;

/// One entity from a model response. Every field may be missing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedEntity {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default, rename = "start_date_for_period")]
    pub period_start: Option<String>,
    #[serde(default, rename = "end_date_for_period")]
    pub period_end: Option<String>,
    #[serde(default, rename = "currency_/_unit")]
    pub unit: Option<String>,
    #[serde(default, with = "decimal_number::option")]
    pub value: Option<Decimal>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Line {
    Wrapped { entities: Vec<PredictedEntity> },
    Bare(Vec<PredictedEntity>),
}

/// One prediction list per line: `{"entities": [...]}` or a
/// bare array. Blank lines and `null` are empty predictions.
pub fn parse_predictions(text: &str, source: &Path) -> Result<Vec<Vec<PredictedEntity>>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == "null" {
            out.push(Vec::new());
            continue;
        }
        let parsed: Line = serde_json::from_str(line).map_err(|e| Error::Record {
            path: source.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(match parsed {
            Line::Wrapped { entities } | Line::Bare(entities) => entities,
        });
    }
    Ok(out)
}

pub fn read_predictions(path: &Path) -> Result<Vec<Vec<PredictedEntity>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&text, path)
}

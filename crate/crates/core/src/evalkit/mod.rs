//! Scoring of predicted entity records against gold paragraphs.
//!
//! Predictions are aligned one-to-one with gold entities, then every field is
//! tallied: agreement is a true positive, disagreement a false negative for
//! the gold value and a false positive for the predicted one. Unaligned gold
//! entities are false negatives, unaligned predictions false positives.

mod align;
mod metrics;
mod prediction;

pub use align::{align, agreement, Alignment, Agreement};
pub use metrics::{cumulative_macro_f1, CurvePoint, EvalReport, EvalTally, FieldScore, Tally};
pub use prediction::{parse_predictions, read_predictions, PredictedEntity};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Paragraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    StartDate,
    EndDate,
    Currency,
    Value,
    Label,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::StartDate, Field::EndDate, Field::Currency, Field::Value, Field::Label];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::StartDate => "start_date",
            Field::EndDate => "end_date",
            Field::Currency => "currency",
            Field::Value => "value",
            Field::Label => "label",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scores line-aligned gold paragraphs and prediction lists.
pub fn evaluate(gold: &[Paragraph], predictions: &[Vec<PredictedEntity>]) -> Result<EvalTally> {
    if gold.len() != predictions.len() {
        return Err(Error::InvalidInput(format!(
            "{} gold paragraphs but {} prediction lines",
            gold.len(),
            predictions.len()
        )));
    }
    let mut tally = EvalTally::default();
    for (g, p) in gold.iter().zip(predictions) {
        tally.add_document(&g.entities, p);
    }
    Ok(tally)
}

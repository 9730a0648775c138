use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Paragraph, OOS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    TextClassification,
    SequenceLabeling,
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "text_classification" | "classification" => Ok(Task::TextClassification),
            "sequence_labeling" | "ner" => Ok(Task::SequenceLabeling),
            other => Err(Error::InvalidInput(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub text: String,
    pub label: String,
}

/// Character span `[start, end)` with its label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanLabel {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub text: String,
    pub spans: Vec<SpanLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskRecord {
    Classification(ClassificationRecord),
    Sequence(SequenceRecord),
}

/// The labels kept by sequence labelling; everything else becomes `OOS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelVocabulary {
    All,
    Top(BTreeSet<String>),
}

impl LabelVocabulary {
    /// The `top_k` most frequent entity labels of the training paragraphs,
    /// ties broken lexicographically. `None` keeps every label.
    pub fn from_train<'a>(train: impl IntoIterator<Item = &'a Paragraph>, top_k: Option<usize>) -> Self {
        let Some(k) = top_k else {
            return LabelVocabulary::All;
        };
        let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
        for p in train {
            for e in &p.entities {
                *freq.entry(e.label.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        LabelVocabulary::Top(ranked.into_iter().take(k).map(|(l, _)| l.to_string()).collect())
    }

    pub fn label(&self, label: &str) -> String {
        match self {
            LabelVocabulary::Top(keep) if !keep.contains(label) => OOS.to_string(),
            _ => label.to_string(),
        }
    }
}

/// Turns paragraphs into task records. Classification uses the label of the
/// entity with the smallest start offset and skips paragraphs without entities.
pub fn prepare_task_labels<'a>(
    paragraphs: impl IntoIterator<Item = &'a Paragraph>,
    task: Task,
    vocabulary: &LabelVocabulary,
) -> Vec<TaskRecord> {
    paragraphs
        .into_iter()
        .filter_map(|p| match task {
            Task::TextClassification => p.first_entity().map(|e| {
                TaskRecord::Classification(ClassificationRecord {
                    text: p.text.clone(),
                    label: e.label.clone(),
                })
            }),
            Task::SequenceLabeling => {
                let mut spans: Vec<SpanLabel> = p
                    .entities
                    .iter()
                    .map(|e| SpanLabel {
                        start: e.start_char,
                        end: e.end_char,
                        label: vocabulary.label(&e.label),
                    })
                    .collect();
                spans.sort_by_key(|s| (s.start, s.end));
                Some(TaskRecord::Sequence(SequenceRecord {
                    text: p.text.clone(),
                    spans,
                }))
            }
        })
        .collect()
}

use std::collections::BTreeMap;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::align::{agreement, align};
use super::{Field, PredictedEntity};
use crate::model::Entity;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Tally {
    pub fn score<S: Scalar>(&self) -> FieldScore<S> {
        let precision = S::ratio(self.tp, self.tp + self.fp);
        let recall = S::ratio(self.tp, self.tp + self.fn_);
        FieldScore {
            precision,
            recall,
            f1: S::harmonic(precision, recall),
        }
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldScore<S> {
    pub precision: S,
    pub recall: S,
    pub f1: S,
}

/// Corpus-level counts. Documents can be tallied separately and added.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalTally {
    pub documents: u64,
    pub gold_entities: u64,
    pub pred_entities: u64,
    /// Gold entities whose aligned prediction agrees on every field.
    pub exact_matches: u64,
    pub fields: BTreeMap<Field, Tally>,
    pub labels: BTreeMap<String, Tally>,
    pub gold_label_freq: BTreeMap<String, u64>,
}

fn present(p: &PredictedEntity, f: Field) -> bool {
    match f {
        Field::StartDate => p.period_start.is_some(),
        Field::EndDate => p.period_end.is_some(),
        Field::Currency => p.unit.is_some(),
        Field::Value => p.value.is_some(),
        Field::Label => p.label.is_some(),
    }
}

impl EvalTally {
    pub fn add_document(&mut self, gold: &[Entity], pred: &[PredictedEntity]) {
        self.documents += 1;
        self.gold_entities += gold.len() as u64;
        self.pred_entities += pred.len() as u64;
        for g in gold {
            *self.gold_label_freq.entry(g.label.clone()).or_default() += 1;
        }

        let alignment = align(gold, pred);
        for &(gi, pi) in &alignment.pairs {
            let (g, p) = (&gold[gi], &pred[pi]);
            let a = agreement(g, p);
            if a.all() {
                self.exact_matches += 1;
            }
            for f in Field::ALL {
                let t = self.fields.entry(f).or_default();
                if a.field(f) {
                    t.tp += 1;
                } else {
                    t.fn_ += 1;
                    t.fp += u64::from(present(p, f));
                }
            }
            if a.label {
                self.labels.entry(g.label.clone()).or_default().tp += 1;
            } else {
                self.labels.entry(g.label.clone()).or_default().fn_ += 1;
                if let Some(l) = &p.label {
                    self.labels.entry(l.trim().to_string()).or_default().fp += 1;
                }
            }
        }
        for &gi in &alignment.unmatched_gold {
            for f in Field::ALL {
                self.fields.entry(f).or_default().fn_ += 1;
            }
            self.labels.entry(gold[gi].label.clone()).or_default().fn_ += 1;
        }
        for &pi in &alignment.unmatched_pred {
            let p = &pred[pi];
            for f in Field::ALL {
                self.fields.entry(f).or_default().fp += u64::from(present(p, f));
            }
            if let Some(l) = &p.label {
                self.labels.entry(l.trim().to_string()).or_default().fp += 1;
            }
        }
    }

    /// F1 of every label that occurs in gold.
    pub fn gold_label_f1<S: Scalar>(&self) -> BTreeMap<String, S> {
        self.gold_label_freq
            .keys()
            .map(|l| (l.clone(), self.labels.get(l).copied().unwrap_or_default().score::<S>().f1))
            .collect()
    }

    pub fn report<S: Scalar>(&self) -> EvalReport<S> {
        let per_label_f1 = self.gold_label_f1::<S>();
        let f1s: Vec<S> = per_label_f1.values().copied().collect();
        EvalReport {
            documents: self.documents,
            gold_entities: self.gold_entities,
            pred_entities: self.pred_entities,
            per_field: Field::ALL
                .iter()
                .map(|f| (*f, self.fields.get(f).copied().unwrap_or_default().score()))
                .collect(),
            label_macro_f1: S::mean(&f1s),
            entity_exact_match: S::ratio(self.exact_matches, self.gold_entities),
            curve: cumulative_macro_f1(&per_label_f1, &self.gold_label_freq),
            field_counts: Field::ALL
                .iter()
                .map(|f| (*f, self.fields.get(f).copied().unwrap_or_default()))
                .collect(),
            label_counts: self.labels.clone(),
        }
    }
}

impl AddAssign<&EvalTally> for EvalTally {
    fn add_assign(&mut self, rhs: &EvalTally) {
        self.documents += rhs.documents;
        self.gold_entities += rhs.gold_entities;
        self.pred_entities += rhs.pred_entities;
        self.exact_matches += rhs.exact_matches;
        for (f, t) in &rhs.fields {
            *self.fields.entry(*f).or_default() += *t;
        }
        for (l, t) in &rhs.labels {
            *self.labels.entry(l.clone()).or_default() += *t;
        }
        for (l, n) in &rhs.gold_label_freq {
            *self.gold_label_freq.entry(l.clone()).or_default() += n;
        }
    }
}

/// Macro F1 over the `labels` most frequent gold labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint<S> {
    pub labels: usize,
    pub cumulative_support: u64,
    pub macro_f1: S,
}

/// Adds labels from most to least frequent (ties lexicographic) and records
/// the running support and mean F1. Labels without an F1 score count as 0.
pub fn cumulative_macro_f1<S: Scalar>(per_label_f1: &BTreeMap<String, S>, frequency: &BTreeMap<String, u64>) -> Vec<CurvePoint<S>> {
    let mut ranked: Vec<(&String, u64)> = frequency.iter().map(|(l, n)| (l, *n)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut support = 0;
    let mut sum = S::zero();
    ranked
        .into_iter()
        .enumerate()
        .map(|(i, (label, n))| {
            support += n;
            sum = sum + per_label_f1.get(label).copied().unwrap_or_else(S::zero);
            CurvePoint {
                labels: i + 1,
                cumulative_support: support,
                macro_f1: sum / S::from_count(i as u64 + 1),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<S> {
    pub documents: u64,
    pub gold_entities: u64,
    pub pred_entities: u64,
    pub per_field: BTreeMap<Field, FieldScore<S>>,
    /// Mean F1 over labels present in gold.
    pub label_macro_f1: S,
    pub entity_exact_match: S,
    pub curve: Vec<CurvePoint<S>>,
    pub field_counts: BTreeMap<Field, Tally>,
    pub label_counts: BTreeMap<String, Tally>,
}

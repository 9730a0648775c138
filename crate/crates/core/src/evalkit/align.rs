use std::cmp::Ordering;

use chrono::NaiveDate;

use super::{Field, PredictedEntity};
use crate::model::Entity;

/// Per-field agreement between one gold and one predicted entity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Agreement {
    pub start_date: bool,
    pub end_date: bool,
    pub currency: bool,
    pub value: bool,
    pub label: bool,
}

impl Agreement {
    pub fn field(&self, f: Field) -> bool {
        match f {
            Field::StartDate => self.start_date,
            Field::EndDate => self.end_date,
            Field::Currency => self.currency,
            Field::Value => self.value,
            Field::Label => self.label,
        }
    }

    pub fn count(&self) -> usize {
        Field::ALL.iter().filter(|f| self.field(**f)).count()
    }

    pub fn all(&self) -> bool {
        self.count() == Field::ALL.len()
    }

    /// Matching priority: value first, then dates, then unit, then label.
    fn key(&self) -> (bool, u8, bool, bool) {
        (self.value, self.start_date as u8 + self.end_date as u8, self.currency, self.label)
    }
}

fn date_eq(pred: Option<&str>, gold: NaiveDate) -> bool {
    pred.and_then(|s| NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()) == Some(gold)
}

fn text_eq(pred: Option<&str>, gold: &str) -> bool {
    pred.is_some_and(|p| p.trim().eq_ignore_ascii_case(gold.trim()))
}

pub fn agreement(gold: &Entity, pred: &PredictedEntity) -> Agreement {
    Agreement {
        start_date: date_eq(pred.period_start.as_deref(), gold.period_start),
        end_date: date_eq(pred.period_end.as_deref(), gold.period_end),
        currency: text_eq(pred.unit.as_deref(), &gold.unit),
        value: pred.value.is_some_and(|v| v == gold.value),
        label: text_eq(pred.label.as_deref(), &gold.label),
    }
}

/// One-to-one pairing; indices refer to the input lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alignment {
    /// `(gold, pred)` pairs sorted by gold index.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_gold: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

fn gold_order(a: &Entity, b: &Entity) -> Ordering {
    (a.value, a.period_start, a.period_end, &a.unit, &a.label, a.start_char, a.end_char)
        .cmp(&(b.value, b.period_start, b.period_end, &b.unit, &b.label, b.start_char, b.end_char))
}

fn pred_order(a: &PredictedEntity, b: &PredictedEntity) -> Ordering {
    (a.value, &a.period_start, &a.period_end, &a.unit, &a.label).cmp(&(b.value, &b.period_start, &b.period_end, &b.unit, &b.label))
}

/// Greedy matching: repeatedly takes the free pair with the best agreement,
/// scanning both sides in a canonical content order so that input order
/// never changes scores. Pairs that agree on no field are never matched.
pub fn align(gold: &[Entity], pred: &[PredictedEntity]) -> Alignment {
    let mut g_idx: Vec<usize> = (0..gold.len()).collect();
    g_idx.sort_by(|&a, &b| gold_order(&gold[a], &gold[b]).then(a.cmp(&b)));
    let mut p_idx: Vec<usize> = (0..pred.len()).collect();
    p_idx.sort_by(|&a, &b| pred_order(&pred[a], &pred[b]).then(a.cmp(&b)));

    let mut candidates = Vec::new();
    for (gi, &g) in g_idx.iter().enumerate() {
        for (pi, &p) in p_idx.iter().enumerate() {
            let a = agreement(&gold[g], &pred[p]);
            if a.count() > 0 {
                candidates.push((a.key(), gi, pi));
            }
        }
    }
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut g_used = vec![false; gold.len()];
    let mut p_used = vec![false; pred.len()];
    let mut pairs = Vec::new();
    for (_, gi, pi) in candidates {
        if !g_used[gi] && !p_used[pi] {
            g_used[gi] = true;
            p_used[pi] = true;
            pairs.push((g_idx[gi], p_idx[pi]));
        }
    }
    pairs.sort_unstable();
    let unmatched = |used: &[bool], idx: &[usize]| {
        let mut v: Vec<usize> = used.iter().zip(idx).filter(|(u, _)| !**u).map(|(_, i)| *i).collect();
        v.sort_unstable();
        v
    };
    Alignment {
        pairs,
        unmatched_gold: unmatched(&g_used, &g_idx),
        unmatched_pred: unmatched(&p_used, &p_idx),
    }
}

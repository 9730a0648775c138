use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::model::Paragraph;
use crate::scalar::Scalar;

/// Raw counts; add shards in any order, then [`finish`](Self::finish).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsAccumulator {
    pub n_paragraphs: u64,
    pub n_entities: u64,
    pub n_words: u64,
}

impl StatsAccumulator {
    pub fn push(&mut self, p: &Paragraph) {
        self.n_paragraphs += 1;
        self.n_entities += p.entities.len() as u64;
        self.n_words += p.word_count() as u64;
    }

    pub fn finish<S: Scalar>(self) -> CorpusStats<S> {
        CorpusStats {
            n_paragraphs: self.n_paragraphs,
            n_entities: self.n_entities,
            n_words: self.n_words,
            avg_words: S::ratio(self.n_words, self.n_paragraphs),
            avg_tags: S::ratio(self.n_entities, self.n_paragraphs),
            words_per_tag: S::ratio(self.n_words, self.n_entities),
        }
    }
}

impl AddAssign for StatsAccumulator {
    fn add_assign(&mut self, rhs: Self) {
        self.n_paragraphs += rhs.n_paragraphs;
        self.n_entities += rhs.n_entities;
        self.n_words += rhs.n_words;
    }
}

/// Corpus size and density. Words are whitespace tokens; ratios with an empty
/// denominator are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats<S> {
    pub n_paragraphs: u64,
    pub n_entities: u64,
    pub n_words: u64,
    pub avg_words: S,
    pub avg_tags: S,
    pub words_per_tag: S,
}

pub fn compute_stats<'a, S: Scalar>(paragraphs: impl IntoIterator<Item = &'a Paragraph>) -> CorpusStats<S> {
    let mut acc = StatsAccumulator::default();
    for p in paragraphs {
        acc.push(p);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Entity, FormType};
    use num_rational::Rational64;

    fn paragraph(words: usize, entities: usize) -> Paragraph {
        Paragraph {
            form_type: FormType::TenK,
            accession_number: "a".into(),
            filing_date: 0,
            quarter_ending: "20240203".into(),
            company_name: "X".into(),
            text: vec!["w"; words].join(" "),
            entities: (0..entities)
                .map(|_| Entity {
                    start_char: 0,
                    end_char: 1,
                    label: "a:B".into(),
                    period_start: chrono::NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
                    period_end: chrono::NaiveDate::from_ymd_opt(2023, 12, 31).unwrap(),
                    unit: "USD".into(),
                    value: 1.into(),
                })
                .collect(),
        }
    }

    #[test]
    fn single_paragraph() {
        let s: CorpusStats<f64> = compute_stats(&[paragraph(10, 2)]);
        assert_eq!((s.avg_words, s.avg_tags, s.words_per_tag), (10.0, 2.0, 5.0));
    }

    #[test]
    fn empty_corpus_is_zero() {
        let s: CorpusStats<f64> = compute_stats(&Vec::<Paragraph>::new());
        assert_eq!((s.n_paragraphs, s.avg_words, s.words_per_tag), (0, 0.0, 0.0));
    }

    #[test]
    fn exact_identities() {
        let data = vec![paragraph(7, 1), paragraph(12, 4), paragraph(3, 2)];
        let s: CorpusStats<Rational64> = compute_stats(&data);
        assert_eq!(s.avg_tags * Rational64::from(s.n_paragraphs as i64), Rational64::from(s.n_entities as i64));
        assert_eq!(s.words_per_tag, s.avg_words / s.avg_tags);
        assert_eq!(s.avg_words, Rational64::new(22, 3));
    }

    #[test]
    fn shards_merge() {
        let data = vec![paragraph(7, 1), paragraph(12, 4), paragraph(3, 2)];
        let mut left = StatsAccumulator::default();
        left.push(&data[0]);
        let mut right = StatsAccumulator::default();
        right.push(&data[1]);
        right.push(&data[2]);
        left += right;
        assert_eq!(left.finish::<f64>(), compute_stats::<f64>(&data));
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Paragraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "dev" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidInput(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitReason {
    GlobalCutoff,
    CompanyCutoff,
    NewCompany,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub accession_number: String,
    pub split: Split,
    pub reason: SplitReason,
}

/// A filing left out of every split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitDiagnostic {
    pub accession_number: String,
    pub company_name: String,
    pub filing_date: NaiveDate,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoffs {
    pub train_end: NaiveDate,
    pub dev_end: NaiveDate,
    pub test_end: NaiveDate,
}

impl Cutoffs {
    pub fn validate(&self) -> Result<()> {
        if self.train_end < self.dev_end && self.dev_end < self.test_end {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "cutoffs must be strictly increasing, got {} / {} / {}",
                self.train_end, self.dev_end, self.test_end
            )))
        }
    }
}

impl Default for Cutoffs {
    fn default() -> Self {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        Cutoffs {
            train_end: d(2023, 10, 31),
            dev_end: d(2024, 5, 31),
            test_end: d(2024, 6, 1),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitOutcome {
    /// Sorted by accession number.
    pub assignments: Vec<SplitAssignment>,
    pub excluded: Vec<SplitDiagnostic>,
}

impl SplitOutcome {
    pub fn lookup(&self) -> BTreeMap<&str, Split> {
        self.assignments
            .iter()
            .map(|a| (a.accession_number.as_str(), a.split))
            .collect()
    }

    pub fn counts(&self) -> BTreeMap<Split, usize> {
        let mut out = BTreeMap::new();
        for a in &self.assignments {
            *out.entry(a.split).or_default() += 1;
        }
        out
    }
}

struct Filing<'a> {
    accession: &'a str,
    date: NaiveDate,
}

/// Assigns every filing (accession) to train, dev or test.
///
/// Companies are keyed by `company_name`. Filings on or before `train_end`
/// are train. A company first seen after `train_end` goes entirely to test.
/// Other companies' later filings are cut once, at a date boundary, into an
/// earlier dev part and a later test part of as equal size as possible, the
/// extra filing going to dev. Dev filings must not be dated after `dev_end`.
/// When no date boundary exists (one filing, or all on one day), a draw from
/// `seed` decides the whole group.
pub fn split<'a>(paragraphs: impl IntoIterator<Item = &'a Paragraph>, cutoffs: &Cutoffs, seed: u64) -> Result<SplitOutcome> {
    cutoffs.validate()?;
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut companies: BTreeMap<&str, Vec<Filing<'_>>> = BTreeMap::new();
    let mut outcome = SplitOutcome::default();
    for p in paragraphs {
        if !seen.insert(&p.accession_number) {
            continue;
        }
        let date = p.filing_day();
        if date > cutoffs.test_end {
            outcome.excluded.push(SplitDiagnostic {
                accession_number: p.accession_number.clone(),
                company_name: p.company_name.clone(),
                filing_date: date,
                message: format!("filed after the test cutoff {}", cutoffs.test_end),
            });
            continue;
        }
        companies.entry(&p.company_name).or_default().push(Filing {
            accession: &p.accession_number,
            date,
        });
    }

    for (company, mut filings) in companies {
        filings.sort_by(|a, b| (a.date, a.accession).cmp(&(b.date, b.accession)));
        let mut assign = |f: &Filing<'_>, split: Split, reason: SplitReason| {
            outcome.assignments.push(SplitAssignment {
                accession_number: f.accession.to_string(),
                split,
                reason,
            })
        };
        if filings[0].date > cutoffs.train_end {
            for f in &filings {
                assign(f, Split::Test, SplitReason::NewCompany);
            }
            continue;
        }
        let first_post = filings.partition_point(|f| f.date <= cutoffs.train_end);
        let (train, post) = filings.split_at(first_post);
        for f in train {
            assign(f, Split::Train, SplitReason::GlobalCutoff);
        }
        if post.is_empty() {
            continue;
        }
        let dates: Vec<NaiveDate> = post.iter().map(|f| f.date).collect();
        let k = match company_cut(&dates, cutoffs.dev_end) {
            Some(k) => k,
            None => {
                let mut rng = company_rng(seed, company);
                if rng.gen_bool(0.5) && dates[dates.len() - 1] <= cutoffs.dev_end {
                    post.len()
                } else {
                    0
                }
            }
        };
        for (i, f) in post.iter().enumerate() {
            let split = if i < k { Split::Dev } else { Split::Test };
            assign(f, split, SplitReason::CompanyCutoff);
        }
    }
    outcome.assignments.sort_by(|a, b| a.accession_number.cmp(&b.accession_number));
    Ok(outcome)
}

/// Number of leading (date-sorted) filings that go to dev, or `None` when the
/// dates offer no boundary and the choice is left to chance.
fn company_cut(dates: &[NaiveDate], dev_end: NaiveDate) -> Option<usize> {
    let m = dates.len();
    let boundaries: Vec<usize> = (1..m).filter(|&k| dates[k - 1] < dates[k]).collect();
    if boundaries.is_empty() {
        return None;
    }
    let candidates = std::iter::once(0)
        .chain(boundaries)
        .chain(std::iter::once(m))
        .filter(|&k| k == 0 || dates[k - 1] <= dev_end);
    // Closest to half; ties favour the larger dev part.
    candidates.min_by_key(|&k| ((2 * k).abs_diff(m), std::cmp::Reverse(k)))
}

fn company_rng(seed: u64, company: &str) -> ChaCha8Rng {
    // FNV-1a keeps the stream stable across platforms and runs.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in company.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

/// Groups paragraphs by their filing's split, keeping input order. Paragraphs
/// of unassigned filings are dropped.
pub fn partition(paragraphs: impl IntoIterator<Item = Paragraph>, outcome: &SplitOutcome) -> BTreeMap<Split, Vec<Paragraph>> {
    let lookup = outcome.lookup();
    let mut out: BTreeMap<Split, Vec<Paragraph>> = Split::ALL.iter().map(|s| (*s, Vec::new())).collect();
    for p in paragraphs {
        if let Some(split) = lookup.get(p.accession_number.as_str()) {
            out.get_mut(split).expect("all splits present").push(p);
        }
    }
    out
}

//! Inline XBRL primary documents to [`Paragraph`] records.

mod filter;
pub mod markup;
mod segment;
mod value;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::AddAssign;

use chrono::{NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};

pub use filter::filter_snippet;
pub use segment::{normalize_whitespace, segment_snippets, FactAnchor, RawFact, Segmentation, Snippet};
pub use value::{resolve_value, NumberFormat, ValueError};

use crate::edgar::FilingRef;
use crate::error::Result;
use crate::model::{is_valid_tag, Entity, Paragraph};
use markup::Declarations;

/// Why a numeric fact did not become an entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Lives in the hidden `ix:header` section.
    Hidden,
    /// Only appears inside table markup.
    InTable,
    /// Contains another numeric fact; the inner one is kept.
    NestedOuter,
    /// No enclosing block, or offsets failed to line up with the fact text.
    Misparsed,
    /// The snippet failed the formatting-quality filter.
    FilteredSnippet,
    MissingContext,
    UnparseableValue,
    InvalidLabel,
    /// `xsi:nil` or empty fact.
    Nil,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// Per-document fact accounting. Tallies add, so documents can be parsed
/// independently and merged in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactTally {
    pub documents: u64,
    pub facts: u64,
    pub emitted: u64,
    pub paragraphs: u64,
    /// Facts whose unit was missing or undeclared and defaulted to `pure`.
    pub defaulted_units: u64,
    pub dropped: BTreeMap<DropReason, u64>,
}

impl FactTally {
    pub fn dropped_total(&self) -> u64 {
        self.dropped.values().sum()
    }

    /// `facts = emitted + dropped`, the conservation law every parse satisfies.
    pub fn is_balanced(&self) -> bool {
        self.facts == self.emitted + self.dropped_total()
    }

    fn drop(&mut self, reason: DropReason) {
        *self.dropped.entry(reason).or_default() += 1;
    }
}

impl AddAssign<&FactTally> for FactTally {
    fn add_assign(&mut self, rhs: &FactTally) {
        self.documents += rhs.documents;
        self.facts += rhs.facts;
        self.emitted += rhs.emitted;
        self.paragraphs += rhs.paragraphs;
        self.defaulted_units += rhs.defaulted_units;
        for (reason, n) in &rhs.dropped {
            *self.dropped.entry(*reason).or_default() += n;
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedDocument {
    pub paragraphs: Vec<Paragraph>,
    pub tally: FactTally,
}

/// Unit string used when a fact has no resolvable unit.
pub const DEFAULT_UNIT: &str = "pure";

/// Parses one inline XBRL document into paragraphs in document order.
///
/// Documents with no numeric facts give an empty list. Facts that cannot be
/// resolved are dropped and counted in the returned tally rather than
/// failing the document; only markup that cannot be parsed at all is an error.
pub fn parse_document(html: &[u8], meta: &FilingRef) -> Result<ParsedDocument> {
    let text = markup::to_xml_text(html);
    let doc = markup::parse_xhtml(&text)?;
    let decl = Declarations::collect(&doc);
    let segmentation = segment_snippets(&doc);

    let mut tally = FactTally {
        documents: 1,
        facts: segmentation.fact_count() as u64,
        ..FactTally::default()
    };
    for (_, reason) in &segmentation.dropped {
        tally.drop(*reason);
    }

    let quarter_ending = period_of_report(&doc, &decl, meta)
        .format("%Y%m%d")
        .to_string();
    let filing_date = meta.epoch_millis();

    let mut paragraphs = Vec::new();
    for snippet in segmentation.snippets {
        if !filter_snippet(&snippet.text) {
            for _ in &snippet.anchors {
                tally.drop(DropReason::FilteredSnippet);
            }
            continue;
        }
        let mut entities = Vec::with_capacity(snippet.anchors.len());
        for anchor in snippet.anchors {
            match to_entity(anchor, &decl) {
                Ok((entity, defaulted)) => {
                    tally.defaulted_units += u64::from(defaulted);
                    entities.push(entity);
                }
                Err(reason) => tally.drop(reason),
            }
        }
        if entities.is_empty() {
            continue;
        }
        tally.emitted += entities.len() as u64;
        tally.paragraphs += 1;
        paragraphs.push(Paragraph {
            form_type: meta.form_type,
            accession_number: meta.accession_number.clone(),
            filing_date,
            quarter_ending: quarter_ending.clone(),
            company_name: meta.company_name.clone(),
            text: snippet.text,
            entities,
        });
    }
    debug_assert!(tally.is_balanced());
    Ok(ParsedDocument { paragraphs, tally })
}

fn to_entity(anchor: FactAnchor, decl: &Declarations) -> std::result::Result<(Entity, bool), DropReason> {
    let fact = anchor.fact;
    if fact.nil || fact.text.is_empty() {
        return Err(DropReason::Nil);
    }
    if !is_valid_tag(&fact.name) {
        return Err(DropReason::InvalidLabel);
    }
    let period = fact
        .context_ref
        .as_deref()
        .and_then(|c| decl.contexts.get(c.trim()))
        .ok_or(DropReason::MissingContext)?;
    let unit = fact.unit_ref.as_deref().and_then(|u| decl.units.get(u.trim()));
    let value = resolve_value(&fact.text, fact.scale, fact.negative, fact.format.as_deref())
        .map_err(|_| DropReason::UnparseableValue)?;
    Ok((
        Entity {
            start_char: anchor.start_char,
            end_char: anchor.end_char,
            label: fact.name,
            period_start: period.start,
            period_end: period.end,
            unit: unit.cloned().unwrap_or_else(|| DEFAULT_UNIT.to_string()),
            value,
        },
        unit.is_none(),
    ))
}

/// Reporting period end: the context of `dei:DocumentPeriodEndDate`, then the
/// filing metadata, then the latest context end, then the filing date.
fn period_of_report(doc: &roxmltree::Document<'_>, decl: &Declarations, meta: &FilingRef) -> NaiveDate {
    let from_dei = doc
        .descendants()
        .filter(|n| markup::is_ix(n, "nonNumeric"))
        .find(|n| {
            n.attribute("name")
                .is_some_and(|name| name.trim().ends_with(":DocumentPeriodEndDate"))
        })
        .and_then(|n| n.attribute("contextRef"))
        .and_then(|c| decl.contexts.get(c.trim()))
        .map(|p| p.end);
    from_dei
        .or(meta.period_of_report)
        .or_else(|| decl.latest_end())
        .unwrap_or(meta.filing_date)
}

impl FilingRef {
    /// Acceptance timestamp in epoch milliseconds, or midnight UTC of the
    /// filing date when no timestamp is known.
    pub fn epoch_millis(&self) -> i64 {
        match self.accepted_at {
            Some(ts) => ts.timestamp_millis(),
            None => Utc
                .from_utc_datetime(&self.filing_date.and_hms_opt(0, 0, 0).expect("midnight"))
                .timestamp_millis(),
        }
    }
}

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Paragraph, Tag};

/// Label for entities of a retained paragraph that have no category.
pub const LITE_OOS: &str = "XBRL-OOS";

const DEFAULT_TABLE: &str = include_str!("lite_mapping.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Revenues,
    Earnings,
    #[serde(rename = "EPS")]
    Eps,
    #[serde(rename = "EBIT")]
    Ebit,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Revenues => "Revenues",
            Category::Earnings => "Earnings",
            Category::Eps => "EPS",
            Category::Ebit => "EBIT",
        }
    }

    /// Entity label used in Lite files.
    pub fn label(self) -> &'static str {
        match self {
            Category::Revenues => "revenues",
            Category::Earnings => "earnings",
            Category::Eps => "eps",
            Category::Ebit => "ebit",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "revenues" => Ok(Category::Revenues),
            "earnings" => Ok(Category::Earnings),
            "eps" => Ok(Category::Eps),
            "ebit" => Ok(Category::Ebit),
            other => Err(Error::InvalidInput(format!("unknown category `{other}`"))),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct Row {
    tag: String,
    category: String,
}

/// Tag → expert category table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteMapping {
    pub entries: BTreeMap<Tag, Category>,
}

impl Default for LiteMapping {
    fn default() -> Self {
        LiteMapping::from_csv(DEFAULT_TABLE.as_bytes()).expect("bundled mapping table is valid")
    }
}

impl LiteMapping {
    /// Reads a `tag,category` CSV with a header row. Duplicate tags are an error.
    pub fn from_csv(reader: impl Read) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut rdr = csv::Reader::from_reader(reader);
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::InvalidInput(format!("mapping row {}: {e}", i + 2)))?;
            let tag = Tag::new(row.tag.trim())?;
            let category = row.category.parse()?;
            if entries.insert(tag.clone(), category).is_some() {
                return Err(Error::InvalidInput(format!("mapping lists `{tag}` twice")));
            }
        }
        Ok(LiteMapping { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(file)
    }

    pub fn to_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (tag, category) in &self.entries {
            wtr.serialize(Row {
                tag: tag.to_string(),
                category: category.to_string(),
            })
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        }
        wtr.flush().map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn get(&self, label: &str) -> Option<Category> {
        Tag::new(label).ok().and_then(|t| self.entries.get(&t).copied())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Keeps paragraphs where the mapped share of entities is strictly above
/// `threshold`, relabelling entities to categories or [`LITE_OOS`].
pub fn build_lite<'a, I>(paragraphs: I, mapping: &'a LiteMapping, threshold: f64) -> impl Iterator<Item = Paragraph> + 'a
where
    I: IntoIterator<Item = Paragraph>,
    I::IntoIter: 'a,
{
    paragraphs.into_iter().filter_map(move |mut p| {
        let total = p.entities.len();
        let mapped = p.entities.iter().filter(|e| mapping.get(&e.label).is_some()).count();
        if total == 0 || mapped as f64 <= threshold * total as f64 {
            return None;
        }
        for e in &mut p.entities {
            e.label = match mapping.get(&e.label) {
                Some(c) => c.label().to_string(),
                None => LITE_OOS.to_string(),
            };
        }
        Some(p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Entity, FormType};

    fn paragraph(labels: &[&str]) -> Paragraph {
        Paragraph {
            form_type: FormType::TenK,
            accession_number: "a".into(),
            filing_date: 0,
            quarter_ending: "20240203".into(),
            company_name: "X".into(),
            text: "Net sales were $1.".into(),
            entities: labels
                .iter()
                .map(|l| Entity {
                    start_char: 0,
                    end_char: 1,
                    label: l.to_string(),
                    period_start: chrono::NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
                    period_end: chrono::NaiveDate::from_ymd_opt(2023, 12, 31).unwrap(),
                    unit: "USD".into(),
                    value: 1.into(),
                })
                .collect(),
        }
    }

    fn labels(p: &Paragraph) -> Vec<&str> {
        p.entities.iter().map(|e| e.label.as_str()).collect()
    }

    #[test]
    fn default_table() {
        let m = LiteMapping::default();
        assert_eq!(m.len(), 35);
        assert_eq!(m.get("us-gaap:OperatingIncomeLoss"), Some(Category::Ebit));
        assert_eq!(m.get("us-gaap:Revenues"), Some(Category::Revenues));
        assert_eq!(m.get("us-gaap-supplement:FeeIncome"), Some(Category::Revenues));
        let mut per = BTreeMap::new();
        for c in m.entries.values() {
            *per.entry(*c).or_insert(0) += 1;
        }
        assert_eq!(per[&Category::Earnings], 6);
        assert_eq!(per[&Category::Ebit], 1);
        assert_eq!(per[&Category::Eps], 19);
        assert_eq!(per[&Category::Revenues], 9);
    }

    #[test]
    fn csv_round_trip() {
        let m = LiteMapping::default();
        let mut buf = Vec::new();
        m.to_csv(&mut buf).unwrap();
        assert_eq!(LiteMapping::from_csv(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn duplicate_tag_rejected() {
        let csv = "tag,category\nus-gaap:Revenues,Revenues\nus-gaap:Revenues,EPS\n";
        assert!(LiteMapping::from_csv(csv.as_bytes()).is_err());
        let csv = "tag,category\nus-gaap:Revenues,Margins\n";
        assert!(LiteMapping::from_csv(csv.as_bytes()).is_err());
    }

    #[test]
    fn all_mapped_retained() {
        let m = LiteMapping::default();
        let out: Vec<_> = build_lite(vec![paragraph(&["us-gaap:Revenues"; 3])], &m, 0.5).collect();
        assert_eq!(labels(&out[0]), ["revenues"; 3]);
    }

    #[test]
    fn half_is_dropped_two_thirds_kept() {
        let m = LiteMapping::default();
        let half = paragraph(&["us-gaap:Revenues", "us-gaap:NetIncomeLoss", "x:A", "x:B"]);
        let two_thirds = paragraph(&["us-gaap:Revenues", "us-gaap:EarningsPerShareBasic", "x:A"]);
        let out: Vec<_> = build_lite(vec![half, two_thirds, paragraph(&[])], &m, 0.5).collect();
        assert_eq!(out.len(), 1);
        assert_eq!(labels(&out[0]), ["revenues", "eps", "XBRL-OOS"]);
    }

    #[test]
    fn higher_threshold_never_adds() {
        let m = LiteMapping::default();
        let data = vec![
            paragraph(&["us-gaap:Revenues", "x:A"]),
            paragraph(&["us-gaap:Revenues", "us-gaap:Revenues", "x:A"]),
            paragraph(&["us-gaap:Revenues"]),
        ];
        let mut last = usize::MAX;
        for t in [0.0, 0.25, 0.5, 0.66, 0.75, 0.99, 1.0] {
            let n = build_lite(data.clone(), &m, t).count();
            assert!(n <= last);
            last = n;
        }
        assert_eq!(last, 0);
    }
}

//! EDGAR daily `master.YYYYMMDD.idx` files and filing directory listings.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::DocumentRole;
use crate::model::FormType;

/// One usable row of a master index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexRow {
    pub cik: String,
    pub company_name: String,
    pub form_type: FormType,
    pub filing_date: NaiveDate,
    pub accession_number: String,
}

/// A row that could not be read; recorded instead of aborting the listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexWarning {
    pub source: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct ParsedIndex {
    pub rows: Vec<IndexRow>,
    /// Rows for other forms (8-K, 10-K/A, ...) that were skipped.
    pub other_forms: usize,
    pub warnings: Vec<IndexWarning>,
}

/// Relative archive path of the daily master index for `day`.
pub fn daily_index_path(day: NaiveDate) -> String {
    let quarter = (day.month0() / 3) + 1;
    format!(
        "Archives/edgar/daily-index/{}/QTR{}/master.{}.idx",
        day.year(),
        quarter,
        day.format("%Y%m%d")
    )
}

pub fn pad_cik(cik: &str) -> String {
    format!("{:0>10}", cik.trim().trim_start_matches('0'))
}

pub fn is_accession(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 20
        && b.iter().enumerate().all(|(i, c)| match i {
            10 | 13 => *c == b'-',
            _ => c.is_ascii_digit(),
        })
}

fn parse_index_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y%m%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%Y-%m-%d"))
        .ok()
}

/// Parses a pipe-delimited master index. The header block ends at the first
/// line of dashes; files without one are read from the top.
pub fn parse_master_index(text: &str, source: &str) -> ParsedIndex {
    let mut out = ParsedIndex::default();
    let lines: Vec<&str> = text.lines().collect();
    let body_start = lines
        .iter()
        .position(|l| l.trim_start().starts_with("----"))
        .map(|i| i + 1)
        .unwrap_or(0);
    for (idx, raw) in lines.iter().enumerate().skip(body_start) {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with("CIK|") {
            continue;
        }
        let warn = |message: String| IndexWarning {
            source: source.to_string(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 5 {
            out.warnings.push(warn(format!("expected 5 fields, found {}", fields.len())));
            continue;
        }
        let form_type = match fields[2].trim().parse::<FormType>() {
            Ok(f) => f,
            Err(_) => {
                out.other_forms += 1;
                continue;
            }
        };
        let cik = fields[0].trim();
        if cik.is_empty() || !cik.chars().all(|c| c.is_ascii_digit()) {
            out.warnings.push(warn(format!("bad CIK `{cik}`")));
            continue;
        }
        let Some(filing_date) = parse_index_date(fields[3]) else {
            out.warnings.push(warn(format!("bad date `{}`", fields[3].trim())));
            continue;
        };
        let accession = fields[4]
            .trim()
            .rsplit('/')
            .next()
            .unwrap_or_default()
            .trim_end_matches(".txt")
            .to_string();
        if !is_accession(&accession) {
            out.warnings.push(warn(format!("bad accession in `{}`", fields[4].trim())));
            continue;
        }
        out.rows.push(IndexRow {
            cik: pad_cik(cik),
            company_name: fields[1].trim().to_string(),
            form_type,
            filing_date,
            accession_number: accession,
        });
    }
    out
}

#[derive(Debug, Deserialize)]
struct DirectoryListing {
    directory: Directory,
}

#[derive(Debug, Deserialize)]
struct Directory {
    #[serde(default)]
    item: Vec<DirectoryItem>,
}

#[derive(Debug, Deserialize)]
struct DirectoryItem {
    name: String,
    #[serde(default)]
    size: serde_json::Value,
}

impl DirectoryItem {
    fn size(&self) -> u64 {
        match &self.size {
            serde_json::Value::Number(n) => n.as_u64().unwrap_or(0),
            serde_json::Value::String(s) => s.trim().parse().unwrap_or(0),
            _ => 0,
        }
    }
}

fn is_exhibit(name: &str) -> bool {
    let n = name.to_ascii_lowercase();
    n.starts_with("ex") || n.contains("_ex") || n.contains("-ex") || n.contains("ex-") || n.contains("ex_")
}

fn is_rendering_page(name: &str) -> bool {
    let n = name.to_ascii_lowercase();
    (n.starts_with('r') && n[1..].trim_end_matches(".htm").chars().all(|c| c.is_ascii_digit()))
        || n.contains("index")
        || n.starts_with("filingsummary")
}

/// Classifies a filing directory's `index.json` into document roles. The
/// primary document is the largest non-exhibit `.htm`.
pub fn classify_directory(json: &[u8], base_url: &str) -> Result<Vec<(DocumentRole, String)>, serde_json::Error> {
    let listing: DirectoryListing = serde_json::from_slice(json)?;
    let mut out = Vec::new();
    let mut primary: Option<&DirectoryItem> = None;
    for item in &listing.directory.item {
        let lower = item.name.to_ascii_lowercase();
        if lower.ends_with("_cal.xml") {
            out.push((DocumentRole::CalculationLinkbase, format!("{base_url}/{}", item.name)));
        } else if lower.ends_with("_pre.xml") {
            out.push((DocumentRole::PresentationLinkbase, format!("{base_url}/{}", item.name)));
        } else if (lower.ends_with(".htm") || lower.ends_with(".html"))
            && !is_exhibit(&lower)
            && !is_rendering_page(&lower)
            && primary.is_none_or(|p| item.size() > p.size())
        {
            primary = Some(item);
        }
    }
    if let Some(p) = primary {
        out.insert(0, (DocumentRole::PrimaryIxbrl, format!("{base_url}/{}", p.name)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "Description:           Daily Index of EDGAR Dissemination Feed by Company Name\n\
Last Data Received:    April 1, 2024\n\
 \n\
CIK|Company Name|Form Type|Date Filed|File Name\n\
--------------------------------------------------------------------------------\n\
1018840|ABERCROMBIE & FITCH CO /DE/|10-K|20240401|edgar/data/1018840/0001018840-24-000019.txt\n\
320193|Apple Inc.|8-K|20240401|edgar/data/320193/0000320193-24-000050.txt\n\
1000045|NICHOLAS FINANCIAL INC|10-Q|20240401|edgar/data/1000045/0000950170-24-008867.txt\n";

    #[test]
    fn three_rows_one_eight_k() {
        let parsed = parse_master_index(FIXTURE, "fixture");
        assert_eq!(parsed.rows.len(), 2);
        assert_eq!(parsed.other_forms, 1);
        assert!(parsed.warnings.is_empty());
        let first = &parsed.rows[0];
        assert_eq!(first.cik, "0001018840");
        assert_eq!(first.accession_number, "0001018840-24-000019");
        assert_eq!(first.form_type, FormType::TenK);
        assert_eq!(first.filing_date, NaiveDate::from_ymd_opt(2024, 4, 1).unwrap());
    }

    #[test]
    fn malformed_rows_become_warnings() {
        let text = "----\n\
1|A|10-K|20240401\n\
x12|B|10-K|20240401|edgar/data/1/0000000001-24-000001.txt\n\
2|C|10-Q|2024-13-45|edgar/data/2/0000000002-24-000001.txt\n\
3|D|10-Q|20240401|edgar/data/3/not-an-accession.txt\n\
4|E|10-K/A|20240401|edgar/data/4/0000000004-24-000001.txt\n";
        let parsed = parse_master_index(text, "bad");
        assert!(parsed.rows.is_empty());
        assert_eq!(parsed.warnings.len(), 4);
        assert_eq!(parsed.other_forms, 1);
        assert_eq!(parsed.warnings[0].line, 2);
    }

    #[test]
    fn index_path_uses_quarter() {
        let d = NaiveDate::from_ymd_opt(2024, 4, 1).unwrap();
        assert_eq!(daily_index_path(d), "Archives/edgar/daily-index/2024/QTR2/master.20240401.idx");
    }

    #[test]
    fn accession_format() {
        assert!(is_accession("0001018840-24-000019"));
        assert!(!is_accession("000101884024000019"));
        assert!(!is_accession("0001018840-24-00001"));
    }

    #[test]
    fn directory_roles() {
        let json = br#"{"directory":{"item":[
            {"name":"anf-20240203.htm","size":"2500000"},
            {"name":"anf-20240203xex211.htm","size":"4000"},
            {"name":"R1.htm","size":"9000"},
            {"name":"anf-20240203_cal.xml","size":"100"},
            {"name":"anf-20240203_pre.xml","size":"100"},
            {"name":"0001018840-24-000019-index.htm","size":"100"}
        ]}}"#;
        let roles = classify_directory(json, "https://x").unwrap();
        assert_eq!(
            roles,
            vec![
                (DocumentRole::PrimaryIxbrl, "https://x/anf-20240203.htm".to_string()),
                (DocumentRole::CalculationLinkbase, "https://x/anf-20240203_cal.xml".to_string()),
                (DocumentRole::PresentationLinkbase, "https://x/anf-20240203_pre.xml".to_string()),
            ]
        );
    }
}

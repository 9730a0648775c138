//! XHTML loading and the context/unit declarations of an inline XBRL document.

use std::borrow::Cow;
use std::collections::HashMap;

use chrono::NaiveDate;
use regex::{Captures, Regex};
use roxmltree::{Document, Node, ParsingOptions};

use crate::error::Result;

/// Turns raw filing bytes into text an XML parser accepts: drops a UTF-8 BOM
/// and rewrites HTML named entities, which XHTML filings use freely but XML
/// does not predeclare, into numeric references.
pub fn to_xml_text(bytes: &[u8]) -> Cow<'_, str> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let text = String::from_utf8_lossy(bytes);
    let entity = entity_regex();
    if !entity.is_match(&text) {
        return text;
    }
    let replaced = entity.replace_all(&text, |caps: &Captures<'_>| {
        let name = &caps[1];
        match name {
            "amp" | "lt" | "gt" | "quot" | "apos" => caps[0].to_string(),
            _ => format!("&#{};", named_entity(name).unwrap_or(0xFFFD)),
        }
    });
    Cow::Owned(replaced.into_owned())
}

fn entity_regex() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"&([A-Za-z][A-Za-z0-9]*);").expect("static regex"))
}

fn named_entity(name: &str) -> Option<u32> {
    Some(match name {
        "nbsp" => 0xA0,
        "ensp" => 0x2002,
        "emsp" => 0x2003,
        "thinsp" => 0x2009,
        "ndash" => 0x2013,
        "mdash" => 0x2014,
        "lsquo" => 0x2018,
        "rsquo" => 0x2019,
        "sbquo" => 0x201A,
        "ldquo" => 0x201C,
        "rdquo" => 0x201D,
        "bull" => 0x2022,
        "hellip" => 0x2026,
        "middot" => 0xB7,
        "copy" => 0xA9,
        "reg" => 0xAE,
        "trade" => 0x2122,
        "sect" => 0xA7,
        "para" => 0xB6,
        "deg" => 0xB0,
        "cent" => 0xA2,
        "pound" => 0xA3,
        "euro" => 0x20AC,
        "yen" => 0xA5,
        "times" => 0xD7,
        "divide" => 0xF7,
        "plusmn" => 0xB1,
        "frac12" => 0xBD,
        "frac14" => 0xBC,
        "frac34" => 0xBE,
        "sup1" => 0xB9,
        "sup2" => 0xB2,
        "sup3" => 0xB3,
        "laquo" => 0xAB,
        "raquo" => 0xBB,
        "dagger" => 0x2020,
        "Dagger" => 0x2021,
        "shy" => 0xAD,
        "zwsp" => 0x200B,
        "zwnj" => 0x200C,
        "zwj" => 0x200D,
        "iexcl" => 0xA1,
        "iquest" => 0xBF,
        "eacute" => 0xE9,
        "Eacute" => 0xC9,
        "egrave" => 0xE8,
        "agrave" => 0xE0,
        "aacute" => 0xE1,
        "ccedil" => 0xE7,
        "ntilde" => 0xF1,
        "ouml" => 0xF6,
        "uuml" => 0xFC,
        "auml" => 0xE4,
        _ => return None,
    })
}

pub fn parse_xhtml(text: &str) -> Result<Document<'_>> {
    let opts = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    Ok(Document::parse_with_options(text, opts)?)
}

/// True for an inline XBRL element (`ix:` namespace) with the given local name.
pub(crate) fn is_ix(node: &Node<'_, '_>, name: &str) -> bool {
    node.is_element()
        && node.tag_name().name() == name
        && node
            .tag_name()
            .namespace()
            .is_none_or(|ns| ns.contains("inlineXBRL") || ns.contains("inlinexbrl"))
}

const BLOCK_ELEMENTS: &[&str] = &[
    "p", "div", "li", "blockquote", "h1", "h2", "h3", "h4", "h5", "h6", "section", "article", "dd", "dt", "pre", "center",
    "ul", "ol", "body",
];

const TABLE_ELEMENTS: &[&str] = &["table", "tr", "td", "th", "thead", "tbody", "tfoot", "caption"];

fn html_name<'a>(node: &Node<'a, '_>) -> Option<&'a str> {
    if !node.is_element() {
        return None;
    }
    match node.tag_name().namespace() {
        None => Some(node.tag_name().name()),
        Some(ns) if ns.contains("xhtml") => Some(node.tag_name().name()),
        Some(_) => None,
    }
}

pub(crate) fn is_block(node: &Node<'_, '_>) -> bool {
    html_name(node).is_some_and(|n| BLOCK_ELEMENTS.contains(&n.to_ascii_lowercase().as_str()))
}

pub(crate) fn is_table_markup(node: &Node<'_, '_>) -> bool {
    html_name(node).is_some_and(|n| TABLE_ELEMENTS.contains(&n.to_ascii_lowercase().as_str()))
}

pub(crate) fn is_line_break(node: &Node<'_, '_>) -> bool {
    html_name(node).is_some_and(|n| n.eq_ignore_ascii_case("br") || n.eq_ignore_ascii_case("hr"))
}

pub(crate) fn is_skipped(node: &Node<'_, '_>) -> bool {
    is_ix(node, "header")
        || html_name(node).is_some_and(|n| {
            let n = n.to_ascii_lowercase();
            n == "script" || n == "style" || n == "head"
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Period {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

/// Resolved `xbrli:context` and `xbrli:unit` declarations.
#[derive(Debug, Default)]
pub struct Declarations {
    pub contexts: HashMap<String, Period>,
    pub units: HashMap<String, String>,
}

impl Declarations {
    pub fn collect(doc: &Document<'_>) -> Self {
        let mut decl = Declarations::default();
        for node in doc.descendants().filter(|n| n.is_element()) {
            let name = node.tag_name().name();
            let Some(id) = node.attribute("id") else { continue };
            if name == "context" {
                if let Some(period) = parse_period(&node) {
                    decl.contexts.insert(id.to_string(), period);
                }
            } else if name == "unit" {
                decl.units.insert(id.to_string(), unit_string(&node));
            }
        }
        decl
    }

    /// Latest period end across all contexts.
    pub fn latest_end(&self) -> Option<NaiveDate> {
        self.contexts.values().map(|p| p.end).max()
    }
}

fn child_text<'a>(node: &Node<'a, '_>, name: &str) -> Option<&'a str> {
    node.descendants()
        .find(|n| n.is_element() && n.tag_name().name() == name)
        .and_then(|n| n.text())
        .map(str::trim)
}

pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s.get(..10)?, "%Y-%m-%d").ok()
}

fn parse_period(context: &Node<'_, '_>) -> Option<Period> {
    let period = context
        .children()
        .find(|n| n.is_element() && n.tag_name().name() == "period")?;
    if let Some(instant) = child_text(&period, "instant") {
        let d = parse_date(instant)?;
        return Some(Period { start: d, end: d });
    }
    let start = parse_date(child_text(&period, "startDate")?)?;
    let end = parse_date(child_text(&period, "endDate")?)?;
    (start <= end).then_some(Period { start, end })
}

fn measure_name(text: &str) -> String {
    let t = text.trim();
    t.rsplit_once(':').map(|(_, l)| l).unwrap_or(t).to_string()
}

fn measures(node: &Node<'_, '_>) -> Vec<String> {
    node.descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "measure")
        .filter_map(|n| n.text().map(measure_name))
        .collect()
}

/// `iso4217:USD` → `USD`; a divide unit becomes `USD/shares`; multiplied
/// measures are joined with `*`.
fn unit_string(unit: &Node<'_, '_>) -> String {
    let divide = unit.children().find(|n| n.is_element() && n.tag_name().name() == "divide");
    match divide {
        Some(div) => {
            let part = |name: &str| {
                div.children()
                    .find(|n| n.is_element() && n.tag_name().name() == name)
                    .map(|n| measures(&n).join("*"))
                    .unwrap_or_default()
            };
            format!("{}/{}", part("unitNumerator"), part("unitDenominator"))
        }
        None => measures(unit).join("*"),
    }
}

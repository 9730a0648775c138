//! Calculation and presentation linkbases to parent/child edge lists.
//!
//! Every extended link in a file is read and the arcs are flattened into one
//! edge set per filing, deduplicated on `(parent, child, kind)`.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ixbrl::markup::to_xml_text;
use crate::model::{Tag, TaxonomyKind};

const XLINK_NS: &str = "http://www.w3.org/1999/xlink";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaxonomyEdge {
    pub parent: Tag,
    pub child: Tag,
    pub kind: TaxonomyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_hint: Option<Decimal>,
    /// Calculation edges only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Decimal>,
}

/// All edges of one filing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentTaxonomy {
    pub accession_number: String,
    pub edges: Vec<TaxonomyEdge>,
}

/// Interchange record, one per line: `{parent, child, kind, accession}`.
/// `cik` is optional and enables per-company taxonomies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub parent: Tag,
    pub child: Tag,
    pub kind: TaxonomyKind,
    pub accession: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cik: Option<String>,
}

impl EdgeRecord {
    pub fn from_edge(edge: &TaxonomyEdge, accession: &str, cik: Option<&str>) -> Self {
        EdgeRecord {
            parent: edge.parent.clone(),
            child: edge.child.clone(),
            kind: edge.kind,
            accession: accession.to_string(),
            cik: cik.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkbaseDiagnostics {
    pub arcs: u64,
    pub duplicates: u64,
    pub self_loops: u64,
    pub prohibited: u64,
    pub unresolved: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedLinkbase {
    /// Sorted by `(parent, child)`.
    pub edges: Vec<TaxonomyEdge>,
    pub diagnostics: LinkbaseDiagnostics,
}

fn link_names(kind: TaxonomyKind) -> (&'static str, &'static str) {
    match kind {
        TaxonomyKind::Calculation => ("calculationLink", "calculationArc"),
        TaxonomyKind::Presentation => ("presentationLink", "presentationArc"),
    }
}

fn xlink<'a>(node: &roxmltree::Node<'a, '_>, name: &str) -> Option<&'a str> {
    node.attribute((XLINK_NS, name)).or_else(|| {
        node.attributes()
            .find(|a| a.name() == name)
            .map(|a| a.value())
    })
}

/// `...us-gaap-2023.xsd#us-gaap_Revenues` → `us-gaap:Revenues`.
pub fn tag_from_href(href: &str) -> Option<Tag> {
    let fragment = href.rsplit_once('#').map(|(_, f)| f).unwrap_or(href);
    let (prefix, local) = fragment.split_once('_')?;
    Tag::new(format!("{prefix}:{local}")).ok()
}

/// Parses one linkbase file of the declared kind.
pub fn parse_linkbase(bytes: &[u8], kind: TaxonomyKind) -> Result<ParsedLinkbase> {
    let text = to_xml_text(bytes);
    let doc = roxmltree::Document::parse_with_options(
        &text,
        roxmltree::ParsingOptions {
            allow_dtd: true,
            ..Default::default()
        },
    )?;
    let (link_name, arc_name) = link_names(kind);
    let other = match kind {
        TaxonomyKind::Calculation => TaxonomyKind::Presentation,
        TaxonomyKind::Presentation => TaxonomyKind::Calculation,
    };
    let links: Vec<_> = doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == link_name)
        .collect();
    if links.is_empty()
        && doc
            .descendants()
            .any(|n| n.is_element() && n.tag_name().name() == link_names(other).0)
    {
        return Err(Error::WrongLinkbaseKind {
            expected: kind,
            found: other,
        });
    }

    let mut out = ParsedLinkbase::default();
    let mut unique: BTreeMap<(Tag, Tag), (Option<Decimal>, Option<Decimal>)> = BTreeMap::new();
    for link in links {
        // Locator labels are scoped to their extended link.
        let mut locators: HashMap<&str, Vec<Option<Tag>>> = HashMap::new();
        for loc in link.children().filter(|n| n.is_element() && n.tag_name().name() == "loc") {
            if let (Some(label), Some(href)) = (xlink(&loc, "label"), xlink(&loc, "href")) {
                locators.entry(label).or_default().push(tag_from_href(href));
            }
        }
        for arc in link.children().filter(|n| n.is_element() && n.tag_name().name() == arc_name) {
            out.diagnostics.arcs += 1;
            if arc.attribute("use") == Some("prohibited") {
                out.diagnostics.prohibited += 1;
                continue;
            }
            let (Some(from), Some(to)) = (xlink(&arc, "from"), xlink(&arc, "to")) else {
                out.diagnostics.unresolved.push("arc without from/to".into());
                continue;
            };
            let resolve = |label: &str| -> Option<Vec<Tag>> {
                let tags = locators.get(label)?;
                tags.iter().cloned().collect::<Option<Vec<_>>>()
            };
            let (Some(parents), Some(children)) = (resolve(from), resolve(to)) else {
                out.diagnostics
                    .unresolved
                    .push(format!("{from} -> {to}"));
                continue;
            };
            let order = arc.attribute("order").and_then(|o| Decimal::from_str(o.trim()).ok());
            let weight = match kind {
                TaxonomyKind::Calculation => arc.attribute("weight").and_then(|w| Decimal::from_str(w.trim()).ok()),
                TaxonomyKind::Presentation => None,
            };
            for parent in &parents {
                for child in &children {
                    if parent == child {
                        out.diagnostics.self_loops += 1;
                        continue;
                    }
                    match unique.entry((parent.clone(), child.clone())) {
                        std::collections::btree_map::Entry::Vacant(v) => {
                            v.insert((order, weight));
                        }
                        std::collections::btree_map::Entry::Occupied(mut o) => {
                            out.diagnostics.duplicates += 1;
                            // Keep the smallest attributes so the result does
                            // not depend on arc order.
                            let cur = o.get_mut();
                            cur.0 = min_opt(cur.0, order);
                            cur.1 = min_opt(cur.1, weight);
                        }
                    }
                }
            }
        }
    }
    out.edges = unique
        .into_iter()
        .map(|((parent, child), (order_hint, weight))| TaxonomyEdge {
            parent,
            child,
            kind,
            order_hint,
            weight,
        })
        .collect();
    Ok(out)
}

fn min_opt(a: Option<Decimal>, b: Option<Decimal>) -> Option<Decimal> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

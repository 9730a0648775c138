//! Snippet segmentation: each numeric fact is attached to its nearest
//! enclosing block element, and that block's whitespace-normalized text
//! becomes the snippet.

use std::collections::{BTreeMap, HashMap};

use roxmltree::{Document, Node, NodeId};

use super::markup::{is_block, is_ix, is_line_break, is_skipped, is_table_markup};
use super::DropReason;

/// Attributes of one `ix:nonFraction` element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFact {
    pub name: String,
    pub context_ref: Option<String>,
    pub unit_ref: Option<String>,
    pub scale: i32,
    pub negative: bool,
    pub format: Option<String>,
    pub nil: bool,
    /// Visible text after whitespace normalization.
    pub text: String,
}

impl RawFact {
    fn from_node(node: &Node<'_, '_>) -> Self {
        let nil = node
            .attributes()
            .any(|a| a.name() == "nil" && a.value().trim() == "true");
        RawFact {
            name: node.attribute("name").unwrap_or_default().trim().to_string(),
            context_ref: node.attribute("contextRef").map(str::to_string),
            unit_ref: node.attribute("unitRef").map(str::to_string),
            scale: node
                .attribute("scale")
                .and_then(|s| s.trim().parse().ok())
                .unwrap_or(0),
            negative: node.attribute("sign").is_some_and(|s| s.trim() == "-"),
            format: node.attribute("format").map(str::to_string),
            nil,
            text: normalize_whitespace(&visible_text(node)),
        }
    }
}

/// A fact located inside a snippet; offsets are character positions in the
/// snippet's normalized text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactAnchor {
    pub fact: RawFact,
    pub start_char: usize,
    pub end_char: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snippet {
    pub text: String,
    pub anchors: Vec<FactAnchor>,
}

/// Snippets in document order plus every fact that could not be placed in one.
#[derive(Debug, Default)]
pub struct Segmentation {
    pub snippets: Vec<Snippet>,
    pub dropped: Vec<(RawFact, DropReason)>,
}

impl Segmentation {
    pub fn fact_count(&self) -> usize {
        self.dropped.len() + self.snippets.iter().map(|s| s.anchors.len()).sum::<usize>()
    }
}

/// Collapses whitespace runs (including no-break spaces) to one space and trims.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn visible_text(node: &Node<'_, '_>) -> String {
    let mut out = String::new();
    for d in node.descendants() {
        if d.is_text() {
            if d.ancestors().take_while(|a| a != node).any(|a| is_skipped(&a)) {
                continue;
            }
            out.push_str(d.text().unwrap_or_default());
        } else if is_line_break(&d) {
            out.push(' ');
        }
    }
    out
}

pub fn segment_snippets(doc: &Document<'_>) -> Segmentation {
    let mut seg = Segmentation::default();
    // Keyed by document position so snippets come out in document order.
    let mut by_block: BTreeMap<usize, (NodeId, Vec<NodeId>)> = BTreeMap::new();

    for node in doc.descendants().filter(|n| is_ix(n, "nonFraction")) {
        let fact = || RawFact::from_node(&node);
        if node.descendants().skip(1).any(|d| is_ix(&d, "nonFraction")) {
            seg.dropped.push((fact(), DropReason::NestedOuter));
            continue;
        }
        let mut block = None;
        let mut reason = None;
        for anc in node.ancestors().skip(1) {
            if is_ix(&anc, "header") {
                reason = Some(DropReason::Hidden);
                break;
            }
            if is_table_markup(&anc) {
                reason = Some(DropReason::InTable);
                break;
            }
            if block.is_none() && is_block(&anc) {
                block = Some(anc.id());
            }
        }
        match (reason, block) {
            (Some(r), _) => seg.dropped.push((fact(), r)),
            (None, None) => seg.dropped.push((fact(), DropReason::Misparsed)),
            (None, Some(b)) => by_block
                .entry(b.get_usize())
                .or_insert_with(|| (b, Vec::new()))
                .1
                .push(node.id()),
        }
    }

    for (_, (block_id, fact_ids)) in by_block {
        let block = doc.get_node(block_id).expect("node id from same document");
        let (text, spans) = render_block(&block, &fact_ids);
        let mut snippet = Snippet {
            text,
            anchors: Vec::with_capacity(fact_ids.len()),
        };
        for id in fact_ids {
            let node = doc.get_node(id).expect("node id from same document");
            let fact = RawFact::from_node(&node);
            match spans.get(&id) {
                Some(&(start, end)) if slice_chars(&snippet.text, start, end) == fact.text => snippet.anchors.push(FactAnchor {
                    fact,
                    start_char: start,
                    end_char: end,
                }),
                // Nil facts render as empty text; keep them so the value
                // stage can tally them.
                None if fact.text.is_empty() => seg.dropped.push((fact, DropReason::Nil)),
                _ => seg.dropped.push((fact, DropReason::Misparsed)),
            }
        }
        snippet.anchors.sort_by_key(|a| a.start_char);
        seg.snippets.push(snippet);
    }
    seg
}

pub(crate) fn slice_chars(s: &str, start: usize, end: usize) -> String {
    s.chars().skip(start).take(end.saturating_sub(start)).collect()
}

/// Normalizing text writer that tracks character offsets.
struct Writer {
    out: String,
    len: usize,
    pending_space: bool,
}

impl Writer {
    fn push_str(&mut self, s: &str, mut on_char: impl FnMut(usize)) {
        for c in s.chars() {
            if c.is_whitespace() {
                if self.len > 0 {
                    self.pending_space = true;
                }
                continue;
            }
            if self.pending_space {
                self.out.push(' ');
                self.len += 1;
                self.pending_space = false;
            }
            on_char(self.len);
            self.out.push(c);
            self.len += 1;
        }
    }

    fn space(&mut self) {
        if self.len > 0 {
            self.pending_space = true;
        }
    }
}

/// Renders a block's text; for each anchored fact, returns the span of its
/// first to last visible character.
fn render_block(block: &Node<'_, '_>, facts: &[NodeId]) -> (String, HashMap<NodeId, (usize, usize)>) {
    let mut w = Writer {
        out: String::new(),
        len: 0,
        pending_space: false,
    };
    let mut spans: HashMap<NodeId, (usize, usize)> = HashMap::new();
    walk(block, block, facts, &mut w, &mut spans);
    (w.out, spans)
}

fn walk(node: &Node<'_, '_>, root: &Node<'_, '_>, facts: &[NodeId], w: &mut Writer, spans: &mut HashMap<NodeId, (usize, usize)>) {
    for child in node.children() {
        if child.is_text() {
            let text = child.text().unwrap_or_default();
            let active: Vec<NodeId> = child
                .ancestors()
                .skip(1)
                .take_while(|a| a != root)
                .filter(|a| facts.contains(&a.id()))
                .map(|a| a.id())
                .collect();
            w.push_str(text, |pos| {
                for id in &active {
                    spans
                        .entry(*id)
                        .and_modify(|s| s.1 = pos + 1)
                        .or_insert((pos, pos + 1));
                }
            });
        } else if child.is_element() {
            if is_skipped(&child) {
                continue;
            }
            let breaks = is_block(&child) || is_line_break(&child) || is_table_markup(&child);
            if breaks {
                w.space();
            }
            walk(&child, root, facts, w, spans);
            if breaks {
                w.space();
            }
        }
    }
}

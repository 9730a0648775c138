//! Bottom-up leaf collapse of a master taxonomy.
//!
//! Each iteration replaces every current leaf that has a parent by that
//! parent. A node therefore disappears in the iteration equal to its height
//! (leaves have height 1), so the mapping at level `n` sends a tag to its
//! nearest ancestor-or-self whose height exceeds `n`, stopping at roots.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Paragraph, Tag, TaxonomyKind, OOS};
use crate::taxonomy::MasterTaxonomy;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseMap {
    pub level: u32,
    pub kind: TaxonomyKind,
    /// Original tag → collapsed tag, total on the source taxonomy.
    pub mapping: BTreeMap<Tag, Tag>,
}

/// Artifact line: `{tag, collapsed_tag, level, kind}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseRecord {
    pub tag: Tag,
    pub collapsed_tag: Tag,
    pub level: u32,
    pub kind: TaxonomyKind,
}

/// What happens to labels the taxonomy does not know.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OosPolicy {
    #[default]
    Keep,
    MapToOos,
}

impl std::str::FromStr for OosPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "keep" => Ok(OosPolicy::Keep),
            "map_to_oos" | "map-to-oos" | "oos" => Ok(OosPolicy::MapToOos),
            other => Err(Error::InvalidInput(format!("unknown OOS policy `{other}`"))),
        }
    }
}

/// Height of every tag: 1 for leaves, 1 + the tallest child otherwise.
pub fn heights(tax: &MasterTaxonomy) -> Result<BTreeMap<Tag, u32>> {
    if let Some(tag) = tax.find_cycle() {
        return Err(Error::Cycle { tag: tag.to_string() });
    }
    let children = tax.children();
    let mut h: BTreeMap<Tag, u32> = BTreeMap::new();
    for leaf in tax.tags().filter(|t| !children.contains_key(t)) {
        for (depth, tag) in tax.root_path(leaf).into_iter().enumerate() {
            let entry = h.entry(tag).or_insert(0);
            *entry = (*entry).max(depth as u32 + 1);
        }
    }
    Ok(h)
}

/// Mapping after `n` collapse iterations.
pub fn collapse(tax: &MasterTaxonomy, n: u32) -> Result<CollapseMap> {
    let h = heights(tax)?;
    let mut mapping = BTreeMap::new();
    for tag in tax.tags() {
        let mut cur = tag;
        while h[cur] <= n {
            match tax.parent(cur) {
                Some(p) => cur = p,
                None => break,
            }
        }
        mapping.insert(tag.clone(), cur.clone());
    }
    Ok(CollapseMap {
        level: n,
        kind: tax.kind,
        mapping,
    })
}

impl CollapseMap {
    pub fn get(&self, label: &str) -> Option<&Tag> {
        let tag = Tag::new(label).ok()?;
        self.mapping.get(&tag)
    }

    pub fn image(&self) -> BTreeSet<&Tag> {
        self.mapping.values().collect()
    }

    pub fn remap_label(&self, label: &str, policy: OosPolicy) -> String {
        match (self.get(label), policy) {
            (Some(t), _) => t.as_str().to_string(),
            (None, OosPolicy::Keep) => label.to_string(),
            (None, OosPolicy::MapToOos) => OOS.to_string(),
        }
    }

    pub fn to_records(&self) -> Vec<CollapseRecord> {
        self.mapping
            .iter()
            .map(|(tag, collapsed)| CollapseRecord {
                tag: tag.clone(),
                collapsed_tag: collapsed.clone(),
                level: self.level,
                kind: self.kind,
            })
            .collect()
    }

    /// Reads artifact lines back; all lines must share one level and kind.
    pub fn from_records(records: &[CollapseRecord], default_kind: TaxonomyKind) -> Result<Self> {
        let (level, kind) = records.first().map(|r| (r.level, r.kind)).unwrap_or((0, default_kind));
        let mut mapping = BTreeMap::new();
        for r in records {
            if r.kind != kind {
                return Err(Error::MixedKinds { first: kind, second: r.kind });
            }
            if r.level != level {
                return Err(Error::InvalidInput(format!(
                    "collapse map mixes levels {level} and {}",
                    r.level
                )));
            }
            mapping.insert(r.tag.clone(), r.collapsed_tag.clone());
        }
        Ok(CollapseMap { level, kind, mapping })
    }
}

/// Rewrites every entity label through `cmap`; other fields are untouched.
pub fn remap_paragraph(mut paragraph: Paragraph, cmap: &CollapseMap, policy: OosPolicy) -> Paragraph {
    for e in &mut paragraph.entities {
        e.label = cmap.remap_label(&e.label, policy);
    }
    paragraph
}

pub fn remap_dataset<'a, I>(paragraphs: I, cmap: &'a CollapseMap, policy: OosPolicy) -> impl Iterator<Item = Paragraph> + 'a
where
    I: IntoIterator<Item = Paragraph>,
    I::IntoIter: 'a,
{
    paragraphs.into_iter().map(move |p| remap_paragraph(p, cmap, policy))
}

/// Distinct labels after remapping unknown labels are kept verbatim.
pub fn unique_label_count<'a>(paragraphs: impl IntoIterator<Item = &'a Paragraph>, cmap: &CollapseMap) -> usize {
    let mut seen = BTreeSet::new();
    for p in paragraphs {
        for e in &p.entities {
            seen.insert(cmap.remap_label(&e.label, OosPolicy::Keep));
        }
    }
    seen.len()
}

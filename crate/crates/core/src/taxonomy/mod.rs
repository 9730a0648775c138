//! Master taxonomies: each tag's parent is the parent it was most often
//! filed under across the corpus.

mod treemap;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

pub use treemap::{treemap, TreemapNode};

use crate::error::{Error, Result};
use crate::linkbase::EdgeRecord;
use crate::model::{Tag, TaxonomyKind};

/// Per-relation filing counts, `count(parent, child)`.
///
/// Counts add, so shards of the edge stream can be counted separately and
/// merged in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeCounts {
    kind: Option<TaxonomyKind>,
    /// child → parent → number of filings with that relation.
    counts: BTreeMap<Tag, BTreeMap<Tag, u64>>,
    parents: BTreeSet<Tag>,
}

impl EdgeCounts {
    pub fn kind(&self) -> Option<TaxonomyKind> {
        self.kind
    }

    pub fn count(&self, parent: &Tag, child: &Tag) -> u64 {
        self.counts
            .get(child)
            .and_then(|m| m.get(parent))
            .copied()
            .unwrap_or(0)
    }

    fn check_kind(&mut self, kind: TaxonomyKind) -> Result<()> {
        match self.kind {
            None => {
                self.kind = Some(kind);
                Ok(())
            }
            Some(k) if k == kind => Ok(()),
            Some(k) => Err(Error::MixedKinds { first: k, second: kind }),
        }
    }

    pub fn add(&mut self, parent: Tag, child: Tag, kind: TaxonomyKind, n: u64) -> Result<()> {
        self.check_kind(kind)?;
        if parent == child || n == 0 {
            return Ok(());
        }
        self.parents.insert(parent.clone());
        *self.counts.entry(child).or_default().entry(parent).or_default() += n;
        Ok(())
    }

    /// Counts interchange records, once per filing per relation.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a EdgeRecord>) -> Result<Self> {
        let mut seen: HashSet<(&str, &Tag, &Tag)> = HashSet::new();
        let mut out = EdgeCounts::default();
        for r in records {
            if seen.insert((r.accession.as_str(), &r.parent, &r.child)) {
                out.add(r.parent.clone(), r.child.clone(), r.kind, 1)?;
            }
        }
        Ok(out)
    }

    pub fn merge(mut self, other: &EdgeCounts) -> Result<Self> {
        if let Some(k) = other.kind {
            self.check_kind(k)?;
        }
        for (child, parents) in &other.counts {
            for (parent, n) in parents {
                self.add(parent.clone(), child.clone(), other.kind.expect("counts imply a kind"), *n)?;
            }
        }
        Ok(self)
    }
}

impl AddAssign<&EdgeCounts> for EdgeCounts {
    /// Panics on mixed kinds; use [`EdgeCounts::merge`] to get an error instead.
    fn add_assign(&mut self, rhs: &EdgeCounts) {
        *self = std::mem::take(self).merge(rhs).expect("edge counts of one kind");
    }
}

/// Tag forest for one relationship kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterTaxonomy {
    pub kind: TaxonomyKind,
    /// child → (parent, support).
    pub parent_of: BTreeMap<Tag, (Tag, u64)>,
    pub roots: BTreeSet<Tag>,
}

/// Artifact line: `{child, parent, kind, support}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaxonomyRecord {
    pub child: Tag,
    pub parent: Tag,
    pub kind: TaxonomyKind,
    pub support: u64,
}

/// Which filings an exported taxonomy is built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Merged,
    PerCompany(String),
}

impl MasterTaxonomy {
    pub fn empty(kind: TaxonomyKind) -> Self {
        MasterTaxonomy {
            kind,
            parent_of: BTreeMap::new(),
            roots: BTreeSet::new(),
        }
    }

    /// Argmax parent per child (ties to the lexicographically smallest parent),
    /// then breaks any cycles the independent choices created.
    pub fn from_counts(counts: &EdgeCounts, default_kind: TaxonomyKind) -> Self {
        let kind = counts.kind.unwrap_or(default_kind);
        let mut parent_of = BTreeMap::new();
        for (child, parents) in &counts.counts {
            let mut best: Option<(&Tag, u64)> = None;
            for (parent, n) in parents {
                if best.is_none_or(|(_, m)| *n > m) {
                    best = Some((parent, *n));
                }
            }
            if let Some((parent, n)) = best {
                parent_of.insert(child.clone(), (parent.clone(), n));
            }
        }
        break_cycles(&mut parent_of);
        let mut roots: BTreeSet<Tag> = counts.parents.iter().filter(|p| !parent_of.contains_key(*p)).cloned().collect();
        roots.extend(counts.counts.keys().filter(|c| !parent_of.contains_key(*c)).cloned());
        MasterTaxonomy { kind, parent_of, roots }
    }

    pub fn parent(&self, tag: &Tag) -> Option<&Tag> {
        self.parent_of.get(tag).map(|(p, _)| p)
    }

    pub fn contains(&self, tag: &Tag) -> bool {
        self.parent_of.contains_key(tag) || self.roots.contains(tag)
    }

    pub fn tags(&self) -> impl Iterator<Item = &Tag> {
        self.parent_of.keys().chain(self.roots.iter())
    }

    pub fn len(&self) -> usize {
        self.parent_of.len() + self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `tag`, its parent, grandparent, ... up to the root.
    pub fn root_path(&self, tag: &Tag) -> Vec<Tag> {
        let mut path = vec![tag.clone()];
        let mut cur = tag;
        while let Some(p) = self.parent(cur) {
            if path.len() > self.parent_of.len() + 1 {
                break;
            }
            path.push(p.clone());
            cur = p;
        }
        path
    }

    pub fn children(&self) -> BTreeMap<&Tag, Vec<&Tag>> {
        let mut out: BTreeMap<&Tag, Vec<&Tag>> = BTreeMap::new();
        for (child, (parent, _)) in &self.parent_of {
            out.entry(parent).or_default().push(child);
        }
        out
    }

    /// First tag found on a cycle, if any.
    pub fn find_cycle(&self) -> Option<Tag> {
        let mut done: HashSet<&Tag> = HashSet::new();
        for start in self.parent_of.keys() {
            let mut on_path: HashSet<&Tag> = HashSet::new();
            let mut cur = start;
            loop {
                if done.contains(cur) {
                    break;
                }
                if !on_path.insert(cur) {
                    return Some(cur.clone());
                }
                match self.parent(cur) {
                    Some(p) => cur = p,
                    None => break,
                }
            }
            done.extend(on_path);
        }
        None
    }

    pub fn to_records(&self) -> Vec<TaxonomyRecord> {
        self.parent_of
            .iter()
            .map(|(child, (parent, support))| TaxonomyRecord {
                child: child.clone(),
                parent: parent.clone(),
                kind: self.kind,
                support: *support,
            })
            .collect()
    }

    /// Rebuilds a taxonomy from artifact lines; rejects cycles and mixed kinds.
    pub fn from_records(records: &[TaxonomyRecord], default_kind: TaxonomyKind) -> Result<Self> {
        let kind = records.first().map(|r| r.kind).unwrap_or(default_kind);
        let mut tax = MasterTaxonomy::empty(kind);
        for r in records {
            if r.kind != kind {
                return Err(Error::MixedKinds { first: kind, second: r.kind });
            }
            if r.child == r.parent {
                return Err(Error::Cycle { tag: r.child.to_string() });
            }
            tax.parent_of.insert(r.child.clone(), (r.parent.clone(), r.support));
        }
        tax.roots = records
            .iter()
            .map(|r| &r.parent)
            .filter(|p| !tax.parent_of.contains_key(*p))
            .cloned()
            .collect();
        if let Some(tag) = tax.find_cycle() {
            return Err(Error::Cycle { tag: tag.to_string() });
        }
        Ok(tax)
    }
}

/// Removes one edge from every cycle: the lowest-support edge, ties going to
/// the lexicographically greatest child.
fn break_cycles(parent_of: &mut BTreeMap<Tag, (Tag, u64)>) {
    let mut state: BTreeMap<Tag, u8> = BTreeMap::new(); // 1 = on current path, 2 = finished
    let starts: Vec<Tag> = parent_of.keys().cloned().collect();
    let mut to_remove: Vec<Tag> = Vec::new();
    for start in starts {
        if state.contains_key(&start) {
            continue;
        }
        let mut path: Vec<Tag> = Vec::new();
        let mut cur = start;
        loop {
            match state.get(&cur) {
                Some(2) => break,
                Some(1) => {
                    let pos = path.iter().position(|t| *t == cur).expect("node on path");
                    let victim = path[pos..]
                        .iter()
                        .min_by(|a, b| {
                            let sa = parent_of[*a].1;
                            let sb = parent_of[*b].1;
                            sa.cmp(&sb).then_with(|| b.cmp(a))
                        })
                        .expect("cycle is nonempty")
                        .clone();
                    to_remove.push(victim);
                    break;
                }
                _ => {}
            }
            state.insert(cur.clone(), 1);
            path.push(cur.clone());
            match parent_of.get(&cur) {
                Some((p, _)) => cur = p.clone(),
                None => break,
            }
        }
        for t in path {
            state.insert(t, 2);
        }
    }
    for t in to_remove {
        parent_of.remove(&t);
    }
}

/// Builds the master taxonomy of one relationship kind from interchange records.
pub fn build_master<'a>(records: impl IntoIterator<Item = &'a EdgeRecord>, default_kind: TaxonomyKind) -> Result<MasterTaxonomy> {
    let counts = EdgeCounts::from_records(records)?;
    Ok(MasterTaxonomy::from_counts(&counts, default_kind))
}

/// Merged or single-company taxonomy from tagged edge records.
pub fn export_taxonomy(records: &[EdgeRecord], kind: TaxonomyKind, scope: &Scope) -> Result<MasterTaxonomy> {
    match scope {
        Scope::Merged => build_master(records, kind),
        Scope::PerCompany(cik) => {
            let wanted = crate::edgar::index::pad_cik(cik);
            let selected: Vec<&EdgeRecord> = records
                .iter()
                .filter(|r| r.cik.as_deref().map(crate::edgar::index::pad_cik).as_deref() == Some(wanted.as_str()))
                .collect();
            if selected.is_empty() {
                return Err(Error::UnknownCik { cik: cik.clone() });
            }
            build_master(selected, kind)
        }
    }
}

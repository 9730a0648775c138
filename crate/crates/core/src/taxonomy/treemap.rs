use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MasterTaxonomy;
use crate::model::Tag;

/// Nested node for treemap plotting tools.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreemapNode {
    pub name: String,
    /// Occurrences of this exact tag.
    pub count: u64,
    /// `count` plus the totals of all included descendants.
    pub total: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreemapNode>,
}

/// Forest containing every root, the `top_k` most frequent tags (ties broken
/// lexicographically) and all of their ancestors.
pub fn treemap(tax: &MasterTaxonomy, frequencies: &BTreeMap<String, u64>, top_k: usize) -> Vec<TreemapNode> {
    let freq = |t: &str| frequencies.get(t).copied().unwrap_or(0);

    let mut ranked: BTreeSet<String> = tax.tags().map(|t| t.as_str().to_string()).collect();
    ranked.extend(frequencies.keys().cloned());
    let mut ranked: Vec<String> = ranked.into_iter().collect();
    ranked.sort_by(|a, b| freq(b).cmp(&freq(a)).then_with(|| a.cmp(b)));

    let mut included: BTreeSet<String> = tax.roots.iter().map(|t| t.as_str().to_string()).collect();
    for name in ranked.into_iter().take(top_k) {
        match Tag::new(name.clone()) {
            Ok(tag) if tax.contains(&tag) => included.extend(tax.root_path(&tag).into_iter().map(|t| t.as_str().to_string())),
            _ => {
                included.insert(name);
            }
        }
    }

    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut tops: Vec<&str> = Vec::new();
    for name in &included {
        let parent = Tag::new(name.clone())
            .ok()
            .and_then(|t| tax.parent(&t).map(|p| p.as_str().to_string()));
        match parent.as_deref().and_then(|p| included.get(p)) {
            Some(p) => children.entry(p.as_str()).or_default().push(name),
            None => tops.push(name),
        }
    }

    fn build(name: &str, children: &BTreeMap<&str, Vec<&str>>, freq: &dyn Fn(&str) -> u64) -> TreemapNode {
        let kids: Vec<TreemapNode> = children
            .get(name)
            .map(|v| v.iter().map(|c| build(c, children, freq)).collect())
            .unwrap_or_default();
        let count = freq(name);
        TreemapNode {
            name: name.to_string(),
            count,
            total: count + kids.iter().map(|k| k.total).sum::<u64>(),
            children: kids,
        }
    }

    tops.into_iter().map(|t| build(t, &children, &freq)).collect()
}

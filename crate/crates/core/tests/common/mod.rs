#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use kpi_forge::taxonomy::MasterTaxonomy;
use kpi_forge::{Tag, TaxonomyKind};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn store() -> PathBuf {
    fixtures().join("store")
}

pub fn tag(name: &str) -> Tag {
    Tag::new(name).unwrap()
}

/// Random forest over at most `max_nodes` tags: each node picks a parent
/// among earlier nodes or becomes a root; names are shuffled so that name
/// order says nothing about depth.
pub fn random_forest(rng: &mut impl Rng, max_nodes: usize) -> MasterTaxonomy {
    let n = rng.gen_range(1..=max_nodes);
    let mut names: Vec<String> = (0..n).map(|i| format!("t:N{i:02}")).collect();
    names.shuffle(rng);
    let mut tax = MasterTaxonomy::empty(TaxonomyKind::Presentation);
    for i in 0..n {
        let me = tag(&names[i]);
        if i == 0 || rng.gen_bool(0.15) {
            tax.roots.insert(me);
        } else {
            let p = rng.gen_range(0..i);
            tax.parent_of.insert(me, (tag(&names[p]), 1));
        }
    }
    tax
}

/// Literal leaf-replacement loop: each round finds the current leaves and
/// replaces every leaf that has a parent by that parent, carrying along all
/// original tags that had been mapped to it.
pub fn simulate_collapse(tax: &MasterTaxonomy, n: u32) -> BTreeMap<Tag, Tag> {
    let mut alive: BTreeSet<Tag> = tax.tags().cloned().collect();
    let mut mapping: BTreeMap<Tag, Tag> = alive.iter().map(|t| (t.clone(), t.clone())).collect();
    for _ in 0..n {
        let has_child: BTreeSet<&Tag> = alive.iter().filter_map(|t| tax.parent(t)).collect();
        let leaves: Vec<Tag> = alive
            .iter()
            .filter(|t| !has_child.contains(t))
            .cloned()
            .collect();
        let mut replaced: BTreeMap<Tag, Tag> = BTreeMap::new();
        for leaf in leaves {
            if let Some(p) = tax.parent(&leaf) {
                replaced.insert(leaf, p.clone());
            }
        }
        for (leaf, parent) in &replaced {
            alive.remove(leaf);
            for target in mapping.values_mut() {
                if target == leaf {
                    *target = parent.clone();
                }
            }
        }
    }
    mapping
}

use std::path::Path;

use kpi_forge::config::PipelineConfig;
use kpi_forge::dataset::{Split, Task};
use kpi_forge::granularity::OosPolicy;
use kpi_forge::pipeline;
use kpi_forge::taxonomy::Scope;
use kpi_forge::Paragraph;

/// Every artifact the fixture run writes, relative to its work directory.
pub const ARTIFACTS: &[&str] = &[
    "paragraphs.jsonl",
    "edges_pre.jsonl",
    "edges_cal.jsonl",
    "master_pre.jsonl",
    "master_cal.jsonl",
    "cmap_pre_1.jsonl",
    "remapped.jsonl",
    "splits/train.jsonl",
    "splits/dev.jsonl",
    "splits/test.jsonl",
    "splits/split_assignments.jsonl",
    "splits/split_report.json",
    "lite/train.jsonl",
    "lite/dev.jsonl",
    "lite/test.jsonl",
    "tasks/classification_test.jsonl",
    "tasks/sequence_test.jsonl",
    "stats.json",
    "predictions.jsonl",
    "eval.json",
    "treemap.json",
];

/// Runs every offline stage over the bundled store into `work`.
pub fn run_fixture_pipeline(work: &Path) -> kpi_forge::Result<()> {
    let cfg = PipelineConfig::default();
    let w = |name: &str| work.join(name);

    pipeline::extract(&store(), &w("paragraphs.jsonl"), 2)?;
    pipeline::linkbase(&store(), TaxonomyKind::Presentation, &w("edges_pre.jsonl"))?;
    pipeline::linkbase(&store(), TaxonomyKind::Calculation, &w("edges_cal.jsonl"))?;
    pipeline::build_taxonomy(&w("edges_pre.jsonl"), TaxonomyKind::Presentation, &Scope::Merged, &w("master_pre.jsonl"))?;
    pipeline::build_taxonomy(&w("edges_cal.jsonl"), TaxonomyKind::Calculation, &Scope::Merged, &w("master_cal.jsonl"))?;
    pipeline::collapse(&w("master_pre.jsonl"), 1, TaxonomyKind::Presentation, &w("cmap_pre_1.jsonl"))?;
    pipeline::remap(&w("paragraphs.jsonl"), &w("cmap_pre_1.jsonl"), OosPolicy::Keep, &w("remapped.jsonl"))?;
    pipeline::split(&w("paragraphs.jsonl"), &cfg.cutoffs, cfg.seed, &w("splits"))?;
    for s in Split::ALL {
        let name = format!("{s}.jsonl");
        pipeline::lite(&w("splits").join(&name), None, cfg.lite_threshold, &w("lite").join(&name))?;
    }
    let test = w("splits/test.jsonl");
    pipeline::tasks(&test, None, Task::TextClassification, None, &w("tasks/classification_test.jsonl"))?;
    pipeline::tasks(&test, Some(&w("splits/train.jsonl")), Task::SequenceLabeling, Some(3), &w("tasks/sequence_test.jsonl"))?;
    let stats_inputs: Vec<(String, std::path::PathBuf)> = Split::ALL
        .iter()
        .flat_map(|s| {
            [
                (s.to_string(), w("splits").join(format!("{s}.jsonl"))),
                (format!("lite_{s}"), w("lite").join(format!("{s}.jsonl"))),
            ]
        })
        .collect();
    pipeline::stats(&stats_inputs, &w("stats.json"))?;
    write_perfect_predictions(&test, &w("predictions.jsonl"));
    pipeline::eval(&test, &w("predictions.jsonl"), &w("eval.json"))?;
    pipeline::treemap(&w("master_pre.jsonl"), &w("paragraphs.jsonl"), 5, &w("treemap.json"))?;
    Ok(())
}

/// Prediction lines that copy the gold entities of `gold`.
pub fn write_perfect_predictions(gold: &Path, out: &Path) {
    let paragraphs: Vec<Paragraph> = kpi_forge::jsonl::read(gold).unwrap();
    let mut text = String::new();
    for p in &paragraphs {
        let entities: Vec<serde_json::Value> = p
            .entities
            .iter()
            .map(|e| {
                serde_json::json!({
                    "label": e.label,
                    "start_date_for_period": e.period_start.to_string(),
                    "end_date_for_period": e.period_end.to_string(),
                    "currency_/_unit": e.unit,
                    "value": e.value.to_string(),
                })
            })
            .collect();
        text.push_str(&serde_json::json!({ "entities": entities }).to_string());
        text.push('\n');
    }
    std::fs::write(out, text).unwrap();
}

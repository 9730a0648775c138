//! File-backed pipeline stages. Each stage reads its inputs from disk,
//! writes its outputs to disk and returns a summary; rerunning a stage on
//! unchanged inputs rewrites identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataset::{self, CorpusStats, Cutoffs, LabelVocabulary, LiteMapping, Split, Task};
use crate::edgar::store::{self, StoredFiling};
use crate::edgar::{DocumentRole, EdgarClient};
use crate::error::{Error, Result};
use crate::evalkit::{self, EvalReport};
use crate::granularity::{self, CollapseMap, CollapseRecord, OosPolicy};
use crate::ixbrl::{self, FactTally};
use crate::jsonl;
use crate::linkbase::{self, EdgeRecord, LinkbaseDiagnostics};
use crate::model::{Paragraph, TaxonomyKind};
use crate::taxonomy::{self, MasterTaxonomy, Scope, TaxonomyRecord};

/// Process exit status for an error: 2 for configuration problems, 3 for a
/// missing upstream artifact, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) => 2,
        Error::MissingArtifact { .. } => 3,
        _ => 1,
    }
}

/// Machine-readable error line for stderr.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub exit_code: i32,
}

impl ErrorRecord {
    pub fn new(err: &Error) -> Self {
        let (kind, stage, path) = match err {
            Error::InvalidConfig(_) => ("invalid_config", None, None),
            Error::MissingArtifact { stage, path } => ("missing_artifact", Some(stage.clone()), Some(path.clone())),
            Error::Io { path, .. } => ("io", None, Some(path.clone())),
            Error::Record { path, .. } => ("malformed_record", None, Some(path.clone())),
            Error::Network { .. } | Error::HttpStatus { .. } => ("network", None, None),
            Error::Cycle { .. } => ("cycle", None, None),
            _ => ("error", None, None),
        };
        ErrorRecord {
            error: kind.to_string(),
            message: err.to_string(),
            stage,
            path,
            exit_code: exit_code(err),
        }
    }
}

fn require(path: &Path, stage: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingArtifact {
            stage: stage.to_string(),
            path: path.to_path_buf(),
        })
    }
}

fn read_paragraphs(path: &Path, stage: &str) -> Result<Vec<Paragraph>> {
    require(path, stage)?;
    jsonl::read(path)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub accession_number: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FetchSummary {
    pub listed: usize,
    pub fetched: usize,
    pub downloads: usize,
    pub index_warnings: usize,
    pub failures: Vec<StageFailure>,
}

/// Lists the configured window and downloads every filing into the store.
pub fn fetch(cfg: &PipelineConfig, client: &EdgarClient) -> Result<FetchSummary> {
    let forms: BTreeSet<_> = cfg.edgar.forms.iter().copied().collect();
    let listing = client.list_filings(cfg.window.start, cfg.window.end, &forms)?;
    for w in &listing.warnings {
        log::warn!("{}:{}: {}", w.source, w.line, w.message);
    }
    let results = client.fetch_all(&listing.refs, &cfg.store, cfg.workers);
    let mut summary = FetchSummary {
        listed: listing.refs.len(),
        index_warnings: listing.warnings.len(),
        ..FetchSummary::default()
    };
    for (filing, r) in listing.refs.iter().zip(results) {
        match r {
            Ok(bundle) => {
                summary.fetched += 1;
                summary.downloads += bundle.downloads;
            }
            Err(e) => summary.failures.push(StageFailure {
                accession_number: filing.accession_number.clone(),
                message: e.to_string(),
            }),
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractSummary {
    pub filings: usize,
    pub paragraphs: usize,
    pub tally: FactTally,
    pub failures: Vec<StageFailure>,
}

fn extract_one(filing: &StoredFiling) -> Result<ixbrl::ParsedDocument> {
    let path = filing.path(DocumentRole::PrimaryIxbrl).ok_or_else(|| Error::MissingArtifact {
        stage: "fetch".into(),
        path: filing.dir.join("primary.htm"),
    })?;
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    ixbrl::parse_document(&bytes, &filing.meta)
}

/// Parses every stored primary document into `out` (paragraph lines) in
/// (cik, accession) order. Documents that fail are reported, not fatal.
pub fn extract(store_root: &Path, out: &Path, workers: usize) -> Result<ExtractSummary> {
    let filings = store::scan(store_root)?;
    let chunk = filings.len().div_ceil(workers.max(1)).max(1);
    let results: Vec<Result<ixbrl::ParsedDocument>> = std::thread::scope(|s| {
        let handles: Vec<_> = filings
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(extract_one).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("extract worker panicked"))
            .collect()
    });

    let mut summary = ExtractSummary {
        filings: filings.len(),
        ..ExtractSummary::default()
    };
    let mut paragraphs = Vec::new();
    for (filing, r) in filings.iter().zip(results) {
        match r {
            Ok(doc) => {
                summary.tally += &doc.tally;
                paragraphs.extend(doc.paragraphs);
            }
            Err(e) => summary.failures.push(StageFailure {
                accession_number: filing.meta.accession_number.clone(),
                message: e.to_string(),
            }),
        }
    }
    summary.paragraphs = jsonl::write(out, &paragraphs)?;
    Ok(summary)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkbaseSummary {
    pub filings: usize,
    pub without_linkbase: usize,
    pub edges: usize,
    pub diagnostics: LinkbaseDiagnostics,
    pub failures: Vec<StageFailure>,
}

/// Reads one linkbase kind from every stored filing into edge records.
pub fn linkbase(store_root: &Path, kind: TaxonomyKind, out: &Path) -> Result<LinkbaseSummary> {
    let role = match kind {
        TaxonomyKind::Calculation => DocumentRole::CalculationLinkbase,
        TaxonomyKind::Presentation => DocumentRole::PresentationLinkbase,
    };
    let filings = store::scan(store_root)?;
    let mut summary = LinkbaseSummary {
        filings: filings.len(),
        ..LinkbaseSummary::default()
    };
    let mut records = Vec::new();
    for filing in &filings {
        let Some(path) = filing.path(role) else {
            summary.without_linkbase += 1;
            continue;
        };
        let parsed = std::fs::read(&path)
            .map_err(|e| Error::io(&path, e))
            .and_then(|bytes| linkbase::parse_linkbase(&bytes, kind));
        match parsed {
            Ok(p) => {
                let d = &mut summary.diagnostics;
                d.arcs += p.diagnostics.arcs;
                d.duplicates += p.diagnostics.duplicates;
                d.self_loops += p.diagnostics.self_loops;
                d.prohibited += p.diagnostics.prohibited;
                d.unresolved.extend(p.diagnostics.unresolved);
                records.extend(
                    p.edges
                        .iter()
                        .map(|e| EdgeRecord::from_edge(e, &filing.meta.accession_number, Some(&filing.meta.cik))),
                );
            }
            Err(e) => summary.failures.push(StageFailure {
                accession_number: filing.meta.accession_number.clone(),
                message: e.to_string(),
            }),
        }
    }
    summary.diagnostics.unresolved.sort();
    summary.diagnostics.unresolved.dedup();
    summary.edges = jsonl::write(out, &records)?;
    Ok(summary)
}

/// Builds the master (or one company's) taxonomy from edge records.
pub fn build_taxonomy(edges: &Path, kind: TaxonomyKind, scope: &Scope, out: &Path) -> Result<MasterTaxonomy> {
    require(edges, "linkbase")?;
    let records: Vec<EdgeRecord> = jsonl::read(edges)?;
    let tax = taxonomy::export_taxonomy(&records, kind, scope)?;
    jsonl::write(out, &tax.to_records())?;
    Ok(tax)
}

pub fn read_taxonomy(path: &Path, default_kind: TaxonomyKind) -> Result<MasterTaxonomy> {
    require(path, "taxonomy")?;
    let records: Vec<TaxonomyRecord> = jsonl::read(path)?;
    MasterTaxonomy::from_records(&records, default_kind)
}

pub fn collapse(taxonomy_path: &Path, level: u32, default_kind: TaxonomyKind, out: &Path) -> Result<CollapseMap> {
    let tax = read_taxonomy(taxonomy_path, default_kind)?;
    let cmap = granularity::collapse(&tax, level)?;
    jsonl::write(out, &cmap.to_records())?;
    Ok(cmap)
}

pub fn read_collapse_map(path: &Path) -> Result<CollapseMap> {
    require(path, "collapse")?;
    let records: Vec<CollapseRecord> = jsonl::read(path)?;
    CollapseMap::from_records(&records, TaxonomyKind::Presentation)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemapSummary {
    pub paragraphs: usize,
    pub unique_labels_before: usize,
    pub unique_labels_after: usize,
}

pub fn remap(data: &Path, cmap_path: &Path, policy: OosPolicy, out: &Path) -> Result<RemapSummary> {
    let paragraphs = read_paragraphs(data, "extract")?;
    let cmap = read_collapse_map(cmap_path)?;
    let identity = CollapseMap {
        level: 0,
        kind: cmap.kind,
        mapping: BTreeMap::new(),
    };
    let before = granularity::unique_label_count(&paragraphs, &identity);
    let remapped: Vec<Paragraph> = granularity::remap_dataset(paragraphs, &cmap, policy).collect();
    let after = granularity::unique_label_count(&remapped, &identity);
    Ok(RemapSummary {
        paragraphs: jsonl::write(out, &remapped)?,
        unique_labels_before: before,
        unique_labels_after: after,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub filings: BTreeMap<Split, usize>,
    pub paragraphs: BTreeMap<Split, usize>,
    pub excluded: Vec<dataset::SplitDiagnostic>,
    pub dev_companies: usize,
    pub dev_companies_in_test: usize,
}

pub const ASSIGNMENTS_FILE: &str = "split_assignments.jsonl";
pub const SPLIT_REPORT_FILE: &str = "split_report.json";

pub fn split_file(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("{split}.jsonl"))
}

/// Writes `train/dev/test.jsonl`, the assignments and a report into `out_dir`.
pub fn split(data: &Path, cutoffs: &Cutoffs, seed: u64, out_dir: &Path) -> Result<SplitReport> {
    let paragraphs = read_paragraphs(data, "extract")?;
    let outcome = dataset::split(&paragraphs, cutoffs, seed)?;

    let mut companies: BTreeMap<Split, BTreeSet<String>> = BTreeMap::new();
    let lookup = outcome.lookup();
    for p in &paragraphs {
        if let Some(s) = lookup.get(p.accession_number.as_str()) {
            companies.entry(*s).or_default().insert(p.company_name.clone());
        }
    }
    let dev = companies.remove(&Split::Dev).unwrap_or_default();
    let test = companies.remove(&Split::Test).unwrap_or_default();

    let parts = dataset::partition(paragraphs, &outcome);
    let mut counts = BTreeMap::new();
    for (split, rows) in &parts {
        counts.insert(*split, jsonl::write(&split_file(out_dir, *split), rows)?);
    }
    jsonl::write(&out_dir.join(ASSIGNMENTS_FILE), &outcome.assignments)?;
    let report = SplitReport {
        filings: outcome.counts(),
        paragraphs: counts,
        excluded: outcome.excluded,
        dev_companies: dev.len(),
        dev_companies_in_test: dev.intersection(&test).count(),
    };
    jsonl::write_json(&out_dir.join(SPLIT_REPORT_FILE), &report)?;
    Ok(report)
}

pub fn lite(data: &Path, mapping: Option<&Path>, threshold: f64, out: &Path) -> Result<usize> {
    let paragraphs = read_paragraphs(data, "split")?;
    let mapping = match mapping {
        Some(p) => LiteMapping::load(p)?,
        None => LiteMapping::default(),
    };
    if mapping.is_empty() {
        return Err(Error::InvalidInput("lite mapping is empty".into()));
    }
    let kept: Vec<Paragraph> = dataset::build_lite(paragraphs, &mapping, threshold).collect();
    jsonl::write(out, &kept)
}

pub fn tasks(data: &Path, train: Option<&Path>, task: Task, top_k: Option<usize>, out: &Path) -> Result<usize> {
    let paragraphs = read_paragraphs(data, "split")?;
    let vocabulary = match (task, train) {
        (Task::SequenceLabeling, Some(train)) => LabelVocabulary::from_train(&read_paragraphs(train, "split")?, top_k),
        (Task::SequenceLabeling, None) if top_k.is_some() => {
            return Err(Error::InvalidInput(
                "sequence labelling with a label cut needs the train split".into(),
            ))
        }
        _ => LabelVocabulary::All,
    };
    let records = dataset::prepare_task_labels(&paragraphs, task, &vocabulary);
    jsonl::write(out, &records)
}

/// Statistics per named input file.
pub fn stats(inputs: &[(String, PathBuf)], out: &Path) -> Result<BTreeMap<String, CorpusStats<f64>>> {
    let mut all = BTreeMap::new();
    for (name, path) in inputs {
        let paragraphs = read_paragraphs(path, "split")?;
        all.insert(name.clone(), dataset::compute_stats::<f64>(&paragraphs));
    }
    jsonl::write_json(out, &all)?;
    Ok(all)
}

pub fn eval(gold: &Path, predictions: &Path, out: &Path) -> Result<EvalReport<f64>> {
    let gold = read_paragraphs(gold, "split")?;
    require(predictions, "predictions")?;
    let preds = evalkit::read_predictions(predictions)?;
    let report = evalkit::evaluate(&gold, &preds)?.report::<f64>();
    jsonl::write_json(out, &report)?;
    Ok(report)
}

pub fn treemap(taxonomy_path: &Path, data: &Path, top_k: usize, out: &Path) -> Result<Vec<taxonomy::TreemapNode>> {
    let tax = read_taxonomy(taxonomy_path, TaxonomyKind::Presentation)?;
    let paragraphs = read_paragraphs(data, "extract")?;
    let mut freq: BTreeMap<String, u64> = BTreeMap::new();
    for p in &paragraphs {
        for e in &p.entities {
            *freq.entry(e.label.clone()).or_default() += 1;
        }
    }
    let nodes = taxonomy::treemap(&tax, &freq, top_k);
    jsonl::write_json(out, &nodes)?;
    Ok(nodes)
}

//! `kpi-forge`: runs the dataset pipeline one stage at a time.
//!
//! Stage outputs default to fixed names under the configured work directory,
//! so `kpi-forge extract && kpi-forge split && ...` chains without flags.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kpi_forge::config::PipelineConfig;
use kpi_forge::dataset::{Split, Task};
use kpi_forge::edgar::{EdgarClient, EdgarConfig, RetryPolicy};
use kpi_forge::granularity::OosPolicy;
use kpi_forge::pipeline::{self, ErrorRecord};
use kpi_forge::taxonomy::Scope;
use kpi_forge::{Error, Result, TaxonomyKind};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "kpi-forge", version, about = "Build and score iXBRL KPI extraction datasets")]
struct Cli {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, global = true, env = "KPI_CONFIG")]
    config: Option<PathBuf>,
    /// Overrides `store` from the configuration.
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// Overrides `work_dir` from the configuration.
    #[arg(long, global = true)]
    work_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List filings in the configured window and download them into the store.
    Fetch,
    /// Extract paragraphs and entities from every stored filing.
    Extract {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read parent-child edges from one linkbase kind.
    Linkbase {
        #[arg(long, default_value = "pre")]
        kind: TaxonomyKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the master taxonomy from edge records.
    Taxonomy {
        #[arg(long, default_value = "pre")]
        kind: TaxonomyKind,
        /// Restrict to one company's filings.
        #[arg(long)]
        cik: Option<String>,
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the level-n collapse map of a taxonomy.
    Collapse {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite entity labels through a collapse map.
    Remap {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        /// `keep` or `oos` for labels outside the taxonomy.
        #[arg(long, default_value = "keep")]
        oos: OosPolicy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assign filings to train, dev and test.
    Split {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Keep paragraphs dominated by the lite KPI categories.
    Lite {
        /// One split; all three when omitted.
        #[arg(long)]
        split: Option<Split>,
        /// CSV with `tag,category` rows; the bundled table when omitted.
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    /// Write per-task label records for one split.
    Tasks {
        #[arg(long, default_value = "sequence_labeling")]
        task: Task,
        #[arg(long, default_value = "test")]
        split: Split,
        /// Read splits from `lite/` instead of `splits/`.
        #[arg(long)]
        lite: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus statistics for named JSONL files.
    Stats {
        /// `name=path`, repeatable; every split and lite split when omitted.
        #[arg(long = "input", value_parser = parse_named)]
        inputs: Vec<(String, PathBuf)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against gold paragraphs.
    Eval {
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tag frequency tree for the most frequent tags.
    Treemap {
        #[arg(long, default_value_t = 20)]
        top_k: usize,
        #[arg(long, default_value = "pre")]
        kind: TaxonomyKind,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct LevelArgs {
    /// Collapse level; the configured level when omitted.
    #[arg(long)]
    level: Option<u32>,
    /// Taxonomy kind; the configured kind when omitted.
    #[arg(long)]
    kind: Option<TaxonomyKind>,
}

fn parse_named(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected name=path, got `{s}`")),
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cfg.apply_env(|k| std::env::var(k).ok())?;
    if let Some(store) = &cli.store {
        cfg.store = store.clone();
    }
    if let Some(work) = &cli.work_dir {
        cfg.work_dir = work.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print<T: Serialize>(summary: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(summary)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let work = |name: &str| cfg.work_dir.join(name);
    let pick = |given: &Option<PathBuf>, default: &str| given.clone().unwrap_or_else(|| work(default));
    let level_of = |a: &LevelArgs| (a.level.unwrap_or(cfg.collapse_level), a.kind.unwrap_or(cfg.taxonomy_kind));

    match &cli.command {
        Command::Fetch => {
            if cfg.edgar.ident.trim().is_empty() {
                return Err(Error::InvalidConfig(
                    "set edgar.ident in the configuration or EDGAR_IDENT in the environment".into(),
                ));
            }
            let client = EdgarClient::with_http(EdgarConfig {
                ident: cfg.edgar.ident.clone(),
                requests_per_second: cfg.edgar.requests_per_second,
                base_url: cfg.edgar.base_url.clone(),
                retry: RetryPolicy::default(),
            })?;
            print(&pipeline::fetch(&cfg, &client)?)
        }
        Command::Extract { out } => print(&pipeline::extract(&cfg.store, &pick(out, "paragraphs.jsonl"), cfg.workers)?),
        Command::Linkbase { kind, out } => {
            let out = pick(out, &format!("edges_{}.jsonl", kind.short()));
            print(&pipeline::linkbase(&cfg.store, *kind, &out)?)
        }
        Command::Taxonomy { kind, cik, edges, out } => {
            let edges = pick(edges, &format!("edges_{}.jsonl", kind.short()));
            let (scope, default_out) = match cik {
                Some(c) => (Scope::PerCompany(c.clone()), format!("master_{}_{c}.jsonl", kind.short())),
                None => (Scope::Merged, format!("master_{}.jsonl", kind.short())),
            };
            let tax = pipeline::build_taxonomy(&edges, *kind, &scope, &pick(out, &default_out))?;
            print(&serde_json::json!({
                "kind": kind,
                "tags": tax.tags().count(),
                "roots": tax.roots.len(),
                "edges": tax.parent_of.len(),
            }))
        }
        Command::Collapse { level, taxonomy, out } => {
            let (n, kind) = level_of(level);
            let taxonomy = pick(taxonomy, &format!("master_{}.jsonl", kind.short()));
            let out = pick(out, &format!("cmap_{}_{n}.jsonl", kind.short()));
            let cmap = pipeline::collapse(&taxonomy, n, kind, &out)?;
            print(&serde_json::json!({
                "level": n,
                "kind": kind,
                "tags": cmap.mapping.len(),
                "image": cmap.image().len(),
            }))
        }
        Command::Remap { level, data, map, oos, out } => {
            let (n, kind) = level_of(level);
            let map = pick(map, &format!("cmap_{}_{n}.jsonl", kind.short()));
            let out = pick(out, &format!("remapped_{}_{n}.jsonl", kind.short()));
            print(&pipeline::remap(&pick(data, "paragraphs.jsonl"), &map, *oos, &out)?)
        }
        Command::Split { data, out_dir } => {
            let out_dir = pick(out_dir, "splits");
            print(&pipeline::split(&pick(data, "paragraphs.jsonl"), &cfg.cutoffs, cfg.seed, &out_dir)?)
        }
        Command::Lite { split, mapping } => {
            let splits = split.map(|s| vec![s]).unwrap_or_else(|| Split::ALL.to_vec());
            let mut kept = serde_json::Map::new();
            for s in splits {
                let name = format!("{s}.jsonl");
                let n = pipeline::lite(
                    &work("splits").join(&name),
                    mapping.as_deref(),
                    cfg.lite_threshold,
                    &work("lite").join(&name),
                )?;
                kept.insert(s.to_string(), n.into());
            }
            print(&kept)
        }
        Command::Tasks { task, split, lite, out } => {
            let dir = work(if *lite { "lite" } else { "splits" });
            let data = dir.join(format!("{split}.jsonl"));
            let train = dir.join(format!("{}.jsonl", Split::Train));
            let short = match task {
                Task::TextClassification => "classification",
                Task::SequenceLabeling => "sequence",
            };
            let out = pick(out, &format!("tasks/{short}_{split}.jsonl"));
            let n = pipeline::tasks(&data, Some(&train), *task, cfg.label_cut(), &out)?;
            print(&serde_json::json!({ "records": n, "out": out }))
        }
        Command::Stats { inputs, out } => {
            let inputs = if inputs.is_empty() {
                default_stats_inputs(&cfg.work_dir)
            } else {
                inputs.clone()
            };
            print(&pipeline::stats(&inputs, &pick(out, "stats.json"))?)
        }
        Command::Eval { gold, predictions, out } => {
            let gold = pick(gold, "splits/test.jsonl");
            print(&pipeline::eval(&gold, &pick(predictions, "predictions.jsonl"), &pick(out, "eval.json"))?)
        }
        Command::Treemap { top_k, kind, data, out } => {
            let taxonomy = work(&format!("master_{}.jsonl", kind.short()));
            let nodes = pipeline::treemap(&taxonomy, &pick(data, "paragraphs.jsonl"), *top_k, &pick(out, "treemap.json"))?;
            print(&serde_json::json!({ "roots": nodes.len() }))
        }
    }
}

fn default_stats_inputs(work: &Path) -> Vec<(String, PathBuf)> {
    Split::ALL
        .iter()
        .flat_map(|s| {
            let file = format!("{s}.jsonl");
            [
                (s.to_string(), work.join("splits").join(&file)),
                (format!("lite_{s}"), work.join("lite").join(&file)),
            ]
        })
        .collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = ErrorRecord::new(&err);
            eprintln!("{}", serde_json::to_string(&record).unwrap_or_else(|_| err.to_string()));
            ExitCode::from(record.exit_code as u8)
        }
    }
}

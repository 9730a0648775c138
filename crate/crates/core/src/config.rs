//! Pipeline configuration: a TOML file plus environment overrides.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dataset::Cutoffs;
use crate::edgar::{DEFAULT_BASE_URL, DEFAULT_RATE_LIMIT};
use crate::error::{Error, Result};
use crate::model::{FormType, TaxonomyKind};

pub const ENV_IDENT: &str = "EDGAR_IDENT";
pub const ENV_SEED: &str = "KPI_SEED";
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root of the downloaded filing store.
    pub store: PathBuf,
    /// Directory for stage artifacts.
    pub work_dir: PathBuf,
    pub edgar: EdgarSection,
    pub window: DateWindow,
    pub cutoffs: Cutoffs,
    pub collapse_level: u32,
    pub taxonomy_kind: TaxonomyKind,
    pub lite_threshold: f64,
    /// Sequence-labelling vocabulary size; 0 keeps every label.
    pub top_k: usize,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgarSection {
    /// `User-Agent` identification, e.g. `"Name email@example.com"`.
    pub ident: String,
    pub requests_per_second: f64,
    pub base_url: String,
    pub forms: Vec<FormType>,
}

/// Inclusive filing-date range to list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Default for EdgarSection {
    fn default() -> Self {
        EdgarSection {
            ident: String::new(),
            requests_per_second: DEFAULT_RATE_LIMIT,
            base_url: DEFAULT_BASE_URL.to_string(),
            forms: vec![FormType::TenK, FormType::TenQ],
        }
    }
}

impl Default for DateWindow {
    fn default() -> Self {
        DateWindow {
            start: NaiveDate::from_ymd_opt(2017, 1, 1).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2024, 6, 1).expect("valid date"),
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            store: PathBuf::from("data/store"),
            work_dir: PathBuf::from("data/work"),
            edgar: EdgarSection::default(),
            window: DateWindow::default(),
            cutoffs: Cutoffs::default(),
            collapse_level: 1,
            taxonomy_kind: TaxonomyKind::Presentation,
            lite_threshold: 0.5,
            top_k: 1000,
            seed: DEFAULT_SEED,
            workers: 4,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Applies `EDGAR_IDENT` and `KPI_SEED` from `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(ident) = lookup(ENV_IDENT).filter(|s| !s.trim().is_empty()) {
            self.edgar.ident = ident;
        }
        if let Some(seed) = lookup(ENV_SEED) {
            self.seed = seed
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{ENV_SEED} must be an unsigned integer, got `{seed}`")))?;
        }
        Ok(())
    }

    /// `top_k` as a label cut, `None` when every label is kept.
    pub fn label_cut(&self) -> Option<usize> {
        (self.top_k > 0).then_some(self.top_k)
    }

    pub fn validate(&self) -> Result<()> {
        self.cutoffs.validate()?;
        if self.window.start > self.window.end {
            return Err(Error::InvalidConfig(format!(
                "window start {} is after end {}",
                self.window.start, self.window.end
            )));
        }
        if !(0.0..1.0).contains(&self.lite_threshold) {
            return Err(Error::InvalidConfig(format!(
                "lite_threshold must lie in [0, 1), got {}",
                self.lite_threshold
            )));
        }
        if !(self.edgar.requests_per_second > 0.0 && self.edgar.requests_per_second <= 10.0) {
            return Err(Error::InvalidConfig(format!(
                "requests_per_second must lie in (0, 10], got {}",
                self.edgar.requests_per_second
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

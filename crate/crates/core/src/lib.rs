//! Toolkit for building hierarchical financial KPI datasets from SEC inline
//! XBRL filings.
//!
//! The pipeline runs in file-backed stages:
//!
//! 1. [`edgar`] lists 10-K/10-Q filings from the EDGAR daily indices and
//!    downloads the primary iXBRL document plus its calculation and
//!    presentation linkbases into a local store.
//! 2. [`ixbrl`] turns each primary document into [`Paragraph`] records:
//!    narrative snippets with their tagged numeric facts.
//! 3. [`linkbase`] reads the per-filing linkbases into parent/child edges and
//!    [`taxonomy`] aggregates them into a master taxonomy per relationship kind.
//! 4. [`granularity`] collapses that taxonomy bottom-up to a chosen level and
//!    remaps dataset labels.
//! 5. [`dataset`] splits, filters and summarizes the corpus, and [`evalkit`]
//!    scores structured-extraction predictions.
//!
//! Metric and statistics types are generic over a [`Scalar`]; the aliases at
//! the crate root pick `f64` for reporting and [`Rational64`] for exact
//! arithmetic.

pub mod config;
pub mod dataset;
pub mod edgar;
pub mod error;
pub mod evalkit;
pub mod granularity;
pub mod ixbrl;
pub mod jsonl;
pub mod linkbase;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod taxonomy;

pub use error::{Error, Result};
pub use model::{Entity, FormType, Paragraph, Tag, TaxonomyKind};
pub use scalar::Scalar;

pub use num_rational::Rational64;
pub use rust_decimal::Decimal;

/// Evaluation report with floating point scores.
pub type EvalReport = evalkit::EvalReport<f64>;
/// Evaluation report with exact rational scores.
pub type ExactEvalReport = evalkit::EvalReport<Rational64>;
/// Precision/recall/F1 triple with floating point scores.
pub type FieldScore = evalkit::FieldScore<f64>;
/// Corpus statistics in floating point.
pub type CorpusStats = dataset::CorpusStats<f64>;
/// Corpus statistics in exact rational arithmetic.
pub type ExactCorpusStats = dataset::CorpusStats<Rational64>;
/// Cumulative macro-F1 curve in floating point.
pub type MacroF1Curve = evalkit::CurvePoint<f64>;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::TaxonomyKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record in {path} line {line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("xml error: {0}")]
    Xml(#[from] roxmltree::Error),

    #[error("network error fetching {url} (range {range}): {message}")]
    Network {
        url: String,
        range: String,
        message: String,
    },

    #[error("http status {status} for {url}")]
    HttpStatus { url: String, status: u16 },

    #[error("expected a {expected} linkbase, found {found}")]
    WrongLinkbaseKind {
        expected: TaxonomyKind,
        found: TaxonomyKind,
    },

    #[error("edge stream mixes {first} and {second} relationships")]
    MixedKinds {
        first: TaxonomyKind,
        second: TaxonomyKind,
    },

    #[error("taxonomy contains a cycle through {tag}")]
    Cycle { tag: String },

    #[error("no filings recorded for company {cik}")]
    UnknownCik { cik: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing artifact from stage `{stage}`: {path}")]
    MissingArtifact { stage: String, path: PathBuf },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Network failures and rate limiting can be retried; everything else is final.
    pub fn is_retryable(&self) -> bool {
        match self {
            Error::Network { .. } => true,
            Error::HttpStatus { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

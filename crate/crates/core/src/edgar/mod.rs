//! SEC EDGAR listing and download into a local filing store.
//!
//! Listings come from the public daily master indices; each matching row is
//! resolved to its primary iXBRL document and linkbases through the filing
//! directory's `index.json`. All requests go through one shared
//! [`RateLimiter`] and carry the operator's identification header.

pub mod index;
mod rate_limit;
pub mod store;
mod transport;

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

pub use index::{IndexRow, IndexWarning};
pub use rate_limit::RateLimiter;
pub use store::FilingBundle;
pub use transport::{HttpTransport, Response, Transport};

use crate::error::{Error, Result};
use crate::model::FormType;

pub const DEFAULT_BASE_URL: &str = "https://www.sec.gov";
pub const DEFAULT_RATE_LIMIT: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentRole {
    PrimaryIxbrl,
    CalculationLinkbase,
    PresentationLinkbase,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentUrl {
    pub role: DocumentRole,
    pub url: String,
}

/// One EDGAR submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilingRef {
    pub accession_number: String,
    /// Zero-padded to ten digits.
    pub cik: String,
    pub form_type: FormType,
    pub filing_date: NaiveDate,
    pub company_name: String,
    pub document_urls: Vec<DocumentUrl>,
    /// Acceptance timestamp, when the source provides one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted_at: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_of_report: Option<NaiveDate>,
}

impl FilingRef {
    pub fn url(&self, role: DocumentRole) -> Option<&str> {
        self.document_urls
            .iter()
            .find(|d| d.role == role)
            .map(|d| d.url.as_str())
    }

    fn from_row(row: IndexRow) -> Self {
        FilingRef {
            accession_number: row.accession_number,
            cik: row.cik,
            form_type: row.form_type,
            filing_date: row.filing_date,
            company_name: row.company_name,
            document_urls: Vec::new(),
            accepted_at: None,
            period_of_report: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 5,
            base_delay: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EdgarConfig {
    /// Sent as `User-Agent`; EDGAR rejects anonymous clients.
    pub ident: String,
    pub requests_per_second: f64,
    pub base_url: String,
    pub retry: RetryPolicy,
}

impl EdgarConfig {
    pub fn new(ident: impl Into<String>) -> Self {
        EdgarConfig {
            ident: ident.into(),
            requests_per_second: DEFAULT_RATE_LIMIT,
            base_url: DEFAULT_BASE_URL.to_string(),
            retry: RetryPolicy::default(),
        }
    }
}

/// Result of [`EdgarClient::list_filings`].
#[derive(Debug, Default)]
pub struct Listing {
    pub refs: Vec<FilingRef>,
    pub warnings: Vec<IndexWarning>,
}

pub struct EdgarClient {
    transport: Arc<dyn Transport>,
    limiter: Arc<RateLimiter>,
    config: EdgarConfig,
    requests: std::sync::atomic::AtomicU64,
}

impl EdgarClient {
    pub fn new(config: EdgarConfig, transport: Arc<dyn Transport>) -> Result<Self> {
        if config.ident.trim().is_empty() {
            return Err(Error::InvalidConfig(
                "an identification header (EDGAR_IDENT) is required".into(),
            ));
        }
        if config.requests_per_second.is_nan() || config.requests_per_second <= 0.0 {
            return Err(Error::InvalidConfig("rate limit must be positive".into()));
        }
        Ok(EdgarClient {
            limiter: Arc::new(RateLimiter::new(config.requests_per_second)),
            transport,
            config,
            requests: Default::default(),
        })
    }

    pub fn with_http(config: EdgarConfig) -> Result<Self> {
        Self::new(config, Arc::new(HttpTransport::default()))
    }

    /// Number of GETs issued so far, retries included.
    pub fn request_count(&self) -> u64 {
        self.requests.load(std::sync::atomic::Ordering::Relaxed)
    }

    /// Rate-limited GET with backoff on 429/5xx and connection failures.
    /// `range` names the work unit for error reporting.
    pub fn get(&self, url: &str, range: &str) -> Result<Response> {
        let headers = [("User-Agent", self.config.ident.as_str())];
        let mut attempt = 0u32;
        loop {
            self.limiter.acquire();
            self.requests.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            let outcome = self.transport.get(url, &headers);
            let (retry_after, failure) = match outcome {
                Ok(resp) if resp.status == 429 || resp.status >= 500 => (
                    resp.retry_after,
                    Error::HttpStatus {
                        url: url.to_string(),
                        status: resp.status,
                    },
                ),
                Ok(resp) => match resp.content_length {
                    Some(n) if resp.is_success() && n != resp.body.len() as u64 => (
                        None,
                        Error::Network {
                            url: url.to_string(),
                            range: range.to_string(),
                            message: format!("truncated body: {} of {n} bytes", resp.body.len()),
                        },
                    ),
                    _ => return Ok(resp),
                },
                Err(message) => (
                    None,
                    Error::Network {
                        url: url.to_string(),
                        range: range.to_string(),
                        message,
                    },
                ),
            };
            if attempt >= self.config.retry.max_retries {
                return Err(match failure {
                    Error::HttpStatus { status, .. } => Error::Network {
                        url: url.to_string(),
                        range: range.to_string(),
                        message: format!("http status {status} after {attempt} retries"),
                    },
                    other => other,
                });
            }
            let delay = retry_after
                .map(Duration::from_secs)
                .unwrap_or_else(|| self.config.retry.base_delay * 2u32.saturating_pow(attempt));
            log::warn!("retrying {url} in {delay:?} ({failure})");
            std::thread::sleep(delay);
            attempt += 1;
        }
    }

    /// Lists 10-K/10-Q filings dated in `[start, end]` whose form is in
    /// `forms`, in index order (day, then row), with document URLs resolved.
    pub fn list_filings(&self, start: NaiveDate, end: NaiveDate, forms: &BTreeSet<FormType>) -> Result<Listing> {
        if start > end {
            return Err(Error::InvalidInput(format!("start {start} is after end {end}")));
        }
        let mut listing = Listing::default();
        if forms.is_empty() {
            return Ok(listing);
        }
        for day in start.iter_days().take_while(|d| *d <= end) {
            let path = index::daily_index_path(day);
            let url = format!("{}/{}", self.config.base_url, path);
            let resp = self.get(&url, &day.to_string())?;
            // Weekends and holidays have no index.
            if resp.status == 404 || resp.status == 403 {
                continue;
            }
            if !resp.is_success() {
                return Err(Error::HttpStatus { url, status: resp.status });
            }
            let parsed = index::parse_master_index(&String::from_utf8_lossy(&resp.body), &path);
            listing.warnings.extend(parsed.warnings);
            for row in parsed.rows {
                if !forms.contains(&row.form_type) || row.filing_date < start || row.filing_date > end {
                    continue;
                }
                let mut filing = FilingRef::from_row(row);
                self.resolve_documents(&mut filing)?;
                listing.refs.push(filing);
            }
        }
        Ok(listing)
    }

    /// Fills `document_urls` from the filing directory listing.
    pub fn resolve_documents(&self, filing: &mut FilingRef) -> Result<()> {
        let dir = format!(
            "{}/Archives/edgar/data/{}/{}",
            self.config.base_url,
            filing.cik.trim_start_matches('0'),
            filing.accession_number.replace('-', "")
        );
        let url = format!("{dir}/index.json");
        let resp = self.get(&url, &filing.accession_number)?;
        if !resp.is_success() {
            return Err(Error::HttpStatus { url, status: resp.status });
        }
        let roles = index::classify_directory(&resp.body, &dir)?;
        filing.document_urls = roles
            .into_iter()
            .map(|(role, url)| DocumentUrl { role, url })
            .collect();
        Ok(())
    }

    /// Downloads a filing into `<store>/<cik>/<accession>/`. Files already
    /// present are not requested again.
    pub fn fetch_filing(&self, filing: &FilingRef, store_root: &Path) -> Result<FilingBundle> {
        store::fetch_into(self, filing, store_root)
    }

    /// Fetches many filings with `workers` threads sharing this client's limiter.
    pub fn fetch_all(&self, filings: &[FilingRef], store_root: &Path, workers: usize) -> Vec<Result<FilingBundle>> {
        let queue = Mutex::new(filings.iter().enumerate());
        let results: Mutex<Vec<Option<Result<FilingBundle>>>> =
            Mutex::new((0..filings.len()).map(|_| None).collect());
        std::thread::scope(|s| {
            for _ in 0..workers.max(1) {
                s.spawn(|| loop {
                    let next = queue.lock().unwrap_or_else(|e| e.into_inner()).next();
                    let Some((i, filing)) = next else { break };
                    let r = self.fetch_filing(filing, store_root);
                    results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
                });
            }
        });
        results
            .into_inner()
            .unwrap_or_else(|e| e.into_inner())
            .into_iter()
            .map(|r| r.expect("every filing processed"))
            .collect()
    }
}

#[cfg(test)]
mod tests;

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use super::*;

/// In-memory EDGAR: URL → scripted responses (the last one repeats).
#[derive(Default)]
struct FakeEdgar {
    routes: Mutex<HashMap<String, Vec<Response>>>,
    log: Mutex<Vec<(String, String)>>,
    hits: AtomicUsize,
}

impl FakeEdgar {
    fn route(&self, url: &str, responses: Vec<Response>) {
        self.routes.lock().unwrap().insert(url.to_string(), responses);
    }
}

impl Transport for FakeEdgar {
    fn get(&self, url: &str, headers: &[(&str, &str)]) -> std::result::Result<Response, String> {
        self.hits.fetch_add(1, Ordering::SeqCst);
        let agent = headers
            .iter()
            .find(|(k, _)| *k == "User-Agent")
            .map(|(_, v)| v.to_string())
            .unwrap_or_default();
        self.log.lock().unwrap().push((url.to_string(), agent));
        let mut routes = self.routes.lock().unwrap();
        match routes.get_mut(url) {
            Some(list) if list.len() > 1 => Ok(list.remove(0)),
            Some(list) => Ok(list[0].clone()),
            None => Ok(Response::status(404)),
        }
    }
}

const BASE: &str = "http://edgar.test";

fn config() -> EdgarConfig {
    EdgarConfig {
        ident: "Test Operator ops@example.com".into(),
        requests_per_second: 1000.0,
        base_url: BASE.into(),
        retry: RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(1),
        },
    }
}

fn filing(urls: &[(DocumentRole, &str)]) -> FilingRef {
    FilingRef {
        accession_number: "0001018840-24-000019".into(),
        cik: "0001018840".into(),
        form_type: FormType::TenK,
        filing_date: NaiveDate::from_ymd_opt(2024, 4, 1).unwrap(),
        company_name: "ABERCROMBIE & FITCH CO /DE/".into(),
        document_urls: urls
            .iter()
            .map(|(role, url)| DocumentUrl {
                role: *role,
                url: url.to_string(),
            })
            .collect(),
        accepted_at: None,
        period_of_report: None,
    }
}

fn all_three() -> FilingRef {
    filing(&[
        (DocumentRole::PrimaryIxbrl, "http://edgar.test/d/primary.htm"),
        (DocumentRole::CalculationLinkbase, "http://edgar.test/d/cal.xml"),
        (DocumentRole::PresentationLinkbase, "http://edgar.test/d/pre.xml"),
    ])
}

fn serve_all_three(fake: &FakeEdgar) {
    fake.route("http://edgar.test/d/primary.htm", vec![Response::ok("<html/>")]);
    fake.route("http://edgar.test/d/cal.xml", vec![Response::ok("<linkbase/>")]);
    fake.route("http://edgar.test/d/pre.xml", vec![Response::ok("<linkbase/>")]);
}

#[test]
fn missing_ident_fails_fast() {
    let mut cfg = config();
    cfg.ident = "  ".into();
    let err = EdgarClient::new(cfg, Arc::new(FakeEdgar::default())).err().unwrap();
    assert!(matches!(err, Error::InvalidConfig(_)));
}

#[test]
fn every_request_carries_ident() {
    let fake = Arc::new(FakeEdgar::default());
    serve_all_three(&fake);
    let client = EdgarClient::new(config(), fake.clone()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    client.fetch_filing(&all_three(), dir.path()).unwrap();
    let log = fake.log.lock().unwrap();
    assert_eq!(log.len(), 3);
    assert!(log.iter().all(|(_, agent)| agent == "Test Operator ops@example.com"));
}

#[test]
fn fetch_persists_three_files_then_is_idempotent() {
    let fake = Arc::new(FakeEdgar::default());
    serve_all_three(&fake);
    let client = EdgarClient::new(config(), fake.clone()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let first = client.fetch_filing(&all_three(), dir.path()).unwrap();
    assert_eq!(first.paths().len(), 3);
    assert_eq!(first.downloads, 3);
    assert!(!first.linkbases_absent);
    assert_eq!(first.dir, dir.path().join("0001018840").join("0001018840-24-000019"));
    let meta_before = std::fs::read(first.dir.join(store::META_FILE)).unwrap();

    let hits = fake.hits.load(Ordering::SeqCst);
    let second = client.fetch_filing(&all_three(), dir.path()).unwrap();
    assert_eq!(second.downloads, 0);
    assert_eq!(fake.hits.load(Ordering::SeqCst), hits);
    assert_eq!(std::fs::read(second.dir.join(store::META_FILE)).unwrap(), meta_before);
}

#[test]
fn missing_linkbase_marks_bundle() {
    let fake = Arc::new(FakeEdgar::default());
    fake.route("http://edgar.test/d/primary.htm", vec![Response::ok("<html/>")]);
    fake.route("http://edgar.test/d/pre.xml", vec![Response::ok("<linkbase/>")]);
    let client = EdgarClient::new(config(), fake.clone()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bundle = client.fetch_filing(&all_three(), dir.path()).unwrap();
    assert!(bundle.linkbases_absent);
    assert!(bundle.calculation.is_none());
    assert!(bundle.presentation.is_some());

    let hits = fake.hits.load(Ordering::SeqCst);
    let again = client.fetch_filing(&all_three(), dir.path()).unwrap();
    assert!(again.linkbases_absent);
    assert_eq!(fake.hits.load(Ordering::SeqCst), hits);
}

#[test]
fn ref_without_primary_is_rejected() {
    let client = EdgarClient::new(config(), Arc::new(FakeEdgar::default())).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let r = filing(&[(DocumentRole::CalculationLinkbase, "http://edgar.test/d/cal.xml")]);
    assert!(client.fetch_filing(&r, dir.path()).is_err());
}

#[test]
fn too_many_requests_backs_off_then_succeeds() {
    let fake = Arc::new(FakeEdgar::default());
    fake.route(
        "http://edgar.test/d/primary.htm",
        vec![Response::status(429), Response::status(429), Response::ok("<html/>")],
    );
    let client = EdgarClient::new(config(), fake.clone()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let r = filing(&[(DocumentRole::PrimaryIxbrl, "http://edgar.test/d/primary.htm")]);
    let bundle = client.fetch_filing(&r, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(bundle.primary).unwrap(), "<html/>");
    assert_eq!(client.request_count(), 3);
}

#[test]
fn truncated_body_is_retried() {
    let fake = Arc::new(FakeEdgar::default());
    let mut short = Response::ok("<ht");
    short.content_length = Some(7);
    fake.route("http://edgar.test/d/primary.htm", vec![short, Response::ok("<html/>")]);
    let client = EdgarClient::new(config(), fake.clone()).unwrap();
    let resp = client.get("http://edgar.test/d/primary.htm", "x").unwrap();
    assert_eq!(resp.body, b"<html/>");
}

struct Down;

impl Transport for Down {
    fn get(&self, _: &str, _: &[(&str, &str)]) -> std::result::Result<Response, String> {
        Err("connection refused".into())
    }
}

#[test]
fn network_failure_is_retryable_and_names_range() {
    let client = EdgarClient::new(config(), Arc::new(Down)).unwrap();
    let day = NaiveDate::from_ymd_opt(2020, 1, 2).unwrap();
    let err = client
        .list_filings(day, day, &BTreeSet::from([FormType::TenK]))
        .unwrap_err();
    assert!(err.is_retryable());
    match err {
        Error::Network { range, .. } => assert_eq!(range, "2020-01-02"),
        other => panic!("unexpected {other:?}"),
    }
}

const INDEX: &str = "CIK|Company Name|Form Type|Date Filed|File Name\n\
--------------------------------------------------------------------------------\n\
1018840|ABERCROMBIE & FITCH CO /DE/|10-K|20240401|edgar/data/1018840/0001018840-24-000019.txt\n\
320193|Apple Inc.|8-K|20240401|edgar/data/320193/0000320193-24-000050.txt\n\
1000045|NICHOLAS FINANCIAL INC|10-Q|20240401|edgar/data/1000045/0000950170-24-008867.txt\n\
garbage line\n";

fn listing_fake() -> Arc<FakeEdgar> {
    let fake = Arc::new(FakeEdgar::default());
    fake.route(
        "http://edgar.test/Archives/edgar/daily-index/2024/QTR2/master.20240401.idx",
        vec![Response::ok(INDEX)],
    );
    for (cik, acc) in [("1018840", "000101884024000019"), ("1000045", "000095017024008867")] {
        let dir = format!("http://edgar.test/Archives/edgar/data/{cik}/{acc}");
        fake.route(
            &format!("{dir}/index.json"),
            vec![Response::ok(
                r#"{"directory":{"item":[{"name":"doc.htm","size":"10"},{"name":"doc_cal.xml","size":"1"},{"name":"doc_pre.xml","size":"1"}]}}"#,
            )],
        );
    }
    fake
}

#[test]
fn listing_filters_forms_and_resolves_urls() {
    let client = EdgarClient::new(config(), listing_fake()).unwrap();
    let day = NaiveDate::from_ymd_opt(2024, 4, 1).unwrap();
    let both = BTreeSet::from([FormType::TenK, FormType::TenQ]);
    let listing = client.list_filings(day, day, &both).unwrap();
    assert_eq!(listing.refs.len(), 2);
    assert_eq!(listing.warnings.len(), 1);
    let abf = &listing.refs[0];
    assert_eq!(abf.cik, "0001018840");
    assert_eq!(
        abf.url(DocumentRole::PrimaryIxbrl),
        Some("http://edgar.test/Archives/edgar/data/1018840/000101884024000019/doc.htm")
    );
    assert!(abf.url(DocumentRole::PresentationLinkbase).is_some());

    let only_q = client.list_filings(day, day, &BTreeSet::from([FormType::TenQ])).unwrap();
    assert_eq!(only_q.refs.len(), 1);
    assert_eq!(only_q.refs[0].form_type, FormType::TenQ);
}

#[test]
fn empty_form_set_is_empty_listing() {
    let fake = Arc::new(FakeEdgar::default());
    let client = EdgarClient::new(config(), fake.clone()).unwrap();
    let day = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let listing = client.list_filings(day, day, &BTreeSet::new()).unwrap();
    assert!(listing.refs.is_empty());
    assert_eq!(fake.hits.load(Ordering::SeqCst), 0);
}

#[test]
fn listing_over_subrange_equals_filtered_listing() {
    let client = EdgarClient::new(config(), listing_fake()).unwrap();
    let both = BTreeSet::from([FormType::TenK, FormType::TenQ]);
    let wide = client
        .list_filings(
            NaiveDate::from_ymd_opt(2024, 3, 30).unwrap(),
            NaiveDate::from_ymd_opt(2024, 4, 2).unwrap(),
            &both,
        )
        .unwrap();
    let day = NaiveDate::from_ymd_opt(2024, 4, 1).unwrap();
    let narrow = client.list_filings(day, day, &both).unwrap();
    let filtered: Vec<_> = wide.refs.into_iter().filter(|r| r.filing_date == day).collect();
    assert_eq!(filtered, narrow.refs);
}

#[test]
fn concurrent_fetches_share_the_limiter() {
    let fake = Arc::new(FakeEdgar::default());
    let mut refs = Vec::new();
    for i in 0..6 {
        let url = format!("http://edgar.test/p{i}.htm");
        fake.route(&url, vec![Response::ok(format!("<html>{i}</html>"))]);
        let mut r = filing(&[(DocumentRole::PrimaryIxbrl, &url)]);
        r.accession_number = format!("0001018840-24-00002{i}");
        refs.push(r);
    }
    let mut cfg = config();
    cfg.requests_per_second = 50.0;
    let client = EdgarClient::new(cfg, fake).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let results = client.fetch_all(&refs, dir.path(), 3);
    assert!(results.iter().all(|r| r.is_ok()));
    // 6 requests at 50/s need at least 5 intervals of 20 ms.
    assert!(start.elapsed() >= Duration::from_millis(100));
    let stored = store::scan(dir.path()).unwrap();
    assert_eq!(stored.len(), 6);
}

//! Local filing store: `<root>/<cik>/<accession>/{primary.htm, cal.xml, pre.xml, meta.json-lines}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DocumentRole, EdgarClient, FilingRef};
use crate::error::{Error, Result};

pub const META_FILE: &str = "meta.json-lines";

pub fn file_name(role: DocumentRole) -> Option<&'static str> {
    match role {
        DocumentRole::PrimaryIxbrl => Some("primary.htm"),
        DocumentRole::CalculationLinkbase => Some("cal.xml"),
        DocumentRole::PresentationLinkbase => Some("pre.xml"),
        DocumentRole::Other => None,
    }
}

pub fn filing_dir(root: &Path, cik: &str, accession: &str) -> PathBuf {
    root.join(cik).join(accession)
}

fn absent_marker(path: &Path) -> PathBuf {
    path.with_extension("absent")
}

/// Local paths of one stored filing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilingBundle {
    pub dir: PathBuf,
    pub primary: PathBuf,
    pub calculation: Option<PathBuf>,
    pub presentation: Option<PathBuf>,
    /// A linkbase was missing upstream; the filing still serves text extraction.
    pub linkbases_absent: bool,
    /// Files written by this call.
    pub downloads: usize,
}

impl FilingBundle {
    pub fn paths(&self) -> Vec<&Path> {
        std::iter::once(self.primary.as_path())
            .chain(self.calculation.as_deref())
            .chain(self.presentation.as_deref())
            .collect()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("part");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub(super) fn fetch_into(client: &EdgarClient, filing: &FilingRef, root: &Path) -> Result<FilingBundle> {
    let primary_url = filing.url(DocumentRole::PrimaryIxbrl).ok_or_else(|| {
        Error::InvalidInput(format!("{} has no primary iXBRL document", filing.accession_number))
    })?;
    let dir = filing_dir(root, &filing.cik, &filing.accession_number);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut bundle = FilingBundle {
        primary: dir.join("primary.htm"),
        dir: dir.clone(),
        calculation: None,
        presentation: None,
        linkbases_absent: false,
        downloads: 0,
    };

    if !bundle.primary.exists() {
        let resp = client.get(primary_url, &filing.accession_number)?;
        if !resp.is_success() {
            return Err(Error::HttpStatus {
                url: primary_url.to_string(),
                status: resp.status,
            });
        }
        write_atomic(&bundle.primary, &resp.body)?;
        bundle.downloads += 1;
    }

    for role in [DocumentRole::CalculationLinkbase, DocumentRole::PresentationLinkbase] {
        let path = dir.join(file_name(role).expect("linkbase role has a file"));
        let marker = absent_marker(&path);
        let present = if path.exists() {
            true
        } else if marker.exists() {
            false
        } else if let Some(url) = filing.url(role) {
            let resp = client.get(url, &filing.accession_number)?;
            if resp.is_success() {
                write_atomic(&path, &resp.body)?;
                bundle.downloads += 1;
                true
            } else if resp.status == 404 || resp.status == 410 || resp.status == 403 {
                std::fs::write(&marker, resp.status.to_string()).map_err(|e| Error::io(&marker, e))?;
                false
            } else {
                return Err(Error::HttpStatus {
                    url: url.to_string(),
                    status: resp.status,
                });
            }
        } else {
            false
        };
        match (role, present) {
            (DocumentRole::CalculationLinkbase, true) => bundle.calculation = Some(path),
            (DocumentRole::PresentationLinkbase, true) => bundle.presentation = Some(path),
            _ => bundle.linkbases_absent = true,
        }
    }

    let meta_path = dir.join(META_FILE);
    let mut meta = serde_json::to_string(filing)?;
    meta.push('\n');
    if std::fs::read_to_string(&meta_path).ok().as_deref() != Some(meta.as_str()) {
        write_atomic(&meta_path, meta.as_bytes())?;
    }
    Ok(bundle)
}

/// A filing found in the store.
#[derive(Debug, Clone)]
pub struct StoredFiling {
    pub dir: PathBuf,
    pub meta: FilingRef,
}

impl StoredFiling {
    pub fn path(&self, role: DocumentRole) -> Option<PathBuf> {
        let p = self.dir.join(file_name(role)?);
        p.exists().then_some(p)
    }
}

/// All filings under `root` that carry a metadata record, sorted by
/// (cik, accession).
pub fn scan(root: &Path) -> Result<Vec<StoredFiling>> {
    if !root.is_dir() {
        return Err(Error::MissingArtifact {
            stage: "fetch".into(),
            path: root.to_path_buf(),
        });
    }
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(root).min_depth(3).max_depth(3).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::io(root, e.into()))?;
        if entry.file_name() != META_FILE {
            continue;
        }
        let text = std::fs::read_to_string(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
        let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or_default();
        let meta: FilingRef = serde_json::from_str(line).map_err(|e| Error::Record {
            path: entry.path().to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?;
        let dir = entry.path().parent().expect("meta lives in a filing dir").to_path_buf();
        out.push(StoredFiling { dir, meta });
    }
    out.sort_by(|a, b| (&a.meta.cik, &a.meta.accession_number).cmp(&(&b.meta.cik, &b.meta.accession_number)));
    Ok(out)
}

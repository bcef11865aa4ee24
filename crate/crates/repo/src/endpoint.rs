//! Where packages are registered and fetched from.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use comodi_core::cdl::Version;
use comodi_core::xml;

use crate::archive::{unpack_verify, FormatRegistry};
use crate::index::{entry_from_xml, IndexEntry, RepoIndex};
use crate::store::{Receipt, RepoStore};
use crate::RepoError;

pub trait RepoEndpoint: Send + Sync {
    fn index(&self) -> Result<RepoIndex, RepoError>;
    /// The archive bytes together with the index entry they belong to.
    fn get(&self, name: &str, version: Version) -> Result<(IndexEntry, Vec<u8>), RepoError>;
    fn put(&self, archive: &[u8]) -> Result<Receipt, RepoError>;
}

/// A repository directory on this machine.
pub struct DirEndpoint {
    store: RepoStore,
}

impl DirEndpoint {
    pub fn open(root: &Path) -> Result<Self, RepoError> {
        Ok(DirEndpoint {
            store: RepoStore::open(root)?,
        })
    }
}

impl RepoEndpoint for DirEndpoint {
    fn index(&self) -> Result<RepoIndex, RepoError> {
        self.store.index()
    }

    fn get(&self, name: &str, version: Version) -> Result<(IndexEntry, Vec<u8>), RepoError> {
        self.store.get(name, version)
    }

    fn put(&self, archive: &[u8]) -> Result<Receipt, RepoError> {
        self.store.register(archive)
    }
}

/// A repository server reached over HTTP.
pub struct HttpEndpoint {
    base: String,
    agent: ureq::Agent,
}

impl HttpEndpoint {
    pub fn new(base: &str) -> Self {
        HttpEndpoint {
            base: base.trim_end_matches('/').to_string(),
            agent: ureq::AgentBuilder::new().build(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }
}

/// Turns a non-2xx answer into the error the body names.
pub(crate) fn status_error(e: ureq::Error) -> RepoError {
    match e {
        ureq::Error::Status(status, resp) => {
            let body = resp.into_string().unwrap_or_default();
            let parsed = xml::parse(&body).ok();
            let code = parsed.as_ref().and_then(|el| el.get("code").map(str::to_string));
            let message = parsed
                .as_ref()
                .and_then(|el| el.get("message").map(str::to_string))
                .unwrap_or(body);
            let field = |k: &str| parsed.as_ref().and_then(|el| el.get(k).map(str::to_string));
            let version = field("version").and_then(|v| v.parse().ok());
            match (code.as_deref(), field("name"), version) {
                (Some("NotFound"), Some(name), Some(version)) => RepoError::NotFound { name, version },
                (Some("DuplicateVersion"), Some(name), Some(version)) => RepoError::DuplicateVersion { name, version },
                _ => RepoError::Protocol { status, message },
            }
        }
        ureq::Error::Transport(t) => RepoError::Transport(t.to_string()),
    }
}

fn read_body(resp: ureq::Response) -> Result<Vec<u8>, RepoError> {
    let mut buf = Vec::new();
    resp.into_reader()
        .read_to_end(&mut buf)
        .map_err(|e| RepoError::Transport(e.to_string()))?;
    Ok(buf)
}

impl RepoEndpoint for HttpEndpoint {
    fn index(&self) -> Result<RepoIndex, RepoError> {
        let resp = self.agent.get(&self.url("/index")).call().map_err(status_error)?;
        let body = read_body(resp)?;
        RepoIndex::parse(&String::from_utf8_lossy(&body))
    }

    fn get(&self, name: &str, version: Version) -> Result<(IndexEntry, Vec<u8>), RepoError> {
        let resp = self
            .agent
            .get(&self.url(&format!("/pkg/{name}/{version}")))
            .call()
            .map_err(status_error)?;
        let entry_doc = resp
            .header("X-Comodi-Entry")
            .ok_or_else(|| RepoError::Protocol {
                status: resp.status(),
                message: "missing X-Comodi-Entry header".into(),
            })?
            .to_string();
        let entry = entry_from_xml(&xml::parse(&entry_doc)?, "/package")?;
        Ok((entry, read_body(resp)?))
    }

    fn put(&self, archive: &[u8]) -> Result<Receipt, RepoError> {
        let m = unpack_verify(archive, &FormatRegistry::default())?.manifest;
        let resp = self
            .agent
            .put(&self.url(&format!("/pkg/{}/{}", m.name, m.version)))
            .set("Content-Type", "application/octet-stream")
            .send_bytes(archive)
            .map_err(status_error)?;
        let body = read_body(resp)?;
        entry_from_xml(&xml::parse(&String::from_utf8_lossy(&body))?, "/package")
    }
}

/// One kind of endpoint, chosen by the location's scheme.
pub trait EndpointKind: Send + Sync {
    fn scheme(&self) -> &'static str;
    fn open(&self, location: &str) -> Result<Box<dyn RepoEndpoint>, RepoError>;
}

struct DirKind;

impl EndpointKind for DirKind {
    fn scheme(&self) -> &'static str {
        "dir"
    }

    fn open(&self, location: &str) -> Result<Box<dyn RepoEndpoint>, RepoError> {
        let path = location.strip_prefix("dir:").unwrap_or(location);
        Ok(Box::new(DirEndpoint::open(Path::new(path))?))
    }
}

struct HttpKind;

impl EndpointKind for HttpKind {
    fn scheme(&self) -> &'static str {
        "http"
    }

    fn open(&self, location: &str) -> Result<Box<dyn RepoEndpoint>, RepoError> {
        Ok(Box::new(HttpEndpoint::new(location)))
    }
}

#[derive(Clone)]
pub struct EndpointRegistry {
    kinds: BTreeMap<&'static str, Arc<dyn EndpointKind>>,
}

impl Default for EndpointRegistry {
    fn default() -> Self {
        let mut r = EndpointRegistry {
            kinds: BTreeMap::new(),
        };
        r.register(Arc::new(DirKind));
        r.register(Arc::new(HttpKind));
        r
    }
}

impl EndpointRegistry {
    pub fn register(&mut self, kind: Arc<dyn EndpointKind>) {
        self.kinds.insert(kind.scheme(), kind);
    }

    /// `http://host:port` or `dir:/path`; a bare path means `dir:`.
    pub fn open(&self, location: &str) -> Result<Box<dyn RepoEndpoint>, RepoError> {
        let scheme = match location.split_once(':') {
            Some((s, rest)) if rest.starts_with("//") || self.kinds.contains_key(s) => s,
            _ => "dir",
        };
        self.kinds
            .get(scheme)
            .ok_or_else(|| RepoError::UnknownEndpoint(location.to_string()))?
            .open(location)
    }
}

pub fn open_endpoint(location: &str) -> Result<Box<dyn RepoEndpoint>, RepoError> {
    EndpointRegistry::default().open(location)
}

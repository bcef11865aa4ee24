//! The client-side cache of fetched packages.
//!
//! Layout: `<root>/<name>/<version>/<locator>` next to `entry.xml`, the index
//! entry the archive was fetched under. A version is immutable once
//! registered, so a cached archive whose digest still matches its entry is
//! used without asking the repository.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use comodi_core::cdl::Version;
use comodi_core::xml;

use crate::archive::{unpack_verify, FormatRegistry, Package};
use crate::endpoint::RepoEndpoint;
use crate::index::{entry_from_xml, entry_to_xml, IndexEntry};
use crate::manifest::sha256_hex;
use crate::RepoError;

pub struct LocalRepo {
    root: PathBuf,
    formats: FormatRegistry,
}

impl LocalRepo {
    pub fn new(root: &Path) -> Self {
        LocalRepo {
            root: root.to_path_buf(),
            formats: FormatRegistry::default(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, name: &str, version: Version) -> PathBuf {
        self.root.join(name).join(version.to_string())
    }

    /// The cached archive, if present and intact.
    pub fn cached(&self, name: &str, version: Version) -> Option<PathBuf> {
        let dir = self.dir(name, version);
        let entry_text = fs::read_to_string(dir.join("entry.xml")).ok()?;
        let entry = entry_from_xml(&xml::parse(&entry_text).ok()?, "/package").ok()?;
        if entry.name != name || entry.version != version || !safe_locator(&entry.locator) {
            return None;
        }
        let path = dir.join(&entry.locator);
        let bytes = fs::read(&path).ok()?;
        (sha256_hex(&bytes) == entry.digest).then_some(path)
    }

    /// Path of the archive, downloading it only when the cache cannot serve it.
    pub fn fetch(&self, endpoint: &dyn RepoEndpoint, name: &str, version: Version) -> Result<PathBuf, RepoError> {
        if let Some(p) = self.cached(name, version) {
            return Ok(p);
        }
        let (entry, bytes) = endpoint.get(name, version)?;
        if entry.name != name || entry.version != version || sha256_hex(&bytes) != entry.digest {
            return Err(RepoError::DigestMismatch {
                name: name.to_string(),
                version,
            });
        }
        if !safe_locator(&entry.locator) {
            return Err(RepoError::Manifest(format!("unsafe locator {}", entry.locator)));
        }
        unpack_verify(&bytes, &self.formats)?;
        let dir = self.dir(name, version);
        fs::create_dir_all(&dir).map_err(|e| RepoError::io(&dir, e))?;
        let path = dir.join(&entry.locator);
        write_atomic(&path, &bytes)?;
        write_atomic(&dir.join("entry.xml"), entry_to_xml(&entry).to_document().as_bytes())?;
        Ok(path)
    }

    /// Fetches if needed and returns the verified package contents.
    pub fn load(&self, endpoint: &dyn RepoEndpoint, name: &str, version: Version) -> Result<Package, RepoError> {
        let path = self.fetch(endpoint, name, version)?;
        let bytes = fs::read(&path).map_err(|e| RepoError::io(&path, e))?;
        unpack_verify(&bytes, &self.formats)
    }

    /// Index entry of a cached package.
    pub fn entry(&self, name: &str, version: Version) -> Option<IndexEntry> {
        self.cached(name, version)?;
        let text = fs::read_to_string(self.dir(name, version).join("entry.xml")).ok()?;
        entry_from_xml(&xml::parse(&text).ok()?, "/package").ok()
    }
}

fn safe_locator(s: &str) -> bool {
    !s.is_empty() && !s.starts_with('.') && !s.contains(['/', '\\'])
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RepoError> {
    static SEQ: AtomicU64 = AtomicU64::new(0);
    let tmp = path.with_extension(format!(
        "tmp{}-{}",
        std::process::id(),
        SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, bytes).map_err(|e| RepoError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| RepoError::io(path, e))
}

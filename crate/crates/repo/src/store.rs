//! A repository held in a directory: `index.xml` plus `packages/`.
//!
//! Writers are serialised through one lock; the index file is replaced by
//! rename so readers never see a partial index.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use comodi_core::cdl::Version;

use crate::archive::{unpack_verify, FormatRegistry};
use crate::index::{IndexEntry, RepoIndex};
use crate::manifest::sha256_hex;
use crate::RepoError;

pub struct RepoStore {
    root: PathBuf,
    formats: FormatRegistry,
    writer: Mutex<()>,
}

/// What a successful registration returns.
pub type Receipt = IndexEntry;

impl RepoStore {
    pub fn open(root: &Path) -> Result<RepoStore, RepoError> {
        fs::create_dir_all(root.join("packages")).map_err(|e| RepoError::io(root, e))?;
        let store = RepoStore {
            root: root.to_path_buf(),
            formats: FormatRegistry::default(),
            writer: Mutex::new(()),
        };
        if !store.index_path().exists() {
            store.write_index(&RepoIndex::default())?;
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.xml")
    }

    pub fn index(&self) -> Result<RepoIndex, RepoError> {
        let path = self.index_path();
        let text = fs::read_to_string(&path).map_err(|e| RepoError::io(&path, e))?;
        RepoIndex::parse(&text)
    }

    fn write_index(&self, index: &RepoIndex) -> Result<(), RepoError> {
        let tmp = self.root.join("index.xml.tmp");
        fs::write(&tmp, index.to_document()).map_err(|e| RepoError::io(&tmp, e))?;
        fs::rename(&tmp, self.index_path()).map_err(|e| RepoError::io(&tmp, e))
    }

    /// Verifies and stores an archive under the name and version in its manifest.
    pub fn register(&self, archive: &[u8]) -> Result<Receipt, RepoError> {
        let package = unpack_verify(archive, &self.formats)?;
        let format = self.formats.detect(archive)?;
        let m = &package.manifest;
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let mut index = self.index()?;
        if index.get(&m.name, m.version).is_some() {
            return Err(RepoError::DuplicateVersion {
                name: m.name.clone(),
                version: m.version,
            });
        }
        let locator = format!("{}-{}.{}", m.name, m.version, format.extension());
        let path = self.root.join("packages").join(&locator);
        fs::write(&path, archive).map_err(|e| RepoError::io(&path, e))?;
        let entry = IndexEntry {
            name: m.name.clone(),
            version: m.version,
            digest: sha256_hex(archive),
            locator,
            format: format.name().to_string(),
            registered: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        };
        index.insert(entry.clone())?;
        self.write_index(&index)?;
        Ok(entry)
    }

    pub fn get(&self, name: &str, version: Version) -> Result<(IndexEntry, Vec<u8>), RepoError> {
        let entry = self
            .index()?
            .get(name, version)
            .cloned()
            .ok_or_else(|| RepoError::NotFound {
                name: name.to_string(),
                version,
            })?;
        let path = self.root.join("packages").join(&entry.locator);
        let bytes = fs::read(&path).map_err(|e| RepoError::io(&path, e))?;
        if sha256_hex(&bytes) != entry.digest {
            return Err(RepoError::DigestMismatch {
                name: name.to_string(),
                version,
            });
        }
        Ok((entry, bytes))
    }
}

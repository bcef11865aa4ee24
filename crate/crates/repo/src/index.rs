//! The repository index: one immutable entry per (name, version).

use std::collections::BTreeMap;

use comodi_core::cdl::Version;
use comodi_core::xml::{self, Element, XmlError};

use crate::RepoError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub name: String,
    pub version: Version,
    /// sha256 of the archive bytes.
    pub digest: String,
    /// Archive file name inside the repository's package directory.
    pub locator: String,
    pub format: String,
    /// Seconds since the Unix epoch.
    pub registered: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RepoIndex {
    pub entries: BTreeMap<(String, Version), IndexEntry>,
}

impl RepoIndex {
    pub fn get(&self, name: &str, version: Version) -> Option<&IndexEntry> {
        self.entries.get(&(name.to_string(), version))
    }

    /// Adds an entry; an existing (name, version) is never replaced.
    pub fn insert(&mut self, entry: IndexEntry) -> Result<(), RepoError> {
        let key = (entry.name.clone(), entry.version);
        if self.entries.contains_key(&key) {
            return Err(RepoError::DuplicateVersion {
                name: entry.name,
                version: entry.version,
            });
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_xml(&self) -> Element {
        let mut root = Element::new("index");
        for e in self.entries.values() {
            root.push(entry_to_xml(e));
        }
        root
    }

    pub fn to_document(&self) -> String {
        self.to_xml().to_document()
    }

    pub fn parse(text: &str) -> Result<RepoIndex, RepoError> {
        let root = xml::parse(text)?;
        if root.name != "index" {
            return Err(XmlError::schema("/", "expected index root").into());
        }
        root.only_attrs(&[], "/index")?;
        let mut index = RepoIndex::default();
        for (i, el) in root.elements().enumerate() {
            index.insert(entry_from_xml(el, &format!("/index/package[{i}]"))?)?;
        }
        Ok(index)
    }
}

pub fn entry_to_xml(e: &IndexEntry) -> Element {
    Element::new("package")
        .attr("name", &e.name)
        .attr("version", e.version.to_string())
        .attr("digest", &e.digest)
        .attr("locator", &e.locator)
        .attr("format", &e.format)
        .attr("registered", e.registered.to_string())
}

pub fn entry_from_xml(el: &Element, path: &str) -> Result<IndexEntry, RepoError> {
    if el.name != "package" {
        return Err(XmlError::schema(path, format!("expected package, found {}", el.name)).into());
    }
    el.only_attrs(&["name", "version", "digest", "locator", "format", "registered"], path)?;
    let version = el.require("version", path)?;
    let registered = el.require("registered", path)?;
    Ok(IndexEntry {
        name: el.require("name", path)?.to_string(),
        version: version
            .parse()
            .map_err(|e: String| XmlError::schema(format!("{path}@version"), e))?,
        digest: el.require("digest", path)?.to_string(),
        locator: el.require("locator", path)?.to_string(),
        format: el.require("format", path)?.to_string(),
        registered: registered
            .parse()
            .map_err(|_| XmlError::schema(format!("{path}@registered"), "not a timestamp"))?,
    })
}

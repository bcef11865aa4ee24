//! `manifest.xml`: what a package contains and the hash of every file.

use std::collections::BTreeMap;

use comodi_core::cdl::Version;
use comodi_core::xml::{self, Element, XmlError};
use sha2::{Digest, Sha256};

use crate::RepoError;

pub const MANIFEST_PATH: &str = "manifest.xml";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FileRole {
    Source,
    Cdf,
    GlueSource,
    WiringMetadata,
    /// A compiled library for one platform tag such as `linux-x86_64`.
    Binary(String),
    Resource,
}

impl FileRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            FileRole::Source => "source",
            FileRole::Cdf => "cdf",
            FileRole::GlueSource => "glueSource",
            FileRole::WiringMetadata => "wiringMetadata",
            FileRole::Binary(_) => "binary",
            FileRole::Resource => "resource",
        }
    }

    pub fn platform(&self) -> Option<&str> {
        match self {
            FileRole::Binary(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub role: FileRole,
    pub sha256: String,
    pub size: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackageManifest {
    pub name: String,
    pub version: Version,
    pub language: String,
    pub open_source: bool,
    pub files: Vec<ManifestEntry>,
}

impl PackageManifest {
    /// Builds a manifest over `files`, hashing each one.
    pub fn build(
        name: &str,
        version: Version,
        language: &str,
        open_source: bool,
        files: &[(&str, FileRole, &[u8])],
    ) -> Result<(PackageManifest, BTreeMap<String, Vec<u8>>), RepoError> {
        let manifest = PackageManifest {
            name: name.to_string(),
            version,
            language: language.to_string(),
            open_source,
            files: files
                .iter()
                .map(|(path, role, bytes)| ManifestEntry {
                    path: path.to_string(),
                    role: role.clone(),
                    sha256: sha256_hex(bytes),
                    size: bytes.len() as u64,
                })
                .collect(),
        };
        manifest.check()?;
        let contents = files.iter().map(|(p, _, b)| (p.to_string(), b.to_vec())).collect();
        Ok((manifest, contents))
    }

    pub fn entry(&self, path: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|f| f.path == path)
    }

    pub fn with_role<'a>(&'a self, role: &'a FileRole) -> impl Iterator<Item = &'a ManifestEntry> + 'a {
        self.files.iter().filter(move |f| &f.role == role)
    }

    pub fn binary_for(&self, platform: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|f| f.role.platform() == Some(platform))
    }

    /// Package invariants: one descriptor, sources exactly when open, sane paths.
    pub fn check(&self) -> Result<(), RepoError> {
        let bad = |m: String| Err(RepoError::Manifest(m));
        let cdfs = self.with_role(&FileRole::Cdf).count();
        if cdfs != 1 {
            return bad(format!("expected exactly one cdf entry, found {cdfs}"));
        }
        let sources = self.with_role(&FileRole::Source).count();
        if self.open_source && sources == 0 {
            return bad("open-source package without source entries".into());
        }
        if !self.open_source && sources > 0 {
            return bad("closed-source package contains source entries".into());
        }
        let mut seen = std::collections::HashSet::new();
        for f in &self.files {
            if !safe_path(&f.path) {
                return bad(format!("unsafe entry path {:?}", f.path));
            }
            if !seen.insert(&f.path) {
                return bad(format!("entry {} listed twice", f.path));
            }
        }
        Ok(())
    }

    pub fn to_xml(&self) -> Element {
        let mut root = Element::new("manifest")
            .attr("name", &self.name)
            .attr("version", self.version.to_string())
            .attr("language", &self.language)
            .attr("openSource", self.open_source.to_string());
        for f in &self.files {
            root.push(
                Element::new("file")
                    .attr("path", &f.path)
                    .attr("role", f.role.as_str())
                    .attr_opt("platform", f.role.platform())
                    .attr("sha256", &f.sha256)
                    .attr("size", f.size.to_string()),
            );
        }
        root
    }

    pub fn to_document(&self) -> String {
        self.to_xml().to_document()
    }

    pub fn parse(text: &str) -> Result<PackageManifest, RepoError> {
        let root = xml::parse(text)?;
        let path = "/manifest";
        if root.name != "manifest" {
            return Err(XmlError::schema("/", "expected manifest root").into());
        }
        root.only_attrs(&["name", "version", "language", "openSource"], path)?;
        let version = root.require("version", path)?;
        let mut m = PackageManifest {
            name: root.require("name", path)?.to_string(),
            version: version
                .parse()
                .map_err(|e: String| XmlError::schema(format!("{path}@version"), e))?,
            language: root.require("language", path)?.to_string(),
            open_source: match root.require("openSource", path)? {
                "true" => true,
                "false" => false,
                v => return Err(XmlError::schema(format!("{path}@openSource"), format!("not a boolean: {v}")).into()),
            },
            files: Vec::new(),
        };
        for (i, el) in root.elements().enumerate() {
            let here = format!("{path}/file[{i}]");
            if el.name != "file" {
                return Err(XmlError::schema(here, format!("unknown element {}", el.name)).into());
            }
            el.only_attrs(&["path", "role", "platform", "sha256", "size"], &here)?;
            let role = match (el.require("role", &here)?, el.get("platform")) {
                ("source", None) => FileRole::Source,
                ("cdf", None) => FileRole::Cdf,
                ("glueSource", None) => FileRole::GlueSource,
                ("wiringMetadata", None) => FileRole::WiringMetadata,
                ("resource", None) => FileRole::Resource,
                ("binary", Some(p)) => FileRole::Binary(p.to_string()),
                (r, _) => return Err(XmlError::schema(format!("{here}@role"), format!("bad role {r}")).into()),
            };
            let size = el.require("size", &here)?;
            m.files.push(ManifestEntry {
                path: el.require("path", &here)?.to_string(),
                role,
                sha256: el.require("sha256", &here)?.to_string(),
                size: size
                    .parse()
                    .map_err(|_| XmlError::schema(format!("{here}@size"), format!("not a size: {size}")))?,
            });
        }
        m.check()?;
        Ok(m)
    }
}

fn safe_path(p: &str) -> bool {
    !p.is_empty()
        && p != MANIFEST_PATH
        && !p.starts_with('/')
        && !p.contains('\\')
        && p.split('/').all(|seg| !seg.is_empty() && seg != "." && seg != "..")
}

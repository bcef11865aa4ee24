//! Component packages and where they live: archives with a verified
//! manifest, a directory-backed repository with an HTTP front, a local cache
//! on the client side, and compile services.

pub mod archive;
pub mod compile;
pub mod config;
pub mod endpoint;
pub mod fetch;
pub mod index;
pub mod manifest;
mod multipart;
pub mod server;
pub mod store;

use std::path::Path;

use comodi_core::cdl::Version;
use comodi_core::xml::XmlError;
use thiserror::Error;

pub use archive::{pack, unpack_verify, ArchiveFormat, FormatRegistry, Package, TarGzFormat, ZipFormat};
pub use compile::{CompileError, CompileRequest, CompileResult, CompileService, LocalCompiler, RemoteCompiler};
pub use config::Config;
pub use endpoint::{open_endpoint, DirEndpoint, EndpointRegistry, HttpEndpoint, RepoEndpoint};
pub use fetch::LocalRepo;
pub use index::{IndexEntry, RepoIndex};
pub use manifest::{sha256_hex, FileRole, ManifestEntry, PackageManifest, MANIFEST_PATH};
pub use server::{serve_repo, ServerHandle};
pub use store::{Receipt, RepoStore};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepoError {
    #[error(transparent)]
    Xml(#[from] XmlError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("archive has no manifest.xml")]
    MissingManifest,
    #[error("missing file {0}")]
    MissingFile(String),
    #[error("hash mismatch in {0}")]
    HashMismatch(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("corrupt archive: {0}")]
    Corrupt(String),
    #[error("unknown archive format: {0}")]
    UnknownFormat(String),
    #[error("{name} {version} is already registered")]
    DuplicateVersion { name: String, version: Version },
    #[error("{name} {version} not found")]
    NotFound { name: String, version: Version },
    #[error("downloaded {name} {version} does not match its digest")]
    DigestMismatch { name: String, version: Version },
    #[error("no repository endpoint for {0}")]
    UnknownEndpoint(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("server answered {status}: {message}")]
    Protocol { status: u16, message: String },
}

impl RepoError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        RepoError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// Short machine-readable name, used in protocol error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            RepoError::Xml(_) => "Xml",
            RepoError::Io { .. } => "Io",
            RepoError::MissingManifest => "MissingManifest",
            RepoError::MissingFile(_) => "MissingFile",
            RepoError::HashMismatch(_) => "HashMismatch",
            RepoError::Manifest(_) => "Manifest",
            RepoError::Corrupt(_) => "Corrupt",
            RepoError::UnknownFormat(_) => "UnknownFormat",
            RepoError::DuplicateVersion { .. } => "DuplicateVersion",
            RepoError::NotFound { .. } => "NotFound",
            RepoError::DigestMismatch { .. } => "DigestMismatch",
            RepoError::UnknownEndpoint(_) => "UnknownEndpoint",
            RepoError::Transport(_) => "Transport",
            RepoError::Protocol { .. } => "Protocol",
        }
    }
}

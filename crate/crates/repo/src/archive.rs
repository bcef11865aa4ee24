//! Archive formats and packing.

use std::collections::BTreeMap;
use std::io::{Cursor, Read, Write};
use std::sync::Arc;

use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};

use crate::manifest::{sha256_hex, PackageManifest, MANIFEST_PATH};
use crate::RepoError;

/// One container format. Writers must be deterministic: the same entries in
/// the same order always give the same bytes.
pub trait ArchiveFormat: Send + Sync {
    fn name(&self) -> &'static str;
    fn extension(&self) -> &'static str;
    fn sniff(&self, bytes: &[u8]) -> bool;
    fn write(&self, entries: &[(&str, &[u8])]) -> Result<Vec<u8>, RepoError>;
    fn read(&self, bytes: &[u8]) -> Result<Vec<(String, Vec<u8>)>, RepoError>;
}

pub struct ZipFormat;

impl ArchiveFormat for ZipFormat {
    fn name(&self) -> &'static str {
        "zip"
    }

    fn extension(&self) -> &'static str {
        "zip"
    }

    fn sniff(&self, bytes: &[u8]) -> bool {
        bytes.starts_with(b"PK\x03\x04")
    }

    fn write(&self, entries: &[(&str, &[u8])]) -> Result<Vec<u8>, RepoError> {
        let mut w = zip::ZipWriter::new(Cursor::new(Vec::new()));
        let opts = zip::write::SimpleFileOptions::default()
            .compression_method(zip::CompressionMethod::Deflated)
            .last_modified_time(zip::DateTime::default())
            .unix_permissions(0o644);
        for (path, data) in entries {
            w.start_file(*path, opts).map_err(corrupt)?;
            w.write_all(data).map_err(|e| RepoError::Corrupt(e.to_string()))?;
        }
        Ok(w.finish().map_err(corrupt)?.into_inner())
    }

    fn read(&self, bytes: &[u8]) -> Result<Vec<(String, Vec<u8>)>, RepoError> {
        let mut z = zip::ZipArchive::new(Cursor::new(bytes)).map_err(corrupt)?;
        let mut out = Vec::with_capacity(z.len());
        for i in 0..z.len() {
            let mut f = z.by_index(i).map_err(corrupt)?;
            let mut data = Vec::with_capacity(f.size() as usize);
            f.read_to_end(&mut data)
                .map_err(|e| RepoError::Corrupt(format!("{}: {e}", f.name())))?;
            out.push((f.name().to_string(), data));
        }
        Ok(out)
    }
}

fn corrupt(e: zip::result::ZipError) -> RepoError {
    RepoError::Corrupt(e.to_string())
}

pub struct TarGzFormat;

impl ArchiveFormat for TarGzFormat {
    fn name(&self) -> &'static str {
        "tar.gz"
    }

    fn extension(&self) -> &'static str {
        "tar.gz"
    }

    fn sniff(&self, bytes: &[u8]) -> bool {
        bytes.starts_with(&[0x1f, 0x8b])
    }

    fn write(&self, entries: &[(&str, &[u8])]) -> Result<Vec<u8>, RepoError> {
        let io = |e: std::io::Error| RepoError::Corrupt(e.to_string());
        let gz = GzBuilder::new().mtime(0).write(Vec::new(), Compression::new(6));
        let mut tar = tar::Builder::new(gz);
        tar.mode(tar::HeaderMode::Deterministic);
        for (path, data) in entries {
            let mut h = tar::Header::new_ustar();
            h.set_size(data.len() as u64);
            h.set_mode(0o644);
            h.set_mtime(0);
            h.set_uid(0);
            h.set_gid(0);
            h.set_entry_type(tar::EntryType::Regular);
            tar.append_data(&mut h, path, *data).map_err(io)?;
        }
        tar.into_inner().map_err(io)?.finish().map_err(io)
    }

    fn read(&self, bytes: &[u8]) -> Result<Vec<(String, Vec<u8>)>, RepoError> {
        let io = |e: std::io::Error| RepoError::Corrupt(e.to_string());
        let mut tar = tar::Archive::new(GzDecoder::new(bytes));
        let mut out = Vec::new();
        for entry in tar.entries().map_err(io)? {
            let mut entry = entry.map_err(io)?;
            let path = entry.path().map_err(io)?.to_string_lossy().into_owned();
            let mut data = Vec::new();
            entry
                .read_to_end(&mut data)
                .map_err(|e| RepoError::Corrupt(format!("{path}: {e}")))?;
            out.push((path, data));
        }
        Ok(out)
    }
}

/// Formats by name. The default registry knows `zip` and `tar.gz`.
#[derive(Clone)]
pub struct FormatRegistry {
    formats: BTreeMap<&'static str, Arc<dyn ArchiveFormat>>,
}

impl Default for FormatRegistry {
    fn default() -> Self {
        let mut r = FormatRegistry::empty();
        r.register(Arc::new(ZipFormat));
        r.register(Arc::new(TarGzFormat));
        r
    }
}

impl FormatRegistry {
    pub fn empty() -> Self {
        FormatRegistry {
            formats: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, f: Arc<dyn ArchiveFormat>) {
        self.formats.insert(f.name(), f);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ArchiveFormat>, RepoError> {
        self.formats
            .get(name)
            .cloned()
            .ok_or_else(|| RepoError::UnknownFormat(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.formats.keys().copied()
    }

    pub fn detect(&self, bytes: &[u8]) -> Result<Arc<dyn ArchiveFormat>, RepoError> {
        self.formats
            .values()
            .find(|f| f.sniff(bytes))
            .cloned()
            .ok_or_else(|| RepoError::UnknownFormat("unrecognised archive bytes".into()))
    }
}

/// A package as unpacked: its manifest and every listed file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Package {
    pub manifest: PackageManifest,
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Package {
    pub fn file(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }
}

fn verify_files(manifest: &PackageManifest, files: &BTreeMap<String, Vec<u8>>) -> Result<(), RepoError> {
    for entry in &manifest.files {
        let data = files
            .get(&entry.path)
            .ok_or_else(|| RepoError::MissingFile(entry.path.clone()))?;
        if sha256_hex(data) != entry.sha256 || data.len() as u64 != entry.size {
            return Err(RepoError::HashMismatch(entry.path.clone()));
        }
    }
    if let Some(extra) = files.keys().find(|p| manifest.entry(p).is_none()) {
        return Err(RepoError::Manifest(format!("file {extra} is not listed in the manifest")));
    }
    Ok(())
}

/// Writes `manifest.xml` first, then the files in manifest order.
pub fn pack(
    manifest: &PackageManifest,
    files: &BTreeMap<String, Vec<u8>>,
    format: &dyn ArchiveFormat,
) -> Result<Vec<u8>, RepoError> {
    manifest.check()?;
    verify_files(manifest, files)?;
    let doc = manifest.to_document();
    let mut entries: Vec<(&str, &[u8])> = vec![(MANIFEST_PATH, doc.as_bytes())];
    for e in &manifest.files {
        entries.push((&e.path, &files[&e.path]));
    }
    format.write(&entries)
}

pub fn unpack_verify(bytes: &[u8], formats: &FormatRegistry) -> Result<Package, RepoError> {
    let format = formats.detect(bytes)?;
    let mut manifest = None;
    let mut files = BTreeMap::new();
    for (path, data) in format.read(bytes)? {
        if path == MANIFEST_PATH {
            let text = String::from_utf8(data).map_err(|_| RepoError::Corrupt("manifest is not UTF-8".into()))?;
            manifest = Some(PackageManifest::parse(&text)?);
        } else if files.insert(path.clone(), data).is_some() {
            return Err(RepoError::Corrupt(format!("duplicate entry {path}")));
        }
    }
    let manifest = manifest.ok_or(RepoError::MissingManifest)?;
    verify_files(&manifest, &files)?;
    Ok(Package { manifest, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::FileRole;
    use comodi_core::cdl::Version;

    fn add_package(open: bool) -> Result<(PackageManifest, BTreeMap<String, Vec<u8>>), RepoError> {
        let mut files: Vec<(&str, FileRole, &[u8])> = vec![
            ("component.xml", FileRole::Cdf, b"<component/>"),
            ("add_glue.c", FileRole::GlueSource, b"int x;"),
            ("bin/linux-x86_64/libadd.so", FileRole::Binary("linux-x86_64".into()), &[0u8, 1, 2, 3]),
        ];
        if open {
            files.push(("src/add.c", FileRole::Source, b"double add(double a, double b);"));
        }
        PackageManifest::build("add", Version::new(1, 0, 0), "c_subset", open, &files)
    }

    #[test]
    fn four_entries_and_stable_bytes() {
        let (m, files) = add_package(false).unwrap();
        for format in [&ZipFormat as &dyn ArchiveFormat, &TarGzFormat] {
            let bytes = pack(&m, &files, format).unwrap();
            assert_eq!(format.read(&bytes).unwrap().len(), 4);
            let p = unpack_verify(&bytes, &FormatRegistry::default()).unwrap();
            assert_eq!(p.manifest, m);
            assert_eq!(pack(&p.manifest, &p.files, format).unwrap(), bytes);
        }
    }

    #[test]
    fn closed_source_with_source_is_refused() {
        let (mut m, files) = add_package(true).unwrap();
        m.open_source = false;
        assert!(matches!(pack(&m, &files, &ZipFormat), Err(RepoError::Manifest(_))));
    }

    #[test]
    fn flipped_byte_names_the_file() {
        let (m, files) = add_package(false).unwrap();
        let formats = FormatRegistry::default();
        let mut entries: Vec<(String, Vec<u8>)> = ZipFormat.read(&pack(&m, &files, &ZipFormat).unwrap()).unwrap();
        entries[3].1[0] ^= 0xff;
        let refs: Vec<(&str, &[u8])> = entries.iter().map(|(p, d)| (p.as_str(), d.as_slice())).collect();
        let tampered = ZipFormat.write(&refs).unwrap();
        assert_eq!(
            unpack_verify(&tampered, &formats),
            Err(RepoError::HashMismatch("bin/linux-x86_64/libadd.so".into()))
        );
    }

    #[test]
    fn missing_manifest() {
        let bytes = TarGzFormat.write(&[("a.txt", b"x")]).unwrap();
        assert_eq!(unpack_verify(&bytes, &FormatRegistry::default()), Err(RepoError::MissingManifest));
    }

    #[test]
    fn missing_file_on_pack() {
        let (m, mut files) = add_package(false).unwrap();
        files.remove("add_glue.c");
        assert_eq!(pack(&m, &files, &ZipFormat), Err(RepoError::MissingFile("add_glue.c".into())));
    }
}

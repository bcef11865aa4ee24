//! Component descriptors: the XML document that states what a component
//! provides, what it uses, and how it should be shown and called.

mod document;
mod draft;
mod literal;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::diag::Diagnostic;
use crate::extract::{is_primitive, PassingMode, TypeDefInfo};
use crate::glue::mangle_name;

pub use document::{read_cdf, read_cdf_str, write_cdf, write_cdf_string, CDL_VERSION};
pub use draft::{confirm_all, draft_descriptor, parse_answers, AuthorAnswers, DescriptorMeta, DraftError};
pub use literal::{parse_literal, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
}

impl Version {
    pub fn new(major: u64, minor: u64, patch: u64) -> Self {
        Version { major, minor, patch }
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)
    }
}

impl FromStr for Version {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('.').collect();
        let num = |p: &str| {
            (!p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
                .then(|| p.parse::<u64>().ok())
                .flatten()
        };
        match parts.as_slice() {
            [a, b, c] => match (num(a), num(b), num(c)) {
                (Some(major), Some(minor), Some(patch)) => Ok(Version { major, minor, patch }),
                _ => Err(format!("version {s} is not three numbers")),
            },
            _ => Err(format!("version {s} is not major.minor.patch")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PortKind {
    Provides,
    Uses,
}

impl PortKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PortKind::Provides => "provides",
            PortKind::Uses => "uses",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortParam {
    pub name: String,
    pub type_name: String,
    pub passing: PassingMode,
    pub default: Option<String>,
    pub doc: Option<String>,
}

/// An element the reader did not recognise, kept verbatim. `position` is the
/// number of recognised sibling elements written before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub position: usize,
    pub markup: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortSpec {
    pub local_name: String,
    pub global_name: String,
    pub kind: PortKind,
    pub return_type: String,
    pub params: Vec<PortParam>,
    pub doc: Option<String>,
    /// Calls may cross a process boundary; glue plans a message layout.
    pub remote: bool,
    pub extensions: Vec<Extension>,
}

impl PortSpec {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Number of leading params without a default.
    pub fn required_arity(&self) -> usize {
        self.params.iter().rposition(|p| p.default.is_none()).map_or(0, |i| i + 1)
    }

    pub fn param_default(&self, index: usize) -> Option<Value> {
        let p = self.params.get(index)?;
        parse_literal(&p.type_name, p.default.as_deref()?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDescriptor {
    pub name: String,
    pub version: Version,
    pub language: String,
    pub author: String,
    pub license: String,
    pub open_source: bool,
    pub provides: Vec<PortSpec>,
    pub uses: Vec<PortSpec>,
    pub type_defs: Vec<TypeDefInfo>,
    /// Display hints such as displayName, category, iconRef.
    pub representation: BTreeMap<String, String>,
    pub documentation: String,
    pub platforms: Vec<String>,
    pub extensions: Vec<Extension>,
}

impl ComponentDescriptor {
    pub fn ports(&self) -> impl Iterator<Item = &PortSpec> {
        self.provides.iter().chain(&self.uses)
    }

    pub fn provides_port(&self, local: &str) -> Option<&PortSpec> {
        self.provides.iter().find(|p| p.local_name == local)
    }

    pub fn uses_port(&self, local: &str) -> Option<&PortSpec> {
        self.uses.iter().find(|p| p.local_name == local)
    }

    pub fn type_def(&self, name: &str) -> Option<&TypeDefInfo> {
        self.type_defs.iter().find(|t| t.name == name)
    }

    pub fn is_fortran(&self) -> bool {
        is_fortran(&self.language)
    }
}

pub fn is_fortran(language: &str) -> bool {
    language.to_ascii_lowercase().starts_with("fortran")
}

/// Component names double as file and directory names.
pub fn is_shell_safe(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

pub fn validate_cdf(d: &ComponentDescriptor) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !is_shell_safe(&d.name) {
        out.push(Diagnostic::error(
            "BadName",
            "/component@name",
            format!("component name {:?} must be non-empty and use only A-Z a-z 0-9 _ -", d.name),
        ));
    }

    let mut type_names = HashSet::new();
    for (i, t) in d.type_defs.iter().enumerate() {
        let path = format!("/component/typedefs/typedef[{i}]");
        if !type_names.insert(t.name.as_str()) {
            out.push(Diagnostic::error("DuplicateTypeDef", &path, format!("typedef {} defined twice", t.name)));
        }
        if t.fields.is_empty() {
            out.push(Diagnostic::error("EmptyTypeDef", &path, format!("typedef {} has no fields", t.name)));
        }
        let mut fields = HashSet::new();
        for (f, ty) in &t.fields {
            if !fields.insert(f.as_str()) {
                out.push(Diagnostic::error("DuplicateField", &path, format!("field {f} appears twice")));
            }
            if !is_primitive(ty) && d.type_def(ty).is_none() {
                out.push(Diagnostic::error("UnresolvedType", &path, format!("field {f} has unknown type {ty}")));
            }
        }
    }

    if d.provides.is_empty() && d.uses.is_empty() {
        out.push(Diagnostic::warning("NoPorts", "/component", "descriptor declares no ports"));
    }
    for (kind, ports) in [(PortKind::Provides, &d.provides), (PortKind::Uses, &d.uses)] {
        let mut seen = HashSet::new();
        for (i, port) in ports.iter().enumerate() {
            let path = format!("/component/{}/port[{i}]", kind.as_str());
            validate_port(d, port, kind, &path, &mut seen, &mut out);
        }
    }
    out
}

fn validate_port<'a>(
    d: &ComponentDescriptor,
    port: &'a PortSpec,
    kind: PortKind,
    path: &str,
    seen: &mut HashSet<&'a str>,
    out: &mut Vec<Diagnostic>,
) {
    let name = &port.local_name;
    if !seen.insert(name.as_str()) {
        out.push(Diagnostic::error("DuplicatePort", path, format!("{} port {name} declared twice", kind.as_str())));
    }
    if port.kind != kind {
        out.push(Diagnostic::error("PortKind", path, format!("port {name} is listed under {}", kind.as_str())));
    }
    let expected = mangle_name(&d.name, d.version.major, name);
    if port.global_name != expected {
        out.push(Diagnostic::error(
            "GlobalName",
            path,
            format!("global name {} should be {expected}", port.global_name),
        ));
    }
    let resolved = |t: &str| is_primitive(t) || d.type_def(t).is_some();
    if !resolved(&port.return_type) {
        out.push(Diagnostic::error("UnresolvedType", path, format!("return type {} is unknown", port.return_type)));
    }
    if port.doc.as_deref().is_none_or(|t| t.trim().is_empty()) {
        out.push(Diagnostic::warning("Undocumented", path, format!("port {name} has no documentation")));
    }
    let mut params = HashSet::new();
    for (j, p) in port.params.iter().enumerate() {
        let ppath = format!("{path}/param[{j}]");
        if !params.insert(p.name.as_str()) {
            out.push(Diagnostic::error("DuplicateParam", &ppath, format!("parameter {} appears twice", p.name)));
        }
        if p.type_name == "void" {
            out.push(Diagnostic::error("VoidParam", &ppath, format!("parameter {} has type void", p.name)));
        } else if !resolved(&p.type_name) {
            out.push(Diagnostic::error("UnresolvedType", &ppath, format!("parameter {} has unknown type {}", p.name, p.type_name)));
        }
        match &p.default {
            Some(lit) if parse_literal(&p.type_name, lit).is_none() => out.push(Diagnostic::error(
                "BadDefault",
                &ppath,
                format!("default {lit:?} is not a {} literal", p.type_name),
            )),
            None if kind == PortKind::Uses => out.push(Diagnostic::warning(
                "NoDefault",
                &ppath,
                format!("uses port parameter {} has no default", p.name),
            )),
            _ => {}
        }
    }
    if port.params[..port.required_arity()].iter().any(|p| p.default.is_some()) {
        out.push(Diagnostic::error(
            "DefaultOrder",
            path,
            format!("port {name} has a defaulted parameter before one without a default"),
        ));
    }
}

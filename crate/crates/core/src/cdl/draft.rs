//! Drafting a descriptor from an extracted interface plus the author's answers.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::extract::{is_primitive, FunctionSig, InterfaceModel, TypeDefInfo};
use crate::glue::{Collision, NameRegistry};
use crate::xml::{self, XmlError};

use super::{is_shell_safe, parse_literal, ComponentDescriptor, PortKind, PortParam, PortSpec, Version};

/// Metadata the source cannot supply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorMeta {
    pub name: String,
    pub version: Version,
    pub author: String,
    pub license: String,
    pub open_source: bool,
}

/// What the author confirms or adds on top of the extracted interface.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuthorAnswers {
    pub provides: BTreeSet<String>,
    pub uses: BTreeSet<String>,
    pub remote: BTreeSet<String>,
    pub docs: BTreeMap<String, String>,
    pub param_docs: BTreeMap<(String, String), String>,
    pub defaults: BTreeMap<(String, String), String>,
    /// Names the extractor could not resolve, mapped to a known type.
    pub types: BTreeMap<String, String>,
    pub representation: BTreeMap<String, String>,
    pub documentation: Option<String>,
    pub platforms: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DraftError {
    #[error("component name {0:?} is not shell-safe")]
    BadName(String),
    #[error("answers refer to unknown function {0}")]
    UnknownFunction(String),
    #[error("answers refer to unknown parameter {param} of {port}")]
    UnknownParam { port: String, param: String },
    #[error("{0} has no body in this file and cannot be provided")]
    NotDefined(String),
    #[error("{0} is defined in this file and cannot be a uses port")]
    Defined(String),
    #[error("default {value:?} for {port}.{param} is not a {type_name} literal")]
    BadDefault {
        port: String,
        param: String,
        value: String,
        type_name: String,
    },
    #[error(transparent)]
    Collision(#[from] Collision),
}

/// Directive form `default <param> = <literal>` found in source comments.
fn directive_defaults(f: &FunctionSig) -> impl Iterator<Item = (&str, &str)> {
    f.directives.iter().filter_map(|d| {
        let rest = d.trim().strip_prefix("default")?;
        let (param, value) = rest.split_once('=')?;
        Some((param.trim(), value.trim()))
    })
}

pub fn draft_descriptor(
    m: &InterfaceModel,
    a: &AuthorAnswers,
    meta: &DescriptorMeta,
) -> Result<ComponentDescriptor, DraftError> {
    if !is_shell_safe(&meta.name) {
        return Err(DraftError::BadName(meta.name.clone()));
    }
    let named = a.docs.keys().chain(a.remote.iter()).chain(a.defaults.keys().map(|(p, _)| p));
    let named = named.chain(a.param_docs.keys().map(|(p, _)| p));
    for name in a.provides.iter().chain(&a.uses).chain(named) {
        if m.function(name).is_none() {
            return Err(DraftError::UnknownFunction(name.clone()));
        }
    }
    for ((port, param), _) in a.defaults.iter().chain(&a.param_docs) {
        let f = m.function(port).expect("checked above");
        if !f.params.iter().any(|p| &p.name == param) {
            return Err(DraftError::UnknownParam {
                port: port.clone(),
                param: param.clone(),
            });
        }
    }

    let resolve = |t: &str| a.types.get(t).cloned().unwrap_or_else(|| t.to_string());
    let mut registry = NameRegistry::new();
    let mut provides = Vec::new();
    let mut uses = Vec::new();
    for f in &m.functions {
        let kind = match (a.provides.contains(&f.local_name), a.uses.contains(&f.local_name)) {
            (true, _) if !f.defined => return Err(DraftError::NotDefined(f.local_name.clone())),
            (_, true) if f.defined => return Err(DraftError::Defined(f.local_name.clone())),
            (true, _) => PortKind::Provides,
            (_, true) => PortKind::Uses,
            _ => continue,
        };
        let global_name = registry.insert(&meta.name, meta.version.major, &f.local_name)?;
        let mut params = Vec::new();
        for p in &f.params {
            let type_name = resolve(&p.type_name);
            let key = (f.local_name.clone(), p.name.clone());
            let default = a
                .defaults
                .get(&key)
                .map(String::as_str)
                .or_else(|| directive_defaults(f).find(|(n, _)| *n == p.name).map(|(_, v)| v));
            if let Some(value) = default {
                if parse_literal(&type_name, value).is_none() {
                    return Err(DraftError::BadDefault {
                        port: f.local_name.clone(),
                        param: p.name.clone(),
                        value: value.to_string(),
                        type_name,
                    });
                }
            }
            params.push(PortParam {
                name: p.name.clone(),
                type_name,
                passing: p.passing,
                default: default.map(str::to_string),
                doc: a.param_docs.get(&key).cloned(),
            });
        }
        let port = PortSpec {
            local_name: f.local_name.clone(),
            global_name,
            kind,
            return_type: resolve(&f.return_type),
            params,
            doc: a.docs.get(&f.local_name).cloned().or_else(|| f.doc.clone()),
            remote: a.remote.contains(&f.local_name),
            extensions: Vec::new(),
        };
        match kind {
            PortKind::Provides => provides.push(port),
            PortKind::Uses => uses.push(port),
        }
    }

    let type_defs = used_type_defs(m, provides.iter().chain(&uses), &resolve);
    Ok(ComponentDescriptor {
        name: meta.name.clone(),
        version: meta.version,
        language: m.language.clone(),
        author: meta.author.clone(),
        license: meta.license.clone(),
        open_source: meta.open_source,
        provides,
        uses,
        type_defs,
        representation: a.representation.clone(),
        documentation: a.documentation.clone().unwrap_or_default(),
        platforms: a.platforms.clone(),
        extensions: Vec::new(),
    })
}

/// Typedefs reachable from the ports, in the order the source defines them.
fn used_type_defs<'a>(
    m: &InterfaceModel,
    ports: impl Iterator<Item = &'a PortSpec>,
    resolve: &dyn Fn(&str) -> String,
) -> Vec<TypeDefInfo> {
    let mut wanted: BTreeSet<String> = BTreeSet::new();
    let mut pending: Vec<String> = ports
        .flat_map(|p| std::iter::once(p.return_type.clone()).chain(p.params.iter().map(|q| q.type_name.clone())))
        .collect();
    while let Some(t) = pending.pop() {
        if is_primitive(&t) || !wanted.insert(t.clone()) {
            continue;
        }
        if let Some(td) = m.type_def(&t) {
            pending.extend(td.fields.iter().map(|(_, ty)| resolve(ty)));
        }
    }
    m.type_defs
        .iter()
        .filter(|t| wanted.contains(&t.name))
        .map(|t| TypeDefInfo {
            name: t.name.clone(),
            fields: t.fields.iter().map(|(f, ty)| (f.clone(), resolve(ty))).collect(),
        })
        .collect()
}

/// Reads `answers.xml`. The root carries the descriptor metadata.
pub fn parse_answers(text: &str) -> Result<(DescriptorMeta, AuthorAnswers), XmlError> {
    let root = xml::parse(text)?;
    let path = "/answers";
    if root.name != "answers" {
        return Err(XmlError::schema("/", format!("expected answers root, found {}", root.name)));
    }
    root.only_attrs(&["name", "version", "author", "license", "openSource"], path)?;
    let version = root.require("version", path)?;
    let meta = DescriptorMeta {
        name: root.require("name", path)?.to_string(),
        version: version.parse().map_err(|e: String| XmlError::schema(format!("{path}@version"), e))?,
        author: root.get("author").unwrap_or_default().to_string(),
        license: root.get("license").unwrap_or_default().to_string(),
        open_source: match root.get("openSource") {
            None | Some("true") => true,
            Some("false") => false,
            Some(v) => return Err(XmlError::schema(format!("{path}@openSource"), format!("expected true or false, found {v}"))),
        },
    };
    let mut a = AuthorAnswers::default();
    for (i, el) in root.elements().enumerate() {
        let here = format!("{path}/{}[{i}]", el.name);
        let attr = |k: &str| el.require(k, &here).map(str::to_string);
        match el.name.as_str() {
            "provide" | "use" => {
                el.only_attrs(&["port", "remote"], &here)?;
                let port = attr("port")?;
                if el.get("remote") == Some("true") {
                    a.remote.insert(port.clone());
                }
                if el.name == "provide" {
                    a.provides.insert(port);
                } else {
                    a.uses.insert(port);
                }
            }
            "doc" => {
                el.only_attrs(&["port", "param"], &here)?;
                let text = el.text_content().trim().to_string();
                match el.get("param") {
                    Some(param) => a.param_docs.insert((attr("port")?, param.to_string()), text),
                    None => a.docs.insert(attr("port")?, text),
                };
            }
            "default" => {
                el.only_attrs(&["port", "param", "value"], &here)?;
                a.defaults.insert((attr("port")?, attr("param")?), attr("value")?);
            }
            "type" => {
                el.only_attrs(&["name", "canonical"], &here)?;
                a.types.insert(attr("name")?, attr("canonical")?);
            }
            "hint" => {
                el.only_attrs(&["key", "value"], &here)?;
                a.representation.insert(attr("key")?, attr("value")?);
            }
            "documentation" => {
                el.only_attrs(&[], &here)?;
                a.documentation = Some(el.text_content().trim().to_string());
            }
            "platform" => {
                el.only_attrs(&["name"], &here)?;
                a.platforms.push(attr("name")?);
            }
            other => return Err(XmlError::schema(here, format!("unknown element {other}"))),
        }
    }
    Ok((meta, a))
}

/// Answers that confirm every extracted function in its natural role.
pub fn confirm_all(m: &InterfaceModel) -> AuthorAnswers {
    let mut a = AuthorAnswers::default();
    for f in &m.functions {
        if f.defined {
            a.provides.insert(f.local_name.clone());
        } else {
            a.uses.insert(f.local_name.clone());
        }
    }
    a
}

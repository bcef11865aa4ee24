//! `component.xml` reading and writing.

use std::collections::BTreeMap;

use crate::extract::{PassingMode, TypeDefInfo};
use crate::xml::{self, Element, Node, XmlError};

use super::{ComponentDescriptor, Extension, PortKind, PortParam, PortSpec, Version};

pub const CDL_VERSION: &str = "1";

pub fn write_cdf(d: &ComponentDescriptor) -> Element {
    let root = Element::new("component")
        .attr("cdl-version", CDL_VERSION)
        .attr("name", &d.name)
        .attr("version", d.version.to_string())
        .attr("language", &d.language)
        .attr("author", &d.author)
        .attr("license", &d.license)
        .attr("openSource", d.open_source.to_string());

    let mut known = Vec::new();
    if !d.documentation.is_empty() {
        known.push(Element::new("documentation").text(&d.documentation));
    }
    if !d.representation.is_empty() {
        let mut rep = Element::new("representation");
        for (k, v) in &d.representation {
            rep.push(Element::new("hint").attr("key", k).attr("value", v));
        }
        known.push(rep);
    }
    if !d.platforms.is_empty() {
        let mut el = Element::new("platforms");
        for p in &d.platforms {
            el.push(Element::new("platform").attr("name", p));
        }
        known.push(el);
    }
    if !d.type_defs.is_empty() {
        let mut el = Element::new("typedefs");
        for t in &d.type_defs {
            let mut td = Element::new("typedef").attr("name", &t.name);
            for (f, ty) in &t.fields {
                td.push(Element::new("field").attr("name", f).attr("type", ty));
            }
            el.push(td);
        }
        known.push(el);
    }
    for (tag, ports) in [("provides", &d.provides), ("uses", &d.uses)] {
        if !ports.is_empty() {
            let mut el = Element::new(tag);
            for p in ports {
                el.push(write_port(p));
            }
            known.push(el);
        }
    }
    with_extensions(root, known, &d.extensions)
}

pub fn write_cdf_string(d: &ComponentDescriptor) -> String {
    write_cdf(d).to_document()
}

fn write_port(p: &PortSpec) -> Element {
    let head = Element::new("port")
        .attr("name", &p.local_name)
        .attr("global", &p.global_name)
        .attr("returns", &p.return_type);
    let head = if p.remote { head.attr("remote", "true") } else { head };
    let mut known = Vec::new();
    if let Some(doc) = &p.doc {
        known.push(Element::new("doc").text(doc));
    }
    for q in &p.params {
        let mut el = Element::new("param")
            .attr("name", &q.name)
            .attr("type", &q.type_name)
            .attr("passing", q.passing.as_str())
            .attr_opt("default", q.default.as_deref());
        if let Some(doc) = &q.doc {
            el.push(Element::new("doc").text(doc));
        }
        known.push(el);
    }
    with_extensions(head, known, &p.extensions)
}

fn with_extensions(mut el: Element, known: Vec<Element>, extensions: &[Extension]) -> Element {
    let mut ext = extensions.iter().peekable();
    for (i, k) in known.into_iter().enumerate() {
        while let Some(e) = ext.next_if(|e| e.position <= i) {
            el.children.push(Node::Raw(e.markup.clone()));
        }
        el.push(k);
    }
    for e in ext {
        el.children.push(Node::Raw(e.markup.clone()));
    }
    el
}

pub fn read_cdf_str(text: &str) -> Result<ComponentDescriptor, XmlError> {
    read_cdf(&xml::parse(text)?)
}

pub fn read_cdf(root: &Element) -> Result<ComponentDescriptor, XmlError> {
    let path = "/component";
    if root.name != "component" {
        return Err(XmlError::schema("/", format!("expected component root, found {}", root.name)));
    }
    root.only_attrs(
        &["cdl-version", "name", "version", "language", "author", "license", "openSource"],
        path,
    )?;
    let cdl = root.require("cdl-version", path)?;
    if cdl != CDL_VERSION {
        return Err(XmlError::schema(format!("{path}@cdl-version"), format!("unsupported CDL version {cdl}")));
    }
    let mut d = ComponentDescriptor {
        name: root.require("name", path)?.to_string(),
        version: parse_version(root.require("version", path)?, &format!("{path}@version"))?,
        language: root.require("language", path)?.to_string(),
        author: root.require("author", path)?.to_string(),
        license: root.require("license", path)?.to_string(),
        open_source: parse_bool(root.require("openSource", path)?, &format!("{path}@openSource"))?,
        provides: Vec::new(),
        uses: Vec::new(),
        type_defs: Vec::new(),
        representation: BTreeMap::new(),
        documentation: String::new(),
        platforms: Vec::new(),
        extensions: Vec::new(),
    };
    let mut known = 0;
    for node in &root.children {
        let el = match node {
            Node::Element(el) => el,
            _ => return Err(XmlError::schema(path, "unexpected text content")),
        };
        let here = format!("{path}/{}", el.name);
        match el.name.as_str() {
            "documentation" => {
                el.only_attrs(&[], &here)?;
                d.documentation = el.text_content();
            }
            "representation" => {
                el.only_attrs(&[], &here)?;
                for (i, h) in el.elements().enumerate() {
                    let hp = expect(h, "hint", &format!("{here}/hint[{i}]"), &["key", "value"])?;
                    d.representation.insert(h.require("key", &hp)?.into(), h.require("value", &hp)?.into());
                }
            }
            "platforms" => {
                el.only_attrs(&[], &here)?;
                for (i, p) in el.elements().enumerate() {
                    let pp = expect(p, "platform", &format!("{here}/platform[{i}]"), &["name"])?;
                    d.platforms.push(p.require("name", &pp)?.into());
                }
            }
            "typedefs" => {
                el.only_attrs(&[], &here)?;
                for (i, t) in el.elements().enumerate() {
                    let tp = expect(t, "typedef", &format!("{here}/typedef[{i}]"), &["name"])?;
                    let mut fields = Vec::new();
                    for (j, f) in t.elements().enumerate() {
                        let fp = expect(f, "field", &format!("{tp}/field[{j}]"), &["name", "type"])?;
                        fields.push((f.require("name", &fp)?.to_string(), f.require("type", &fp)?.to_string()));
                    }
                    d.type_defs.push(TypeDefInfo {
                        name: t.require("name", &tp)?.to_string(),
                        fields,
                    });
                }
            }
            "provides" | "uses" => {
                el.only_attrs(&[], &here)?;
                let kind = if el.name == "provides" { PortKind::Provides } else { PortKind::Uses };
                for (i, p) in el.elements().enumerate() {
                    let port = read_port(p, kind, &format!("{here}/port[{i}]"))?;
                    match kind {
                        PortKind::Provides => d.provides.push(port),
                        PortKind::Uses => d.uses.push(port),
                    }
                }
            }
            _ => {
                d.extensions.push(extension(el, known));
                continue;
            }
        }
        known += 1;
    }
    Ok(d)
}

fn read_port(el: &Element, kind: PortKind, path: &str) -> Result<PortSpec, XmlError> {
    expect(el, "port", path, &["name", "global", "returns", "remote"])?;
    let mut port = PortSpec {
        local_name: el.require("name", path)?.to_string(),
        global_name: el.require("global", path)?.to_string(),
        kind,
        return_type: el.require("returns", path)?.to_string(),
        params: Vec::new(),
        doc: None,
        remote: match el.get("remote") {
            Some(v) => parse_bool(v, &format!("{path}@remote"))?,
            None => false,
        },
        extensions: Vec::new(),
    };
    let mut known = 0;
    let mut params = 0;
    for node in &el.children {
        let child = match node {
            Node::Element(c) => c,
            _ => return Err(XmlError::schema(path, "unexpected text content")),
        };
        match child.name.as_str() {
            "doc" => {
                child.only_attrs(&[], &format!("{path}/doc"))?;
                port.doc = Some(child.text_content());
            }
            "param" => {
                let pp = format!("{path}/param[{params}]");
                params += 1;
                child.only_attrs(&["name", "type", "passing", "default"], &pp)?;
                let passing = child.require("passing", &pp)?;
                let mut doc = None;
                for (k, c) in child.elements().enumerate() {
                    expect(c, "doc", &format!("{pp}/doc[{k}]"), &[])?;
                    doc = Some(c.text_content());
                }
                port.params.push(PortParam {
                    name: child.require("name", &pp)?.to_string(),
                    type_name: child.require("type", &pp)?.to_string(),
                    passing: PassingMode::parse(passing).ok_or_else(|| {
                        XmlError::schema(format!("{pp}@passing"), format!("unknown passing mode {passing}"))
                    })?,
                    default: child.get("default").map(str::to_string),
                    doc,
                });
            }
            _ => {
                port.extensions.push(extension(child, known));
                continue;
            }
        }
        known += 1;
    }
    Ok(port)
}

fn extension(el: &Element, position: usize) -> Extension {
    Extension {
        position,
        markup: el.source.clone().unwrap_or_else(|| {
            let doc = el.to_document();
            doc[xml::DECLARATION.len() + 1..].trim_end().to_string()
        }),
    }
}

fn expect(el: &Element, name: &str, path: &str, attrs: &[&str]) -> Result<String, XmlError> {
    if el.name != name {
        return Err(XmlError::schema(path, format!("expected {name}, found {}", el.name)));
    }
    el.only_attrs(attrs, path)?;
    Ok(path.to_string())
}

fn parse_version(v: &str, path: &str) -> Result<Version, XmlError> {
    v.parse().map_err(|e: String| XmlError::schema(path, e))
}

fn parse_bool(v: &str, path: &str) -> Result<bool, XmlError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(XmlError::schema(path, format!("expected true or false, found {v}"))),
    }
}

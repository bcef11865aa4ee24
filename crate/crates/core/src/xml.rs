//! Minimal XML tree used by every document format in the toolchain.
//!
//! Reading goes through `quick-xml`; writing is done here so that output is
//! deterministic: two-space indentation, attributes in insertion order,
//! elements whose only child is text written on one line.

use std::fmt::Write as _;

use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

pub const DECLARATION: &str = r#"<?xml version="1.0" encoding="UTF-8"?>"#;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XmlError {
    #[error("malformed XML at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

impl XmlError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        XmlError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Element path of a schema error, if this is one.
    pub fn path(&self) -> Option<&str> {
        match self {
            XmlError::Schema { path, .. } => Some(path),
            XmlError::Malformed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
    /// Pre-serialized markup written verbatim.
    Raw(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
    /// Exact source text of the element when it came from a parsed document.
    pub source: Option<String>,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Element {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.push((key.into(), value.into()));
        self
    }

    pub fn attr_opt(self, key: &str, value: Option<impl Into<String>>) -> Self {
        match value {
            Some(v) => self.attr(key, v),
            None => self,
        }
    }

    pub fn child(mut self, el: Element) -> Self {
        self.children.push(Node::Element(el));
        self
    }

    pub fn text(mut self, text: impl Into<String>) -> Self {
        self.children.push(Node::Text(text.into()));
        self
    }

    pub fn push(&mut self, el: Element) {
        self.children.push(Node::Element(el));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Fetches a mandatory attribute; the error names `path@key`.
    pub fn require(&self, key: &str, path: &str) -> Result<&str, XmlError> {
        self.get(key)
            .ok_or_else(|| XmlError::schema(format!("{path}@{key}"), "missing required attribute"))
    }

    /// Rejects any attribute not in `allowed`.
    pub fn only_attrs(&self, allowed: &[&str], path: &str) -> Result<(), XmlError> {
        match self.attrs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((k, _)) => Err(XmlError::schema(
                format!("{path}@{k}"),
                "unknown attribute",
            )),
            None => Ok(()),
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            _ => None,
        })
    }

    pub fn elements_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.elements().filter(move |e| e.name == name)
    }

    pub fn first(&self, name: &str) -> Option<&Element> {
        self.elements().find(|e| e.name == name)
    }

    /// Concatenated text content of the direct text children.
    pub fn text_content(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Serializes as a standalone document with XML declaration and trailing newline.
    pub fn to_document(&self) -> String {
        let mut out = String::from(DECLARATION);
        out.push('\n');
        self.write_into(&mut out, 0);
        out
    }

    fn write_into(&self, out: &mut String, depth: usize) {
        let indent = "  ".repeat(depth);
        out.push_str(&indent);
        out.push('<');
        out.push_str(&self.name);
        for (k, v) in &self.attrs {
            let _ = write!(out, " {k}=\"{}\"", escape(v));
        }
        if self.children.is_empty() {
            out.push_str("/>\n");
            return;
        }
        let only_text = self.children.iter().all(|n| matches!(n, Node::Text(_)));
        if only_text {
            out.push('>');
            out.push_str(&escape(&self.text_content()));
            let _ = writeln!(out, "</{}>", self.name);
            return;
        }
        out.push_str(">\n");
        for child in &self.children {
            match child {
                Node::Element(e) => e.write_into(out, depth + 1),
                Node::Text(t) => {
                    let _ = writeln!(out, "{indent}  {}", escape(t));
                }
                Node::Raw(r) => {
                    let _ = writeln!(out, "{indent}  {r}");
                }
            }
        }
        let _ = writeln!(out, "{indent}</{}>", self.name);
    }
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Parses a document and returns its root element.
///
/// Whitespace-only text is dropped; comments, processing instructions and the
/// declaration are ignored. Every element records its exact source slice.
pub fn parse(text: &str) -> Result<Element, XmlError> {
    let mut reader = Reader::from_str(text);
    let mut stack: Vec<(Element, usize)> = Vec::new();
    let mut root: Option<Element> = None;
    let malformed = |offset: usize, message: String| XmlError::Malformed { offset, message };

    loop {
        let before = reader.buffer_position() as usize;
        let event = reader
            .read_event()
            .map_err(|e| malformed(reader.error_position() as usize, e.to_string()))?;
        match event {
            Event::Start(start) => {
                let el = element_from(&start, &reader)?;
                stack.push((el, before));
            }
            Event::Empty(start) => {
                let mut el = element_from(&start, &reader)?;
                el.source = Some(text[before..reader.buffer_position() as usize].to_string());
                attach(&mut stack, &mut root, el, before)?;
            }
            Event::End(_) => {
                let (mut el, start) = stack
                    .pop()
                    .ok_or_else(|| malformed(before, "unbalanced end tag".into()))?;
                el.source = Some(text[start..reader.buffer_position() as usize].to_string());
                attach(&mut stack, &mut root, el, before)?;
            }
            Event::Text(t) => {
                let value = t
                    .unescape()
                    .map_err(|e| malformed(before, e.to_string()))?
                    .into_owned();
                if !value.trim().is_empty() {
                    match stack.last_mut() {
                        Some((el, _)) => el.children.push(Node::Text(value)),
                        None => return Err(malformed(before, "text outside root element".into())),
                    }
                }
            }
            Event::CData(c) => {
                let value = String::from_utf8_lossy(&c).into_owned();
                if let Some((el, _)) = stack.last_mut() {
                    el.children.push(Node::Text(value));
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(malformed(text.len(), "unclosed element".into()));
    }
    root.ok_or_else(|| malformed(0, "no root element".into()))
}

fn element_from(
    start: &quick_xml::events::BytesStart<'_>,
    reader: &Reader<&[u8]>,
) -> Result<Element, XmlError> {
    let malformed = |message: String| XmlError::Malformed {
        offset: reader.buffer_position() as usize,
        message,
    };
    let mut el = Element::new(String::from_utf8_lossy(start.name().as_ref()).into_owned());
    for attr in start.attributes() {
        let attr = attr.map_err(|e| malformed(e.to_string()))?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| malformed(e.to_string()))?
            .into_owned();
        if el.get(&key).is_some() {
            return Err(malformed(format!("duplicate attribute {key}")));
        }
        el.attrs.push((key, value));
    }
    Ok(el)
}

fn attach(
    stack: &mut [(Element, usize)],
    root: &mut Option<Element>,
    el: Element,
    offset: usize,
) -> Result<(), XmlError> {
    match stack.last_mut() {
        Some((parent, _)) => {
            parent.children.push(Node::Element(el));
            Ok(())
        }
        None if root.is_none() => {
            *root = Some(el);
            Ok(())
        }
        None => Err(XmlError::Malformed {
            offset,
            message: "multiple root elements".into(),
        }),
    }
}

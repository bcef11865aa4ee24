//! Extracted interface of one source file and its XML form.

use std::collections::BTreeSet;
use std::ops::Range;

use crate::xml::{self, Element, XmlError};

pub const PRIMITIVE_TYPES: [&str; 6] = ["int", "long", "float", "double", "char", "void"];

pub fn is_primitive(t: &str) -> bool {
    PRIMITIVE_TYPES.contains(&t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PassingMode {
    ByValue,
    ByReference,
}

impl PassingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PassingMode::ByValue => "byValue",
            PassingMode::ByReference => "byReference",
        }
    }

    pub fn parse(s: &str) -> Option<PassingMode> {
        match s {
            "byValue" => Some(PassingMode::ByValue),
            "byReference" => Some(PassingMode::ByReference),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamInfo {
    pub name: String,
    pub type_name: String,
    pub passing: PassingMode,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSig {
    pub local_name: String,
    pub return_type: String,
    pub params: Vec<ParamInfo>,
    pub defined: bool,
    pub doc: Option<String>,
    pub directives: Vec<String>,
    /// Byte range of the declaration in the source text.
    pub span: Range<usize>,
    pub line: usize,
}

impl FunctionSig {
    /// Name, return type and parameter list, ignoring docs and location.
    pub fn same_signature(&self, other: &FunctionSig) -> bool {
        self.local_name == other.local_name
            && self.return_type == other.return_type
            && self.params == other.params
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDefInfo {
    pub name: String,
    pub fields: Vec<(String, String)>,
}

/// A constant or variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDecl {
    pub name: String,
    pub type_name: String,
    pub literal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Directive {
    pub text: String,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InterfaceModel {
    pub source_origin: String,
    pub language: String,
    pub functions: Vec<FunctionSig>,
    pub type_defs: Vec<TypeDefInfo>,
    pub constants: Vec<DataDecl>,
    pub variables: Vec<DataDecl>,
    pub directives: Vec<Directive>,
}

impl InterfaceModel {
    pub fn function(&self, name: &str) -> Option<&FunctionSig> {
        self.functions.iter().find(|f| f.local_name == name)
    }

    pub fn type_def(&self, name: &str) -> Option<&TypeDefInfo> {
        self.type_defs.iter().find(|t| t.name == name)
    }

    pub fn is_resolved(&self, type_name: &str) -> bool {
        is_primitive(type_name) || self.type_def(type_name).is_some()
    }

    /// Type names used by function signatures that are neither primitive nor
    /// defined in this file.
    pub fn unresolved_types(&self) -> BTreeSet<&str> {
        self.functions
            .iter()
            .flat_map(|f| {
                std::iter::once(f.return_type.as_str()).chain(f.params.iter().map(|p| p.type_name.as_str()))
            })
            .filter(|t| !self.is_resolved(t))
            .collect()
    }
}

/// Functions declared but not defined in the file, in source order.
pub fn detect_uses_candidates(m: &InterfaceModel) -> Vec<FunctionSig> {
    m.functions.iter().filter(|f| !f.defined).cloned().collect()
}

fn flag(el: Element, m: &InterfaceModel, type_name: &str) -> Element {
    if m.is_resolved(type_name) {
        el
    } else {
        el.attr("unresolved", "true")
    }
}

pub fn interface_to_xml(m: &InterfaceModel) -> Element {
    let mut functions = Element::new("functions");
    for f in &m.functions {
        let mut el = Element::new("function")
            .attr("name", &f.local_name)
            .attr("returns", &f.return_type)
            .attr("defined", f.defined.to_string())
            .attr("line", f.line.to_string())
            .attr("span", format!("{}:{}", f.span.start, f.span.end));
        el = flag(el, m, &f.return_type);
        if let Some(doc) = &f.doc {
            el.push(Element::new("doc").text(doc));
        }
        for p in &f.params {
            let param = Element::new("param")
                .attr("position", p.position.to_string())
                .attr("name", &p.name)
                .attr("type", &p.type_name)
                .attr("passing", p.passing.as_str());
            el.push(flag(param, m, &p.type_name));
        }
        for d in &f.directives {
            el.push(Element::new("directive").text(d));
        }
        functions.push(el);
    }
    let mut typedefs = Element::new("typedefs");
    for t in &m.type_defs {
        let mut el = Element::new("typedef").attr("name", &t.name);
        for (name, ty) in &t.fields {
            el.push(flag(Element::new("field").attr("name", name).attr("type", ty), m, ty));
        }
        typedefs.push(el);
    }
    let data = |tag: &str, item: &str, list: &[DataDecl]| {
        let mut el = Element::new(tag);
        for d in list {
            let e = Element::new(item)
                .attr("name", &d.name)
                .attr("type", &d.type_name)
                .attr_opt("literal", d.literal.as_deref());
            el.push(flag(e, m, &d.type_name));
        }
        el
    };
    let mut directives = Element::new("directives");
    for d in &m.directives {
        directives.push(
            Element::new("directive")
                .attr("line", d.line.to_string())
                .attr("column", d.column.to_string())
                .text(&d.text),
        );
    }
    Element::new("interface")
        .attr("source", &m.source_origin)
        .attr("language", &m.language)
        .child(functions)
        .child(typedefs)
        .child(data("constants", "constant", &m.constants))
        .child(data("variables", "variable", &m.variables))
        .child(directives)
}

pub fn interface_to_string(m: &InterfaceModel) -> String {
    interface_to_xml(m).to_document()
}

fn number<T: std::str::FromStr>(el: &Element, key: &str, path: &str) -> Result<T, XmlError> {
    el.require(key, path)?
        .parse()
        .map_err(|_| XmlError::schema(format!("{path}@{key}"), "expected a number"))
}

fn section<'a>(root: &'a Element, name: &str) -> Result<&'a Element, XmlError> {
    root.first(name)
        .ok_or_else(|| XmlError::schema(format!("/interface/{name}"), "missing section"))
}

pub fn interface_from_str(text: &str) -> Result<InterfaceModel, XmlError> {
    interface_from_xml(&xml::parse(text)?)
}

pub fn interface_from_xml(root: &Element) -> Result<InterfaceModel, XmlError> {
    if root.name != "interface" {
        return Err(XmlError::schema("/", "expected interface root"));
    }
    root.only_attrs(&["source", "language"], "/interface")?;
    let mut m = InterfaceModel {
        source_origin: root.require("source", "/interface")?.to_string(),
        language: root.require("language", "/interface")?.to_string(),
        ..Default::default()
    };
    for (i, f) in section(root, "functions")?.elements_named("function").enumerate() {
        let path = format!("/interface/functions/function[{i}]");
        f.only_attrs(&["name", "returns", "defined", "line", "span", "unresolved"], &path)?;
        let span = f.require("span", &path)?;
        let (a, b) = span
            .split_once(':')
            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
            .ok_or_else(|| XmlError::schema(format!("{path}@span"), "expected start:end"))?;
        let mut params = Vec::new();
        for (j, p) in f.elements_named("param").enumerate() {
            let ppath = format!("{path}/param[{j}]");
            p.only_attrs(&["position", "name", "type", "passing", "unresolved"], &ppath)?;
            let passing = p.require("passing", &ppath)?;
            params.push(ParamInfo {
                name: p.require("name", &ppath)?.to_string(),
                type_name: p.require("type", &ppath)?.to_string(),
                passing: PassingMode::parse(passing)
                    .ok_or_else(|| XmlError::schema(format!("{ppath}@passing"), "unknown passing mode"))?,
                position: number(p, "position", &ppath)?,
            });
        }
        m.functions.push(FunctionSig {
            local_name: f.require("name", &path)?.to_string(),
            return_type: f.require("returns", &path)?.to_string(),
            params,
            defined: f.require("defined", &path)? == "true",
            doc: f.first("doc").map(Element::text_content),
            directives: f.elements_named("directive").map(Element::text_content).collect(),
            span: a..b,
            line: number(f, "line", &path)?,
        });
    }
    for (i, t) in section(root, "typedefs")?.elements_named("typedef").enumerate() {
        let path = format!("/interface/typedefs/typedef[{i}]");
        t.only_attrs(&["name"], &path)?;
        let mut fields = Vec::new();
        for (j, f) in t.elements_named("field").enumerate() {
            let fpath = format!("{path}/field[{j}]");
            f.only_attrs(&["name", "type", "unresolved"], &fpath)?;
            fields.push((f.require("name", &fpath)?.to_string(), f.require("type", &fpath)?.to_string()));
        }
        m.type_defs.push(TypeDefInfo {
            name: t.require("name", &path)?.to_string(),
            fields,
        });
    }
    for (section_name, item, target) in [
        ("constants", "constant", &mut m.constants),
        ("variables", "variable", &mut m.variables),
    ] {
        for (i, d) in section(root, section_name)?.elements_named(item).enumerate() {
            let path = format!("/interface/{section_name}/{item}[{i}]");
            d.only_attrs(&["name", "type", "literal", "unresolved"], &path)?;
            target.push(DataDecl {
                name: d.require("name", &path)?.to_string(),
                type_name: d.require("type", &path)?.to_string(),
                literal: d.get("literal").map(str::to_string),
            });
        }
    }
    for (i, d) in section(root, "directives")?.elements_named("directive").enumerate() {
        let path = format!("/interface/directives/directive[{i}]");
        d.only_attrs(&["line", "column"], &path)?;
        m.directives.push(Directive {
            text: d.text_content(),
            line: number(d, "line", &path)?,
            column: number(d, "column", &path)?,
        });
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn add_model() -> InterfaceModel {
        let p = |name: &str, position| ParamInfo {
            name: name.into(),
            type_name: "double".into(),
            passing: PassingMode::ByValue,
            position,
        };
        InterfaceModel {
            source_origin: "add.c".into(),
            language: "c_subset".into(),
            functions: vec![FunctionSig {
                local_name: "add".into(),
                return_type: "double".into(),
                params: vec![p("a", 0), p("b", 1)],
                defined: true,
                doc: Some("Sum of\ntwo values.".into()),
                directives: vec![],
                span: 0..48,
                line: 1,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn empty_model_has_empty_sections() {
        let text = interface_to_string(&InterfaceModel::default());
        for tag in ["functions", "typedefs", "constants", "variables", "directives"] {
            assert!(text.contains(&format!("<{tag}/>")), "{text}");
        }
    }

    #[test]
    fn add_has_one_function_with_two_params() {
        let root = interface_to_xml(&add_model());
        let f: Vec<_> = root.first("functions").unwrap().elements_named("function").collect();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].get("name"), Some("add"));
        assert_eq!(f[0].elements_named("param").count(), 2);
    }

    #[test]
    fn serialize_parse_serialize_is_identical() {
        let m = add_model();
        let text = interface_to_string(&m);
        let back = interface_from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(interface_to_string(&back), text);
    }

    #[test]
    fn unresolved_types_are_flagged() {
        let mut m = add_model();
        m.functions[0].params[0].type_name = "matrix".into();
        assert_eq!(m.unresolved_types().into_iter().collect::<Vec<_>>(), vec!["matrix"]);
        assert!(interface_to_string(&m).contains(r#"type="matrix" passing="byValue" unresolved="true""#));
    }

    #[test]
    fn uses_candidates_keep_source_order() {
        let mut m = add_model();
        let mut a = m.functions[0].clone();
        a.local_name = "rng".into();
        a.defined = false;
        let mut b = a.clone();
        b.local_name = "seed".into();
        m.functions.push(a);
        m.functions.push(b);
        let names: Vec<_> = detect_uses_candidates(&m).into_iter().map(|f| f.local_name).collect();
        assert_eq!(names, vec!["rng", "seed"]);
    }
}

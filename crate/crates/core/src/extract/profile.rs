//! Language profiles: which grammar to use and how its rules map to
//! interface roles.

use std::path::Path;

use crate::ebnf::GrammarSource;
use crate::xml::{self, Element, XmlError};

use super::{ExtractError, PassingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    FunctionDef,
    FunctionDecl,
    ParamDecl,
    TypeDef,
    ConstDecl,
    VarDecl,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::FunctionDef,
        Role::FunctionDecl,
        Role::ParamDecl,
        Role::TypeDef,
        Role::ConstDecl,
        Role::VarDecl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::FunctionDef => "functionDef",
            Role::FunctionDecl => "functionDecl",
            Role::ParamDecl => "paramDecl",
            Role::TypeDef => "typeDef",
            Role::ConstDecl => "constDecl",
            Role::VarDecl => "varDecl",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

/// Sub-parts of a role subtree that a frontend reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Name,
    TypeName,
    ByRef,
    Literal,
    Field,
    Declarator,
    Enumerator,
    Body,
}

impl Part {
    const ALL: [Part; 8] = [
        Part::Name,
        Part::TypeName,
        Part::ByRef,
        Part::Literal,
        Part::Field,
        Part::Declarator,
        Part::Enumerator,
        Part::Body,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Part::Name => "name",
            Part::TypeName => "typeName",
            Part::ByRef => "byRef",
            Part::Literal => "literal",
            Part::Field => "field",
            Part::Declarator => "declarator",
            Part::Enumerator => "enumerator",
            Part::Body => "body",
        }
    }

    pub fn parse(s: &str) -> Option<Part> {
        Part::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

/// Implicit typing by the first letter of a name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicitRule {
    pub ranges: Vec<(char, char)>,
    pub canonical: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageProfile {
    pub name: String,
    pub frontend: String,
    pub grammar_file: String,
    pub grammar: GrammarSource,
    pub roles: Vec<(String, Role)>,
    pub parts: Vec<(String, Part)>,
    pub doc_prefix: String,
    pub directive_prefix: String,
    pub default_passing: PassingMode,
    /// Source spelling of a type → canonical primitive name.
    pub types: Vec<(String, String)>,
    pub implicit: Vec<ImplicitRule>,
    /// Tokens of the first kind whose upper-cased text matches the lexical
    /// rule named second are rewritten to that kind before parsing.
    pub case_fold: Option<(String, String)>,
}

const BUILTIN: [(&str, &str, &str, &str); 2] = [
    (
        "c_subset",
        include_str!("../../profiles/c_subset.profile.xml"),
        "c_subset.ebnf",
        include_str!("../../grammars/c_subset.ebnf"),
    ),
    (
        "fortran77",
        include_str!("../../profiles/fortran77.profile.xml"),
        "fortran77_subset.ebnf",
        include_str!("../../grammars/fortran77_subset.ebnf"),
    ),
];

impl LanguageProfile {
    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|b| b.0)
    }

    /// One of the profiles shipped with the toolchain.
    pub fn builtin(name: &str) -> Option<LanguageProfile> {
        let (_, profile, grammar_name, grammar) = BUILTIN.iter().find(|b| b.0 == name)?;
        let parsed = Self::parse(profile, |file| {
            if Path::new(file).file_name().and_then(|f| f.to_str()) == Some(grammar_name) {
                Ok(GrammarSource::new(*grammar_name, *grammar))
            } else {
                Err(ExtractError::Profile(format!("unknown builtin grammar {file}")))
            }
        });
        Some(parsed.expect("builtin profiles are well formed"))
    }

    /// Loads a profile file; the grammar path is relative to the profile.
    pub fn from_file(path: &Path) -> Result<LanguageProfile, ExtractError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExtractError::Profile(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, |file| {
            GrammarSource::from_file(&dir.join(file))
                .map_err(|e| ExtractError::Profile(format!("{file}: {e}")))
        })
    }

    pub fn parse(
        text: &str,
        load_grammar: impl FnOnce(&str) -> Result<GrammarSource, ExtractError>,
    ) -> Result<LanguageProfile, ExtractError> {
        let root = xml::parse(text)?;
        let path = "/languageProfile";
        if root.name != "languageProfile" {
            return Err(XmlError::schema("/", "expected languageProfile root").into());
        }
        root.only_attrs(
            &["name", "frontend", "grammar", "docPrefix", "directivePrefix", "passing"],
            path,
        )?;
        let directive_prefix = root.require("directivePrefix", path)?.to_string();
        if directive_prefix.is_empty() {
            return Err(XmlError::schema(format!("{path}@directivePrefix"), "must not be empty").into());
        }
        let passing = root.require("passing", path)?;
        let default_passing = PassingMode::parse(passing).ok_or_else(|| {
            XmlError::schema(format!("{path}@passing"), format!("unknown passing mode {passing}"))
        })?;
        let grammar_file = root.require("grammar", path)?.to_string();

        let mut profile = LanguageProfile {
            name: root.require("name", path)?.to_string(),
            frontend: root.require("frontend", path)?.to_string(),
            grammar: load_grammar(&grammar_file)?,
            grammar_file,
            roles: Vec::new(),
            parts: Vec::new(),
            doc_prefix: root.get("docPrefix").unwrap_or_default().to_string(),
            directive_prefix,
            default_passing,
            types: Vec::new(),
            implicit: Vec::new(),
            case_fold: None,
        };
        for (i, el) in root.elements().enumerate() {
            let here = format!("{path}/{}[{i}]", el.name);
            match el.name.as_str() {
                "role" => {
                    el.only_attrs(&["rule", "role"], &here)?;
                    let role = parse_enum(el, "role", &here, Role::parse)?;
                    profile.roles.push((el.require("rule", &here)?.to_string(), role));
                }
                "part" => {
                    el.only_attrs(&["rule", "part"], &here)?;
                    let part = parse_enum(el, "part", &here, Part::parse)?;
                    profile.parts.push((el.require("rule", &here)?.to_string(), part));
                }
                "type" => {
                    el.only_attrs(&["source", "canonical"], &here)?;
                    profile.types.push((
                        el.require("source", &here)?.to_string(),
                        el.require("canonical", &here)?.to_string(),
                    ));
                }
                "implicit" => {
                    el.only_attrs(&["letters", "canonical"], &here)?;
                    let ranges = parse_letters(el.require("letters", &here)?)
                        .ok_or_else(|| XmlError::schema(format!("{here}@letters"), "expected ranges like A-H"))?;
                    profile.implicit.push(ImplicitRule {
                        ranges,
                        canonical: el.require("canonical", &here)?.to_string(),
                    });
                }
                "caseFold" => {
                    el.only_attrs(&["from", "to"], &here)?;
                    profile.case_fold = Some((
                        el.require("from", &here)?.to_string(),
                        el.require("to", &here)?.to_string(),
                    ));
                }
                other => {
                    return Err(XmlError::schema(here, format!("unknown element {other}")).into());
                }
            }
        }
        Ok(profile)
    }

    pub fn role_of(&self, rule: &str) -> Option<Role> {
        self.roles.iter().find(|(r, _)| r == rule).map(|(_, role)| *role)
    }

    pub fn part_of(&self, rule: &str) -> Option<Part> {
        self.parts.iter().find(|(r, _)| r == rule).map(|(_, p)| *p)
    }

    pub fn canonical_type(&self, spelling: &str) -> Option<&str> {
        self.types
            .iter()
            .find(|(s, _)| s.eq_ignore_ascii_case(spelling))
            .map(|(_, c)| c.as_str())
    }

    pub fn implicit_type(&self, name: &str) -> Option<&str> {
        let first = name.chars().next()?.to_ascii_uppercase();
        self.implicit
            .iter()
            .find(|r| r.ranges.iter().any(|(a, b)| (*a..=*b).contains(&first)))
            .map(|r| r.canonical.as_str())
    }
}

fn parse_enum<T>(el: &Element, key: &str, path: &str, f: fn(&str) -> Option<T>) -> Result<T, XmlError> {
    let v = el.require(key, path)?;
    f(v).ok_or_else(|| XmlError::schema(format!("{path}@{key}"), format!("unknown value {v}")))
}

fn parse_letters(spec: &str) -> Option<Vec<(char, char)>> {
    spec.split_whitespace()
        .map(|item| {
            let mut chars = item.chars();
            match (chars.next(), chars.next(), chars.next(), chars.next()) {
                (Some(a), None, _, _) => Some((a.to_ascii_uppercase(), a.to_ascii_uppercase())),
                (Some(a), Some('-'), Some(b), None) => {
                    Some((a.to_ascii_uppercase(), b.to_ascii_uppercase()))
                }
                _ => None,
            }
        })
        .collect()
}

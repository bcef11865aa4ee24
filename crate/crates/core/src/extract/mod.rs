//! Interface extraction from C-subset and Fortran-subset sources.
//!
//! A [`LanguageProfile`] names the grammar and maps grammar rules to roles
//! (function definition, parameter, ...) and parts (name, type, ...). The
//! generic half of the extractor tokenizes, parses and attaches comments; a
//! [`Frontend`] picked by name from a [`FrontendRegistry`] turns role subtrees
//! into signatures.

mod c;
mod fortran;
mod model;
mod profile;

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

use crate::automata::{
    build_network, lexeme_matches, recognize, tokenize, AutomatonNetwork, BuildError, LexicalError, ParseTree,
    RecognizeError, Token,
};
use crate::ebnf::{parse_ebnf, EbnfError};
use crate::xml::XmlError;

pub use model::{
    detect_uses_candidates, interface_from_str, interface_from_xml, interface_to_string,
    interface_to_xml, is_primitive, DataDecl, Directive, FunctionSig, InterfaceModel, ParamInfo,
    PassingMode, TypeDefInfo, PRIMITIVE_TYPES,
};
pub use profile::{ImplicitRule, LanguageProfile, Part, Role};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("language profile: {0}")]
    Profile(String),
    #[error("profile maps rule `{0}` which the grammar does not define")]
    UnmappedRule(String),
    #[error("no extraction frontend named `{0}`")]
    UnknownFrontend(String),
    #[error("grammar: {0}")]
    Grammar(#[from] EbnfError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("{origin}: {source}")]
    Lexical {
        origin: String,
        #[source]
        source: LexicalError,
    },
    #[error("{origin}: {source}")]
    Parse {
        origin: String,
        #[source]
        source: RecognizeError,
    },
    #[error(transparent)]
    Xml(#[from] XmlError),
}

/// What a frontend produces; comments are attached by the caller.
#[derive(Debug, Default)]
pub struct Extracted {
    pub functions: Vec<FunctionSig>,
    pub type_defs: Vec<TypeDefInfo>,
    pub constants: Vec<DataDecl>,
    pub variables: Vec<DataDecl>,
}

pub trait Frontend: Send + Sync {
    fn name(&self) -> &'static str;

    fn extract(&self, syntax: &Syntax<'_>) -> Extracted;

    /// Doc comment text with the prefix and comment decoration removed.
    fn doc_text(&self, raw: &str, prefix: &str) -> String {
        let body = raw.strip_prefix(prefix).unwrap_or(raw);
        let body = body.strip_suffix("*/").unwrap_or(body);
        let lines: Vec<&str> = body
            .lines()
            .map(|l| {
                let l = l.trim();
                l.strip_prefix('*').map(str::trim_start).unwrap_or(l)
            })
            .collect();
        let start = lines.iter().position(|l| !l.is_empty()).unwrap_or(lines.len());
        let end = lines.iter().rposition(|l| !l.is_empty()).map_or(start, |e| e + 1);
        lines[start..end].join("\n")
    }

    fn directive_text(&self, raw: &str, prefix: &str) -> String {
        let body = raw.strip_prefix(prefix).unwrap_or(raw);
        body.strip_suffix("*/").unwrap_or(body).trim().to_string()
    }
}

#[derive(Clone)]
pub struct FrontendRegistry {
    frontends: BTreeMap<&'static str, Arc<dyn Frontend>>,
}

impl FrontendRegistry {
    pub fn empty() -> Self {
        FrontendRegistry {
            frontends: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, f: Arc<dyn Frontend>) {
        self.frontends.insert(f.name(), f);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Frontend>> {
        self.frontends.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.frontends.keys().copied()
    }
}

impl Default for FrontendRegistry {
    fn default() -> Self {
        let mut r = FrontendRegistry::empty();
        r.register(Arc::new(c::CFrontend));
        r.register(Arc::new(fortran::FortranFrontend));
        r
    }
}

/// A parsed source file together with its profile.
pub struct Syntax<'a> {
    pub text: &'a str,
    pub tokens: &'a [Token],
    pub tree: &'a ParseTree,
    pub profile: &'a LanguageProfile,
}

impl<'a> Syntax<'a> {
    fn role(&self, node: &ParseTree) -> Option<Role> {
        if node.is_leaf() {
            None
        } else {
            self.profile.role_of(&node.label)
        }
    }

    fn part(&self, node: &ParseTree) -> Option<Part> {
        if node.is_leaf() {
            None
        } else {
            self.profile.part_of(&node.label)
        }
    }

    /// Outermost nodes carrying one of `roles` under `root`, in source order.
    pub fn role_nodes(&self, root: &'a ParseTree, roles: &[Role]) -> Vec<&'a ParseTree> {
        let mut out = Vec::new();
        self.collect_roles(root, roles, &mut out);
        out
    }

    fn collect_roles(&self, node: &'a ParseTree, roles: &[Role], out: &mut Vec<&'a ParseTree>) {
        for c in &node.children {
            match self.role(c) {
                Some(r) if roles.contains(&r) => out.push(c),
                _ => self.collect_roles(c, roles, out),
            }
        }
    }

    /// Nodes carrying `part` below `node`, not looking inside role subtrees
    /// or other parts.
    pub fn parts(&self, node: &'a ParseTree, part: Part) -> Vec<&'a ParseTree> {
        let mut out = Vec::new();
        self.collect_parts(node, part, &mut out);
        out
    }

    fn collect_parts(&self, node: &'a ParseTree, part: Part, out: &mut Vec<&'a ParseTree>) {
        for c in &node.children {
            match self.part(c) {
                Some(p) if p == part => out.push(c),
                None if self.role(c).is_none() => self.collect_parts(c, part, out),
                _ => {}
            }
        }
    }

    pub fn first_part(&self, node: &'a ParseTree, part: Part) -> Option<&'a ParseTree> {
        self.parts(node, part).into_iter().next()
    }

    pub fn node_tokens(&self, node: &ParseTree) -> &'a [Token] {
        &self.tokens[node.span.clone()]
    }

    pub fn byte_span(&self, node: &ParseTree) -> Range<usize> {
        let toks = self.node_tokens(node);
        match (toks.first(), toks.last()) {
            (Some(a), Some(b)) => a.offset..b.offset + b.text.len(),
            _ => {
                let at = self.tokens.get(node.span.start).map_or(self.text.len(), |t| t.offset);
                at..at
            }
        }
    }

    /// Exact source text of a node.
    pub fn source(&self, node: &ParseTree) -> &'a str {
        &self.text[self.byte_span(node)]
    }

    /// Token texts joined by single spaces.
    pub fn words(&self, node: &ParseTree) -> String {
        self.node_tokens(node)
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn line(&self, node: &ParseTree) -> usize {
        self.tokens.get(node.span.start).map_or(0, |t| t.line)
    }
}

pub struct Extractor {
    profile: LanguageProfile,
    net: AutomatonNetwork,
    frontend: Arc<dyn Frontend>,
}

impl Extractor {
    pub fn new(profile: LanguageProfile) -> Result<Self, ExtractError> {
        Self::with_registry(profile, &FrontendRegistry::default())
    }

    pub fn with_registry(profile: LanguageProfile, registry: &FrontendRegistry) -> Result<Self, ExtractError> {
        let grammar = parse_ebnf(&profile.grammar)?;
        let mapped = profile.roles.iter().map(|(r, _)| r).chain(profile.parts.iter().map(|(r, _)| r));
        for rule in mapped {
            if !grammar.rules.contains_key(rule) {
                return Err(ExtractError::UnmappedRule(rule.clone()));
            }
        }
        let frontend = registry
            .get(&profile.frontend)
            .ok_or_else(|| ExtractError::UnknownFrontend(profile.frontend.clone()))?;
        let net = build_network(&grammar)?;
        Ok(Extractor {
            profile,
            net,
            frontend,
        })
    }

    pub fn builtin(name: &str) -> Result<Self, ExtractError> {
        let profile = LanguageProfile::builtin(name)
            .ok_or_else(|| ExtractError::Profile(format!("no builtin profile {name}")))?;
        Self::new(profile)
    }

    pub fn profile(&self) -> &LanguageProfile {
        &self.profile
    }

    pub fn network(&self) -> &AutomatonNetwork {
        &self.net
    }

    /// Tokens ready for the syntax level, after any case folding, plus the
    /// skipped comments.
    pub fn lex(&self, origin: &str, text: &str) -> Result<(Vec<Token>, Vec<Token>), ExtractError> {
        let lexed = tokenize(&self.net, text).map_err(|source| ExtractError::Lexical {
            origin: origin.to_string(),
            source,
        })?;
        let mut tokens = lexed.tokens;
        if let Some((from, to)) = &self.profile.case_fold {
            for t in tokens.iter_mut().filter(|t| &t.kind == from) {
                let upper = t.text.to_ascii_uppercase();
                if lexeme_matches(&self.net, to, &upper) {
                    t.kind = to.clone();
                    t.text = upper;
                }
            }
        }
        Ok((tokens, lexed.comments))
    }

    pub fn parse(&self, origin: &str, tokens: &[Token]) -> Result<ParseTree, ExtractError> {
        recognize(&self.net, tokens).map_err(|source| ExtractError::Parse {
            origin: origin.to_string(),
            source,
        })
    }

    pub fn extract(&self, origin: &str, text: &str) -> Result<InterfaceModel, ExtractError> {
        let (tokens, comments) = self.lex(origin, text)?;
        let tree = self.parse(origin, &tokens)?;
        let syntax = Syntax {
            text,
            tokens: &tokens,
            tree: &tree,
            profile: &self.profile,
        };
        let mut out = self.frontend.extract(&syntax);
        let p = &self.profile;

        for f in &mut out.functions {
            let (docs, directives) = self.preceding_comments(text, &comments, f.span.start);
            if !docs.is_empty() {
                f.doc = Some(docs.join("\n"));
            }
            f.directives = directives;
            f.directives.extend(
                comments
                    .iter()
                    .filter(|c| f.span.contains(&c.offset) && c.text.starts_with(&p.directive_prefix))
                    .map(|c| self.frontend.directive_text(&c.text, &p.directive_prefix)),
            );
        }
        Ok(InterfaceModel {
            source_origin: origin.to_string(),
            language: p.name.clone(),
            functions: merge_functions(out.functions),
            type_defs: out.type_defs,
            constants: out.constants,
            variables: out.variables,
            directives: comments
                .iter()
                .filter(|c| c.text.starts_with(&p.directive_prefix))
                .map(|c| Directive {
                    text: self.frontend.directive_text(&c.text, &p.directive_prefix),
                    line: c.line,
                    column: c.column,
                })
                .collect(),
        })
    }

    /// Doc texts and directives from the run of comments directly before
    /// `start`, separated from it and from each other by whitespace only.
    fn preceding_comments(&self, text: &str, comments: &[Token], start: usize) -> (Vec<String>, Vec<String>) {
        let p = &self.profile;
        let mut boundary = start;
        let mut run = Vec::new();
        for c in comments.iter().rev().filter(|c| c.offset + c.text.len() <= start) {
            let end = c.offset + c.text.len();
            if !text[end..boundary].trim().is_empty() {
                break;
            }
            run.push(c);
            boundary = c.offset;
        }
        run.reverse();
        let docs = run
            .iter()
            .filter(|c| !p.doc_prefix.is_empty() && c.text.starts_with(&p.doc_prefix))
            .map(|c| self.frontend.doc_text(&c.text, &p.doc_prefix))
            .collect();
        let directives = run
            .iter()
            .filter(|c| c.text.starts_with(&p.directive_prefix))
            .map(|c| self.frontend.directive_text(&c.text, &p.directive_prefix))
            .collect();
        (docs, directives)
    }
}

/// One entry per name: a definition replaces an earlier declaration in place.
fn merge_functions(all: Vec<FunctionSig>) -> Vec<FunctionSig> {
    let mut out: Vec<FunctionSig> = Vec::new();
    for f in all {
        match out.iter_mut().find(|g| g.local_name == f.local_name) {
            Some(g) if f.defined && !g.defined => *g = f,
            Some(_) => {}
            None => out.push(f),
        }
    }
    out
}

pub fn extract_interface(profile: &LanguageProfile, origin: &str, text: &str) -> Result<InterfaceModel, ExtractError> {
    Extractor::new(profile.clone())?.extract(origin, text)
}

use std::collections::HashMap;

use crate::automata::{ParseTree, Token};

use super::{DataDecl, Extracted, Frontend, FunctionSig, ParamInfo, Part, PassingMode, Role, Syntax};

/// Fortran 77 units. Every argument is passed by reference; types come from
/// type statements or, failing that, the profile's implicit rules. EXTERNAL
/// names are declarations whose arity is read off their first call site.
pub struct FortranFrontend;

struct Unit<'s, 'a> {
    syntax: &'s Syntax<'a>,
    declared: HashMap<String, String>,
}

impl Unit<'_, '_> {
    fn type_of(&self, name: &str) -> String {
        let upper = name.to_ascii_uppercase();
        if let Some(t) = self.declared.get(&upper) {
            return t.clone();
        }
        self.syntax.profile.implicit_type(&upper).unwrap_or("float").to_string()
    }

    fn literal_type(&self, t: &Token) -> Option<String> {
        Some(match t.kind.as_str() {
            "name" => self.type_of(&t.text),
            "integer_literal" => "int".into(),
            "real_literal" if t.text.contains(['d', 'D']) => "double".into(),
            "real_literal" => "float".into(),
            "string_literal" => "char".into(),
            _ => return None,
        })
    }

    /// Argument types of the call starting at the `(` in `toks[open]`.
    fn call_args(&self, toks: &[Token], open: usize) -> Vec<String> {
        let mut args: Vec<Vec<&Token>> = vec![Vec::new()];
        let mut depth = 0usize;
        for t in &toks[open..] {
            match t.text.as_str() {
                "(" => {
                    depth += 1;
                    if depth == 1 {
                        continue;
                    }
                }
                ")" => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                "," if depth == 1 => {
                    args.push(Vec::new());
                    continue;
                }
                _ => {}
            }
            args.last_mut().expect("non-empty").push(t);
        }
        if args.len() == 1 && args[0].is_empty() {
            return Vec::new();
        }
        args.iter()
            .map(|a| a.iter().find_map(|t| self.literal_type(t)).unwrap_or_else(|| "float".into()))
            .collect()
    }
}

fn canonical_type(s: &Syntax<'_>, node: &ParseTree) -> String {
    let words: Vec<&str> = s.node_tokens(node).iter().map(|t| t.text.as_str()).collect();
    (1..=words.len())
        .rev()
        .find_map(|n| s.profile.canonical_type(&words[..n].join(" ")))
        .unwrap_or(words.first().copied().unwrap_or("float"))
        .to_string()
}

fn upper(s: &Syntax<'_>, node: Option<&ParseTree>) -> String {
    node.map(|n| s.source(n).to_ascii_uppercase()).unwrap_or_default()
}

impl FortranFrontend {
    fn unit(&self, s: &Syntax<'_>, node: &ParseTree, out: &mut Extracted) {
        let mut unit = Unit {
            syntax: s,
            declared: HashMap::new(),
        };
        for stmt in s.role_nodes(node, &[Role::VarDecl]) {
            let ty = s.first_part(stmt, Part::TypeName).map_or_else(|| "float".into(), |t| canonical_type(s, t));
            for entity in s.parts(stmt, Part::Declarator) {
                unit.declared.insert(upper(s, s.first_part(entity, Part::Name)), ty.clone());
            }
        }

        let name_node = s.first_part(node, Part::Name);
        let name = name_node.map(|n| s.source(n).to_string()).unwrap_or_default();
        let head = &s.node_tokens(node)[..name_node.map_or(0, |n| n.span.start - node.span.start)];
        let is_function = head.iter().any(|t| t.text == "FUNCTION");
        let return_type = match (is_function, s.first_part(node, Part::TypeName)) {
            (false, _) => "void".to_string(),
            (true, Some(t)) => canonical_type(s, t),
            (true, None) => unit.type_of(&name),
        };
        let params = s
            .role_nodes(node, &[Role::ParamDecl])
            .into_iter()
            .enumerate()
            .map(|(position, p)| ParamInfo {
                name: s.source(p).to_string(),
                type_name: unit.type_of(s.source(p)),
                passing: PassingMode::ByReference,
                position,
            })
            .collect();
        out.functions.push(FunctionSig {
            local_name: name,
            return_type,
            params,
            defined: true,
            doc: None,
            directives: Vec::new(),
            span: s.byte_span(node),
            line: s.line(node),
        });

        for c in s.role_nodes(node, &[Role::ConstDecl]) {
            let cname = s.first_part(c, Part::Name).map(|n| s.source(n).to_string()).unwrap_or_default();
            if out.constants.iter().any(|k| k.name.eq_ignore_ascii_case(&cname)) {
                continue;
            }
            out.constants.push(DataDecl {
                type_name: unit.type_of(&cname),
                literal: s.first_part(c, Part::Literal).map(|l| s.source(l).to_string()),
                name: cname,
            });
        }

        let statements: Vec<&[Token]> = s.parts(node, Part::Body).into_iter().map(|b| s.node_tokens(b)).collect();
        for ext in s.role_nodes(node, &[Role::FunctionDecl]) {
            for n in s.parts(ext, Part::Name) {
                let ename = s.source(n).to_string();
                out.functions.push(self.external(&unit, &statements, ename, s, ext));
            }
        }
    }

    fn external(&self, unit: &Unit<'_, '_>, statements: &[&[Token]], name: String, s: &Syntax<'_>, at: &ParseTree) -> FunctionSig {
        let key = name.to_ascii_uppercase();
        let mut return_type = unit.type_of(&name);
        let mut args = Vec::new();
        for toks in statements {
            let is = |i: usize, text: &str| toks.get(i).is_some_and(|t| t.text.eq_ignore_ascii_case(text));
            if is(0, "CALL") && is(1, &key) {
                return_type = "void".into();
                if is(2, "(") {
                    args = unit.call_args(toks, 2);
                }
                break;
            }
            if let Some(i) = (0..toks.len()).find(|&i| is(i, &key) && is(i + 1, "(")) {
                args = unit.call_args(toks, i + 1);
                break;
            }
        }
        FunctionSig {
            local_name: name,
            return_type,
            params: args
                .into_iter()
                .enumerate()
                .map(|(position, type_name)| ParamInfo {
                    name: format!("ARG{}", position + 1),
                    type_name,
                    passing: PassingMode::ByReference,
                    position,
                })
                .collect(),
            defined: false,
            doc: None,
            directives: Vec::new(),
            span: s.byte_span(at),
            line: s.line(at),
        }
    }
}

impl Frontend for FortranFrontend {
    fn name(&self) -> &'static str {
        "fortran"
    }

    fn extract(&self, s: &Syntax<'_>) -> Extracted {
        let mut out = Extracted::default();
        for unit in s.role_nodes(s.tree, &[Role::FunctionDef]) {
            self.unit(s, unit, &mut out);
        }
        out
    }

    fn doc_text(&self, raw: &str, prefix: &str) -> String {
        raw.strip_prefix(prefix).unwrap_or(raw).trim().to_string()
    }
}

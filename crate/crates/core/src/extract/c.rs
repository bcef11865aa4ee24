use crate::automata::ParseTree;

use super::{DataDecl, Extracted, Frontend, FunctionSig, ParamInfo, Part, PassingMode, Role, Syntax, TypeDefInfo};

pub struct CFrontend;

impl CFrontend {
    /// Canonical type name; struct tags name their typedef, enums are ints.
    fn canonical(&self, s: &Syntax<'_>, node: Option<&ParseTree>) -> String {
        let Some(node) = node else {
            return "int".into();
        };
        let words: Vec<&str> = s.node_tokens(node).iter().map(|t| t.text.as_str()).collect();
        let spelled = match words.as_slice() {
            ["enum", _] => return "int".into(),
            ["struct", tag] => tag.to_string(),
            _ => s.words(node),
        };
        s.profile.canonical_type(&spelled).map(str::to_string).unwrap_or(spelled)
    }

    fn function(&self, s: &Syntax<'_>, node: &ParseTree, defined: bool) -> FunctionSig {
        let params = s
            .role_nodes(node, &[Role::ParamDecl])
            .into_iter()
            .enumerate()
            .map(|(position, p)| {
                let by_ref = s.first_part(p, Part::ByRef).is_some();
                ParamInfo {
                    name: s
                        .first_part(p, Part::Name)
                        .map_or_else(|| format!("arg{}", position + 1), |n| s.source(n).to_string()),
                    type_name: self.canonical(s, s.first_part(p, Part::TypeName)),
                    passing: if by_ref {
                        PassingMode::ByReference
                    } else {
                        s.profile.default_passing
                    },
                    position,
                }
            })
            .collect();
        FunctionSig {
            local_name: s.first_part(node, Part::Name).map(|n| s.source(n).to_string()).unwrap_or_default(),
            return_type: self.canonical(s, s.first_part(node, Part::TypeName)),
            params,
            defined,
            doc: None,
            directives: Vec::new(),
            span: s.byte_span(node),
            line: s.line(node),
        }
    }

    fn declarations(&self, s: &Syntax<'_>, node: &ParseTree) -> Vec<DataDecl> {
        let enumerators = s.parts(node, Part::Enumerator);
        if !enumerators.is_empty() {
            let mut next: Option<i64> = Some(0);
            return enumerators
                .into_iter()
                .map(|e| {
                    let explicit = s.first_part(e, Part::Literal).map(|l| s.source(l).to_string());
                    let literal = match &explicit {
                        Some(text) => {
                            next = text.parse::<i64>().ok().map(|v| v + 1);
                            text.clone()
                        }
                        None => {
                            let v = next.unwrap_or(0);
                            next = next.map(|v| v + 1);
                            v.to_string()
                        }
                    };
                    DataDecl {
                        name: s.first_part(e, Part::Name).map(|n| s.source(n).to_string()).unwrap_or_default(),
                        type_name: "int".into(),
                        literal: Some(literal),
                    }
                })
                .collect();
        }
        let type_name = self.canonical(s, s.first_part(node, Part::TypeName));
        s.parts(node, Part::Declarator)
            .into_iter()
            .map(|d| DataDecl {
                name: s.first_part(d, Part::Name).map(|n| s.source(n).to_string()).unwrap_or_default(),
                type_name: type_name.clone(),
                literal: s.first_part(d, Part::Literal).map(|l| s.source(l).to_string()),
            })
            .collect()
    }
}

impl Frontend for CFrontend {
    fn name(&self) -> &'static str {
        "c"
    }

    fn extract(&self, s: &Syntax<'_>) -> Extracted {
        let mut out = Extracted::default();
        let top = s.role_nodes(
            s.tree,
            &[Role::FunctionDef, Role::FunctionDecl, Role::TypeDef, Role::ConstDecl, Role::VarDecl],
        );
        for node in top {
            match s.profile.role_of(&node.label).expect("role node") {
                Role::FunctionDef => out.functions.push(self.function(s, node, true)),
                Role::FunctionDecl => out.functions.push(self.function(s, node, false)),
                Role::TypeDef => {
                    let fields = s
                        .parts(node, Part::Field)
                        .into_iter()
                        .flat_map(|f| {
                            let ty = self.canonical(s, s.first_part(f, Part::TypeName));
                            s.parts(f, Part::Name)
                                .into_iter()
                                .map(move |n| (s.source(n).to_string(), ty.clone()))
                        })
                        .collect();
                    out.type_defs.push(TypeDefInfo {
                        name: s.first_part(node, Part::Name).map(|n| s.source(n).to_string()).unwrap_or_default(),
                        fields,
                    });
                }
                Role::ConstDecl => out.constants.extend(self.declarations(s, node)),
                Role::VarDecl => out.variables.extend(self.declarations(s, node)),
                Role::ParamDecl => {}
            }
        }
        out
    }
}

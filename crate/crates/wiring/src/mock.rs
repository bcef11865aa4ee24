//! Mock implementations: one arithmetic expression per provides port,
//! evaluated in place of compiled code.
//!
//! ```text
//! expr  := term { ("+" | "-") term }
//! term  := unary { ("*" | "/") unary }
//! unary := "-" unary | atom
//! atom  := number | param | "(" expr ")"
//!        | "call" "(" usesPort { "," expr } ")"
//!        | "if" "(" expr "," expr "," expr ")"     nonzero is true
//! ```
//! A mocks file holds `<mock instance port>expr</mock>` elements under a
//! `<mocks>` root.

use std::collections::BTreeMap;

use comodi_core::xml::{self, XmlError};
use comodi_core::Diagnostic;

use crate::bind::WiringPlan;
use crate::project::PortRef;
use crate::validate::Descriptors;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Param(_) => {}
            Expr::Neg(e) => e.visit(f),
            Expr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            Expr::If(c, a, b) => {
                c.visit(f);
                a.visit(f);
                b.visit(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub offset: usize,
    pub message: String,
}

impl std::fmt::Display for ExprError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "at offset {}: {}", self.offset, self.message)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn ident(&mut self) -> Option<&str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let first = rest.chars().next()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        let n = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
        self.pos += n;
        Some(&rest[..n])
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => self.err("unexpected end of expression"),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(_) => {
                let start = self.pos;
                let Some(name) = self.ident().map(str::to_string) else {
                    return self.err("expected a number, name or '('");
                };
                match name.as_str() {
                    "call" if self.peek() == Some('(') => {
                        self.pos += 1;
                        let Some(port) = self.ident().map(str::to_string) else {
                            return self.err("expected a uses port name");
                        };
                        let mut args = Vec::new();
                        while self.eat(',') {
                            args.push(self.expr()?);
                        }
                        self.expect(')')?;
                        Ok(Expr::Call(port, args))
                    }
                    "if" if self.peek() == Some('(') => {
                        self.pos += 1;
                        let c = self.expr()?;
                        self.expect(',')?;
                        let a = self.expr()?;
                        self.expect(',')?;
                        let b = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)))
                    }
                    _ if self.peek() == Some('(') => {
                        self.pos = start;
                        self.err(format!("unknown function {name}"))
                    }
                    _ => Ok(Expr::Param(name)),
                }
            }
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let rest = &self.src[self.pos..];
        let b = rest.as_bytes();
        let mut n = 0;
        while n < b.len() && (b[n].is_ascii_digit() || b[n] == b'.') {
            n += 1;
        }
        if n < b.len() && (b[n] == b'e' || b[n] == b'E') {
            let mut m = n + 1;
            if m < b.len() && (b[m] == b'+' || b[m] == b'-') {
                m += 1;
            }
            if m < b.len() && b[m].is_ascii_digit() {
                while m < b.len() && b[m].is_ascii_digit() {
                    m += 1;
                }
                n = m;
            }
        }
        match rest[..n].parse::<f64>() {
            Ok(v) => {
                self.pos += n;
                Ok(Expr::Num(v))
            }
            Err(_) => self.err(format!("bad number {}", &rest[..n])),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MockImplementations {
    pub ports: BTreeMap<PortRef, Expr>,
}

impl MockImplementations {
    pub fn insert(&mut self, at: PortRef, src: &str) -> Result<(), ExprError> {
        self.ports.insert(at, parse_expr(src)?);
        Ok(())
    }

    pub fn get(&self, at: &PortRef) -> Option<&Expr> {
        self.ports.get(at)
    }
}

pub fn load_mocks(text: &str) -> Result<MockImplementations, XmlError> {
    let root = xml::parse(text)?;
    if root.name != "mocks" {
        return Err(XmlError::schema("/", "expected mocks root"));
    }
    root.only_attrs(&[], "/mocks")?;
    let mut out = MockImplementations::default();
    for (i, el) in root.elements().enumerate() {
        let here = format!("/mocks/{}[{i}]", el.name);
        if el.name != "mock" {
            return Err(XmlError::schema(here, format!("unknown element {}", el.name)));
        }
        el.only_attrs(&["instance", "port"], &here)?;
        let at = PortRef::new(el.require("instance", &here)?, el.require("port", &here)?);
        if out.ports.contains_key(&at) {
            return Err(XmlError::schema(here, format!("second mock for {at}")));
        }
        out.insert(at, &el.text_content())
            .map_err(|e| XmlError::schema(here, format!("expression {e}")))?;
    }
    Ok(out)
}

/// Every provides port has a mock, every mock names only its own params and
/// uses ports, and calls pass no more arguments than the uses port declares.
pub fn check_mocks(mocks: &MockImplementations, plan: &WiringPlan, descriptors: &Descriptors) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for inst in &plan.instances {
        let d = &descriptors[&inst.id];
        for port in &inst.provides {
            let at = PortRef::new(&inst.id, &port.local_name);
            let path = at.to_string();
            let aggregate = std::iter::once(&port.return_type)
                .chain(port.params.iter().map(|q| &q.type_name))
                .find(|t| d.type_def(t).is_some());
            if let Some(t) = aggregate {
                out.push(Diagnostic::error("MockType", &path, format!("mocks handle primitive types only, not {t}")));
            }
            let Some(expr) = mocks.get(&at) else {
                out.push(Diagnostic::error("MissingMock", &path, "no mock implementation"));
                continue;
            };
            expr.visit(&mut |e| match e {
                Expr::Param(name) if !port.params.iter().any(|q| &q.name == name) => {
                    out.push(Diagnostic::error("UnknownName", &path, format!("{name} is not a parameter of {}", port.local_name)));
                }
                Expr::Call(u, args) => match d.uses_port(u) {
                    None => out.push(Diagnostic::error("UnknownUsesPort", &path, format!("{u} is not a uses port"))),
                    Some(spec) if args.len() > spec.arity() || args.len() < spec.required_arity() => out.push(
                        Diagnostic::error(
                            "CallArity",
                            &path,
                            format!("call({u}) with {} arguments; {u} takes {} to {}", args.len(), spec.required_arity(), spec.arity()),
                        ),
                    ),
                    Some(_) => {}
                },
                _ => {}
            });
        }
    }
    for at in mocks.ports.keys() {
        if plan.instance(&at.instance).and_then(|i| i.port(&at.port)).is_none() {
            out.push(Diagnostic::warning("UnusedMock", at.to_string(), "no such provides port in the project"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_calls() {
        let e = parse_expr("1 + 2 * -x").unwrap();
        assert_eq!(
            e,
            Expr::Bin(
                BinOp::Add,
                Box::new(Expr::Num(1.0)),
                Box::new(Expr::Bin(BinOp::Mul, Box::new(Expr::Num(2.0)), Box::new(Expr::Neg(Box::new(Expr::Param("x".into()))))))
            )
        );
        let e = parse_expr("call(up, x, 2.5e1) * 3.0").unwrap();
        assert!(matches!(e, Expr::Bin(BinOp::Mul, ref c, _) if matches!(**c, Expr::Call(ref p, ref a) if p == "up" && a.len() == 2)));
        assert!(matches!(parse_expr("call(up)").unwrap(), Expr::Call(_, ref a) if a.is_empty()));
        assert!(matches!(parse_expr("if(n, 1, 0)").unwrap(), Expr::If(..)));
    }

    #[test]
    fn syntax_errors() {
        for bad in ["", "1 +", "(1", "sqrt(2)", "call()", "1 2", "if(1, 2)"] {
            assert!(parse_expr(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn mocks_file() {
        let m = load_mocks(r#"<mocks><mock instance="a" port="f">2.0</mock><mock instance="b" port="g">call(up) * 3</mock></mocks>"#).unwrap();
        assert_eq!(m.get(&PortRef::new("a", "f")), Some(&Expr::Num(2.0)));
        let err = load_mocks(r#"<mocks><mock instance="a" port="f">2.0 +</mock></mocks>"#).unwrap_err();
        assert_eq!(err.path(), Some("/mocks/mock[0]"));
    }
}

//! Binding lists handed to a component's link entry.
//!
//! ```text
//! params  := [ binding { ";" binding } ]
//! binding := uses "=" instance "." global
//! ```
//! Whitespace between tokens is ignored.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binding {
    pub uses_port: String,
    pub instance: String,
    pub target_global: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParamString {
    pub bindings: Vec<Binding>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamStringError {
    #[error("param string syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("uses port {port} bound twice (offset {offset})")]
    Duplicate { port: String, offset: usize },
}

impl ParamString {
    pub fn binding(&self, uses_port: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.uses_port == uses_port)
    }

    pub fn push(&mut self, b: Binding) -> Result<(), ParamStringError> {
        if self.binding(&b.uses_port).is_some() {
            return Err(ParamStringError::Duplicate {
                port: b.uses_port,
                offset: 0,
            });
        }
        self.bindings.push(b);
        Ok(())
    }
}

impl fmt::Display for ParamString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}={}.{}", b.uses_port, b.instance, b.target_global)?;
        }
        Ok(())
    }
}

pub fn render_param_string(p: &ParamString) -> String {
    p.to_string()
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += self.text[self.pos..].chars().next().map_or(0, char::len_utf8);
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    fn error(&self, message: impl Into<String>) -> ParamStringError {
        ParamStringError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParamStringError> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn word(&mut self, what: &str, extra: &[char]) -> Result<&'a str, ParamStringError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || extra.contains(&c)))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error(format!("expected {what}")));
        }
        self.pos += len;
        Ok(&rest[..len])
    }
}

pub fn parse_param_string(text: &str) -> Result<ParamString, ParamStringError> {
    let mut cur = Cursor { text, pos: 0 };
    let mut out = ParamString::default();
    if cur.at_end() {
        return Ok(out);
    }
    loop {
        cur.skip_ws();
        let start = cur.pos;
        let uses_port = cur.word("uses port name", &[])?.to_string();
        cur.expect('=')?;
        let instance = cur.word("instance id", &['-'])?.to_string();
        cur.expect('.')?;
        let target_global = cur.word("provides port global name", &[])?.to_string();
        if out.binding(&uses_port).is_some() {
            return Err(ParamStringError::Duplicate {
                port: uses_port,
                offset: start,
            });
        }
        out.bindings.push(Binding {
            uses_port,
            instance,
            target_global,
        });
        if cur.at_end() {
            return Ok(out);
        }
        cur.expect(';')?;
    }
}

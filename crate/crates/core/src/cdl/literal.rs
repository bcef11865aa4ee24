//! Default-value literals.

use std::fmt;

/// A parsed literal of one of the primitive parameter types.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Char(u8),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(i) => i as f64,
            Value::Float(f) => f,
            Value::Char(c) => c as f64,
        }
    }

    /// Converts to the representation of `type_name`, as a C assignment would.
    pub fn coerce(self, type_name: &str) -> Option<Value> {
        Some(match type_name {
            "int" => Value::Int(self.as_f64() as i32 as i64),
            "long" => Value::Int(self.as_f64() as i64),
            "float" => Value::Float(self.as_f64() as f32 as f64),
            "double" => Value::Float(self.as_f64()),
            "char" => Value::Char(self.as_f64() as i64 as u8),
            _ => return None,
        })
    }

    /// C spelling, used when literals are written into generated code.
    pub fn to_c(self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(f) => format!("{f:?}"),
            Value::Char(c) if c.is_ascii_graphic() && c != b'\'' && c != b'\\' => format!("'{}'", c as char),
            Value::Char(c) => format!("'\\x{c:02x}'"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Char(c) => write!(f, "'{}'", *c as char),
        }
    }
}

/// Parses `text` as a literal of the primitive `type_name`.
///
/// Integers must fit the type (int is 32 bits). Reals accept a Fortran `D`
/// exponent. A char is a single quoted ASCII character.
pub fn parse_literal(type_name: &str, text: &str) -> Option<Value> {
    let text = text.trim();
    match type_name {
        "int" => text.parse::<i32>().ok().map(|i| Value::Int(i.into())),
        "long" => text.parse::<i64>().ok().map(Value::Int),
        "float" | "double" => parse_real(text).map(|f| {
            if type_name == "float" {
                Value::Float(f as f32 as f64)
            } else {
                Value::Float(f)
            }
        }),
        "char" => {
            let b = text.as_bytes();
            match b {
                [b'\'', c, b'\''] if c.is_ascii() => Some(Value::Char(*c)),
                _ => None,
            }
        }
        _ => None,
    }
}

fn parse_real(text: &str) -> Option<f64> {
    let normal: String = text.chars().map(|c| if c == 'd' || c == 'D' { 'e' } else { c }).collect();
    let plain = normal
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    if !plain || !normal.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    normal.parse::<f64>().ok().filter(|f| f.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_by_type() {
        assert_eq!(parse_literal("double", "1.0"), Some(Value::Float(1.0)));
        assert_eq!(parse_literal("double", "1.5D0"), Some(Value::Float(1.5)));
        assert_eq!(parse_literal("double", "abc"), None);
        assert_eq!(parse_literal("double", "inf"), None);
        assert_eq!(parse_literal("int", "1000"), Some(Value::Int(1000)));
        assert_eq!(parse_literal("int", "1.0"), None);
        assert_eq!(parse_literal("int", "3000000000"), None);
        assert_eq!(parse_literal("long", "3000000000"), Some(Value::Int(3_000_000_000)));
        assert_eq!(parse_literal("char", "'x'"), Some(Value::Char(b'x')));
        assert_eq!(parse_literal("point", "1"), None);
    }

    #[test]
    fn c_spelling() {
        assert_eq!(Value::Float(1.0).to_c(), "1.0");
        assert_eq!(Value::Int(-3).to_c(), "-3");
        assert_eq!(Value::Char(b'\'').to_c(), "'\\x27'");
    }
}

//! Aggregates flattened to primitive values and back.

use thiserror::Error;

use crate::cdl::Value;
use crate::extract::{is_primitive, TypeDefInfo};

/// A value of a primitive or typedef'd type.
#[derive(Debug, Clone, PartialEq)]
pub enum Datum {
    Scalar(Value),
    Record(Vec<(String, Datum)>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PackError {
    #[error("type {0} is neither primitive nor a known typedef")]
    UnknownType(String),
    #[error("typedef {0} contains itself")]
    Recursive(String),
    #[error("value does not have the shape of {0}")]
    Shape(String),
    #[error("{type_name} needs {expected} values, got {found}")]
    Count {
        type_name: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatField {
    /// Field names from the outer record inward.
    pub path: Vec<String>,
    pub type_name: String,
}

impl FlatField {
    pub fn dotted(&self) -> String {
        self.path.join(".")
    }
}

/// The primitive leaves of a type, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackSpec {
    pub type_name: String,
    pub fields: Vec<FlatField>,
}

impl PackSpec {
    pub fn new(type_name: &str, type_defs: &[TypeDefInfo]) -> Result<PackSpec, PackError> {
        let mut fields = Vec::new();
        flatten(type_name, type_defs, &mut Vec::new(), &mut Vec::new(), &mut fields)?;
        Ok(PackSpec {
            type_name: type_name.to_string(),
            fields,
        })
    }

    pub fn width(&self) -> usize {
        self.fields.len()
    }

    pub fn pack(&self, d: &Datum) -> Result<Vec<Value>, PackError> {
        let mut out = Vec::with_capacity(self.fields.len());
        for f in &self.fields {
            let mut at = d;
            for name in &f.path {
                at = match at {
                    Datum::Record(fields) => &fields
                        .iter()
                        .find(|(n, _)| n == name)
                        .ok_or_else(|| PackError::Shape(self.type_name.clone()))?
                        .1,
                    Datum::Scalar(_) => return Err(PackError::Shape(self.type_name.clone())),
                };
            }
            match at {
                Datum::Scalar(v) => out.push(*v),
                Datum::Record(_) => return Err(PackError::Shape(self.type_name.clone())),
            }
        }
        Ok(out)
    }

    pub fn unpack(&self, values: &[Value]) -> Result<Datum, PackError> {
        if values.len() != self.fields.len() {
            return Err(PackError::Count {
                type_name: self.type_name.clone(),
                expected: self.fields.len(),
                found: values.len(),
            });
        }
        if self.fields.len() == 1 && self.fields[0].path.is_empty() {
            return Ok(Datum::Scalar(values[0]));
        }
        let mut root = Datum::Record(Vec::new());
        for (f, v) in self.fields.iter().zip(values) {
            insert(&mut root, &f.path, *v);
        }
        Ok(root)
    }
}

fn insert(at: &mut Datum, path: &[String], v: Value) {
    let Datum::Record(fields) = at else {
        unreachable!("paths only descend through records")
    };
    match path {
        [last] => fields.push((last.clone(), Datum::Scalar(v))),
        [head, rest @ ..] => {
            if fields.last().is_none_or(|(n, _)| n != head) {
                fields.push((head.clone(), Datum::Record(Vec::new())));
            }
            insert(&mut fields.last_mut().expect("just pushed").1, rest, v);
        }
        [] => unreachable!("scalars are handled by the caller"),
    }
}

fn flatten(
    type_name: &str,
    type_defs: &[TypeDefInfo],
    path: &mut Vec<String>,
    open: &mut Vec<String>,
    out: &mut Vec<FlatField>,
) -> Result<(), PackError> {
    if is_primitive(type_name) && type_name != "void" {
        out.push(FlatField {
            path: path.clone(),
            type_name: type_name.to_string(),
        });
        return Ok(());
    }
    let td = type_defs
        .iter()
        .find(|t| t.name == type_name)
        .ok_or_else(|| PackError::UnknownType(type_name.to_string()))?;
    if open.iter().any(|o| o == type_name) {
        return Err(PackError::Recursive(type_name.to_string()));
    }
    open.push(type_name.to_string());
    for (name, ty) in &td.fields {
        path.push(name.clone());
        flatten(ty, type_defs, path, open, out)?;
        path.pop();
    }
    open.pop();
    Ok(())
}

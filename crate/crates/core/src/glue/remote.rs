//! Stub and skeleton message layouts for ports called across processes.
//!
//! Every value is little-endian with a fixed width; aggregates travel as
//! their flattened fields. There is no padding and no header.

use thiserror::Error;

use crate::cdl::{PortSpec, Value};
use crate::extract::TypeDefInfo;

use super::pack::PackSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireType {
    I32,
    I64,
    F32,
    F64,
    U8,
}

impl WireType {
    pub fn for_type(type_name: &str) -> Option<WireType> {
        Some(match type_name {
            "int" => WireType::I32,
            "long" => WireType::I64,
            "float" => WireType::F32,
            "double" => WireType::F64,
            "char" => WireType::U8,
            _ => return None,
        })
    }

    pub fn width(self) -> usize {
        match self {
            WireType::I32 | WireType::F32 => 4,
            WireType::I64 | WireType::F64 => 8,
            WireType::U8 => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WireType::I32 => "i32",
            WireType::I64 => "i64",
            WireType::F32 => "f32",
            WireType::F64 => "f64",
            WireType::U8 => "u8",
        }
    }

    fn encode(self, v: Value, out: &mut Vec<u8>) {
        match self {
            WireType::I32 => out.extend((v.as_f64() as i32).to_le_bytes()),
            WireType::I64 => out.extend(match v {
                Value::Int(i) => i,
                other => other.as_f64() as i64,
            }.to_le_bytes()),
            WireType::F32 => out.extend((v.as_f64() as f32).to_le_bytes()),
            WireType::F64 => out.extend(v.as_f64().to_le_bytes()),
            WireType::U8 => out.push(v.as_f64() as i64 as u8),
        }
    }

    fn decode(self, b: &[u8]) -> Value {
        match self {
            WireType::I32 => Value::Int(i32::from_le_bytes(b.try_into().expect("width checked")).into()),
            WireType::I64 => Value::Int(i64::from_le_bytes(b.try_into().expect("width checked"))),
            WireType::F32 => Value::Float(f32::from_le_bytes(b.try_into().expect("width checked")).into()),
            WireType::F64 => Value::Float(f64::from_le_bytes(b.try_into().expect("width checked"))),
            WireType::U8 => Value::Char(b[0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireField {
    pub name: String,
    pub wire: WireType,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MessageLayout {
    pub fields: Vec<WireField>,
}

impl MessageLayout {
    pub fn size(&self) -> usize {
        self.fields.last().map_or(0, |f| f.offset + f.wire.width())
    }

    fn push(&mut self, name: String, wire: WireType) {
        let offset = self.size();
        self.fields.push(WireField { name, wire, offset });
    }

    pub fn encode(&self, values: &[Value]) -> Result<Vec<u8>, WireError> {
        if values.len() != self.fields.len() {
            return Err(WireError::Arity {
                expected: self.fields.len(),
                found: values.len(),
            });
        }
        let mut out = Vec::with_capacity(self.size());
        for (f, v) in self.fields.iter().zip(values) {
            f.wire.encode(*v, &mut out);
        }
        Ok(out)
    }

    pub fn decode(&self, bytes: &[u8]) -> Result<Vec<Value>, WireError> {
        if bytes.len() != self.size() {
            return Err(WireError::Length {
                expected: self.size(),
                found: bytes.len(),
            });
        }
        Ok(self
            .fields
            .iter()
            .map(|f| f.wire.decode(&bytes[f.offset..f.offset + f.wire.width()]))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemotePlan {
    pub port: String,
    pub global_name: String,
    pub request: MessageLayout,
    pub response: MessageLayout,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("port {port}: type {type_name} cannot be sent remotely")]
    UnsupportedRemoteType { port: String, type_name: String },
    #[error("message needs {expected} values, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("message needs {expected} bytes, got {found}")]
    Length { expected: usize, found: usize },
}

fn layout_for(
    layout: &mut MessageLayout,
    name: &str,
    type_name: &str,
    port: &PortSpec,
    type_defs: &[TypeDefInfo],
) -> Result<(), WireError> {
    let unsupported = || WireError::UnsupportedRemoteType {
        port: port.local_name.clone(),
        type_name: type_name.to_string(),
    };
    let spec = PackSpec::new(type_name, type_defs).map_err(|_| unsupported())?;
    for f in spec.fields {
        let wire = WireType::for_type(&f.type_name).ok_or_else(unsupported)?;
        let field = std::iter::once(name.to_string()).chain(f.path).collect::<Vec<_>>().join(".");
        layout.push(field, wire);
    }
    Ok(())
}

pub fn plan_remote(port: &PortSpec, type_defs: &[TypeDefInfo]) -> Result<RemotePlan, WireError> {
    let mut request = MessageLayout::default();
    for p in &port.params {
        layout_for(&mut request, &p.name, &p.type_name, port, type_defs)?;
    }
    let mut response = MessageLayout::default();
    if port.return_type != "void" {
        layout_for(&mut response, "result", &port.return_type, port, type_defs)?;
    }
    Ok(RemotePlan {
        port: port.local_name.clone(),
        global_name: port.global_name.clone(),
        request,
        response,
    })
}

impl RemotePlan {
    /// One call through stub, byte buffer and skeleton in the same process.
    pub fn loopback(
        &self,
        args: &[Value],
        skeleton: impl FnOnce(&[Value]) -> Vec<Value>,
    ) -> Result<Vec<Value>, WireError> {
        let request = self.request.encode(args)?;
        let received = self.request.decode(&request)?;
        let response = self.response.encode(&skeleton(&received))?;
        self.response.decode(&response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdl::{PortKind, PortParam};
    use crate::extract::PassingMode;

    fn port(ret: &str, params: &[(&str, &str)]) -> PortSpec {
        PortSpec {
            local_name: "f".into(),
            global_name: "cmdi_m_1_f".into(),
            kind: PortKind::Provides,
            return_type: ret.into(),
            params: params
                .iter()
                .map(|(n, t)| PortParam {
                    name: n.to_string(),
                    type_name: t.to_string(),
                    passing: PassingMode::ByValue,
                    default: None,
                    doc: None,
                })
                .collect(),
            doc: None,
            remote: true,
            extensions: Vec::new(),
        }
    }

    fn point() -> Vec<TypeDefInfo> {
        vec![TypeDefInfo {
            name: "point".into(),
            fields: vec![("x".into(), "double".into()), ("y".into(), "double".into())],
        }]
    }

    #[test]
    fn add_is_sixteen_then_eight() {
        let plan = plan_remote(&port("double", &[("a", "double"), ("b", "double")]), &[]).unwrap();
        assert_eq!(plan.request.size(), 16);
        assert_eq!(plan.response.size(), 8);
        let out = plan
            .loopback(&[Value::Float(2.0), Value::Float(0.5)], |v| vec![Value::Float(v[0].as_f64() + v[1].as_f64())])
            .unwrap();
        assert_eq!(out, [Value::Float(2.5)]);
    }

    #[test]
    fn aggregates_decompose() {
        let plan = plan_remote(&port("void", &[("p", "point")]), &point()).unwrap();
        let names: Vec<&str> = plan.request.fields.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["p.x", "p.y"]);
        assert_eq!(plan.response.size(), 0);
    }

    #[test]
    fn widths_and_byte_order() {
        let plan = plan_remote(&port("char", &[("i", "int"), ("l", "long"), ("f", "float")]), &[]).unwrap();
        assert_eq!(plan.request.size(), 16);
        assert_eq!(plan.response.size(), 1);
        let bytes = plan.request.encode(&[Value::Int(1), Value::Int(2), Value::Float(1.0)]).unwrap();
        assert_eq!(bytes, [1, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0x80, 0x3f]);
    }

    #[test]
    fn unresolved_types_are_unsupported() {
        let err = plan_remote(&port("double", &[("v", "vec3")]), &point()).unwrap_err();
        assert!(matches!(err, WireError::UnsupportedRemoteType { type_name, .. } if type_name == "vec3"));
    }
}

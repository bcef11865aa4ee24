//! Checking a project against the descriptors of its components.

use std::collections::BTreeMap;
use std::path::Path;

use comodi_core::cdl::{parse_literal, read_cdf_str, validate_cdf, ComponentDescriptor, PortSpec};
use comodi_core::glue::PackSpec;
use comodi_core::Diagnostic;

use crate::project::{PortRef, ProjectDescription};

/// Descriptor of each instance, keyed by instance id.
pub type Descriptors = BTreeMap<String, ComponentDescriptor>;

fn is_primitive(t: &str) -> bool {
    matches!(t, "int" | "long" | "float" | "double" | "char" | "void")
}

/// A provides port with the project's overrides folded into its defaults.
pub fn effective_port(p: &ProjectDescription, d: &ComponentDescriptor, at: &PortRef) -> Option<PortSpec> {
    let mut port = d.provides_port(&at.port)?.clone();
    for o in p.overrides.iter().filter(|o| &o.port == at) {
        if let Some(param) = port.params.iter_mut().find(|q| q.name == o.name) {
            param.default = Some(o.value.clone());
        }
    }
    Some(port)
}

/// Same named type on both sides, and the same layout when it is a record.
fn same_type(a: &ComponentDescriptor, ta: &str, b: &ComponentDescriptor, tb: &str) -> bool {
    if ta != tb {
        return false;
    }
    if is_primitive(ta) {
        return true;
    }
    match (PackSpec::new(ta, &a.type_defs), PackSpec::new(tb, &b.type_defs)) {
        (Ok(x), Ok(y)) => x.fields == y.fields,
        _ => false,
    }
}

pub fn validate_project(p: &ProjectDescription, descriptors: &Descriptors) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for inst in &p.instances {
        let Some(d) = descriptors.get(&inst.id) else {
            out.push(Diagnostic::error("MissingDescriptor", &inst.id, format!("no descriptor for {} {}", inst.package, inst.version)));
            continue;
        };
        if d.name != inst.package || d.version != inst.version {
            out.push(Diagnostic::error(
                "PackageMismatch",
                &inst.id,
                format!("descriptor is {} {}, project asks for {} {}", d.name, d.version, inst.package, inst.version),
            ));
        }
        for diag in validate_cdf(d).into_iter().filter(Diagnostic::is_error) {
            out.push(Diagnostic::error("InvalidDescriptor", &inst.id, diag.to_string()));
        }
    }

    for o in &p.overrides {
        let at = o.port.to_string();
        let Some(d) = descriptors.get(&o.port.instance) else { continue };
        let Some(port) = d.provides_port(&o.port.port) else {
            out.push(Diagnostic::error("UnknownPort", &at, "parameter override on a port that is not provided"));
            continue;
        };
        match port.params.iter().find(|q| q.name == o.name) {
            None => out.push(Diagnostic::error("UnknownParam", &at, format!("no parameter {}", o.name))),
            Some(q) if parse_literal(&q.type_name, &o.value).is_none() => out.push(Diagnostic::error(
                "BadOverride",
                &at,
                format!("{} is not a {} literal for {}", o.value, q.type_name, o.name),
            )),
            Some(_) => {}
        }
    }
    for inst in &p.instances {
        let Some(d) = descriptors.get(&inst.id) else { continue };
        for port in &d.provides {
            let at = PortRef::new(&inst.id, &port.local_name);
            let Some(eff) = effective_port(p, d, &at) else { continue };
            let first_default = eff.params.iter().position(|q| q.default.is_some());
            if first_default.is_some_and(|i| eff.params[i..].iter().any(|q| q.default.is_none())) {
                out.push(Diagnostic::error("DefaultOrder", at.to_string(), "overrides leave a parameter without a default after one with a default"));
            }
        }
    }

    let mut bound: BTreeMap<&PortRef, &PortRef> = BTreeMap::new();
    for c in &p.connections {
        let at = c.from.to_string();
        let (Some(from_d), Some(to_d)) = (descriptors.get(&c.from.instance), descriptors.get(&c.to.instance)) else {
            continue;
        };
        let Some(uses) = from_d.uses_port(&c.from.port) else {
            out.push(Diagnostic::error("UnknownPort", &at, format!("{} has no uses port {}", c.from.instance, c.from.port)));
            continue;
        };
        let Some(provides) = effective_port(p, to_d, &c.to) else {
            out.push(Diagnostic::error("UnknownPort", c.to.to_string(), format!("{} has no provides port {}", c.to.instance, c.to.port)));
            continue;
        };
        if let Some(prev) = bound.insert(&c.from, &c.to) {
            out.push(Diagnostic::error("DuplicateBinding", &at, format!("already connected to {prev}")));
        }
        if !same_type(from_d, &uses.return_type, to_d, &provides.return_type) {
            out.push(Diagnostic::error(
                "TypeMismatch",
                &at,
                format!("returns {} but {} returns {}", uses.return_type, c.to, provides.return_type),
            ));
        }
        for (i, (a, b)) in uses.params.iter().zip(&provides.params).enumerate() {
            if !same_type(from_d, &a.type_name, to_d, &b.type_name) {
                out.push(Diagnostic::error(
                    "TypeMismatch",
                    &at,
                    format!("parameter {i} is {} but {} expects {}", a.type_name, c.to, b.type_name),
                ));
            }
        }
        let (n, m) = (uses.arity(), provides.arity());
        if n > m {
            out.push(Diagnostic::error("ArityMismatch", &at, format!("passes {n} arguments but {} takes {m}", c.to)));
        } else if provides.required_arity() > n {
            let missing: Vec<&str> = provides.params[n..]
                .iter()
                .filter(|q| q.default.is_none())
                .map(|q| q.name.as_str())
                .collect();
            out.push(Diagnostic::error(
                "ArityMismatch",
                &at,
                format!("passes {n} arguments; {} has no default for {}", c.to, missing.join(", ")),
            ));
        }
    }

    for inst in &p.instances {
        let Some(d) = descriptors.get(&inst.id) else { continue };
        for u in &d.uses {
            let r = PortRef::new(&inst.id, &u.local_name);
            if bound.contains_key(&r) {
                continue;
            }
            if u.params.iter().all(|q| q.default.is_some()) {
                out.push(Diagnostic::warning("UnboundUsesPort", r.to_string(), "not connected; calling it at run time is a fault"));
            } else {
                out.push(Diagnostic::error("UnboundUsesPort", r.to_string(), "not connected and its parameters lack defaults"));
            }
        }
    }

    if let Some(d) = descriptors.get(&p.entry.instance) {
        if d.provides_port(&p.entry.port).is_none() {
            out.push(Diagnostic::error("EntryPort", p.entry.to_string(), "entry is not a provides port"));
        }
    }
    out
}

/// Reads each instance's descriptor from `<dir>/<pkg>-<version>.cdf`, or
/// `<dir>/<pkg>.cdf` when there is no versioned file.
pub fn descriptors_from_dir(p: &ProjectDescription, dir: &Path) -> Result<Descriptors, Vec<Diagnostic>> {
    let mut out = Descriptors::new();
    let mut diags = Vec::new();
    for inst in &p.instances {
        let versioned = dir.join(format!("{}-{}.cdf", inst.package, inst.version));
        let path = if versioned.exists() { versioned } else { dir.join(format!("{}.cdf", inst.package)) };
        match std::fs::read_to_string(&path) {
            Err(e) => diags.push(Diagnostic::error("MissingDescriptor", &inst.id, format!("{}: {e}", path.display()))),
            Ok(text) => match read_cdf_str(&text) {
                Ok(d) => {
                    out.insert(inst.id.clone(), d);
                }
                Err(e) => diags.push(Diagnostic::error("InvalidDescriptor", &inst.id, format!("{}: {e}", path.display()))),
            },
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

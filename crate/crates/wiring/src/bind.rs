//! From a validated project to what each link entry receives.

use std::collections::{BTreeMap, BTreeSet};

use comodi_core::cdl::{PortSpec, Value, Version};
use comodi_core::glue::{mangle_name, Binding, ParamString};
use comodi_core::diag::has_errors;
use comodi_core::Diagnostic;

use crate::project::{PortRef, ProjectDescription};
use crate::validate::{effective_port, validate_project, Descriptors};

#[derive(Debug, Clone, PartialEq)]
pub struct InstancePlan {
    pub id: String,
    pub component: String,
    pub version: Version,
    pub language: String,
    pub link_entry: String,
    pub param_string: ParamString,
    /// Provides ports with the project's overrides applied.
    pub provides: Vec<PortSpec>,
    /// Per provides port, the default of each parameter position.
    pub defaults: BTreeMap<String, Vec<Option<Value>>>,
}

impl InstancePlan {
    pub fn port(&self, local: &str) -> Option<&PortSpec> {
        self.provides.iter().find(|p| p.local_name == local)
    }

    /// The provides port with the given global name.
    pub fn port_by_global(&self, global: &str) -> Option<&PortSpec> {
        self.provides.iter().find(|p| p.global_name == global)
    }

    /// `args` extended with defaults up to the port's arity.
    pub fn fill_defaults(&self, port: &str, args: &[Value]) -> Option<Vec<Value>> {
        let defaults = self.defaults.get(port)?;
        if args.len() > defaults.len() {
            return None;
        }
        let mut full = args.to_vec();
        for d in &defaults[args.len()..] {
            full.push((*d)?);
        }
        Some(full)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WiringPlan {
    pub instances: Vec<InstancePlan>,
    /// Instance ids in the order their link entries are called.
    pub link_order: Vec<String>,
    pub entry: PortRef,
}

impl WiringPlan {
    pub fn instance(&self, id: &str) -> Option<&InstancePlan> {
        self.instances.iter().find(|i| i.id == id)
    }
}

/// Providers before their callers. Where connections form a cycle the
/// first remaining instance in project order goes next; its slots are filled
/// by the time anything runs, since every link entry is called before the
/// first business call.
fn link_order(p: &ProjectDescription) -> Vec<String> {
    let mut waiting: BTreeMap<&str, BTreeSet<&str>> = p
        .instances
        .iter()
        .map(|i| {
            let deps = p
                .connections_from(&i.id)
                .map(|c| c.to.instance.as_str())
                .filter(|t| *t != i.id)
                .collect();
            (i.id.as_str(), deps)
        })
        .collect();
    let mut order = Vec::new();
    while order.len() < p.instances.len() {
        let next = p
            .instances
            .iter()
            .map(|i| i.id.as_str())
            .find(|id| waiting.get(id).is_some_and(BTreeSet::is_empty))
            .or_else(|| p.instances.iter().map(|i| i.id.as_str()).find(|id| waiting.contains_key(id)))
            .expect("an unlinked instance remains");
        waiting.remove(next);
        for deps in waiting.values_mut() {
            deps.remove(next);
        }
        order.push(next.to_string());
    }
    order
}

/// Builds every instance's param string and the link order. Fails with the
/// validation diagnostics when the project does not validate.
pub fn bind(p: &ProjectDescription, descriptors: &Descriptors) -> Result<WiringPlan, Vec<Diagnostic>> {
    let diags = validate_project(p, descriptors);
    if has_errors(&diags) {
        return Err(diags);
    }
    let mut instances = Vec::new();
    for inst in &p.instances {
        let d = &descriptors[&inst.id];
        let mut param_string = ParamString::default();
        for c in p.connections_from(&inst.id) {
            let target = &descriptors[&c.to.instance];
            let global = target.provides_port(&c.to.port).expect("validated").global_name.clone();
            param_string
                .push(Binding {
                    uses_port: c.from.port.clone(),
                    instance: c.to.instance.clone(),
                    target_global: global,
                })
                .expect("validated: one binding per uses port");
        }
        let provides: Vec<PortSpec> = d
            .provides
            .iter()
            .map(|port| effective_port(p, d, &PortRef::new(&inst.id, &port.local_name)).expect("own port"))
            .collect();
        let defaults = provides
            .iter()
            .map(|port| (port.local_name.clone(), (0..port.arity()).map(|i| port.param_default(i)).collect()))
            .collect();
        instances.push(InstancePlan {
            id: inst.id.clone(),
            component: d.name.clone(),
            version: d.version,
            language: d.language.clone(),
            link_entry: mangle_name(&d.name, d.version.major, "link"),
            param_string,
            provides,
            defaults,
        });
    }
    Ok(WiringPlan {
        instances,
        link_order: link_order(p),
        entry: p.entry.clone(),
    })
}

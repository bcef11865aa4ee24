//! Linking and executing a bound project on some backend.

use std::collections::BTreeMap;

use comodi_core::cdl::{ComponentDescriptor, Value};
use comodi_core::xml::Element;
use comodi_core::Diagnostic;
use thiserror::Error;

use crate::bind::{InstancePlan, WiringPlan};
use crate::project::PortRef;
use crate::validate::Descriptors;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("project does not validate: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("no mock for {0}")]
    MissingMock(PortRef),
    #[error("{instance}: no binary for platform {platform}")]
    MissingBinary { instance: String, platform: String },
    #[error("{instance}: cannot load: {message}")]
    Load { instance: String, message: String },
    #[error("{instance}: link entry failed: {message}")]
    Link { instance: String, message: String },
    #[error("{0} called before it was linked")]
    NotLinked(String),
    #[error("fault in {instance}.{port}: {message}")]
    Fault { instance: String, port: String, message: String },
    #[error("{0}")]
    Unsupported(String),
}

impl RunError {
    pub fn fault(at: &PortRef, message: impl Into<String>) -> Self {
        RunError::Fault {
            instance: at.instance.clone(),
            port: at.port.clone(),
            message: message.into(),
        }
    }
}

/// Something that can host component instances.
///
/// The framework loads every instance, calls each link entry once with the
/// instance's param string, then makes the entry call. Calls between
/// components go through slots filled at link time and never come back to
/// the framework.
pub trait Backend {
    fn name(&self) -> &'static str;
    fn load(&mut self, plan: &InstancePlan, descriptor: &ComponentDescriptor) -> Result<(), RunError>;
    fn link(&mut self, instance: &str, param_string: &str) -> Result<(), RunError>;
    /// Calls a provides port with `args`; missing trailing arguments are
    /// filled from defaults by the port's own glue.
    fn invoke(&mut self, at: &PortRef, args: &[Value]) -> Result<Option<Value>, RunError>;
    /// Business calls so far, keyed by `instance.port`.
    fn call_counts(&self) -> BTreeMap<String, usize>;
    /// How many times a link entry asked for a reference to be resolved.
    fn resolve_calls(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionReport {
    pub backend: String,
    pub entry: PortRef,
    pub value: Option<Value>,
    pub link_calls: BTreeMap<String, usize>,
    /// Resolutions or link calls made after the entry call started.
    pub runtime_wiring_calls: usize,
    pub calls: BTreeMap<String, usize>,
}

impl ExecutionReport {
    pub fn to_xml(&self) -> Element {
        let mut root = Element::new("execution")
            .attr("backend", self.backend.as_str())
            .attr("entry", self.entry.to_string())
            .attr("runtimeWiringCalls", self.runtime_wiring_calls.to_string());
        root = match self.value {
            Some(v) => root.attr("value", v.to_string()),
            None => root.attr("value", "void"),
        };
        for (id, n) in &self.link_calls {
            let calls: usize = self
                .calls
                .iter()
                .filter(|(k, _)| k.split_once('.').is_some_and(|(i, _)| i == id))
                .map(|(_, n)| n)
                .sum();
            root.push(
                Element::new("instance")
                    .attr("id", id.as_str())
                    .attr("linkCalls", n.to_string())
                    .attr("calls", calls.to_string()),
            );
        }
        for (port, n) in &self.calls {
            root.push(Element::new("port").attr("ref", port.as_str()).attr("calls", n.to_string()));
        }
        root
    }
}

/// Loads and links every instance, then calls the entry point with `args`.
pub fn run(
    plan: &WiringPlan,
    descriptors: &Descriptors,
    backend: &mut dyn Backend,
    args: &[Value],
) -> Result<ExecutionReport, RunError> {
    for inst in &plan.instances {
        backend.load(inst, &descriptors[&inst.id])?;
    }
    let mut link_calls: BTreeMap<String, usize> = plan.instances.iter().map(|i| (i.id.clone(), 0)).collect();
    for id in &plan.link_order {
        let inst = plan.instance(id).expect("link order names plan instances");
        backend.link(id, &inst.param_string.to_string())?;
        *link_calls.get_mut(id).expect("known instance") += 1;
    }
    debug_assert!(link_calls.values().all(|&n| n == 1));
    let before = backend.resolve_calls();
    let links_before: usize = link_calls.values().sum();
    let value = backend.invoke(&plan.entry, args)?;
    let links_after: usize = link_calls.values().sum();
    Ok(ExecutionReport {
        backend: backend.name().to_string(),
        entry: plan.entry.clone(),
        value,
        runtime_wiring_calls: backend.resolve_calls() - before + (links_after - links_before),
        link_calls,
        calls: backend.call_counts(),
    })
}

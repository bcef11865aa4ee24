use std::collections::BTreeMap;

use thiserror::Error;

use crate::cdl::{validate_cdf, ComponentDescriptor, PortSpec, Value, Version};
use crate::diag::{has_errors, Diagnostic};
use crate::extract::{is_primitive, PassingMode, TypeDefInfo};
use crate::xml::Element;

use super::mangle::{mangle_name, Collision, NameRegistry};
use super::pack::{PackError, PackSpec};
use super::remote::{plan_remote, RemotePlan, WireError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentRef {
    pub name: String,
    pub version: Version,
}

/// Static reference filled by the link entry for one uses port.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub id: String,
    pub global_name: String,
    pub port: PortSpec,
}

/// Wrapper exported under a provides port's global name.
#[derive(Debug, Clone, PartialEq)]
pub struct Trampoline {
    pub port: PortSpec,
    /// Symbol of the author's function as the linker sees it.
    pub symbol: String,
    /// Parameter positions and the values used when a caller stops short.
    pub defaults: Vec<(usize, Value)>,
    /// Parameters of typedef'd type, rebuilt from their flattened fields.
    pub aggregates: Vec<(usize, String)>,
}

impl Trampoline {
    pub fn min_args(&self) -> usize {
        self.port.required_arity()
    }
}

/// A uses-port parameter with no default: whoever binds the port must supply it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub port: String,
    pub param: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GluePlan {
    pub component: ComponentRef,
    pub language: String,
    pub link_entry: String,
    pub mangling: BTreeMap<String, String>,
    pub slots: Vec<Slot>,
    pub trampolines: Vec<Trampoline>,
    pub packs: Vec<PackSpec>,
    pub remote: Vec<RemotePlan>,
    pub obligations: Vec<Obligation>,
    pub type_defs: Vec<TypeDefInfo>,
}

impl GluePlan {
    pub fn prefix(&self) -> String {
        self.link_entry.trim_end_matches("link").to_string()
    }

    pub fn is_fortran(&self) -> bool {
        crate::cdl::is_fortran(&self.language)
    }

    pub fn pack(&self, type_name: &str) -> Option<&PackSpec> {
        self.packs.iter().find(|p| p.type_name == type_name)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlueError {
    #[error("descriptor has errors: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Collision(#[from] Collision),
    #[error(transparent)]
    Pack(#[from] PackError),
    #[error(transparent)]
    Remote(#[from] WireError),
}

/// Symbol under which the linker knows an author routine.
pub fn author_symbol(language: &str, local: &str) -> String {
    if crate::cdl::is_fortran(language) {
        format!("{}_", local.to_ascii_lowercase())
    } else {
        local.to_string()
    }
}

pub fn plan_glue(d: &ComponentDescriptor) -> Result<GluePlan, GlueError> {
    let diags = validate_cdf(d);
    if has_errors(&diags) {
        return Err(GlueError::Invalid(diags.into_iter().filter(Diagnostic::is_error).collect()));
    }
    let major = d.version.major;
    let mut names = NameRegistry::new();
    let link_entry = mangle_name(&d.name, major, "link");
    let mut mangling = BTreeMap::new();
    for p in d.ports() {
        let global = names.insert(&d.name, major, &p.local_name)?;
        if global == link_entry {
            return Err(Collision {
                global,
                first: "the link entry".into(),
                second: format!("port {}", p.local_name),
            }
            .into());
        }
        mangling.insert(p.local_name.clone(), global);
    }

    let slots = d
        .uses
        .iter()
        .map(|p| Slot {
            id: p.local_name.clone(),
            global_name: p.global_name.clone(),
            port: p.clone(),
        })
        .collect();
    let obligations = d
        .uses
        .iter()
        .flat_map(|p| {
            p.params.iter().filter(|q| q.default.is_none()).map(|q| Obligation {
                port: p.local_name.clone(),
                param: q.name.clone(),
            })
        })
        .collect();

    let trampolines = d
        .provides
        .iter()
        .map(|p| Trampoline {
            port: adapt_passing(d, p),
            symbol: author_symbol(&d.language, &p.local_name),
            defaults: (0..p.params.len()).filter_map(|i| Some((i, p.param_default(i)?))).collect(),
            aggregates: p
                .params
                .iter()
                .enumerate()
                .filter(|(_, q)| !is_primitive(&q.type_name))
                .map(|(i, q)| (i, q.type_name.clone()))
                .collect(),
        })
        .collect();

    let packs = d
        .type_defs
        .iter()
        .map(|t| PackSpec::new(&t.name, &d.type_defs))
        .collect::<Result<_, _>>()?;
    let remote = d
        .ports()
        .filter(|p| p.remote)
        .map(|p| plan_remote(p, &d.type_defs))
        .collect::<Result<_, _>>()?;

    Ok(GluePlan {
        component: ComponentRef {
            name: d.name.clone(),
            version: d.version,
        },
        language: d.language.clone(),
        link_entry,
        mangling,
        slots,
        trampolines,
        packs,
        remote,
        obligations,
        type_defs: d.type_defs.clone(),
    })
}

/// Fortran callees take every argument by address.
fn adapt_passing(d: &ComponentDescriptor, p: &PortSpec) -> PortSpec {
    let mut p = p.clone();
    if d.is_fortran() {
        for q in &mut p.params {
            q.passing = PassingMode::ByReference;
        }
    }
    p
}

/// `<component>_wiring.xml`: what the framework needs to link the component
/// without reading its glue source.
pub fn wiring_to_xml(plan: &GluePlan) -> Element {
    let mut root = Element::new("wiring")
        .attr("component", &plan.component.name)
        .attr("version", plan.component.version.to_string())
        .attr("language", &plan.language)
        .attr("link", &plan.link_entry);
    for s in &plan.slots {
        root.push(
            Element::new("slot")
                .attr("id", &s.id)
                .attr("global", &s.global_name)
                .attr("returns", &s.port.return_type)
                .attr("arity", s.port.arity().to_string()),
        );
    }
    for o in &plan.obligations {
        root.push(Element::new("obligation").attr("port", &o.port).attr("param", &o.param));
    }
    for t in &plan.trampolines {
        let mut el = Element::new("trampoline")
            .attr("port", &t.port.local_name)
            .attr("global", &t.port.global_name)
            .attr("symbol", &t.symbol)
            .attr("returns", &t.port.return_type)
            .attr("minArgs", t.min_args().to_string())
            .attr("maxArgs", t.port.arity().to_string());
        for (i, q) in t.port.params.iter().enumerate() {
            let mut param = Element::new("param")
                .attr("position", i.to_string())
                .attr("type", &q.type_name)
                .attr("passing", q.passing.as_str());
            if let Some((_, v)) = t.defaults.iter().find(|(j, _)| *j == i) {
                param = param.attr("default", v.to_string());
            }
            el.push(param);
        }
        root.push(el);
    }
    for p in &plan.packs {
        let mut el = Element::new("pack").attr("type", &p.type_name);
        for (i, f) in p.fields.iter().enumerate() {
            el.push(
                Element::new("field")
                    .attr("index", i.to_string())
                    .attr("path", f.dotted())
                    .attr("type", &f.type_name),
            );
        }
        root.push(el);
    }
    for r in &plan.remote {
        let mut el = Element::new("remote")
            .attr("port", &r.port)
            .attr("global", &r.global_name)
            .attr("requestBytes", r.request.size().to_string())
            .attr("responseBytes", r.response.size().to_string());
        for (section, layout) in [("request", &r.request), ("response", &r.response)] {
            for f in &layout.fields {
                el.push(
                    Element::new("field")
                        .attr("message", section)
                        .attr("name", &f.name)
                        .attr("wire", f.wire.as_str())
                        .attr("offset", f.offset.to_string())
                        .attr("width", f.wire.width().to_string()),
                );
            }
        }
        root.push(el);
    }
    root
}

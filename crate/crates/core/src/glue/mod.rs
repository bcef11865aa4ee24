//! Generated glue: naming, wiring slots, default filling, aggregate packing
//! and remote message layouts. Glue never touches author source; everything
//! here is derived from a component descriptor.

mod emit;
mod mangle;
mod pack;
mod param_string;
mod plan;
mod remote;

pub use emit::{emit_glue, GlueArtifact};
pub use mangle::{mangle_name, Collision, NameRegistry};
pub use pack::{Datum, FlatField, PackError, PackSpec};
pub use param_string::{parse_param_string, render_param_string, Binding, ParamString, ParamStringError};
pub use plan::{
    author_symbol, plan_glue, wiring_to_xml, ComponentRef, GlueError, GluePlan, Obligation, Slot, Trampoline,
};
pub use remote::{plan_remote, MessageLayout, RemotePlan, WireError, WireField, WireType};

#[cfg(test)]
mod tests;

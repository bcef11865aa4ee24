//! C text for native builds.
//!
//! Calls between components use one uniform shape,
//! `int entry(int argc, const cmdi_value *argv, cmdi_value *result)`, where
//! aggregates travel as their flattened fields. Trampolines turn that shape
//! into a call of the author's routine; uses-port stubs turn an author call
//! into that shape and forward it through the slot set at link time.

use std::fmt::Write as _;

use crate::cdl::PortSpec;
use crate::extract::{is_primitive, PassingMode};

use super::pack::PackSpec;
use super::plan::{author_symbol, wiring_to_xml, GluePlan, Slot, Trampoline};

/// The two generated files for one component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlueArtifact {
    pub glue_file: String,
    pub glue_source: String,
    pub wiring_file: String,
    pub wiring_metadata: String,
}

pub fn emit_glue(plan: &GluePlan) -> GlueArtifact {
    let name = &plan.component.name;
    GlueArtifact {
        glue_file: format!("{name}_glue.c"),
        glue_source: Emitter { plan, out: String::new() }.run(),
        wiring_file: format!("{name}_wiring.xml"),
        wiring_metadata: wiring_to_xml(plan).to_document(),
    }
}

fn member(type_name: &str) -> &'static str {
    match type_name {
        "float" | "double" => "f",
        "char" => "c",
        _ => "i",
    }
}

struct Emitter<'p> {
    plan: &'p GluePlan,
    out: String,
}

impl Emitter<'_> {
    fn run(mut self) -> String {
        let p = self.plan;
        let _ = writeln!(
            self.out,
            "/* Glue for component {} {} ({}). Generated file; the author's sources are untouched. */",
            p.component.name, p.component.version, p.language
        );
        self.out.push_str(concat!(
            "#include <stdlib.h>\n",
            "#include <string.h>\n",
            "\n",
            "typedef union { long long i; double f; char c; } cmdi_value;\n",
            "typedef int (*cmdi_entry)(int argc, const cmdi_value *argv, cmdi_value *result);\n",
            "typedef cmdi_entry (*cmdi_resolver)(const char *instance, const char *global);\n",
        ));
        for t in &p.type_defs {
            self.out.push_str("\ntypedef struct {");
            for (f, ty) in &t.fields {
                let _ = write!(self.out, " {} {f};", ty);
            }
            let _ = writeln!(self.out, " }} {};", t.name);
        }
        for pack in &p.packs {
            self.pack_helpers(pack);
        }

        self.out.push('\n');
        for t in &p.trampolines {
            let _ = writeln!(self.out, "extern {};", self.prototype(&t.port, &t.symbol, false));
        }
        if !p.slots.is_empty() {
            self.out.push('\n');
        }
        for s in &p.slots {
            let _ = writeln!(self.out, "static cmdi_entry {}_slot;", s.global_name);
        }
        for s in &p.slots {
            self.uses_stub(s);
        }
        for t in &p.trampolines {
            self.trampoline(t);
        }
        self.link_entry();
        self.out
    }

    fn by_ref(&self, passing: PassingMode) -> bool {
        self.plan.is_fortran() || passing == PassingMode::ByReference
    }

    /// `ret name(T a0, T *a1, ...)` as the author's code sees the routine.
    fn prototype(&self, port: &PortSpec, symbol: &str, named: bool) -> String {
        let params: Vec<String> = port
            .params
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let star = if self.by_ref(q.passing) { " *" } else { " " };
                if named {
                    format!("{}{star}a{i}", q.type_name)
                } else {
                    format!("{}{star}", q.type_name).trim_end().to_string()
                }
            })
            .collect();
        let params = if params.is_empty() { "void".to_string() } else { params.join(", ") };
        format!("{} {symbol}({params})", port.return_type)
    }

    fn helper(&self, what: &str, type_name: &str) -> String {
        format!("{}{what}_{type_name}", self.plan.prefix())
    }

    fn pack_helpers(&mut self, pack: &PackSpec) {
        let t = &pack.type_name;
        let _ = writeln!(
            self.out,
            "\nstatic void {}(const {t} *in, cmdi_value *out)\n{{",
            self.helper("pack", t)
        );
        for (i, f) in pack.fields.iter().enumerate() {
            let _ = writeln!(self.out, "    out[{i}].{} = in->{};", member(&f.type_name), f.dotted());
        }
        let _ = writeln!(
            self.out,
            "}}\n\nstatic void {}(const cmdi_value *in, {t} *out)\n{{",
            self.helper("unpack", t)
        );
        for (i, f) in pack.fields.iter().enumerate() {
            let _ = writeln!(
                self.out,
                "    out->{} = ({})in[{i}].{};",
                f.dotted(),
                f.type_name,
                member(&f.type_name)
            );
        }
        self.out.push_str("}\n");
    }

    fn width(&self, type_name: &str) -> usize {
        self.plan.pack(type_name).map_or(1, PackSpec::width)
    }

    /// Author-facing definition for a uses port, forwarding through its slot.
    fn uses_stub(&mut self, s: &Slot) {
        let port = &s.port;
        let symbol = author_symbol(&self.plan.language, &port.local_name);
        let argc: usize = port.params.iter().map(|q| self.width(&q.type_name)).sum();
        let retc = if port.return_type == "void" { 0 } else { self.width(&port.return_type) };
        let _ = writeln!(self.out, "\n{}\n{{", self.prototype(port, &symbol, true));
        let _ = writeln!(self.out, "    cmdi_value cmdi_argv[{}] = {{{{0}}}};", argc.max(1));
        let _ = writeln!(self.out, "    cmdi_value cmdi_result[{}] = {{{{0}}}};", retc.max(1));
        let _ = writeln!(self.out, "    if (!{}_slot)\n        abort();", s.global_name);
        let mut k = 0;
        for (i, q) in port.params.iter().enumerate() {
            let deref = if self.by_ref(q.passing) { "*" } else { "" };
            if is_primitive(&q.type_name) {
                let _ = writeln!(self.out, "    cmdi_argv[{k}].{} = {deref}a{i};", member(&q.type_name));
            } else {
                let addr = if deref.is_empty() { "&" } else { "" };
                let _ = writeln!(self.out, "    {}({addr}a{i}, cmdi_argv + {k});", self.helper("pack", &q.type_name));
            }
            k += self.width(&q.type_name);
        }
        let _ = writeln!(
            self.out,
            "    if ({}_slot({}, cmdi_argv, cmdi_result) != 0)\n        abort();",
            s.global_name,
            port.params.len()
        );
        let ret = &port.return_type;
        if ret != "void" && is_primitive(ret) {
            let _ = writeln!(self.out, "    return ({})cmdi_result[0].{};", ret, member(ret));
        } else if ret != "void" {
            let _ = writeln!(self.out, "    {{\n        {ret} r;\n        {}(cmdi_result, &r);\n        return r;\n    }}", self.helper("unpack", ret));
        }
        self.out.push_str("}\n");
    }

    fn trampoline(&mut self, t: &Trampoline) {
        let port = &t.port;
        let _ = writeln!(
            self.out,
            "\nint {}(int argc, const cmdi_value *argv, cmdi_value *result)\n{{",
            port.global_name
        );
        for (i, q) in port.params.iter().enumerate() {
            match t.defaults.iter().find(|(j, _)| *j == i) {
                Some((_, v)) => {
                    let _ = writeln!(self.out, "    {} a{i} = {};", q.type_name, v.to_c());
                }
                None => {
                    let _ = writeln!(self.out, "    {} a{i};", q.type_name);
                }
            }
        }
        if port.return_type != "void" {
            let _ = writeln!(self.out, "    {} r;", port.return_type);
        }
        let _ = writeln!(
            self.out,
            "    if (argc < {} || argc > {})\n        return -1;",
            t.min_args(),
            port.arity()
        );
        if port.params.is_empty() {
            self.out.push_str("    (void)argv;\n");
        }
        if port.return_type == "void" {
            self.out.push_str("    (void)result;\n");
        }
        let mut k = 0;
        for (i, q) in port.params.iter().enumerate() {
            let load = if is_primitive(&q.type_name) {
                format!("a{i} = ({})argv[{k}].{};", q.type_name, member(&q.type_name))
            } else {
                format!("{}(argv + {k}, &a{i});", self.helper("unpack", &q.type_name))
            };
            if i < t.min_args() {
                let _ = writeln!(self.out, "    {load}");
            } else {
                let _ = writeln!(self.out, "    if (argc > {i})\n        {load}");
            }
            k += self.width(&q.type_name);
        }
        let args: Vec<String> = port
            .params
            .iter()
            .enumerate()
            .map(|(i, q)| if self.by_ref(q.passing) { format!("&a{i}") } else { format!("a{i}") })
            .collect();
        let call = format!("{}({})", t.symbol, args.join(", "));
        let ret = &port.return_type;
        if ret == "void" {
            let _ = writeln!(self.out, "    {call};");
        } else {
            let _ = writeln!(self.out, "    r = {call};");
            if is_primitive(ret) {
                let _ = writeln!(self.out, "    result[0].{} = r;", member(ret));
            } else {
                let _ = writeln!(self.out, "    {}(&r, result);", self.helper("pack", ret));
            }
        }
        self.out.push_str("    return 0;\n}\n");
    }

    fn link_entry(&mut self) {
        let prefix = self.plan.prefix();
        let _ = write!(
            self.out,
            r#"
static const char *{prefix}token(const char *p, char *out, size_t cap)
{{
    size_t n = 0;
    while (*p == ' ' || *p == '\t' || *p == '\n' || *p == '\r')
        p++;
    while ((*p >= 'a' && *p <= 'z') || (*p >= 'A' && *p <= 'Z') || (*p >= '0' && *p <= '9') || *p == '_' || *p == '-') {{
        if (n + 1 >= cap)
            return 0;
        out[n++] = *p++;
    }}
    out[n] = 0;
    while (*p == ' ' || *p == '\t' || *p == '\n' || *p == '\r')
        p++;
    return n ? p : 0;
}}

int {link}(const char *params, cmdi_resolver resolve)
{{
    char port[256], instance[256], global[256];
    const char *p = params;
    while (*p == ' ' || *p == '\t' || *p == '\n' || *p == '\r')
        p++;
    while (*p) {{
        cmdi_entry target;
        if (!(p = {prefix}token(p, port, sizeof port)) || *p++ != '=')
            return 1;
        if (!(p = {prefix}token(p, instance, sizeof instance)) || *p++ != '.')
            return 1;
        if (!(p = {prefix}token(p, global, sizeof global)))
            return 1;
        if (*p == ';')
            p++;
        else if (*p)
            return 1;
        target = resolve(instance, global);
        if (!target)
            return 2;
"#,
            link = self.plan.link_entry
        );
        for s in &self.plan.slots {
            let _ = writeln!(
                self.out,
                "        if (strcmp(port, \"{}\") == 0)\n            {}_slot = target;\n        else",
                s.id, s.global_name
            );
        }
        let indent = if self.plan.slots.is_empty() { "        " } else { "            " };
        let _ = write!(self.out, "{indent}return 3;\n    }}\n    return 0;\n}}\n");
    }
}

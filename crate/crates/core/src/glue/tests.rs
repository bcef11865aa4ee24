use super::*;
use crate::cdl::{confirm_all, draft_descriptor, AuthorAnswers, ComponentDescriptor, DescriptorMeta, Value, Version};
use crate::extract::Extractor;

fn descriptor(profile: &str, src: &str, answers: impl FnOnce(&mut AuthorAnswers)) -> ComponentDescriptor {
    let m = Extractor::builtin(profile).unwrap().extract("t", src).unwrap();
    let mut a = confirm_all(&m);
    answers(&mut a);
    let meta = DescriptorMeta {
        name: "mymath".into(),
        version: Version::new(1, 0, 0),
        author: String::new(),
        license: String::new(),
        open_source: true,
    };
    draft_descriptor(&m, &a, &meta).unwrap()
}

const ADD: &str = "double add(double a, double b) { return a + b; }\n";

#[test]
fn add_plan_shape() {
    let plan = plan_glue(&descriptor("c_subset", ADD, |_| {})).unwrap();
    assert_eq!(plan.slots.len(), 0);
    assert_eq!(plan.trampolines.len(), 1);
    assert_eq!(plan.packs.len(), 0);
    assert_eq!(plan.link_entry, "cmdi_mymath_1_link");
    assert_eq!(plan.mangling["add"], "cmdi_mymath_1_add");
}

#[test]
fn uses_port_gets_a_slot_and_an_obligation() {
    let src = "extern double rng(int k);\ndouble f(void) { return rng(1); }\n";
    let plan = plan_glue(&descriptor("c_subset", src, |_| {})).unwrap();
    assert_eq!(plan.slots.len(), 1);
    assert_eq!(plan.slots[0].id, "rng");
    assert_eq!(plan.obligations, [Obligation { port: "rng".into(), param: "k".into() }]);
}

#[test]
fn typedef_gets_a_pack_spec() {
    let src = "typedef struct { double x; double y; } point;\ndouble norm(point p) { return p.x; }\n";
    let plan = plan_glue(&descriptor("c_subset", src, |_| {})).unwrap();
    assert_eq!(plan.packs.len(), 1);
    assert_eq!(plan.packs[0].fields.len(), 2);
    assert_eq!(plan.trampolines[0].aggregates, [(0, "point".to_string())]);
}

#[test]
fn defaults_become_trampoline_defaults() {
    let d = descriptor("c_subset", ADD, |a| {
        a.defaults.insert(("add".into(), "b".into()), "1.0".into());
    });
    let plan = plan_glue(&d).unwrap();
    let t = &plan.trampolines[0];
    assert_eq!(t.defaults, [(1, Value::Float(1.0))]);
    assert_eq!(t.min_args(), 1);
    let glue = emit_glue(&plan).glue_source;
    assert!(glue.contains("double a1 = 1.0;"));
    assert!(glue.contains("if (argc < 1 || argc > 2)"));
}

#[test]
fn exactly_one_link_entry() {
    let art = emit_glue(&plan_glue(&descriptor("c_subset", ADD, |_| {})).unwrap());
    assert_eq!(art.glue_source.matches("_link(").count(), 1);
    assert_eq!(art.glue_file, "mymath_glue.c");
    assert_eq!(art.wiring_file, "mymath_wiring.xml");
}

#[test]
fn one_static_slot_per_uses_port() {
    let src = "extern double rng(void);\nextern void seed(int s);\ndouble f(void) { seed(1); return rng(); }\n";
    let art = emit_glue(&plan_glue(&descriptor("c_subset", src, |_| {})).unwrap());
    let slots = art.glue_source.lines().filter(|l| l.starts_with("static cmdi_entry ")).count();
    assert_eq!(slots, 2);
    assert!(art.glue_source.contains("double rng(void)\n{"));
}

#[test]
fn emission_is_deterministic() {
    let d = descriptor("c_subset", ADD, |_| {});
    assert_eq!(emit_glue(&plan_glue(&d).unwrap()), emit_glue(&plan_glue(&d).unwrap()));
}

#[test]
fn fortran_calls_by_reference() {
    let src = "      SUBROUTINE SCALE(X, F)\n      REAL X\n      DOUBLE PRECISION F\n      X = X * F\n      END\n";
    let plan = plan_glue(&descriptor("fortran77", src, |_| {})).unwrap();
    assert_eq!(plan.trampolines[0].symbol, "scale_");
    let glue = emit_glue(&plan).glue_source;
    assert!(glue.contains("extern void scale_(float *, double *);"));
    assert!(glue.contains("scale_(&a0, &a1);"));
}

#[test]
fn port_named_link_collides_with_the_link_entry() {
    let d = descriptor("c_subset", "int link(int a) { return a; }\n", |_| {});
    assert!(matches!(plan_glue(&d), Err(GlueError::Collision(_))));
}

#[test]
fn remote_ports_get_layouts() {
    let d = descriptor("c_subset", ADD, |a| {
        a.remote.insert("add".into());
    });
    let plan = plan_glue(&d).unwrap();
    assert_eq!(plan.remote[0].request.size(), 16);
    let xml = wiring_to_xml(&plan).to_document();
    assert!(xml.contains("requestBytes=\"16\" responseBytes=\"8\""));
}

#[test]
fn invalid_descriptors_are_refused() {
    let mut d = descriptor("c_subset", ADD, |_| {});
    d.provides[0].global_name = "wrong".into();
    assert!(matches!(plan_glue(&d), Err(GlueError::Invalid(_))));
}

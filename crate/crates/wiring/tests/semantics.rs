//! The sample projects run on the mock backend.

mod common;

use comodi_core::cdl::Value;
use comodi_wiring::{
    bind, check_mocks, run, validate_project, ExecutionReport, MockBackend, ParamOverride, PortRef, RunError,
};

fn execute(name: &str) -> ExecutionReport {
    let (p, d, m) = common::load(name);
    let plan = bind(&p, &d).unwrap();
    assert!(check_mocks(&m, &plan, &d).is_empty(), "{:?}", check_mocks(&m, &plan, &d));
    run(&plan, &d, &mut MockBackend::new(m), &[]).unwrap()
}

fn assert_linked_once(r: &ExecutionReport) {
    assert!(r.link_calls.values().all(|&n| n == 1), "{:?}", r.link_calls);
    assert_eq!(r.runtime_wiring_calls, 0);
}

#[test]
fn pipeline() {
    let (p, d, _) = common::load("pipeline");
    let plan = bind(&p, &d).unwrap();
    let mid = plan.instance("mid").unwrap();
    assert_eq!(mid.param_string.to_string(), "up=src.cmdi_source_1_f");
    assert_eq!(plan.link_order, ["src", "mid", "out"]);

    let r = execute("pipeline");
    assert_eq!(r.value, Some(Value::Float(7.0)));
    assert_eq!(r.link_calls.len(), 3);
    assert_linked_once(&r);
    assert_eq!(r.calls["src.f"], 1);
}

#[test]
fn diamond() {
    let (p, d, _) = common::load("diamond");
    let plan = bind(&p, &d).unwrap();
    assert_eq!(plan.instance("d").unwrap().param_string.bindings.len(), 2);
    assert_eq!(plan.link_order.first().map(String::as_str), Some("a"));
    assert_eq!(plan.link_order.last().map(String::as_str), Some("d"));

    let r = execute("diamond");
    // (5 * 2) + (5 + 1)
    assert_eq!(r.value, Some(Value::Float(16.0)));
    assert_eq!(r.calls["a.f"], 2);
    assert_linked_once(&r);
}

#[test]
fn default_arity() {
    let r = execute("defaults");
    assert_eq!(r.value, Some(Value::Float(3.0)));
    assert_linked_once(&r);

    let (mut p, d, m) = common::load("defaults");
    p.overrides.push(ParamOverride {
        port: PortRef::new("sum", "add"),
        name: "b".into(),
        value: "10".into(),
    });
    let plan = bind(&p, &d).unwrap();
    let r = run(&plan, &d, &mut MockBackend::new(m), &[]).unwrap();
    assert_eq!(r.value, Some(Value::Float(12.0)));
}

#[test]
fn self_loop() {
    let (p, d, _) = common::load("selfloop");
    let plan = bind(&p, &d).unwrap();
    assert_eq!(plan.instance("ctr").unwrap().param_string.to_string(), "again=ctr.cmdi_counter_1_count");

    let r = execute("selfloop");
    assert_eq!(r.value, Some(Value::Int(5)));
    assert_eq!(r.calls["ctr.count"], 6);
    assert_linked_once(&r);
}

#[test]
fn depth_limit_is_a_fault() {
    let (p, d, m) = common::load("selfloop");
    let plan = bind(&p, &d).unwrap();
    let deep = run(&plan, &d, &mut MockBackend::new(m.clone()), &[Value::Int(9_000)]).unwrap();
    assert_eq!(deep.value, Some(Value::Int(9_000)));
    let err = run(&plan, &d, &mut MockBackend::new(m.clone()), &[Value::Int(20_000)]).unwrap_err();
    assert!(matches!(err, RunError::Fault { ref instance, ref message, .. } if instance == "ctr" && message.contains("depth")));
    let err = run(&plan, &d, &mut MockBackend::new(m).with_depth_limit(3), &[]).unwrap_err();
    assert!(matches!(err, RunError::Fault { .. }));
}

#[test]
fn division_by_zero_names_the_port() {
    let (p, d, mut m) = common::load("pipeline");
    m.insert(PortRef::new("mid", "g"), "call(up) / (2.0 - 2.0)").unwrap();
    let plan = bind(&p, &d).unwrap();
    let err = run(&plan, &d, &mut MockBackend::new(m), &[]).unwrap_err();
    assert_eq!(err.to_string(), "fault in mid.g: division by zero");
}

#[test]
fn missing_mock() {
    let (p, d, mut m) = common::load("pipeline");
    m.ports.remove(&PortRef::new("src", "f"));
    let plan = bind(&p, &d).unwrap();
    assert!(check_mocks(&m, &plan, &d).iter().any(|x| x.code == "MissingMock"));
    let err = run(&plan, &d, &mut MockBackend::new(m), &[]).unwrap_err();
    assert_eq!(err, RunError::MissingMock(PortRef::new("src", "f")));
}

#[test]
fn unbound_and_arity_errors() {
    let (p, d, _) = common::load("unbound");
    let diags = validate_project(&p, &d);
    assert!(diags.iter().any(|x| x.code == "UnboundUsesPort" && x.is_error() && x.path == "mid.up"), "{diags:?}");
    assert!(bind(&p, &d).is_err());

    let (p, d, _) = common::load("arity");
    let diags = validate_project(&p, &d);
    assert!(diags.iter().any(|x| x.code == "ArityMismatch" && x.path == "one.g1"), "{diags:?}");
}

#[test]
fn defaulted_unbound_port_is_only_a_fault_when_called() {
    let (mut p, mut d, mut m) = common::load("unbound");
    let mid = d.get_mut("mid").unwrap();
    mid.uses[0].params[0].default = Some("1.0".into());
    let diags = validate_project(&p, &d);
    assert!(diags.iter().all(|x| !x.is_error()), "{diags:?}");
    let plan = bind(&p, &d).unwrap();
    let err = run(&plan, &d, &mut MockBackend::new(m.clone()), &[]).unwrap_err();
    assert!(matches!(err, RunError::Fault { ref message, .. } if message.contains("not connected")));

    m.insert(PortRef::new("mid", "g"), "4.0").unwrap();
    p.entry = PortRef::new("mid", "g");
    let r = run(&bind(&p, &d).unwrap(), &d, &mut MockBackend::new(m), &[]).unwrap();
    assert_eq!(r.value, Some(Value::Float(4.0)));
}

#[test]
fn type_mismatch_and_unknown_ports() {
    let (mut p, mut d, _) = common::load("pipeline");
    d.get_mut("src").unwrap().provides[0].return_type = "int".into();
    assert!(validate_project(&p, &d).iter().any(|x| x.code == "TypeMismatch"));
    let (_, d2, _) = common::load("pipeline");
    p.connections[0].to.port = "nope".into();
    assert!(validate_project(&p, &d2).iter().any(|x| x.code == "UnknownPort"));
}

#[test]
fn reports_are_deterministic() {
    assert_eq!(execute("diamond"), execute("diamond"));
}

#[test]
fn bound_projects_validate() {
    for name in ["pipeline", "diamond", "defaults", "selfloop"] {
        let (p, d, _) = common::load(name);
        if bind(&p, &d).is_ok() {
            assert!(validate_project(&p, &d).iter().all(|x| !x.is_error()), "{name}");
        }
    }
}

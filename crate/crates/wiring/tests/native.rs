//! Compiled components wired by their generated link entries.
#![cfg(feature = "native")]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use comodi_core::cdl::{confirm_all, draft_descriptor, ComponentDescriptor, DescriptorMeta, Value, Version};
use comodi_core::extract::Extractor;
use comodi_core::glue::{emit_glue, plan_glue};
use comodi_wiring::{bind, run, Backend, Connection, Descriptors, Instance, NativeBackend, PortRef, ProjectDescription, RunError};

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

/// Extracts, describes, glues and compiles one C source into a shared
/// object. `edit` stands in for the author's answers at the describe step.
fn build(dir: &Path, name: &str, source: &str, edit: impl FnOnce(&mut ComponentDescriptor)) -> (ComponentDescriptor, PathBuf) {
    let m = Extractor::builtin("c_subset").unwrap().extract(name, source).unwrap();
    let mut d = draft_descriptor(&m, &confirm_all(&m), &meta(name)).unwrap();
    edit(&mut d);
    let glue = emit_glue(&plan_glue(&d).unwrap());
    let src = dir.join(format!("{name}.c"));
    let glue_path = dir.join(&glue.glue_file);
    std::fs::write(&src, source).unwrap();
    std::fs::write(&glue_path, &glue.glue_source).unwrap();
    let so = dir.join(format!("lib{name}.so"));
    let out = Command::new("cc")
        .args(["-shared", "-fPIC", "-o"])
        .arg(&so)
        .arg(&src)
        .arg(&glue_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (d, so)
}

fn meta(name: &str) -> DescriptorMeta {
    DescriptorMeta {
        name: name.into(),
        version: Version::new(1, 0, 0),
        author: "test".into(),
        license: "MIT".into(),
        open_source: true,
    }
}

fn instance(id: &str, pkg: &str) -> Instance {
    Instance {
        id: id.into(),
        package: pkg.into(),
        version: Version::new(1, 0, 0),
    }
}

#[test]
fn pipeline_links_once_and_runs() {
    if !have_cc() {
        eprintln!("skipped: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let (mid_d, mid_so) = build(
        dir.path(),
        "scaler",
        "extern double up(double x);\n/** Scales the upstream value. */\ndouble g(double x) { return up(x) * 3.0; }\n",
        |_| {},
    );
    // The one-argument uses port reaches the two-argument add through b's default.
    let (add_d, add_so) = build(dir.path(), "adder", "double add(double a, double b) { return a + b; }\n", |d| {
        d.provides[0].params[1].default = Some("1.0".into());
    });

    let p = ProjectDescription {
        instances: vec![instance("mid", "scaler"), instance("sum", "adder")],
        connections: vec![Connection {
            from: PortRef::new("mid", "up"),
            to: PortRef::new("sum", "add"),
        }],
        overrides: Vec::new(),
        entry: PortRef::new("mid", "g"),
    };
    let d: Descriptors = [("mid".to_string(), mid_d), ("sum".to_string(), add_d)].into();
    let plan = bind(&p, &d).unwrap();
    let binaries: BTreeMap<String, PathBuf> = [("mid".to_string(), mid_so), ("sum".to_string(), add_so)].into();

    let mut backend = NativeBackend::new(binaries.clone()).unwrap();
    let r = run(&plan, &d, &mut backend, &[Value::Float(4.0)]).unwrap();
    // (4 + 1) * 3
    assert_eq!(r.value, Some(Value::Float(15.0)));
    assert!(r.link_calls.values().all(|&n| n == 1));
    assert_eq!(r.runtime_wiring_calls, 0);
    assert_eq!(backend.resolve_calls(), 1);

    // A second backend in the same process loads fresh copies with their own slots.
    let mut again = NativeBackend::new(binaries).unwrap();
    let r = run(&plan, &d, &mut again, &[Value::Float(1.0)]).unwrap();
    assert_eq!(r.value, Some(Value::Float(6.0)));
    let err = again.invoke(&PortRef::new("sum", "add"), &[]).unwrap_err();
    assert!(matches!(err, RunError::Fault { .. }));
}

#[test]
fn missing_binary_is_reported() {
    let p = ProjectDescription {
        instances: vec![instance("a", "source")],
        connections: Vec::new(),
        overrides: Vec::new(),
        entry: PortRef::new("a", "f"),
    };
    let m = Extractor::builtin("c_subset").unwrap().extract("s", "double f(void) { return 2.0; }\n").unwrap();
    let d: Descriptors = [("a".to_string(), draft_descriptor(&m, &confirm_all(&m), &meta("source")).unwrap())].into();
    let plan = bind(&p, &d).unwrap();
    let err = run(&plan, &d, &mut NativeBackend::new(BTreeMap::new()).unwrap(), &[]).unwrap_err();
    assert!(matches!(err, RunError::MissingBinary { ref instance, .. } if instance == "a"));
}

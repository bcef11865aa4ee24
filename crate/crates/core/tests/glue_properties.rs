use proptest::prelude::*;

use comodi_core::cdl::Value;
use comodi_core::extract::TypeDefInfo;
use comodi_core::glue::{mangle_name, parse_param_string, render_param_string, Binding, PackSpec, ParamString};

fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,8}"
}

fn param_string() -> impl Strategy<Value = ParamString> {
    proptest::collection::btree_map(ident(), ("[A-Za-z0-9-]{1,6}", ident()), 0..6).prop_map(|m| ParamString {
        bindings: m
            .into_iter()
            .map(|(uses_port, (instance, target_global))| Binding {
                uses_port,
                instance,
                target_global,
            })
            .collect(),
    })
}

/// Component names whose `-`/`.`-separated segments are never all digits,
/// so the major version is the first numeric segment of the mangled name.
fn component() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9]{0,3}([-.][A-Za-z][A-Za-z0-9]{0,2}){0,2}"
}

fn folded(c: &str) -> String {
    c.to_ascii_lowercase().replace(['-', '.'], "_")
}

fn types() -> Vec<TypeDefInfo> {
    vec![
        TypeDefInfo {
            name: "sample".into(),
            fields: vec![("t".into(), "double".into()), ("n".into(), "int".into()), ("tag".into(), "char".into())],
        },
        TypeDefInfo {
            name: "pair".into(),
            fields: vec![("a".into(), "sample".into()), ("b".into(), "sample".into()), ("w".into(), "float".into())],
        },
    ]
}

fn value_of(type_name: &str) -> BoxedStrategy<Value> {
    match type_name {
        "int" => any::<i32>().prop_map(|i| Value::Int(i.into())).boxed(),
        "char" => (32u8..127).prop_map(Value::Char).boxed(),
        "float" => any::<f32>().prop_filter("finite", |f| f.is_finite()).prop_map(|f| Value::Float(f.into())).boxed(),
        _ => any::<f64>().prop_filter("finite", |f| f.is_finite()).prop_map(Value::Float).boxed(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn param_string_round_trip(p in param_string()) {
        let text = render_param_string(&p);
        prop_assert_eq!(parse_param_string(&text).unwrap(), p);
    }

    #[test]
    fn mangling_is_injective_on_folded_triples(
        a in (component(), 0u64..20, ident()),
        b in (component(), 0u64..20, ident()),
    ) {
        let same_input = (folded(&a.0), a.1, &a.2) == (folded(&b.0), b.1, &b.2);
        prop_assert_eq!(mangle_name(&a.0, a.1, &a.2) == mangle_name(&b.0, b.1, &b.2), same_input);
    }

    #[test]
    fn unpack_then_pack_is_identity(values in {
        let spec = PackSpec::new("pair", &types()).unwrap();
        spec.fields.iter().map(|f| value_of(&f.type_name)).collect::<Vec<_>>()
    }) {
        let spec = PackSpec::new("pair", &types()).unwrap();
        let datum = spec.unpack(&values).unwrap();
        prop_assert_eq!(spec.pack(&datum).unwrap(), values.clone());
        prop_assert_eq!(spec.unpack(&spec.pack(&datum).unwrap()).unwrap(), datum);
    }
}

//! Local to global symbol names.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("global name {global} is produced by both {first} and {second}")]
pub struct Collision {
    pub global: String,
    pub first: String,
    pub second: String,
}

/// `cmdi_<component>_<major>_<local>` with the component name lower-cased and
/// `-`/`.` folded to `_`. The local name is kept as written.
pub fn mangle_name(component: &str, major: u64, local: &str) -> String {
    let folded: String = component
        .chars()
        .map(|c| match c {
            '-' | '.' => '_',
            c => c.to_ascii_lowercase(),
        })
        .collect();
    format!("cmdi_{folded}_{major}_{local}")
}

/// Global names handed out so far, with the triple that produced each.
#[derive(Debug, Default, Clone)]
pub struct NameRegistry {
    names: BTreeMap<String, (String, u64, String)>,
}

impl NameRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Mangles and records a triple. Registering the same triple twice is
    /// fine; two different triples mapping to one name is a collision.
    pub fn insert(&mut self, component: &str, major: u64, local: &str) -> Result<String, Collision> {
        let global = mangle_name(component, major, local);
        let triple = (component.to_string(), major, local.to_string());
        match self.names.get(&global) {
            Some(existing) if *existing != triple => Err(Collision {
                global,
                first: describe(existing),
                second: describe(&triple),
            }),
            Some(_) => Ok(global),
            None => {
                self.names.insert(global.clone(), triple);
                Ok(global)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

fn describe((c, v, l): &(String, u64, String)) -> String {
    format!("{c}/{v}/{l}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(mangle_name("mymath", 1, "add"), "cmdi_mymath_1_add");
        assert_eq!(mangle_name("fft-lib", 2, "plan"), "cmdi_fft_lib_2_plan");
    }

    #[test]
    fn case_folding_collides() {
        let mut reg = NameRegistry::new();
        reg.insert("A", 1, "f").unwrap();
        let err = reg.insert("a", 1, "f").unwrap_err();
        assert_eq!(err.global, "cmdi_a_1_f");
        assert_eq!(reg.insert("A", 1, "f").unwrap(), "cmdi_a_1_f");
    }
}

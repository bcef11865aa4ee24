//! Runs compiled components: one shared object per instance, loaded with
//! the host's dynamic loader and wired through the generated link entries.
//!
//! Each instance gets its own copy of its shared object so that two
//! instances of one component do not share slots. Calls between components
//! go straight through the slots; only calls made by the framework itself
//! are counted.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::ffi::{c_char, c_int, CStr, CString};
use std::path::PathBuf;

use comodi_core::cdl::{ComponentDescriptor, Value};
use libloading::Library;

use crate::bind::InstancePlan;
use crate::project::PortRef;
use crate::run::{Backend, RunError};

#[repr(C)]
#[derive(Clone, Copy)]
union CmdiValue {
    i: i64,
    f: f64,
    c: c_char,
}

type Entry = unsafe extern "C" fn(c_int, *const CmdiValue, *mut CmdiValue) -> c_int;
type Resolver = unsafe extern "C" fn(*const c_char, *const c_char) -> Option<Entry>;
type LinkEntry = unsafe extern "C" fn(*const c_char, Resolver) -> c_int;

thread_local! {
    /// What `resolve` can hand out while a link entry runs on this thread.
    static TABLE: RefCell<BTreeMap<(String, String), Entry>> = const { RefCell::new(BTreeMap::new()) };
    static RESOLVES: RefCell<usize> = const { RefCell::new(0) };
}

unsafe extern "C" fn resolve(instance: *const c_char, global: *const c_char) -> Option<Entry> {
    RESOLVES.with(|n| *n.borrow_mut() += 1);
    if instance.is_null() || global.is_null() {
        return None;
    }
    // SAFETY: the glue passes NUL-terminated buffers it owns for the call.
    let (i, g) = unsafe { (CStr::from_ptr(instance), CStr::from_ptr(global)) };
    let key = (i.to_string_lossy().into_owned(), g.to_string_lossy().into_owned());
    TABLE.with(|t| t.borrow().get(&key).copied())
}

struct Loaded {
    plan: InstancePlan,
    entries: BTreeMap<String, Entry>,
    link: LinkEntry,
    // Dropped after the entry pointers above stop being used.
    _lib: Library,
}

pub struct NativeBackend {
    binaries: BTreeMap<String, PathBuf>,
    scratch: tempfile::TempDir,
    loaded: BTreeMap<String, Loaded>,
    linked: BTreeSet<String>,
    calls: BTreeMap<String, usize>,
    resolves_at_start: usize,
}

impl NativeBackend {
    /// `binaries` maps instance ids to the shared object built for this
    /// platform.
    pub fn new(binaries: BTreeMap<String, PathBuf>) -> Result<Self, RunError> {
        Ok(NativeBackend {
            binaries,
            scratch: tempfile::tempdir().map_err(|e| RunError::Unsupported(format!("scratch directory: {e}")))?,
            loaded: BTreeMap::new(),
            linked: BTreeSet::new(),
            calls: BTreeMap::new(),
            resolves_at_start: RESOLVES.with(|n| *n.borrow()),
        })
    }
}

fn load_err(instance: &str, message: impl Into<String>) -> RunError {
    RunError::Load {
        instance: instance.to_string(),
        message: message.into(),
    }
}

impl Backend for NativeBackend {
    fn name(&self) -> &'static str {
        "native"
    }

    fn load(&mut self, plan: &InstancePlan, descriptor: &ComponentDescriptor) -> Result<(), RunError> {
        let id = &plan.id;
        if plan.provides != descriptor.provides {
            return Err(RunError::Unsupported(format!(
                "{id}: parameter overrides are compiled into native glue; run with the mock backend"
            )));
        }
        let src = self.binaries.get(id).ok_or_else(|| RunError::MissingBinary {
            instance: id.clone(),
            platform: descriptor.platforms.join(","),
        })?;
        let copy = self.scratch.path().join(format!("{id}.so"));
        std::fs::copy(src, &copy).map_err(|e| load_err(id, format!("{}: {e}", src.display())))?;
        // SAFETY: loading runs the object's initialisers; the toolchain's
        // own glue has none, and the author code is what the user asked to run.
        let lib = unsafe { Library::new(&copy) }.map_err(|e| load_err(id, e.to_string()))?;
        let mut entries = BTreeMap::new();
        for port in &plan.provides {
            // SAFETY: every trampoline in the glue has the `Entry` signature.
            let f: Entry = unsafe { lib.get::<Entry>(port.global_name.as_bytes()) }
                .map(|s| *s)
                .map_err(|e| load_err(id, format!("{}: {e}", port.global_name)))?;
            entries.insert(port.global_name.clone(), f);
        }
        // SAFETY: the link entry is emitted with the `LinkEntry` signature.
        let link = unsafe { lib.get::<LinkEntry>(plan.link_entry.as_bytes()) }
            .map(|s| *s)
            .map_err(|e| load_err(id, format!("{}: {e}", plan.link_entry)))?;
        self.loaded.insert(
            id.clone(),
            Loaded {
                plan: plan.clone(),
                entries,
                link,
                _lib: lib,
            },
        );
        Ok(())
    }

    fn link(&mut self, instance: &str, param_string: &str) -> Result<(), RunError> {
        let link_err = |message: String| RunError::Link {
            instance: instance.to_string(),
            message,
        };
        let table: BTreeMap<(String, String), Entry> = self
            .loaded
            .iter()
            .flat_map(|(id, l)| l.entries.iter().map(move |(g, f)| ((id.clone(), g.clone()), *f)))
            .collect();
        let loaded = self.loaded.get(instance).ok_or_else(|| link_err("not loaded".into()))?;
        let params = CString::new(param_string).map_err(|_| link_err("param string contains NUL".into()))?;
        TABLE.with(|t| *t.borrow_mut() = table);
        // SAFETY: `params` outlives the call and `resolve` matches `Resolver`.
        let rc = unsafe { (loaded.link)(params.as_ptr(), resolve) };
        TABLE.with(|t| t.borrow_mut().clear());
        match rc {
            0 => {
                self.linked.insert(instance.to_string());
                Ok(())
            }
            1 => Err(link_err("param string syntax error".into())),
            2 => Err(link_err("a binding did not resolve".into())),
            3 => Err(link_err("binding names an unknown uses port".into())),
            n => Err(link_err(format!("link entry returned {n}"))),
        }
    }

    fn invoke(&mut self, at: &PortRef, args: &[Value]) -> Result<Option<Value>, RunError> {
        if !self.linked.contains(&at.instance) {
            return Err(RunError::NotLinked(at.instance.clone()));
        }
        let loaded = &self.loaded[&at.instance];
        let port = loaded
            .plan
            .port(&at.port)
            .ok_or_else(|| RunError::fault(at, "no such provides port"))?;
        if args.len() > port.arity() {
            return Err(RunError::fault(at, format!("{} arguments for arity {}", args.len(), port.arity())));
        }
        let mut argv = Vec::with_capacity(args.len().max(1));
        for (v, q) in args.iter().zip(&port.params) {
            let v = v
                .coerce(&q.type_name)
                .ok_or_else(|| RunError::Unsupported(format!("{at}: native calls take primitive arguments only")))?;
            argv.push(match v {
                Value::Int(i) => CmdiValue { i },
                Value::Float(f) => CmdiValue { f },
                Value::Char(c) => CmdiValue { c: c as c_char },
            });
        }
        if argv.is_empty() {
            argv.push(CmdiValue { i: 0 });
        }
        let ret = port.return_type.as_str();
        if !matches!(ret, "void" | "int" | "long" | "float" | "double" | "char") {
            return Err(RunError::Unsupported(format!("{at}: native calls return primitives only")));
        }
        let entry = loaded.entries[&port.global_name];
        let mut result = [CmdiValue { i: 0 }];
        *self.calls.entry(at.to_string()).or_default() += 1;
        // SAFETY: argv holds one value per primitive argument and result has
        // room for the primitive return value.
        let rc = unsafe { entry(args.len() as c_int, argv.as_ptr(), result.as_mut_ptr()) };
        if rc != 0 {
            return Err(RunError::fault(
                at,
                format!("glue rejected the call ({} arguments, needs at least {})", args.len(), port.required_arity()),
            ));
        }
        // SAFETY: the trampoline wrote the member that matches the return type.
        let v = unsafe {
            match ret {
                "void" => return Ok(None),
                "int" | "long" => Value::Int(result[0].i),
                "float" | "double" => Value::Float(result[0].f),
                _ => Value::Char(result[0].c as u8),
            }
        };
        Ok(v.coerce(ret))
    }

    fn call_counts(&self) -> BTreeMap<String, usize> {
        self.calls.clone()
    }

    fn resolve_calls(&self) -> usize {
        RESOLVES.with(|n| *n.borrow()) - self.resolves_at_start
    }
}

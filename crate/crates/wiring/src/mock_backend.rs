//! Runs mock expressions in place of compiled components.

use std::collections::{BTreeMap, BTreeSet};

use comodi_core::cdl::{ComponentDescriptor, PortSpec, Value};
use comodi_core::glue::parse_param_string;

use crate::bind::InstancePlan;
use crate::mock::{BinOp, Expr, MockImplementations};
use crate::project::PortRef;
use crate::run::{Backend, RunError};

pub const DEFAULT_DEPTH_LIMIT: usize = 10_000;

/// Deep recursion between mocks runs on a thread with this much stack.
const EVAL_STACK: usize = 512 << 20;

struct Loaded {
    plan: InstancePlan,
    uses: BTreeMap<String, PortSpec>,
    /// Uses port → the provides port it reaches, filled by link.
    slots: BTreeMap<String, PortRef>,
}

pub struct MockBackend {
    mocks: MockImplementations,
    depth_limit: usize,
    loaded: BTreeMap<String, Loaded>,
    linked: BTreeSet<String>,
    calls: BTreeMap<String, usize>,
    resolves: usize,
}

impl MockBackend {
    pub fn new(mocks: MockImplementations) -> Self {
        MockBackend {
            mocks,
            depth_limit: DEFAULT_DEPTH_LIMIT,
            loaded: BTreeMap::new(),
            linked: BTreeSet::new(),
            calls: BTreeMap::new(),
            resolves: 0,
        }
    }

    pub fn with_depth_limit(mut self, limit: usize) -> Self {
        self.depth_limit = limit;
        self
    }

    fn resolve(&mut self, instance: &str, global: &str) -> Option<PortRef> {
        self.resolves += 1;
        let port = self.loaded.get(instance)?.plan.port_by_global(global)?;
        Some(PortRef::new(instance, &port.local_name))
    }

    fn call_port(&mut self, at: &PortRef, args: &[Value], depth: usize) -> Result<Option<Value>, RunError> {
        if !self.linked.contains(&at.instance) {
            return Err(RunError::NotLinked(at.instance.clone()));
        }
        if depth > self.depth_limit {
            return Err(RunError::fault(at, format!("call depth exceeds {}", self.depth_limit)));
        }
        let inst = &self.loaded[&at.instance].plan;
        let port = inst
            .port(&at.port)
            .ok_or_else(|| RunError::fault(at, "no such provides port"))?
            .clone();
        let full = inst.fill_defaults(&at.port, args).ok_or_else(|| {
            RunError::fault(
                at,
                format!("called with {} arguments; needs {} to {}", args.len(), port.required_arity(), port.arity()),
            )
        })?;
        let values: Vec<f64> = full
            .iter()
            .zip(&port.params)
            .map(|(v, q)| v.coerce(&q.type_name).map(Value::as_f64))
            .collect::<Option<_>>()
            .ok_or_else(|| RunError::fault(at, "parameter of a non-primitive type"))?;
        *self.calls.entry(at.to_string()).or_default() += 1;
        let expr = self.mocks.get(at).ok_or_else(|| RunError::MissingMock(at.clone()))?.clone();
        let r = self.eval(at, &port, &expr, &values, depth)?;
        if port.return_type == "void" {
            return Ok(None);
        }
        Value::Float(r)
            .coerce(&port.return_type)
            .map(Some)
            .ok_or_else(|| RunError::fault(at, format!("cannot return a {}", port.return_type)))
    }

    fn eval(&mut self, at: &PortRef, port: &PortSpec, e: &Expr, args: &[f64], depth: usize) -> Result<f64, RunError> {
        Ok(match e {
            Expr::Num(v) => *v,
            Expr::Param(name) => {
                let i = port
                    .params
                    .iter()
                    .position(|q| &q.name == name)
                    .ok_or_else(|| RunError::fault(at, format!("unknown parameter {name}")))?;
                args[i]
            }
            Expr::Neg(x) => -self.eval(at, port, x, args, depth)?,
            Expr::Bin(op, a, b) => {
                let a = self.eval(at, port, a, args, depth)?;
                let b = self.eval(at, port, b, args, depth)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(RunError::fault(at, "division by zero")),
                    BinOp::Div => a / b,
                }
            }
            Expr::If(c, a, b) => {
                if self.eval(at, port, c, args, depth)? != 0.0 {
                    self.eval(at, port, a, args, depth)?
                } else {
                    self.eval(at, port, b, args, depth)?
                }
            }
            Expr::Call(uses, exprs) => {
                let mut values = Vec::with_capacity(exprs.len());
                for x in exprs {
                    values.push(self.eval(at, port, x, args, depth)?);
                }
                let loaded = &self.loaded[&at.instance];
                let spec = loaded
                    .uses
                    .get(uses)
                    .ok_or_else(|| RunError::fault(at, format!("{uses} is not a uses port")))?;
                // The caller's stub passes every declared argument.
                let mut full = Vec::with_capacity(spec.arity());
                for (i, q) in spec.params.iter().enumerate() {
                    let v = match values.get(i) {
                        Some(v) => Value::Float(*v),
                        None => spec
                            .param_default(i)
                            .ok_or_else(|| RunError::fault(at, format!("call({uses}) lacks argument {}", q.name)))?,
                    };
                    full.push(v.coerce(&q.type_name).ok_or_else(|| RunError::fault(at, "non-primitive argument"))?);
                }
                let target = loaded
                    .slots
                    .get(uses)
                    .cloned()
                    .ok_or_else(|| RunError::fault(at, format!("uses port {uses} is not connected")))?;
                self.call_port(&target, &full, depth + 1)?.map_or(0.0, Value::as_f64)
            }
        })
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &'static str {
        "mock"
    }

    fn load(&mut self, plan: &InstancePlan, descriptor: &ComponentDescriptor) -> Result<(), RunError> {
        for port in &plan.provides {
            let at = PortRef::new(&plan.id, &port.local_name);
            if self.mocks.get(&at).is_none() {
                return Err(RunError::MissingMock(at));
            }
        }
        self.loaded.insert(
            plan.id.clone(),
            Loaded {
                plan: plan.clone(),
                uses: descriptor.uses.iter().map(|u| (u.local_name.clone(), u.clone())).collect(),
                slots: BTreeMap::new(),
            },
        );
        Ok(())
    }

    /// Mirrors the generated link entry: parse, resolve each binding, fill
    /// the slot.
    fn link(&mut self, instance: &str, param_string: &str) -> Result<(), RunError> {
        let link_err = |message: String| RunError::Link {
            instance: instance.to_string(),
            message,
        };
        let ps = parse_param_string(param_string).map_err(|e| link_err(e.to_string()))?;
        let mut slots = BTreeMap::new();
        for b in &ps.bindings {
            let target = self
                .resolve(&b.instance, &b.target_global)
                .ok_or_else(|| link_err(format!("cannot resolve {}.{}", b.instance, b.target_global)))?;
            if !self.loaded[instance].uses.contains_key(&b.uses_port) {
                return Err(link_err(format!("unknown uses port {}", b.uses_port)));
            }
            slots.insert(b.uses_port.clone(), target);
        }
        let loaded = self.loaded.get_mut(instance).ok_or_else(|| link_err("not loaded".into()))?;
        loaded.slots = slots;
        self.linked.insert(instance.to_string());
        Ok(())
    }

    fn invoke(&mut self, at: &PortRef, args: &[Value]) -> Result<Option<Value>, RunError> {
        std::thread::scope(|s| {
            std::thread::Builder::new()
                .stack_size(EVAL_STACK)
                .spawn_scoped(s, || self.call_port(at, args, 0))
                .map_err(|e| RunError::Unsupported(format!("cannot start evaluator: {e}")))?
                .join()
                .unwrap_or_else(|p| std::panic::resume_unwind(p))
        })
    }

    fn call_counts(&self) -> BTreeMap<String, usize> {
        self.calls.clone()
    }

    fn resolve_calls(&self) -> usize {
        self.resolves
    }
}

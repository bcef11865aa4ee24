//! The user side of the toolchain: project files describing an assembly of
//! components, checks against the components' descriptors, binding, and
//! execution on a mock or native backend.

pub mod bind;
pub mod mock;
pub mod mock_backend;
#[cfg(feature = "native")]
pub mod native;
pub mod project;
pub mod run;
pub mod validate;

pub use bind::{bind, InstancePlan, WiringPlan};
pub use mock::{check_mocks, load_mocks, parse_expr, Expr, MockImplementations};
pub use mock_backend::{MockBackend, DEFAULT_DEPTH_LIMIT};
#[cfg(feature = "native")]
pub use native::NativeBackend;
pub use project::{load_project, project_to_string, Connection, Instance, ParamOverride, PortRef, ProjectDescription};
pub use run::{run, Backend, ExecutionReport, RunError};
pub use validate::{descriptors_from_dir, effective_port, validate_project, Descriptors};

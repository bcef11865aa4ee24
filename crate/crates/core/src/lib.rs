//! Developer-side toolchain for turning C and Fortran routines into wired
//! components: grammar-driven parsing, interface extraction, component
//! descriptors and glue generation.

pub mod automata;
pub mod cdl;
pub mod diag;
pub mod ebnf;
pub mod extract;
pub mod glue;
pub mod xml;

pub use diag::{Diagnostic, Severity};

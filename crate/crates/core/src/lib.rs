//! Executable axiomatic quantum specifications.
//!
//! The pipeline is `speclang` (parse `.fqz` sources) → `checker` (verify
//! observable, gate and program axioms) → `circuit` (compile and run) on top
//! of the `state` simulator, `gateset` definitions and `linalg` primitives.

pub mod checker;
pub mod circuit;
pub mod cli;
pub mod gateset;
pub mod linalg;
pub mod speclang;
pub mod state;

//! Quantum channels with prescribed noncommutative graphs.
//!
//! The crate constructs channels in Kraus form whose noncommutative graph
//! equals a given operator subspace, certifies zero-error quantum codes,
//! searches for violation witnesses over products of unit spheres, and
//! exposes the equivalent quantum-measurement (POVM) formulation. End-to-end
//! reproduction pipelines live in [`superact`] and are also reachable through
//! the `zerograph` CLI.

pub mod error;
pub mod tol;

pub mod opalg;

pub mod channel;
pub mod graphcap;
pub mod povm;
pub mod sampling;
pub mod superact;

pub use error::{Error, Result};

//! Expansion invariants of finite measured graphs.
//!
//! A measured graph is a finite simple graph together with a nonnegative
//! rational measure on its vertices. This crate computes, exactly where
//! possible:
//!
//! * vertex-measured and conductance Cheeger constants by exhaustive subset
//!   enumeration ([`cheeger`]),
//! * spectral gaps of the random-walk Laplacian and of the measured
//!   Laplacian pencil ([`spectral`]),
//! * Lp-Poincare energies and constants ([`poincare`]),
//!
//! and checks the inequalities relating them ([`theorems`]). Graph and
//! measure families, including the product and perturbation constructions
//! and the generalised-expander certificate, live in [`families`].

pub mod cheeger;
pub mod error;
pub mod families;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod poincare;
pub mod rational;
pub mod spectral;
pub mod theorems;
pub mod walk;

pub use cheeger::{CheegerCertificate, CheegerFlavor, EnumerationConfig};
pub use error::{Error, Result};
pub use graph::{GraphStats, MeasuredGraph, VertexSubset};
pub use rational::Rational;
pub use spectral::{OperatorKind, SelfAdjointOperator, SpectralResult};
pub use walk::ReversibleWalk;

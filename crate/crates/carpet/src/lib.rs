//! Finite-level approximants of thin Loewner carpets.
//!
//! The crate builds the levels `G_0, G_1, ...` of a quotiented inverse system
//! from four substitution rules (Basic, `S_N`, `WS_N`, `C_N`), draws every level
//! into an integer lattice, and checks the finitely checkable properties of the
//! construction: admissibility of each step, corridor and planarity bounds of
//! the drawings, exact scale bookkeeping, Ahlfors and snowflake bands, discrete
//! modulus of curve families and the quasi-invariant `h_inf_bar`.
//!
//! ```
//! use loewner_carpet::{graph::build_seed, substitution::{apply_rule, Rule}};
//!
//! let seed = build_seed();
//! let step = apply_rule(&seed, Rule::Basic).unwrap();
//! assert_eq!(step.graph.edge_count(), 256);
//! ```

// `!(x > 0.0)` style guards reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod io;
pub mod planner;
pub mod rational;
pub mod substitution;

pub use error::{CarpetError, Result};
pub use graph::{build_seed, GraphPoint, MetricGraph};
pub use rational::{HValue, Rational};
pub use substitution::{apply_rule, Rule, Step};

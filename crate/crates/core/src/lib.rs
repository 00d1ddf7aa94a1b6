//! Numerical toolkit for fundamental pairs of quadratic forms on surfaces:
//! curvature invariants, Codazzi defects, Hopf differentials, the
//! Bryant-type transform of special Weingarten pairs and a generator of
//! rotational special Weingarten surfaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bryant;
pub mod chart;
pub mod cli;
pub mod codazzi;
pub mod error;
pub mod grid;
pub mod hopf;
pub mod pair;
pub mod quad;
pub mod rotgen;

pub use error::{GeomError, Result};

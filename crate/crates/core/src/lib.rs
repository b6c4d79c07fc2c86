//! Numerical toolkit for Dirichlet problems driven by fractional
//! G-Laplacian-type nonlocal operators.
//!
//! * [`nfunction`]: the N-function `G`, its derivative `g`, inverses and
//!   conjugate, with sampled checks of the structural inequalities.
//! * [`funcspace`]: lattices, grid functions, kernels, Gagliardo and
//!   Luxemburg quantities, and the nonlocal tail.
//! * [`solver`]: the discrete energy, its gradient, and a preconditioned
//!   descent solver for the Dirichlet problem.
//! * [`regularity`]: numerical instances of the local boundedness, Hölder
//!   decay, Caccioppoli, logarithmic and Sobolev–Poincaré estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod funcspace;
pub mod nfunction;
pub mod quad;
pub mod regularity;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
pub use nfunction::{GrowthFunction, NFunction};
pub use report::{EstimateReport, Tally};

//! Discrete fractional Orlicz–Sobolev quantities on a uniform lattice.

pub mod grid;
pub mod io;
pub mod kernel;
pub mod lattice;
pub mod modular;
pub mod tail;

pub use grid::{ExteriorModel, GridFunction};
pub use kernel::Kernel;
pub use lattice::{Ball, Lattice, Point, Region};
pub use modular::{gagliardo_modular, gagliardo_seminorm, luxemburg_norm, orlicz_modular};
pub use tail::{exterior_integral, membership_check, tail, weighted_integral, MembershipReport};

//! Numerical instances of the local regularity estimates: iteration lemma,
//! Sobolev–Poincaré, local boundedness, Caccioppoli, logarithmic and
//! oscillation decay.
//!
//! Every check is a deterministic single-threaded function of its inputs and
//! returns an [`EstimateReport`](crate::report::EstimateReport) whose
//! empirical constant is `lhs / sum(rhs_terms)`.

mod degiorgi;
mod estimates;
mod holder;

use serde::{Deserialize, Serialize};

pub use degiorgi::{certified_threshold, de_giorgi_iterate, DeGiorgiReport, RESOLUTION};
pub use estimates::{Checker, Cutoff, CutoffProfile, LogEstimateInput, Sign};
pub use holder::{Constraint, DecaySchedule, HolderFit};

/// Declared bounds on the empirical constants; a report passes when its
/// constant does not exceed the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateBounds {
    pub sobolev_poincare: f64,
    pub boundedness: f64,
    pub caccioppoli: f64,
    pub logarithmic: f64,
    pub holder: f64,
}

impl Default for EstimateBounds {
    fn default() -> Self {
        EstimateBounds { sobolev_poincare: 10.0, boundedness: 10.0, caccioppoli: 10.0, logarithmic: 10.0, holder: 10.0 }
    }
}

/// Relative tolerance applied to the bound comparison.
pub const REPORT_TOLERANCE: f64 = 1e-12;

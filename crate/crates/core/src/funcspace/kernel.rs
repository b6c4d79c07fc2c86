use std::fmt;
use std::sync::Arc;

use super::lattice::{distance, norm, Point};
use crate::error::{Error, Result};
use crate::report::{EstimateReport, Tally};
use crate::witness;

/// Symmetric coefficient `a(x, y)` of a weighted kernel.
pub type Coefficient = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;

/// Interaction kernel `K(x, y) = a(x, y) |x - y|^{-n}` with
/// `lambda <= a <= big_lambda`.
#[derive(Clone)]
pub enum Kernel {
    /// `a = 1`.
    Pure,
    Weighted {
        lambda: f64,
        big_lambda: f64,
        coefficient: Coefficient,
        /// Value of `a` used for far-field interactions beyond the
        /// truncation radius.
        far_coefficient: f64,
    },
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Pure => write!(f, "Pure"),
            Kernel::Weighted { lambda, big_lambda, far_coefficient, .. } => f
                .debug_struct("Weighted")
                .field("lambda", lambda)
                .field("big_lambda", big_lambda)
                .field("far_coefficient", far_coefficient)
                .finish_non_exhaustive(),
        }
    }
}

impl Kernel {
    pub fn weighted(lambda: f64, big_lambda: f64, coefficient: Coefficient, far_coefficient: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= big_lambda && big_lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ellipticity bounds must satisfy 0 < lambda <= Lambda, got ({lambda}, {big_lambda})"
            )));
        }
        if !(lambda..=big_lambda).contains(&far_coefficient) {
            return Err(Error::InvalidParameter(format!(
                "far coefficient {far_coefficient} outside [{lambda}, {big_lambda}]"
            )));
        }
        Ok(Kernel::Weighted { lambda, big_lambda, coefficient, far_coefficient })
    }

    /// `a(x, y) = mean + amplitude * cos(2 pi (|x| + |y|) / wavelength)`,
    /// with far coefficient `mean`.
    pub fn cosine(mean: f64, amplitude: f64, wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0) || amplitude.abs() >= mean {
            return Err(Error::InvalidParameter(format!(
                "cosine kernel needs |amplitude| < mean and wavelength > 0, got ({mean}, {amplitude}, {wavelength})"
            )));
        }
        let k = 2.0 * std::f64::consts::PI / wavelength;
        let coefficient: Coefficient = Arc::new(move |x, y| mean + amplitude * (k * (norm(x) + norm(y))).cos());
        Self::weighted(mean - amplitude.abs(), mean + amplitude.abs(), coefficient, mean)
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Kernel::Pure)
    }

    /// `(lambda, Lambda)`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Kernel::Pure => (1.0, 1.0),
            Kernel::Weighted { lambda, big_lambda, .. } => (*lambda, *big_lambda),
        }
    }

    pub fn coefficient(&self, x: &Point, y: &Point) -> f64 {
        match self {
            Kernel::Pure => 1.0,
            Kernel::Weighted { coefficient, .. } => coefficient(x, y),
        }
    }

    pub fn far_coefficient(&self) -> f64 {
        match self {
            Kernel::Pure => 1.0,
            Kernel::Weighted { far_coefficient, .. } => *far_coefficient,
        }
    }

    /// `K(x, y)` in dimension `n`.
    pub fn eval(&self, x: &Point, y: &Point, n: usize) -> f64 {
        self.coefficient(x, y) * distance(x, y).powi(-(n as i32))
    }

    /// Samples symmetry and the two-sided bound on every pair of `points`.
    pub fn check_bounds(&self, points: &[Point], n: usize, tol: f64) -> EstimateReport {
        let (lo, hi) = self.bounds();
        let mut tally = Tally::new("kernel_bounds", tol);
        for (i, x) in points.iter().enumerate() {
            for (j, y) in points.iter().enumerate().skip(i + 1) {
                let d = distance(x, y);
                if d == 0.0 {
                    continue;
                }
                let k = self.eval(x, y, n);
                let dn = d.powi(-(n as i32));
                let wit = || witness!("i" => i, "j" => j, "distance" => d);
                tally.record(lo * dn, k, wit);
                tally.record(k, hi * dn, wit);
                tally.record_eq(k, self.eval(y, x, n), wit);
            }
        }
        tally.finish()
    }
}

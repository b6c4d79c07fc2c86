use serde::Serialize;

use crate::error::{Error, Result};

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Relative allowance beyond which a comparison no longer resolves the
/// bound and the iteration stops.
pub const RESOLUTION: f64 = 1e-2;

/// Extremal sequence `A_{i+1} = C B^i A_i^{1+beta}` and its comparison with
/// the geometric bound `B^{-i/beta} A_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeGiorgiReport {
    pub c: f64,
    pub b: f64,
    pub beta: f64,
    pub a0: f64,
    /// `C^{-1/beta} B^{-1/beta^2}` as computed.
    pub threshold: f64,
    /// See [`certified_threshold`].
    pub certified_threshold: f64,
    /// `A0 <= threshold`.
    pub below_threshold: bool,
    pub sequence: Vec<f64>,
    /// `B^{-i/beta} A_0`.
    pub bounds: Vec<f64>,
    /// Relative rounding allowance applied to each comparison.
    pub allowance: Vec<f64>,
    /// Indices with `A_i > bounds[i] * (1 + allowance[i])`.
    pub violations: Vec<usize>,
    /// First step whose allowance exceeded [`RESOLUTION`]; the iteration
    /// stopped there.
    pub horizon: Option<usize>,
    /// The recursion left the finite range before `steps` iterations.
    pub diverged: bool,
    /// The recursion reached subnormal values before `steps` iterations
    /// and was stopped there.
    pub underflowed: bool,
    /// `below_threshold` implies no violations and no divergence.
    pub holds: bool,
}

/// Relative rounding uncertainty of the computed threshold.
fn threshold_uncertainty(c: f64, b: f64, beta: f64) -> f64 {
    UNIT_ROUNDOFF * (4.0 + c.ln().abs() / beta + b.ln() / (beta * beta))
}

/// The computed threshold lowered by its own rounding uncertainty and by the
/// per-step rounding of the recursion. From `A0` at or below this value the
/// computed sequence stays below the bound at every step, so comparisons
/// need no propagated allowance.
pub fn certified_threshold(c: f64, b: f64, beta: f64) -> f64 {
    let eta = threshold_uncertainty(c, b, beta);
    let threshold = c.powf(-1.0 / beta) * b.powf(-1.0 / (beta * beta));
    threshold * (1.0 - 2.0 * eta - 32.0 * UNIT_ROUNDOFF / beta)
}

/// Runs `steps` iterations of the extremal recursion.
///
/// Each comparison allows for the rounding of the bound itself. When `A0`
/// lies between [`certified_threshold`] and the computed threshold (plus its
/// uncertainty) the excess `delta = beta ln(A0 / certified)` is amplified by
/// the recursion, `e_{i+1} = (1 + beta) e_i + delta`, and added to the
/// allowance; once it exceeds [`RESOLUTION`] the comparison is undecidable
/// in double precision and the iteration stops with `horizon` set.
/// In the exactly representable case `C = 1, B = 2, beta = 1` the sequence
/// meets the bound with equality.
pub fn de_giorgi_iterate(c: f64, b: f64, beta: f64, a0: f64, steps: usize) -> Result<DeGiorgiReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain { name: "C", value: c, reason: "must be positive" });
    }
    if !(b > 1.0 && b.is_finite()) {
        return Err(Error::Domain { name: "B", value: b, reason: "must exceed 1" });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain { name: "beta", value: beta, reason: "must be positive" });
    }
    if !(a0 >= 0.0 && a0.is_finite()) {
        return Err(Error::Domain { name: "A0", value: a0, reason: "must be nonnegative" });
    }
    let threshold = c.powf(-1.0 / beta) * b.powf(-1.0 / (beta * beta));
    let certified = certified_threshold(c, b, beta);
    let below_threshold = a0 <= threshold;
    let u = UNIT_ROUNDOFF;
    let eta = threshold_uncertainty(c, b, beta);
    let delta = if a0 > certified && a0 <= threshold * (1.0 + eta) { beta * (a0 / certified).ln() } else { 0.0 };

    let mut sequence = vec![a0];
    let mut bounds = vec![a0];
    let mut allowance = vec![0.0];
    let mut violations = Vec::new();
    let mut horizon = None;
    let mut diverged = false;
    let mut underflowed = false;
    let mut a = a0;
    let mut e = 0.0;
    for i in 0..steps {
        e = (1.0 + beta) * e + delta;
        if e > RESOLUTION {
            horizon = Some(i + 1);
            break;
        }
        let growth = b.powi(i as i32);
        let next = if a == 0.0 {
            0.0
        } else if growth.is_finite() {
            c * growth * a.powf(beta) * a
        } else {
            (c.ln() + i as f64 * b.ln() + (1.0 + beta) * a.ln()).exp()
        };
        if !next.is_finite() {
            diverged = true;
            break;
        }
        if next != 0.0 && !next.is_normal() {
            underflowed = true;
            break;
        }
        a = next;
        let k = (i + 1) as f64;
        let bound = b.powf(-k / beta) * a0;
        let allow = e + u * (2.0 + k * b.ln() / beta);
        if a > bound * (1.0 + allow) {
            violations.push(i + 1);
        }
        sequence.push(a);
        bounds.push(bound);
        allowance.push(allow);
    }
    let holds = !below_threshold || (violations.is_empty() && !diverged);
    Ok(DeGiorgiReport {
        c,
        b,
        beta,
        a0,
        threshold,
        certified_threshold: certified,
        below_threshold,
        sequence,
        bounds,
        allowance,
        violations,
        horizon,
        diverged,
        underflowed,
        holds,
    })
}

use std::collections::BTreeMap;

use serde::Serialize;

use super::estimates::Checker;
use super::REPORT_TOLERANCE;
use crate::error::{Error, Result};
use crate::funcspace::lattice::{distance, Ball, Point};
use crate::report::EstimateReport;

/// Levels whose oscillation falls below this fraction of the first one are
/// left out of the fit.
const FLAT_FRACTION: f64 = 1e-12;

/// One recorded inequality `value <= bound` (strict when `strict`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constraint {
    pub value: f64,
    pub bound: f64,
    pub strict: bool,
    pub holds: bool,
}

impl Constraint {
    fn new(value: f64, bound: f64, strict: bool) -> Self {
        let holds = if strict { value < bound } else { value <= bound };
        Constraint { value, bound, strict, holds }
    }
}

/// Radii `r_i = sigma^i r0` with the oscillation model
/// `omega(r_i) = sigma^{alpha i} omega(r0)` and the smallness conditions on
/// `(alpha, sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySchedule {
    pub alpha: f64,
    pub sigma: f64,
    pub r0: f64,
    pub omega0: f64,
    /// Keyed by name:
    /// `alpha_cap`: `alpha <= sp / (2(p-1))`;
    /// `sigma_quarter`: `sigma < 1/4`;
    /// `sigma_half`: `sigma^{sp - alpha(p-1)} <= 1/2`;
    /// `sigma_sixth`: `sigma^{(sp - alpha(p-1)) / (2(q-1))} <= 1/6`;
    /// `log_smallness`: `1 / log(1/sigma) <= 2^{-(n + sq + 2q) theta / beta^2}`
    /// with unit constants, `theta` the midpoint of the Sobolev–Poincaré
    /// range and `beta = theta - 1`;
    /// `alpha_balance`: `1 - sigma^{sp/(q-1)} <= sigma^alpha`.
    pub constraints: BTreeMap<String, Constraint>,
}

impl DecaySchedule {
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(alpha: f64, sigma: f64, r0: f64, omega0: f64, n: usize, s: f64, p: f64, q: f64) -> Self {
        let sp = s * p;
        let gap = sp - alpha * (p - 1.0);
        let nf = n as f64;
        let theta = 0.5 * (1.0 + nf / (nf - s / 2.0));
        let beta = theta - 1.0;
        let mut constraints = BTreeMap::new();
        let mut put = |name: &str, c: Constraint| {
            constraints.insert(name.to_string(), c);
        };
        put("alpha_cap", Constraint::new(alpha, sp / (2.0 * (p - 1.0)), false));
        put("sigma_quarter", Constraint::new(sigma, 0.25, true));
        put("sigma_half", Constraint::new(sigma.powf(gap), 0.5, false));
        put("sigma_sixth", Constraint::new(sigma.powf(gap / (2.0 * (q - 1.0))), 1.0 / 6.0, false));
        put(
            "log_smallness",
            Constraint::new(1.0 / (1.0 / sigma).ln(), (-(nf + s * q + 2.0 * q) * theta / (beta * beta)).exp2(), false),
        );
        put("alpha_balance", Constraint::new(1.0 - sigma.powf(sp / (q - 1.0)), sigma.powf(alpha), false));
        DecaySchedule { alpha, sigma, r0, omega0, constraints }
    }

    /// `(sigma, alpha)` meeting every constraint except `log_smallness`,
    /// whose constant is not computable.
    pub fn select(s: f64, p: f64, q: f64) -> (f64, f64) {
        let sp = s * p;
        let sigma = 0.2_f64.min((-2.0 / sp).exp2()).min(6f64.powf(-4.0 * (q - 1.0) / sp));
        let balance = (1.0 - sigma.powf(sp / (q - 1.0))).ln() / sigma.ln();
        let alpha = (sp / (2.0 * (p - 1.0))).min(balance * (1.0 - 1e-9));
        (sigma, alpha)
    }
}

/// Oscillation decay measured on nested balls about one centre.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderFit {
    /// Schedule evaluated at the fitted exponent (0 when no fit exists).
    pub schedule: DecaySchedule,
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
    /// Number of levels entering the least-squares fit.
    pub fitted_levels: usize,
    /// Least-squares slope of `log osc` against `log r`.
    pub alpha_hat: Option<f64>,
    pub monotone: bool,
    /// Boundedness constant used in `omega(r0)`.
    pub c_b: f64,
    /// `osc(B_i) <= sigma^{alpha_hat i} omega(r0)` at every level.
    pub decay_holds: bool,
    /// Discrete Hölder seminorm on `B_{r0}` against the bound with
    /// `r = 2 r0`; present when `alpha_hat > 0`.
    pub seminorm: Option<EstimateReport>,
}

impl Checker<'_> {
    /// Oscillations on `B_{sigma^i r0}(x0)` for the resolvable levels
    /// `i < levels`, the fitted exponent and the decay comparison.
    ///
    /// A level is resolvable when its diameter spans at least 4 nodes.
    /// `omega(r0)` uses `c_b` when given and otherwise the smallest constant
    /// that makes the boundedness estimate hold on `B_{2 r0}(x0)`.
    pub fn holder_decay_fit(
        &self,
        x0: &Point,
        r0: f64,
        sigma: f64,
        levels: usize,
        c_b: Option<f64>,
    ) -> Result<HolderFit> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Domain { name: "sigma", value: sigma, reason: "must lie in (0, 1)" });
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Domain { name: "r0", value: r0, reason: "must be positive" });
        }
        let h = self.u.lattice.h();
        let radii: Vec<f64> =
            (0..levels).map(|i| r0 * sigma.powi(i as i32)).take_while(|&r| 2.0 * r >= 3.0 * h).collect();
        if radii.len() < 3 {
            return Err(Error::Precondition(format!(
                "{} resolvable levels at spacing {h}, need at least 3",
                radii.len()
            )));
        }
        let big = Ball { center: *x0, radius: 2.0 * r0 };
        let bounded = self.boundedness(&big)?;
        let c_b = c_b.unwrap_or(bounded.witnesses["c_b_required"]);
        let omega0 = 2.0 * (c_b * bounded.rhs_terms["average"] + bounded.rhs_terms["tail"]);

        let mut oscillations = Vec::with_capacity(radii.len());
        for &r in &radii {
            let nodes = self.nodes(&Ball { center: *x0, radius: r });
            let (lo, hi) = nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.u.values[i];
                (lo.min(v), hi.max(v))
            });
            oscillations.push(hi - lo);
        }
        let monotone = oscillations.windows(2).all(|w| w[1] <= w[0]);

        let floor = FLAT_FRACTION * oscillations[0];
        let pts: Vec<(f64, f64)> = radii
            .iter()
            .zip(&oscillations)
            .filter(|(_, &o)| o > floor && o > 0.0)
            .map(|(r, o)| (r.ln(), o.ln()))
            .collect();
        let alpha_hat = (pts.len() >= 2).then(|| least_squares_slope(&pts));
        let alpha = alpha_hat.unwrap_or(0.0);
        let decay_holds = oscillations
            .iter()
            .enumerate()
            .all(|(i, &o)| o <= sigma.powf(alpha * i as f64) * omega0 * (1.0 + REPORT_TOLERANCE));

        let seminorm = match alpha_hat {
            Some(a) if a > 0.0 => Some(self.holder_seminorm(x0, r0, a)?),
            _ => None,
        };
        let (n, s, nf) = (self.dim(), self.s, self.nf);
        Ok(HolderFit {
            schedule: DecaySchedule::evaluate(alpha, sigma, r0, omega0, n, s, nf.p(), nf.q()),
            radii,
            oscillations,
            fitted_levels: pts.len(),
            alpha_hat,
            monotone,
            c_b,
            decay_holds,
            seminorm,
        })
    }

    /// `max |u(x) - u(y)| / |x - y|^alpha` over node pairs of `B_{r0}(x0)`
    /// against `r^{-alpha} [r^s G^{-1}(avg G(|u|/r^s)) + r^s g^{-1}(r^s Tail(u; x0, r))]`
    /// with `r = 2 r0`.
    fn holder_seminorm(&self, x0: &Point, r0: f64, alpha: f64) -> Result<EstimateReport> {
        let big = Ball { center: *x0, radius: 2.0 * r0 };
        self.require_inside(&big, true)?;
        let nodes = self.nodes(&Ball { center: *x0, radius: r0 });
        let xs = self.coords(&nodes);
        let mut lhs = 0.0_f64;
        for a in 0..nodes.len() {
            for b in (a + 1)..nodes.len() {
                let du = (self.u.values[nodes[a]] - self.u.values[nodes[b]]).abs();
                lhs = lhs.max(du / distance(&xs[a], &xs[b]).powf(alpha));
            }
        }
        let (t1, t2, _) = self.local_size(&big, big.radius)?;
        let scale = big.radius.powf(-alpha);
        let mut witnesses = self.ball_witness(&big);
        witnesses.insert("alpha".into(), alpha);
        Ok(EstimateReport::single(
            "holder_seminorm",
            lhs,
            BTreeMap::from([("average".to_string(), scale * t1), ("tail".to_string(), scale * t2)]),
            self.bounds.holder,
            REPORT_TOLERANCE,
            witnesses,
        ))
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

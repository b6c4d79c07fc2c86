use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EstimateBounds, REPORT_TOLERANCE};
use crate::error::{Error, Result};
use crate::funcspace::lattice::{distance, Ball, Point, Region};
use crate::funcspace::{exterior_integral, tail, GridFunction};
use crate::nfunction::NFunction;
use crate::quad::pairwise_sum;
use crate::report::{EstimateReport, Witness};

/// Truncation direction for `w = (u - k)_+` or `w = (u - k)_-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn truncate(self, v: f64, k: f64) -> f64 {
        match self {
            Sign::Plus => (v - k).max(0.0),
            Sign::Minus => (k - v).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// Linear decay across the transition annulus.
    Hat,
    /// `3t^2 - 2t^3` across the transition annulus.
    Smoothstep,
}

/// Radial cutoff equal to 1 on `B_inner`, 0 outside `B_outer`, about the
/// centre of the ball it is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
    pub profile: CutoffProfile,
}

impl Cutoff {
    pub fn hat(inner: f64, outer: f64) -> Self {
        Cutoff { inner, outer, profile: CutoffProfile::Hat }
    }

    pub fn value(&self, dist: f64) -> f64 {
        if dist <= self.inner {
            return 1.0;
        }
        if dist >= self.outer {
            return 0.0;
        }
        let t = (self.outer - dist) / (self.outer - self.inner);
        match self.profile {
            CutoffProfile::Hat => t,
            CutoffProfile::Smoothstep => t * t * (3.0 - 2.0 * t),
        }
    }

    /// Lipschitz constant of the continuous profile.
    pub fn lipschitz(&self) -> f64 {
        let gap = self.outer - self.inner;
        match self.profile {
            CutoffProfile::Hat => 1.0 / gap,
            CutoffProfile::Smoothstep => 1.5 / gap,
        }
    }

    fn validate(&self, radius: f64) -> Result<()> {
        if !(self.inner >= 0.0 && self.inner < self.outer) {
            return Err(Error::Precondition(format!(
                "cutoff radii must satisfy 0 <= inner < outer, got {} and {}",
                self.inner, self.outer
            )));
        }
        if self.outer >= radius {
            return Err(Error::Precondition(format!(
                "cutoff support radius {} does not vanish inside the ball of radius {radius}",
                self.outer
            )));
        }
        Ok(())
    }
}

/// Parameters of the logarithmic estimate on `B_r(x0) subset B_R(x0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogEstimateInput {
    pub center: Point,
    pub r: f64,
    pub big_r: f64,
    pub d: f64,
    /// `(a, b)` for the truncated variant with
    /// `h = min{(log(a + d) - log(u + d))_+, log b}`.
    #[serde(default)]
    pub truncation: Option<(f64, f64)>,
}

/// Evaluates the regularity estimates for one function.
#[derive(Debug, Clone)]
pub struct Checker<'a> {
    pub(super) u: &'a GridFunction,
    pub(super) domain: Region,
    pub(super) s: f64,
    pub(super) nf: &'a NFunction,
    pub(super) bounds: EstimateBounds,
}

impl<'a> Checker<'a> {
    /// `domain` is the set on which `u` solves the equation.
    pub fn new(u: &'a GridFunction, domain: &Region, s: f64, nf: &'a NFunction) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain { name: "s", value: s, reason: "fractional order must lie in (0, 1)" });
        }
        Ok(Checker { u, domain: *domain, s, nf, bounds: EstimateBounds::default() })
    }

    /// Uses the hull of the lattice nodes as domain.
    pub fn on_lattice(u: &'a GridFunction, s: f64, nf: &'a NFunction) -> Result<Self> {
        let lat = &u.lattice;
        let lo = lat.coords(0);
        let hi = lat.coords(lat.len() - 1);
        Self::new(u, &Region::Box { lo, hi }, s, nf)
    }

    pub fn with_bounds(mut self, bounds: EstimateBounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn bounds(&self) -> &EstimateBounds {
        &self.bounds
    }

    pub(super) fn dim(&self) -> usize {
        self.u.lattice.dim()
    }

    /// Distance from `x` to the complement of the domain (negative outside).
    pub(super) fn depth(&self, x: &Point) -> f64 {
        match &self.domain {
            Region::Ball(b) => b.radius - distance(x, &b.center),
            Region::Box { lo, hi } => (0..self.dim()).fold(f64::INFINITY, |m, k| m.min(x[k] - lo[k]).min(hi[k] - x[k])),
        }
    }

    /// Errors unless `ball` lies in the domain, strictly when `strict`.
    pub(super) fn require_inside(&self, ball: &Ball, strict: bool) -> Result<()> {
        let slack = self.u.lattice.slack();
        let room = self.depth(&ball.center) - ball.radius;
        let ok = if strict { room > slack } else { room >= -slack };
        if !ok {
            return Err(Error::Precondition(format!(
                "ball of radius {} at {:?} is not {}contained in the domain",
                ball.radius,
                &ball.center[..self.dim()],
                if strict { "compactly " } else { "" }
            )));
        }
        Ok(())
    }

    pub(super) fn nodes(&self, ball: &Ball) -> Vec<usize> {
        self.u.lattice.nodes_in(&Region::Ball(*ball))
    }

    pub(super) fn ball_witness(&self, ball: &Ball) -> Witness {
        let mut w = Witness::new();
        for k in 0..self.dim() {
            w.insert(format!("x0_{k}"), ball.center[k]);
        }
        w.insert("r".into(), ball.radius);
        w
    }

    pub(super) fn coords(&self, nodes: &[usize]) -> Vec<Point> {
        nodes.iter().map(|&i| self.u.lattice.coords(i)).collect()
    }

    /// `(r^s G^{-1}(avg_{B_r} G(|u| / r^s)), r^s g^{-1}(r^s Tail(u; x0, tail_radius)))`.
    pub(super) fn local_size(&self, ball: &Ball, tail_radius: f64) -> Result<(f64, f64, f64)> {
        let nodes = self.nodes(ball);
        if nodes.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let rs = ball.radius.powf(self.s);
        let mut terms = Vec::with_capacity(nodes.len());
        for &i in &nodes {
            terms.push(self.nf.eval(self.u.values[i].abs() / rs)?);
        }
        let avg = pairwise_sum(&terms) / nodes.len() as f64;
        let t1 = rs * self.nf.inv(avg)?;
        let tl = tail(self.u, &ball.center, tail_radius, self.s, self.nf)?;
        let t2 = rs * self.nf.inv_deriv(rs * tl)?;
        Ok((t1, t2, tl))
    }

    /// `(avg_B G(|f - (f)_B| / r^s)^theta)^{1/theta}` against
    /// `avg_x int_B G(|f(x) - f(y)| / |x - y|^s) dy`.
    pub fn sobolev_poincare(&self, ball: &Ball, theta: f64) -> Result<EstimateReport> {
        let n = self.dim() as f64;
        let upper = n / (n - self.s / 2.0);
        if !(theta > 1.0 && theta < upper) {
            return Err(Error::Domain { name: "theta", value: theta, reason: "must lie in (1, n / (n - s/2))" });
        }
        self.require_inside(ball, false)?;
        let nodes = self.nodes(ball);
        if nodes.len() < 2 {
            return Err(Error::Precondition(format!("{} lattice nodes in the ball, need 2", nodes.len())));
        }
        let xs = self.coords(&nodes);
        let vals: Vec<f64> = nodes.iter().map(|&i| self.u.values[i]).collect();
        let count = vals.len() as f64;
        let mean = pairwise_sum(&vals) / count;
        let rs = ball.radius.powf(self.s);
        let mut powered = Vec::with_capacity(vals.len());
        for v in &vals {
            powered.push(self.nf.eval((v - mean).abs() / rs)?.powf(theta));
        }
        let lhs = (pairwise_sum(&powered) / count).powf(1.0 / theta);

        let cell = self.u.lattice.cell_volume();
        let mut rows = Vec::with_capacity(vals.len());
        for a in 0..vals.len() {
            let mut row = Vec::with_capacity(vals.len());
            for b in 0..vals.len() {
                if a != b {
                    let d = distance(&xs[a], &xs[b]);
                    row.push(self.nf.eval((vals[a] - vals[b]).abs() / d.powf(self.s))?);
                }
            }
            rows.push(pairwise_sum(&row));
        }
        let rhs = cell * pairwise_sum(&rows) / count;

        let mut witnesses = self.ball_witness(ball);
        witnesses.insert("theta".into(), theta);
        witnesses.insert("nodes".into(), count);
        Ok(EstimateReport::single(
            "sobolev_poincare",
            lhs,
            BTreeMap::from([("modular".to_string(), rhs)]),
            self.bounds.sobolev_poincare,
            REPORT_TOLERANCE,
            witnesses,
        ))
    }

    /// `max_{B_{r/2}} |u|` against
    /// `r^s G^{-1}(avg_{B_r} G(|u| / r^s)) + r^s g^{-1}(r^s Tail(u; x0, r/2))`.
    ///
    /// The witness `c_b_required` is the smallest factor on the first term
    /// that makes the inequality hold with unit factor on the second.
    pub fn boundedness(&self, ball: &Ball) -> Result<EstimateReport> {
        self.require_inside(ball, true)?;
        let half = ball.scaled(0.5);
        let inner = self.nodes(&half);
        if inner.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let lhs = inner.iter().fold(0.0_f64, |m, &i| m.max(self.u.values[i].abs()));
        let (t1, t2, tl) = self.local_size(ball, half.radius)?;
        let mut witnesses = self.ball_witness(ball);
        let required = if lhs <= t2 { 0.0 } else { (lhs - t2) / t1 };
        witnesses.insert("c_b_required".into(), required);
        witnesses.insert("tail".into(), tl);
        Ok(EstimateReport::single(
            "boundedness",
            lhs,
            BTreeMap::from([("average".to_string(), t1), ("tail".to_string(), t2)]),
            self.bounds.boundedness,
            REPORT_TOLERANCE,
            witnesses,
        ))
    }

    /// Energy of `w = (u - k)_{sign}` on `ball` weighted by the cutoff,
    /// against the cutoff-difference term and the tail term.
    pub fn caccioppoli(&self, ball: &Ball, k: f64, cutoff: &Cutoff, sign: Sign) -> Result<EstimateReport> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Domain { name: "k", value: k, reason: "level must be nonnegative" });
        }
        self.require_inside(ball, true)?;
        cutoff.validate(ball.radius)?;
        let nodes = self.nodes(ball);
        if nodes.len() < 2 {
            return Err(Error::Precondition(format!("{} lattice nodes in the ball, need 2", nodes.len())));
        }
        let xs = self.coords(&nodes);
        let w: Vec<f64> = nodes.iter().map(|&i| sign.truncate(self.u.values[i], k)).collect();
        let phi: Vec<f64> = xs.iter().map(|x| cutoff.value(distance(x, &ball.center))).collect();
        let q = self.nf.q();
        let phi_q: Vec<f64> = phi.iter().map(|f| f.powf(q)).collect();
        let n = self.dim() as i32;
        let cell = self.u.lattice.cell_volume();

        let mut lhs_rows = Vec::with_capacity(xs.len());
        let mut cut_rows = Vec::with_capacity(xs.len());
        let mut lipschitz = 0.0_f64;
        for a in 0..xs.len() {
            let mut lhs_row = Vec::new();
            let mut cut_row = Vec::new();
            for b in (a + 1)..xs.len() {
                let d = distance(&xs[a], &xs[b]);
                let ds = d.powf(self.s);
                let kernel = d.powi(-n);
                let weight = phi_q[a].min(phi_q[b]);
                if weight > 0.0 {
                    lhs_row.push(self.nf.eval((w[a] - w[b]).abs() / ds)? * weight * kernel);
                }
                let dphi = (phi[a] - phi[b]).abs();
                lipschitz = lipschitz.max(dphi / d);
                if dphi > 0.0 {
                    cut_row.push(self.nf.eval(dphi / ds * w[a].max(w[b]))? * kernel);
                }
            }
            lhs_rows.push(pairwise_sum(&lhs_row));
            cut_rows.push(pairwise_sum(&cut_row));
        }
        let lhs = 2.0 * cell * cell * pairwise_sum(&lhs_rows);
        let cutoff_term = 2.0 * cell * cell * pairwise_sum(&cut_rows);

        let mass: Vec<f64> = w.iter().zip(&phi_q).map(|(a, b)| a * b).collect();
        let mass = cell * pairwise_sum(&mass);
        let transform = move |v: f64| sign.truncate(v, k);
        let mut sup = 0.0_f64;
        let mut argsup = ball.center;
        if mass > 0.0 {
            for (x, f) in xs.iter().zip(&phi) {
                if *f > 0.0 {
                    let e = exterior_integral(self.u, x, ball, self.s, self.nf, &transform)?;
                    if e > sup {
                        sup = e;
                        argsup = *x;
                    }
                }
            }
        }

        let mut witnesses = self.ball_witness(ball);
        witnesses.insert("k".into(), k);
        witnesses.insert("sign".into(), if sign == Sign::Plus { 1.0 } else { -1.0 });
        witnesses.insert("cutoff_inner".into(), cutoff.inner);
        witnesses.insert("cutoff_outer".into(), cutoff.outer);
        witnesses.insert("lipschitz".into(), lipschitz);
        witnesses.insert("tail_sup".into(), sup);
        for (k, x) in argsup.iter().enumerate().take(self.dim()) {
            witnesses.insert(format!("sup_at_{k}"), *x);
        }
        Ok(EstimateReport::single(
            "caccioppoli",
            lhs,
            BTreeMap::from([("cutoff".to_string(), cutoff_term), ("tail".to_string(), mass * sup)]),
            self.bounds.caccioppoli,
            REPORT_TOLERANCE,
            witnesses,
        ))
    }

    /// `int_{B_r} int_{B_r} |log(u(x) + d) - log(u(y) + d)| |x - y|^{-n}`
    /// against `r^n + r^{n+s} Tail(u_-; x0, R) / g(d / r^s)`.
    pub fn log_estimate(&self, input: &LogEstimateInput) -> Result<EstimateReport> {
        let LogEstimateInput { center, r, big_r, d, truncation } = *input;
        if !(r > 0.0 && 2.0 * r < big_r) {
            return Err(Error::Precondition(format!("radii must satisfy 0 < r < R/2, got r = {r}, R = {big_r}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Domain { name: "d", value: d, reason: "must be positive" });
        }
        let outer = Ball { center, radius: big_r };
        self.require_inside(&outer, false)?;
        for i in self.nodes(&outer) {
            if self.u.values[i] < 0.0 {
                return Err(Error::Precondition(format!("u = {} < 0 at node {i} inside B_R", self.u.values[i])));
            }
        }
        let ball = Ball { center, radius: r };
        let nodes = self.nodes(&ball);
        if nodes.len() < 2 {
            return Err(Error::Precondition(format!("{} lattice nodes in the ball, need 2", nodes.len())));
        }
        let xs = self.coords(&nodes);
        let logs: Vec<f64> = nodes.iter().map(|&i| (self.u.values[i] + d).ln()).collect();
        let n = self.dim() as i32;
        let cell = self.u.lattice.cell_volume();
        let mut rows = Vec::with_capacity(xs.len());
        for a in 0..xs.len() {
            let row: Vec<f64> =
                ((a + 1)..xs.len()).map(|b| (logs[a] - logs[b]).abs() * distance(&xs[a], &xs[b]).powi(-n)).collect();
            rows.push(pairwise_sum(&row));
        }
        let lhs = 2.0 * cell * cell * pairwise_sum(&rows);

        let negative_tail = exterior_integral(self.u, &center, &outer, self.s, self.nf, &|v| (-v).max(0.0))?;
        let rs = r.powf(self.s);
        let rn = r.powi(n);
        let tail_term = rn * rs * negative_tail / self.nf.deriv(d / rs)?;

        let mut witnesses = self.ball_witness(&ball);
        witnesses.insert("R".into(), big_r);
        witnesses.insert("d".into(), d);
        witnesses.insert("tail_negative".into(), negative_tail);
        if let Some((a, b)) = truncation {
            if !(a > 0.0 && b > 1.0) {
                return Err(Error::Precondition(format!("truncation needs a > 0 and b > 1, got a = {a}, b = {b}")));
            }
            let cap = b.ln();
            let top = (a + d).ln();
            let hs: Vec<f64> = logs.iter().map(|l| (top - l).max(0.0).min(cap)).collect();
            let mean = pairwise_sum(&hs) / hs.len() as f64;
            let dev: Vec<f64> = hs.iter().map(|h| (h - mean).abs()).collect();
            let t_lhs = cell * pairwise_sum(&dev);
            let t_rhs = rn + tail_term;
            witnesses.insert("a".into(), a);
            witnesses.insert("b".into(), b);
            witnesses.insert("truncated_lhs".into(), t_lhs);
            witnesses.insert("truncated_rhs".into(), t_rhs);
            witnesses.insert("truncated_constant".into(), crate::report::ratio(t_lhs, t_rhs));
        }
        Ok(EstimateReport::single(
            "logarithmic",
            lhs,
            BTreeMap::from([("volume".to_string(), rn), ("tail".to_string(), tail_term)]),
            self.bounds.logarithmic,
            REPORT_TOLERANCE,
            witnesses,
        ))
    }
}

//! N-functions `G(t) = int_0^t g` built from a growth function `g`, their
//! inverses and conjugates, and sampled checks of the structural inequalities
//! every later estimate relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::report::{EstimateReport, Tally};
use crate::witness;

/// Largest argument accepted by any evaluation.
pub const MAX_ARG: f64 = 1e30;

/// Default relative tolerance of the quadrature behind `G`.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;

const INDEX_GRID_LO: f64 = 1e-6;
const INDEX_GRID_HI: f64 = 1e6;
const INDEX_GRID_POINTS: usize = 2401;

fn unit() -> f64 {
    1.0
}

/// The growth function `g` in one of the supported families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthFunction {
    /// `g(t) = scale * t^(p-1)`.
    Power {
        p: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `g(t) = scale * t^(p-1) * ln(1 + t)`; indices `p` and `p + 1`.
    PowerLog {
        p: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// Piecewise-linear interpolant of `(t, g)` samples through the origin.
    /// Declared indices, when given, must contain the sampled ones.
    Table {
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<f64>,
    },
}

#[derive(Debug, Clone)]
struct Table {
    t: Vec<f64>,
    g: Vec<f64>,
    /// `cum[k] = G(t[k])`.
    cum: Vec<f64>,
}

impl Table {
    fn new(points: &[[f64; 2]]) -> Result<Self> {
        let mut t = Vec::with_capacity(points.len() + 1);
        let mut g = Vec::with_capacity(points.len() + 1);
        match points.first() {
            None => return Err(Error::InvalidParameter("table needs at least one sample".into())),
            Some([t0, g0]) if *t0 == 0.0 => {
                if *g0 != 0.0 {
                    return Err(Error::InvalidParameter("tabulated g must vanish at t = 0".into()));
                }
            }
            Some(_) => {
                t.push(0.0);
                g.push(0.0);
            }
        }
        for &[ti, gi] in points {
            if !(ti.is_finite() && gi.is_finite()) {
                return Err(Error::InvalidParameter("non-finite table sample".into()));
            }
            if let (Some(&tl), Some(&gl)) = (t.last(), g.last()) {
                if ti <= tl || gi <= gl {
                    return Err(Error::InvalidParameter(format!(
                        "table samples must be strictly increasing in t and g (at t = {ti})"
                    )));
                }
            }
            t.push(ti);
            g.push(gi);
        }
        if t.len() < 2 {
            return Err(Error::InvalidParameter("table needs a sample with t > 0".into()));
        }
        let mut cum = vec![0.0; t.len()];
        for k in 1..t.len() {
            cum[k] = cum[k - 1] + 0.5 * (t[k] - t[k - 1]) * (g[k] + g[k - 1]);
        }
        Ok(Table { t, g, cum })
    }

    fn t_max(&self) -> f64 {
        *self.t.last().unwrap()
    }

    fn g_max(&self) -> f64 {
        *self.g.last().unwrap()
    }

    /// Segment `k` with `t[k] <= t <= t[k + 1]`.
    fn segment(&self, t: f64) -> usize {
        let k = self.t.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(self.t.len() - 2)
    }

    fn slope(&self, k: usize) -> f64 {
        (self.g[k + 1] - self.g[k]) / (self.t[k + 1] - self.t[k])
    }

    fn deriv(&self, t: f64) -> f64 {
        let k = self.segment(t);
        self.g[k] + self.slope(k) * (t - self.t[k])
    }

    fn eval(&self, t: f64) -> f64 {
        let k = self.segment(t);
        self.cum[k] + 0.5 * (t - self.t[k]) * (self.g[k] + self.deriv(t))
    }

    /// `int_b^a g` for `b <= a`, summed segment by segment.
    fn integral(&self, b: f64, a: f64) -> f64 {
        let (kb, ka) = (self.segment(b), self.segment(a));
        if kb == ka {
            return 0.5 * (a - b) * (self.deriv(a) + self.deriv(b));
        }
        let mut acc = 0.5 * (self.t[kb + 1] - b) * (self.g[kb + 1] + self.deriv(b));
        for k in kb + 1..ka {
            acc += 0.5 * (self.t[k + 1] - self.t[k]) * (self.g[k + 1] + self.g[k]);
        }
        acc + 0.5 * (a - self.t[ka]) * (self.deriv(a) + self.g[ka])
    }

    fn inv_deriv(&self, y: f64) -> f64 {
        let k = self.g.partition_point(|&x| x <= y).saturating_sub(1).min(self.g.len() - 2);
        self.t[k] + (y - self.g[k]) / self.slope(k)
    }

    /// `int_0^T g(u) ln(T/u) du`, exact for the piecewise-linear `g`.
    fn log_moment(&self, big_t: f64) -> f64 {
        let f1 = |u: f64| if u == 0.0 { 0.0 } else { u * (big_t / u).ln() + u };
        let f2 = |u: f64| if u == 0.0 { 0.0 } else { 0.5 * u * u * (big_t / u).ln() + 0.25 * u * u };
        let last = self.segment(big_t);
        let mut acc = 0.0;
        for k in 0..=last {
            let lo = self.t[k];
            let hi = if k == last { big_t } else { self.t[k + 1] };
            let beta = self.slope(k);
            let alpha = self.g[k] - beta * self.t[k];
            acc += alpha * (f1(hi) - f1(lo)) + beta * (f2(hi) - f2(lo));
        }
        acc
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Power { p: f64, c: f64 },
    PowerLog { p: f64, c: f64 },
    Table(Table),
}

/// An N-function with growth indices `1 < p <= t g(t)/G(t) <= q`.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct NFunction {
    family: GrowthFunction,
    shape: Shape,
    p: f64,
    q: f64,
    kappa: f64,
    ell: f64,
    quadrature_tol: f64,
}

/// `a^p - b^p` without cancellation when `a` and `b` are close.
fn pow_diff(a: f64, b: f64, p: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (hi, lo, sign) = if a > b { (a, b, 1.0) } else { (b, a, -1.0) };
    if lo == 0.0 || hi > 2.0 * lo {
        return sign * (hi.powf(p) - lo.powf(p));
    }
    sign * lo.powf(p) * (p * ((hi - lo) / lo).ln_1p()).exp_m1()
}

fn check_arg(name: &'static str, t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain { name, value: t, reason: "must be non-negative" });
    }
    if t > MAX_ARG {
        return Err(Error::Overflow(format!("{name} = {t:e} exceeds the representable range")));
    }
    Ok(())
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("{name} is not representable")))
    }
}

/// Smallest `t` in `[0, t_max]` with `f(t) >= y` for increasing `f`, to
/// machine precision.
fn invert_increasing<F: Fn(f64) -> Result<f64>>(f: F, y: f64, t_max: f64) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::Domain { name: "y", value: y, reason: "must be non-negative" });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0_f64.min(t_max);
    let mut lo = 0.0;
    let mut expansions = 0;
    while f(hi)? < y {
        if hi >= t_max {
            return Err(Error::NoConvergence { iterations: expansions, lo: hi, hi: t_max });
        }
        lo = hi;
        hi = (2.0 * hi).min(t_max);
        expansions += 1;
    }
    if lo == 0.0 {
        let mut l = 0.5 * hi;
        while l > 0.0 && f(l)? >= y {
            hi = l;
            l *= 0.5;
        }
        lo = l;
    }
    const CAP: usize = 400;
    for _ in 0..CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo > 1e-12 * hi {
        return Err(Error::NoConvergence { iterations: CAP, lo, hi });
    }
    let (flo, fhi) = (f(lo)?, f(hi)?);
    Ok(if (y - flo).abs() <= (fhi - y).abs() { lo } else { hi })
}

impl NFunction {
    /// Builds and validates an N-function from its growth function.
    pub fn new(family: GrowthFunction) -> Result<Self> {
        let (shape, declared) = match &family {
            GrowthFunction::Power { p, scale } => {
                validate_exponent(*p)?;
                validate_scale(*scale)?;
                (Shape::Power { p: *p, c: *scale }, Some((*p, *p)))
            }
            GrowthFunction::PowerLog { p, scale } => {
                validate_exponent(*p)?;
                validate_scale(*scale)?;
                (Shape::PowerLog { p: *p, c: *scale }, Some((*p, *p + 1.0)))
            }
            GrowthFunction::Table { points, p, q } => {
                let declared = match (p, q) {
                    (Some(p), Some(q)) => Some((*p, *q)),
                    (None, None) => None,
                    _ => return Err(Error::InvalidParameter("declare both p and q or neither".into())),
                };
                (Shape::Table(Table::new(points)?), declared)
            }
        };
        let mut nf = NFunction {
            family,
            shape,
            p: f64::NAN,
            q: f64::NAN,
            kappa: f64::NAN,
            ell: f64::NAN,
            quadrature_tol: DEFAULT_QUADRATURE_TOL,
        };
        let (p, q) = match (&nf.shape, declared) {
            (Shape::Power { .. }, Some(pq)) => pq,
            (_, declared) => {
                let (lo, hi) = nf.sampled_indices()?;
                match declared {
                    Some((p, q)) => {
                        let slack = 1e-6;
                        if lo < p - slack || hi > q + slack {
                            return Err(Error::InvalidParameter(format!(
                                "sampled t g/G range [{lo}, {hi}] is not inside the declared [{p}, {q}]"
                            )));
                        }
                        (p, q)
                    }
                    None => (lo, hi),
                }
            }
        };
        if !(p > 1.0 && q >= p && q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "growth indices must satisfy 1 < p <= q < inf, got p = {p}, q = {q}"
            )));
        }
        nf.p = p;
        nf.q = q;
        nf.kappa = 2f64.powf(q);
        nf.ell = 2f64.powf(1.0 / (p - 1.0));
        Ok(nf)
    }

    /// `G(t) = t^p / p`.
    pub fn power(p: f64) -> Result<Self> {
        Self::new(GrowthFunction::Power { p, scale: 1.0 })
    }

    /// `G(t) = scale * t^p / p`.
    pub fn power_scaled(p: f64, scale: f64) -> Result<Self> {
        Self::new(GrowthFunction::Power { p, scale })
    }

    /// `g(t) = t^(p-1) ln(1 + t)`.
    pub fn power_log(p: f64) -> Result<Self> {
        Self::new(GrowthFunction::PowerLog { p, scale: 1.0 })
    }

    /// Piecewise-linear `g` through the given samples.
    pub fn table(points: Vec<[f64; 2]>, declared: Option<(f64, f64)>) -> Result<Self> {
        Self::new(GrowthFunction::Table { points, p: declared.map(|d| d.0), q: declared.map(|d| d.1) })
    }

    pub fn with_quadrature_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1e-2) {
            return Err(Error::InvalidParameter(format!("quadrature tolerance {tol} must lie in (0, 1e-2)")));
        }
        self.quadrature_tol = tol;
        Ok(self)
    }

    pub fn family(&self) -> &GrowthFunction {
        &self.family
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    /// Hölder conjugate `p' = p / (p - 1)`.
    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
    /// Hölder conjugate `q' = q / (q - 1)`.
    pub fn q_conj(&self) -> f64 {
        self.q / (self.q - 1.0)
    }
    /// Doubling constant: `G(2t) <= kappa G(t)`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    /// Reverse-doubling constant: `G(t) <= G(ell t) / (2 ell)`.
    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn quadrature_tol(&self) -> f64 {
        self.quadrature_tol
    }

    /// True when `G` and its inverses are evaluated in closed form.
    pub fn is_closed_form(&self) -> bool {
        matches!(self.shape, Shape::Power { .. })
    }

    /// Relative tolerance appropriate for inequality checks on this family.
    pub fn check_tolerance(&self) -> f64 {
        if self.is_closed_form() {
            1e-8
        } else {
            1e-6
        }
    }

    /// Largest admissible argument of `g` and `G`.
    pub fn max_arg(&self) -> f64 {
        match &self.shape {
            Shape::Table(t) => t.t_max(),
            _ => MAX_ARG,
        }
    }

    fn check_range(&self, name: &'static str, t: f64) -> Result<()> {
        check_arg(name, t)?;
        if let Shape::Table(tab) = &self.shape {
            if t > tab.t_max() {
                return Err(Error::OutOfTable { t, max: tab.t_max() });
            }
        }
        Ok(())
    }

    /// `g(t)`.
    pub fn deriv(&self, t: f64) -> Result<f64> {
        self.check_range("t", t)?;
        Ok(self.deriv_unchecked(t))
    }

    pub(crate) fn deriv_unchecked(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match &self.shape {
            Shape::Power { p, c } => c * t.powf(p - 1.0),
            Shape::PowerLog { p, c } => c * t.powf(p - 1.0) * t.ln_1p(),
            Shape::Table(tab) => tab.deriv(t),
        }
    }

    /// `G(t) = int_0^t g`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_range("t", t)?;
        finite("G(t)", self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match &self.shape {
            Shape::Power { p, c } => c * t.powf(*p) / p,
            Shape::PowerLog { .. } => quad::from_zero(&|u| self.deriv_unchecked(u), t, self.quadrature_tol),
            Shape::Table(tab) => tab.eval(t),
        }
    }

    /// `G(a) - G(b)`, accurate relative to the difference itself.
    pub fn increment(&self, a: f64, b: f64) -> Result<f64> {
        self.check_range("a", a)?;
        self.check_range("b", b)?;
        finite("G(a) - G(b)", self.increment_unchecked(a, b))
    }

    pub(crate) fn increment_unchecked(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        match &self.shape {
            Shape::Power { p, c } => c * pow_diff(a, b, *p) / p,
            Shape::PowerLog { .. } => {
                let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                let sign = if a > b { 1.0 } else { -1.0 };
                if lo > 0.0 && hi - lo <= 0.5 * hi {
                    sign * quad::adaptive(&|u| self.deriv_unchecked(u), lo, hi, 1e-14)
                } else {
                    self.eval_unchecked(a) - self.eval_unchecked(b)
                }
            }
            Shape::Table(tab) => {
                if a > b {
                    tab.integral(b, a)
                } else {
                    -tab.integral(a, b)
                }
            }
        }
    }

    /// `G^{-1}(y)`.
    pub fn inv(&self, y: f64) -> Result<f64> {
        check_arg("y", y)?;
        match &self.shape {
            Shape::Power { p, c } => finite("G^-1(y)", (p * y / c).powf(1.0 / p)),
            _ => invert_increasing(|t| Ok(self.eval_unchecked(t)), y, self.max_arg()),
        }
    }

    /// `g^{-1}(y)`.
    pub fn inv_deriv(&self, y: f64) -> Result<f64> {
        check_arg("y", y)?;
        match &self.shape {
            Shape::Power { p, c } => finite("g^-1(y)", (y / c).powf(1.0 / (p - 1.0))),
            Shape::Table(tab) => {
                if y > tab.g_max() {
                    return Err(Error::OutOfTable { t: y, max: tab.g_max() });
                }
                Ok(tab.inv_deriv(y))
            }
            Shape::PowerLog { .. } => invert_increasing(|t| Ok(self.deriv_unchecked(t)), y, MAX_ARG),
        }
    }

    /// Conjugate `G*(t) = sup_{s >= 0} (s t - G(s))`, attained at
    /// `s = g^{-1}(t)`.
    pub fn conjugate(&self, t: f64) -> Result<f64> {
        check_arg("t", t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        match &self.shape {
            Shape::Power { p, c } => {
                let s = (t / c).powf(1.0 / (p - 1.0));
                finite("G*(t)", t * s * (p - 1.0) / p)
            }
            _ => {
                let s = self.inv_deriv(t)?;
                finite("G*(t)", t * s - self.eval_unchecked(s))
            }
        }
    }

    /// The conjugate as an object carrying its own indices.
    pub fn conjugate_function(&self) -> ConjugateFunction<'_> {
        ConjugateFunction { base: self, p_conj: self.p_conj(), q_conj: self.q_conj() }
    }

    /// `int_0^T G(t)/t dt = int_0^T g(u) ln(T/u) du`; the radial far-field
    /// energy of a constant exterior reduces to this.
    pub fn log_moment(&self, big_t: f64) -> Result<f64> {
        self.check_range("T", big_t)?;
        Ok(self.log_moment_unchecked(big_t))
    }

    pub(crate) fn log_moment_unchecked(&self, big_t: f64) -> f64 {
        if big_t == 0.0 {
            return 0.0;
        }
        match &self.shape {
            Shape::Power { p, c } => c * big_t.powf(*p) / (p * p),
            Shape::PowerLog { .. } => {
                quad::from_zero(&|u| self.deriv_unchecked(u) * (big_t / u).ln(), big_t, self.quadrature_tol)
            }
            Shape::Table(tab) => tab.log_moment(big_t),
        }
    }

    /// `int_b^a G(t)/t dt`, accurate relative to the difference.
    pub(crate) fn log_moment_increment_unchecked(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        match &self.shape {
            Shape::Power { p, c } => c * pow_diff(a, b, *p) / (p * p),
            _ => {
                let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                let sign = if a > b { 1.0 } else { -1.0 };
                if lo > 0.0 && hi - lo <= 0.5 * hi {
                    sign * quad::adaptive(&|t| self.eval_unchecked(t) / t, lo, hi, 1e-13)
                } else {
                    self.log_moment_unchecked(a) - self.log_moment_unchecked(b)
                }
            }
        }
    }

    /// `inf` and `sup` of `t g(t) / G(t)` on the log-spaced estimation grid.
    fn sampled_indices(&self) -> Result<(f64, f64)> {
        let hi = INDEX_GRID_HI.min(self.max_arg());
        if hi <= INDEX_GRID_LO {
            return Err(Error::InvalidParameter("table range too short to estimate growth indices".into()));
        }
        let mut grid = log_grid(INDEX_GRID_LO, hi, INDEX_GRID_POINTS);
        if let Shape::Table(tab) = &self.shape {
            grid.extend(tab.t.iter().copied().filter(|&t| t > 0.0));
        }
        let (mut lo_r, mut hi_r) = (f64::INFINITY, f64::NEG_INFINITY);
        for t in grid {
            let r = t * self.deriv_unchecked(t) / self.eval_unchecked(t);
            if !r.is_finite() {
                return Err(Error::InvalidParameter(format!("t g/G is not finite at t = {t}")));
            }
            lo_r = lo_r.min(r);
            hi_r = hi_r.max(r);
        }
        Ok((lo_r, hi_r))
    }
}

fn validate_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent p = {p} must satisfy 1 < p < inf")));
    }
    Ok(())
}

fn validate_scale(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale {c} must be positive")));
    }
    Ok(())
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// The conjugate N-function `G*` with indices `q' <= p'`.
#[derive(Debug, Clone, Copy)]
pub struct ConjugateFunction<'a> {
    pub base: &'a NFunction,
    pub p_conj: f64,
    pub q_conj: f64,
}

impl ConjugateFunction<'_> {
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.base.conjugate(t)
    }
}

/// Checks `p <= t g(t)/G(t) <= q` on every grid point.
pub fn check_growth_sandwich(nf: &NFunction, grid: &[f64], tol: f64) -> Result<EstimateReport> {
    if grid.is_empty() {
        return Err(Error::Precondition("sample grid is empty".into()));
    }
    let mut lower = Tally::new("growth_sandwich", tol);
    let mut upper = Tally::new("growth_sandwich", tol);
    let (mut min_r, mut max_r) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut t_min, mut t_max) = (f64::NAN, f64::NAN);
    for &t in grid {
        if !(t > 0.0) {
            return Err(Error::Domain { name: "t", value: t, reason: "grid points must be positive" });
        }
        let r = t * nf.deriv(t)? / nf.eval(t)?;
        if r < min_r {
            min_r = r;
            t_min = t;
        }
        if r > max_r {
            max_r = r;
            t_max = t;
        }
        lower.record(nf.p(), r, || witness!("t" => t, "ratio" => r));
        upper.record(r, nf.q(), || witness!("t" => t, "ratio" => r));
    }
    let lower = lower.finish();
    let mut report = upper.finish();
    report.violations += lower.violations;
    report.samples += lower.samples;
    report.pass = report.violations == 0;
    report.failures.extend(lower.failures);
    report.lhs = max_r;
    report.rhs_terms = [("p".to_string(), nf.p()), ("q".to_string(), nf.q())].into_iter().collect();
    report.empirical_constant = max_r / nf.q();
    report.witnesses = witness!("min_ratio" => min_r, "max_ratio" => max_r, "t_at_min" => t_min, "t_at_max" => t_max);
    Ok(report)
}

/// Checks Young's inequality, its `eps` form, and the conjugate identity
/// `G*(g(t)) = t g(t) - G(t) <= (q - 1) G(t)` on every pair.
pub fn check_young(nf: &NFunction, pairs: &[(f64, f64)], eps: f64, tol: f64) -> Result<EstimateReport> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain { name: "eps", value: eps, reason: "must lie in (0, 1]" });
    }
    let mut tally = Tally::new("young", tol);
    let q = nf.q();
    for &(t, s) in pairs {
        let gt = nf.eval(t)?;
        let gs_conj = nf.conjugate(s)?;
        let ts = t * s;
        tally.record(ts, gt + gs_conj, || witness!("t" => t, "s" => s, "kind" => 0));
        tally.record(ts, eps.powf(1.0 - q) * gt + eps * gs_conj, || witness!("t" => t, "s" => s, "kind" => 1));
        let g = nf.deriv(t)?;
        let identity = t * g - gt;
        let conj_at_g = nf.conjugate(g)?;
        tally.record_eq(conj_at_g, identity, || witness!("t" => t, "kind" => 2));
        tally.record(conj_at_g, (q - 1.0) * gt, || witness!("t" => t, "kind" => 3));
    }
    Ok(tally.finish())
}

/// Checks the scaling sandwiches of `G` (indices `p`, `q`) and `G*`
/// (indices `q'`, `p'`) for every `(a, t)` sample, on both sides of `a = 1`.
pub fn check_scaling(nf: &NFunction, samples: &[(f64, f64)], tol: f64) -> Result<EstimateReport> {
    let (p, q) = (nf.p(), nf.q());
    let (pc, qc) = (nf.p_conj(), nf.q_conj());
    let mut tally = Tally::new("scaling", tol);
    for &(a, t) in samples {
        if !(a > 0.0) {
            return Err(Error::Domain { name: "a", value: a, reason: "scaling factor must be positive" });
        }
        let (lo_e, hi_e, lo_ce, hi_ce) = if a < 1.0 { (q, p, pc, qc) } else { (p, q, qc, pc) };
        let g_t = nf.eval(t)?;
        let g_at = nf.eval(a * t)?;
        tally.record(a.powf(lo_e) * g_t, g_at, || witness!("a" => a, "t" => t, "kind" => 0));
        tally.record(g_at, a.powf(hi_e) * g_t, || witness!("a" => a, "t" => t, "kind" => 1));
        let c_t = nf.conjugate(t)?;
        let c_at = nf.conjugate(a * t)?;
        tally.record(a.powf(lo_ce) * c_t, c_at, || witness!("a" => a, "t" => t, "kind" => 2));
        tally.record(c_at, a.powf(hi_ce) * c_t, || witness!("a" => a, "t" => t, "kind" => 3));
    }
    Ok(tally.finish())
}

/// Checks the doubling conditions `G(2t) <= kappa G(t)`,
/// `G(t) <= G(ell t)/(2 ell)`, midpoint convexity, and
/// `(G(t) + G(s))/2 <= G(t + s) <= 2^(q-1) (G(t) + G(s))` on every pair.
pub fn check_doubling(nf: &NFunction, pairs: &[(f64, f64)], tol: f64) -> Result<EstimateReport> {
    let (kappa, ell) = (nf.kappa(), nf.ell());
    let mut tally = Tally::new("doubling", tol);
    for &(t, s) in pairs {
        let (gt, gs) = (nf.eval(t)?, nf.eval(s)?);
        tally.record(nf.eval(2.0 * t)?, kappa * gt, || witness!("t" => t, "kind" => 0));
        tally.record(gt, nf.eval(ell * t)? / (2.0 * ell), || witness!("t" => t, "kind" => 1));
        tally.record(nf.eval(0.5 * (t + s))?, 0.5 * (gt + gs), || witness!("t" => t, "s" => s, "kind" => 2));
        let gsum = nf.eval(t + s)?;
        tally.record(0.5 * (gt + gs), gsum, || witness!("t" => t, "s" => s, "kind" => 3));
        tally.record(gsum, 2f64.powf(nf.q() - 1.0) * (gt + gs), || witness!("t" => t, "s" => s, "kind" => 4));
    }
    Ok(tally.finish())
}

//! One-dimensional quadrature used throughout the crate.
//!
//! Three shapes of integral show up: smooth integrands on a bounded interval,
//! integrands on `[0, t]` that behave like a power of the variable near zero,
//! and radial integrals on `[rho0, inf)` whose integrand is eventually a pure
//! power. Each has a dedicated routine here.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const GL_ORDER: usize = 16;

/// Ratio between the radial cut-off and the inner radius of a radial integral.
pub const RADIAL_CUTOFF_RATIO: f64 = 1e6;

/// Local log-log slopes at or above this value make a radial tail diverge.
const DIVERGENCE_SLOPE: f64 = -1.0 - 1e-6;

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn legendre_rule(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn gl16() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_ORDER))
}

/// Fixed 16-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let rule = gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive Gauss–Legendre: intervals are halved until the coarse and the
/// refined estimate agree to `rel_tol` relative to the whole integral.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = gauss_legendre(f, a, b);
    let abs_tol = (rel_tol * whole.abs()).max(f64::MIN_POSITIVE);
    refine(f, a, b, whole, abs_tol, 0)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, abs_tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = gauss_legendre(f, a, m);
    let right = gauss_legendre(f, m, b);
    let halves = left + right;
    if (halves - whole).abs() <= abs_tol || depth >= 40 {
        return halves;
    }
    refine(f, a, m, left, 0.5 * abs_tol, depth + 1) + refine(f, m, b, right, 0.5 * abs_tol, depth + 1)
}

/// Integral over `[0, t]` of an integrand that is analytic on `(0, t]` and
/// behaves like a power of the variable at zero.
///
/// The interval is split into dyadic panels `[t/2^(k+1), t/2^k]`, each
/// integrated with the fixed rule. Panels are added until one contributes
/// less than `rel_tol` of the running sum; the remainder is extrapolated as a
/// geometric series in the last panel ratio.
pub fn from_zero<F: Fn(f64) -> f64>(f: &F, t: f64, rel_tol: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut prev = f64::NAN;
    let mut hi = t;
    for _ in 0..1100 {
        let lo = 0.5 * hi;
        let panel = gauss_legendre(f, lo, hi);
        sum += panel;
        if panel.abs() <= rel_tol * sum.abs() {
            let ratio = panel / prev;
            if ratio.is_finite() && ratio.abs() < 1.0 {
                sum += panel * ratio / (1.0 - ratio);
            }
            return sum;
        }
        prev = panel;
        hi = lo;
        if hi < f64::MIN_POSITIVE {
            break;
        }
    }
    sum
}

/// Result of a radial integral over `[rho0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialIntegral {
    pub value: f64,
    /// Part contributed by the power-law extrapolation beyond the cut-off.
    pub extrapolated: f64,
    /// Local log-log slope of the integrand at the cut-off.
    pub slope: f64,
}

/// Integral of `f` over `[rho0, inf)`.
///
/// The finite part `[rho0, RADIAL_CUTOFF_RATIO * rho0]` is integrated
/// adaptively in `x = ln(rho / rho0)` one unit panel at a time; beyond the
/// cut-off the integrand is extended as the power law matching its local
/// log-log slope. A slope of `-1` or above is reported as divergence.
pub fn radial_to_infinity<F: Fn(f64) -> f64>(f: &F, rho0: f64, rel_tol: f64) -> Result<RadialIntegral> {
    if !(rho0 > 0.0 && rho0.is_finite()) {
        return Err(Error::Domain { name: "rho0", value: rho0, reason: "inner radius must be positive and finite" });
    }
    let integrand = |x: f64| {
        let rho = rho0 * x.exp();
        f(rho) * rho
    };
    let x_cut = RADIAL_CUTOFF_RATIO.ln();
    let panels = x_cut.ceil() as usize;
    let width = x_cut / panels as f64;
    let mut parts = Vec::with_capacity(panels);
    for k in 0..panels {
        let a = k as f64 * width;
        parts.push(adaptive(&integrand, a, a + width, rel_tol));
    }
    let finite = pairwise_sum(&parts);
    if !finite.is_finite() {
        return Err(Error::Divergent { slope: f64::NAN });
    }
    let rho_c = rho0 * RADIAL_CUTOFF_RATIO;
    let f_c = f(rho_c);
    let f_half = f(0.5 * rho_c);
    if f_c == 0.0 {
        return Ok(RadialIntegral { value: finite, extrapolated: 0.0, slope: f64::NEG_INFINITY });
    }
    let slope = (f_c.abs() / f_half.abs()).ln() / std::f64::consts::LN_2;
    if !slope.is_finite() || slope >= DIVERGENCE_SLOPE {
        return Err(Error::Divergent { slope });
    }
    let extrapolated = f_c * rho_c / (-slope - 1.0);
    Ok(RadialIntegral { value: finite + extrapolated, extrapolated, slope })
}

/// Surface measure of the unit sphere in `R^n` (2 for `n = 1`).
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n as f64 - 2.0),
    }
}

/// Mean of `f` over the unit sphere in `R^n`, `n <= 3`.
pub fn sphere_mean<F: Fn([f64; 3]) -> f64>(n: usize, f: &F) -> f64 {
    match n {
        1 => 0.5 * (f([1.0, 0.0, 0.0]) + f([-1.0, 0.0, 0.0])),
        2 => {
            const M: usize = 64;
            let vals: Vec<f64> = (0..M)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / M as f64;
                    f([th.cos(), th.sin(), 0.0])
                })
                .collect();
            pairwise_sum(&vals) / M as f64
        }
        _ => {
            const M: usize = 32;
            let rule = gl16();
            let mut acc = 0.0;
            for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                let r = (1.0 - z * z).sqrt();
                let mut ring = 0.0;
                for k in 0..M {
                    let ph = 2.0 * PI * k as f64 / M as f64;
                    ring += f([r * ph.cos(), r * ph.sin(), *z]);
                }
                acc += w * ring / M as f64;
            }
            0.5 * acc
        }
    }
}

/// Pairwise (cascade) summation; the result depends only on the order of
/// `values`, never on how the slice was produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use super::lattice::{distance, norm, Ball, Point};
use crate::error::{Error, Result};
use crate::nfunction::NFunction;
use crate::quad::{adaptive, pairwise_sum, radial_to_infinity, sphere_area, sphere_mean};
use crate::report::{EstimateReport, Tally};
use crate::witness;

/// Relative tolerance of the radial far-field quadrature.
const RADIAL_TOL: f64 = 1e-11;

/// Integral over `R^n` of `term(x, |transform(u(x))|)` restricted to nodes
/// accepted by `keep`, where `u` is the lattice data inside the box and the
/// exterior model outside.
///
/// The region `|x - y| >= rho0` is integrated radially about `y` using the
/// model; lattice nodes in that region then contribute the difference
/// between data and model. `keep` must accept every node with
/// `|x - y| >= rho0`.
fn split_integral(
    f: &GridFunction,
    y: &Point,
    rho0: f64,
    keep: impl Fn(&Point) -> bool,
    term: impl Fn(&Point, f64) -> Result<f64>,
    transform: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let lat = &f.lattice;
    let n = lat.dim();
    let model = &f.exterior;
    let mut parts = Vec::new();
    for (i, &v) in f.values.iter().enumerate() {
        let x = lat.coords(i);
        if !keep(&x) {
            continue;
        }
        let mut t = term(&x, transform(v).abs())?;
        if distance(&x, y) >= rho0 {
            t -= term(&x, transform(model.value(&x)).abs())?;
        }
        parts.push(t);
    }
    let lattice_part = lat.cell_volume() * pairwise_sum(&parts);

    let failure = RefCell::new(None);
    let symmetric = model.constant_value().is_some();
    let value_at = |x: &Point| -> f64 {
        match term(x, transform(model.value(x)).abs()) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let shell = |rho: f64| -> f64 {
        let at = |w: [f64; 3]| {
            let mut x = *y;
            for k in 0..n {
                x[k] += rho * w[k];
            }
            value_at(&x)
        };
        let mean = if symmetric { at([1.0, 0.0, 0.0]) } else { sphere_mean(n, &at) };
        mean * rho.powi(n as i32 - 1)
    };
    let far = if rho0 > 0.0 {
        radial_to_infinity(&shell, rho0, RADIAL_TOL)?.value
    } else {
        adaptive(&shell, 0.0, 1.0, RADIAL_TOL) + radial_to_infinity(&shell, 1.0, RADIAL_TOL)?.value
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(lattice_part + sphere_area(n) * far)
}

fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain { name: "s", value: s, reason: "fractional order must lie in (0, 1)" });
    }
    Ok(())
}

/// `int_{R^n \ excluded} g(|w(x)| / |x - y|^s) |x - y|^{-n-s} dx` with
/// `w = transform(f)`.
///
/// `y` must lie in the interior of `excluded`.
pub fn exterior_integral(
    f: &GridFunction,
    y: &Point,
    excluded: &Ball,
    s: f64,
    nf: &NFunction,
    transform: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    check_order(s)?;
    let gap = distance(y, &excluded.center);
    if gap >= excluded.radius {
        return Err(Error::Precondition(format!(
            "evaluation point at distance {gap} from the centre of an excluded ball of radius {}",
            excluded.radius
        )));
    }
    let n = f.lattice.dim() as f64;
    let slack = f.lattice.slack();
    split_integral(
        f,
        y,
        gap + excluded.radius,
        |x| !excluded.contains(x, slack),
        |x, v| {
            let d = distance(x, y);
            Ok(nf.deriv(v / d.powf(s))? * d.powf(-n - s))
        },
        transform,
    )
}

/// Nonlocal tail `int_{R^n \ B_R(x0)} g(|f(x)| / |x - x0|^s) |x - x0|^{-n-s} dx`.
pub fn tail(f: &GridFunction, x0: &Point, radius: f64, s: f64, nf: &NFunction) -> Result<f64> {
    let ball = Ball { center: *x0, radius };
    if !(radius > 0.0) {
        return Err(Error::Domain { name: "R", value: radius, reason: "must be positive" });
    }
    exterior_integral(f, x0, &ball, s, nf, &|v| v)
}

/// `int_{R^n} g(|f(x)| / (1 + |x|)^s) (1 + |x|)^{-n-s} dx`.
pub fn weighted_integral(f: &GridFunction, s: f64, nf: &NFunction) -> Result<f64> {
    check_order(s)?;
    let n = f.lattice.dim() as f64;
    split_integral(
        f,
        &[0.0; 3],
        0.0,
        |_| true,
        |x, v| {
            let w = 1.0 + norm(x);
            Ok(nf.deriv(v / w.powf(s))? * w.powf(-n - s))
        },
        &|v| v,
    )
}

/// Finiteness of the tail at two centres and of the weighted integral, and
/// the two comparison inequalities relating them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub centers: Vec<Point>,
    pub radius: f64,
    /// `None` where the integral diverges.
    pub tails: Vec<Option<f64>>,
    pub weighted: Option<f64>,
    pub member: bool,
    pub consistency: EstimateReport,
}

fn finite_or_divergent(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) | Err(Error::Divergent { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Evaluates the tail at `x1 = 1.5 e_1` and `x2 = -1.5 e_1` with radius
/// `|x1 - x2| / 4` and the weighted integral, and checks
/// `Tail(x_i) <= (1 + (1 + |x_i|)/R)^{n+sq} W` and
/// `W <= sum_i |x_i|^{n+sq} Tail(x_i)`.
pub fn membership_check(f: &GridFunction, s: f64, nf: &NFunction, tol: f64) -> Result<MembershipReport> {
    check_order(s)?;
    let n = f.lattice.dim() as f64;
    let centers = vec![[1.5, 0.0, 0.0], [-1.5, 0.0, 0.0]];
    let radius = distance(&centers[0], &centers[1]) / 4.0;
    let tails = centers.iter().map(|c| finite_or_divergent(tail(f, c, radius, s, nf))).collect::<Result<Vec<_>>>()?;
    let weighted = finite_or_divergent(weighted_integral(f, s, nf))?;
    let member = weighted.is_some() && tails.iter().all(Option::is_some);
    let mut tally = Tally::new("tail_membership", tol);
    if let Some(w) = weighted {
        let exponent = n + s * nf.q();
        let mut bound = 0.0;
        for (k, (c, t)) in centers.iter().zip(&tails).enumerate() {
            if let Some(t) = t {
                let factor = (1.0 + (1.0 + norm(c)) / radius).powf(exponent);
                tally.record(*t, factor * w, || witness!("center" => k, "weighted" => w));
                bound += norm(c).powf(exponent) * t;
            }
        }
        if member {
            tally.record(w, bound, || witness!("weighted" => w));
        }
    }
    Ok(MembershipReport { centers, radius, tails, weighted, member, consistency: tally.finish() })
}

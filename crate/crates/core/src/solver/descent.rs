use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::NonlocalProblem;
use crate::error::{Error, Result};
use crate::funcspace::GridFunction;

/// Armijo sufficient-decrease constant.
pub const ARMIJO_C1: f64 = 1e-4;
/// Step reduction factor of the backtracking line search.
pub const BACKTRACK: f64 = 0.5;
const MAX_HALVINGS: usize = 80;
/// Relative size below which computed energy differences are rounding noise.
const NOISE: f64 = 1e-12;
/// Largest interior node count for which the full curvature matrix is
/// factorized; larger problems use its diagonal.
const DENSE_LIMIT: usize = 2048;
/// Scaled differences are floored at this fraction of the largest one when
/// evaluating curvature.
const CURVATURE_FLOOR: f64 = 1e-6;
/// Relative step of the central difference for `g'`.
const CURVATURE_STEP: f64 = 1e-3;

/// Descent metric at the current iterate.
enum Metric {
    Dense(nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>),
    Diagonal(Vec<f64>),
}

impl Metric {
    /// `-M^{-1} grad`.
    fn direction(&self, grad: &[f64]) -> Vec<f64> {
        match self {
            Metric::Dense(chol) => (-chol.solve(&DVector::from_column_slice(grad))).as_slice().to_vec(),
            Metric::Diagonal(d) => grad.iter().zip(d).map(|(g, d)| -g / d).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// Zero on the domain.
    #[default]
    ZeroExtension,
    /// Kernel-weighted average of the exterior datum at every interior node.
    HaloHarmonic,
}

/// Descent metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Curvature matrix of the energy at each iterate, unit trial step.
    #[default]
    VariableMetric,
    /// Fixed diagonal of the quadratic Hessian with Barzilai–Borwein steps.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Relative tolerance on the sup-norm of the gradient.
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialGuess,
    pub method: Method,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: 20_000, initial: InitialGuess::ZeroExtension, method: Method::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub minimizer: GridFunction,
    pub final_energy: f64,
    /// Largest weak-form pairing over the indicator basis.
    pub residual_norm: f64,
    /// Absolute residual threshold: `tol * gradient_scale`, or `tol` when
    /// the scale vanishes.
    pub tolerance: f64,
    pub gradient_scale: f64,
    pub iterations: usize,
    /// Rejected trial steps over the whole run.
    pub line_search_failures: usize,
    pub converged: bool,
    pub interior_nodes: usize,
    /// Energy after each accepted step, starting with the initial guess.
    #[serde(skip)]
    pub energy_history: Vec<f64>,
}

impl NonlocalProblem {
    /// `max_i sum_j 2 K h^{2n} d^{-s} g(osc / d^s)` plus the matching far
    /// field term, where `osc` is the oscillation of the datum.
    pub fn gradient_scale(&self) -> Result<f64> {
        let (lo, hi) = self.data_range();
        let osc = hi - lo;
        if osc == 0.0 {
            return Ok(0.0);
        }
        let mut scale = 0.0_f64;
        for links in &self.links {
            let mut acc = 0.0;
            for l in links {
                acc += 2.0 * l.weight * l.inv_ds * self.nf.deriv(osc * l.inv_ds)?;
            }
            let t = osc * self.far.radius.powf(-self.s);
            acc += self.far.coef * self.nf.eval(t)? / (self.s * osc);
            scale = scale.max(acc);
        }
        Ok(scale)
    }

    /// Diagonal of the quadratic (`G = t^2/2`) Hessian.
    fn preconditioner(&self) -> Vec<f64> {
        let far = self.far.coef * self.far.radius.powf(-2.0 * self.s) / (2.0 * self.s);
        self.links
            .iter()
            .map(|links| links.iter().map(|l| 2.0 * l.weight * l.inv_ds * l.inv_ds).sum::<f64>() + far)
            .collect()
    }

    /// Curvature matrix of the energy at `x`, using per pair the larger of
    /// `g'(t)` and the secant `g(t)/t`; the secant majorizes the energy when
    /// `g(t)/t` decreases. Scaled differences are floored at
    /// `CURVATURE_FLOOR` times the largest one, so that the matrix stays
    /// positive definite when `g'` vanishes or blows up at 0.
    fn metric(&self, x: &[f64]) -> Result<Metric> {
        let nf = &self.nf;
        let far_scale = self.far.radius.powf(-self.s);
        let far_t = |a: usize| (x[a] - self.far.model.value(&self.lattice.coords(self.omega[a]))).abs() * far_scale;
        let mut t_max = (0..x.len()).fold(0.0_f64, |m, a| m.max(far_t(a)));
        for (a, links) in self.links.iter().enumerate() {
            for l in links {
                t_max = t_max.max((x[a] - self.value(x, l.j)).abs() * l.inv_ds);
            }
        }
        let floor = if t_max > 0.0 { CURVATURE_FLOOR * t_max } else { 1.0 };
        let curvature = |t: f64| -> Result<f64> {
            let t = t.max(floor);
            let g = nf.deriv(t)?;
            let up = nf.deriv(t * (1.0 + CURVATURE_STEP))?;
            let down = nf.deriv(t * (1.0 - CURVATURE_STEP))?;
            Ok(((up - down) / (2.0 * t * CURVATURE_STEP)).max(g / t))
        };
        let quadratic_far = self.far.coef * far_scale * far_scale / (2.0 * self.s);
        let rows: Vec<(f64, Vec<(usize, f64)>)> = self
            .links
            .par_iter()
            .enumerate()
            .map(|(a, links)| {
                let t = far_t(a).max(floor);
                let (big_g, g) = (nf.eval(t)?, nf.deriv(t)?);
                let mut diag = quadratic_far * 2.0 * big_g.max(g * t - big_g) / (t * t);
                let mut off = Vec::new();
                for l in links {
                    let t = (x[a] - self.value(x, l.j)).abs() * l.inv_ds;
                    let w = 2.0 * curvature(t)? * l.inv_ds * l.inv_ds * l.weight;
                    diag += w;
                    if let Some(b) = self.slot[l.j] {
                        off.push((b, w));
                    }
                }
                Ok((diag, off))
            })
            .collect::<Result<_>>()?;
        let n = x.len();
        if n > DENSE_LIMIT {
            return Ok(Metric::Diagonal(rows.into_iter().map(|r| r.0).collect()));
        }
        let mut m = DMatrix::zeros(n, n);
        for (a, (diag, off)) in rows.iter().enumerate() {
            m[(a, a)] += diag;
            for &(b, w) in off {
                m[(a, b)] -= w;
            }
        }
        match m.cholesky() {
            Some(chol) => Ok(Metric::Dense(chol)),
            None => Ok(Metric::Diagonal(rows.into_iter().map(|r| r.0).collect())),
        }
    }

    fn initial_values(&self, guess: InitialGuess) -> Vec<f64> {
        match guess {
            InitialGuess::ZeroExtension => vec![0.0; self.omega.len()],
            InitialGuess::HaloHarmonic => {
                let far_w = self.far.coef * self.far.radius.powf(-2.0 * self.s) / (2.0 * self.s);
                let far_m = self.far.model.constant_value();
                self.links
                    .iter()
                    .map(|links| {
                        let (mut num, mut den) = (0.0, 0.0);
                        for l in links.iter().filter(|l| !l.interior) {
                            let w = l.weight * l.inv_ds * l.inv_ds;
                            num += w * self.datum.values[l.j];
                            den += w;
                        }
                        if let Some(m) = far_m {
                            num += far_w * m;
                            den += far_w;
                        }
                        if den > 0.0 {
                            num / den
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        x: &[f64],
        energy: f64,
        tolerance: f64,
        gradient_scale: f64,
        iterations: usize,
        failures: usize,
        history: Vec<f64>,
    ) -> Result<SolveReport> {
        let minimizer = self.extend(x)?;
        let residual_norm = self.weak_residual(&minimizer)?;
        Ok(SolveReport {
            minimizer,
            final_energy: energy,
            residual_norm,
            tolerance,
            gradient_scale,
            iterations,
            line_search_failures: failures,
            converged: residual_norm <= tolerance,
            interior_nodes: self.omega.len(),
            energy_history: history,
        })
    }

    /// Minimizes the energy over admissible functions by descent in the
    /// metric selected by `opts.method` with Armijo backtracking; a single
    /// interior node is handled by bisection on the derivative.
    pub fn solve(&self, opts: &SolveOptions) -> Result<SolveReport> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("solver tolerance {} must be positive", opts.tol)));
        }
        let scale = self.gradient_scale()?;
        let threshold = if scale > 0.0 { opts.tol * scale } else { opts.tol };
        let mut x = self.initial_values(opts.initial);
        if self.omega.len() == 1 {
            return self.solve_scalar(x[0], threshold, scale, opts);
        }
        let diag = self.preconditioner();
        let mut energy = self.energy_of(&x)?;
        let mut history = vec![energy];
        let mut grad = self.gradient_of(&x)?;
        let mut failures = 0;
        let mut alpha = 1.0;
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        for iter in 0..=opts.max_iter {
            let res = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
            if res <= threshold {
                let rep = self.report(&x, energy, threshold, scale, iter, failures, history.clone())?;
                if rep.converged {
                    return Ok(rep);
                }
            }
            if iter == opts.max_iter {
                break;
            }
            let metric = match opts.method {
                Method::VariableMetric => self.metric(&x)?,
                Method::Diagonal => Metric::Diagonal(diag.clone()),
            };
            let dir = metric.direction(&grad);
            match (&metric, &prev) {
                (Metric::Dense(_), _) => alpha = 1.0,
                (Metric::Diagonal(d), Some((px, pg))) => {
                    let (mut sds, mut sy) = (0.0, 0.0);
                    for a in 0..x.len() {
                        let s = x[a] - px[a];
                        sds += s * s * d[a];
                        sy += s * (grad[a] - pg[a]);
                    }
                    if sy > 0.0 && sds > 0.0 {
                        alpha = (sds / sy).clamp(1e-12, 1e12);
                    } else {
                        alpha = (2.0 * alpha).min(1e12);
                    }
                }
                (Metric::Diagonal(_), None) => {}
            }
            let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
                if trial == x {
                    break;
                }
                let bound = ARMIJO_C1 * alpha * slope;
                match self.energy_delta_of(&x, &trial) {
                    Ok(delta) if delta <= bound => {
                        accepted = Some((trial, delta, None));
                        break;
                    }
                    Ok(delta) if delta.abs() <= NOISE * energy.abs() => {
                        // below rounding: test E'(alpha) <= c1 E'(0) instead,
                        // which implies the Armijo condition for convex E
                        let g = self.gradient_of(&trial)?;
                        let d_trial: f64 = g.iter().zip(&dir).map(|(g, d)| g * d).sum();
                        if d_trial <= ARMIJO_C1 * slope {
                            accepted = Some((trial, delta, Some(g)));
                            break;
                        }
                        alpha *= BACKTRACK;
                        failures += 1;
                    }
                    Ok(_) | Err(Error::Overflow(_)) | Err(Error::OutOfTable { .. }) => {
                        alpha *= BACKTRACK;
                        failures += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
            let Some((trial, delta, g)) = accepted else {
                let rep = self.report(&x, energy, threshold, scale, iter, failures, history)?;
                return Err(Error::Stagnation(Box::new(rep)));
            };
            energy += delta;
            history.push(energy);
            let new_grad = match g {
                Some(g) => g,
                None => self.gradient_of(&trial)?,
            };
            prev = Some((std::mem::replace(&mut x, trial), std::mem::replace(&mut grad, new_grad)));
        }
        let rep = self.report(&x, energy, threshold, scale, opts.max_iter, failures, history)?;
        Err(Error::NotConverged(Box::new(rep)))
    }

    fn solve_scalar(&self, start: f64, threshold: f64, scale: f64, opts: &SolveOptions) -> Result<SolveReport> {
        let deriv = |v: f64| -> Result<f64> { Ok(self.gradient_of(&[v])?[0]) };
        let (lo0, hi0) = self.data_range();
        let (mut lo, mut hi) = (lo0.min(start), hi0.max(start));
        let mut width = (hi - lo).max(1.0);
        while deriv(lo)? > 0.0 {
            lo -= width;
            width *= 2.0;
        }
        width = (hi - lo).max(1.0);
        while deriv(hi)? < 0.0 {
            hi += width;
            width *= 2.0;
        }
        let mut iterations = 0;
        let mut v = 0.5 * (lo + hi);
        while iterations < opts.max_iter {
            let g = deriv(v)?;
            if g.abs() <= threshold {
                break;
            }
            if g > 0.0 {
                hi = v;
            } else {
                lo = v;
            }
            let mid = 0.5 * (lo + hi);
            iterations += 1;
            if mid <= lo || mid >= hi {
                break;
            }
            v = mid;
        }
        let first = self.energy_of(&[start])?;
        let energy = self.energy_of(&[v])?;
        let rep = self.report(&[v], energy, threshold, scale, iterations, 0, vec![first, energy])?;
        if rep.converged {
            Ok(rep)
        } else {
            Err(Error::NotConverged(Box::new(rep)))
        }
    }
}

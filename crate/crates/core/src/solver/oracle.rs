//! Direct linear solve for the quadratic case `G(t) = c t^2 / 2`.

use nalgebra::{DMatrix, DVector};

use super::problem::NonlocalProblem;
use crate::error::{Error, Result};
use crate::funcspace::GridFunction;
use crate::nfunction::GrowthFunction;

/// `(A, b)` with `gradient(v) = A x - b` for interior values `x`.
///
/// Requires a quadratic N-function and a constant exterior model.
pub fn assemble_quadratic(prob: &NonlocalProblem) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let c = match prob.nf.family() {
        GrowthFunction::Power { p, scale } if *p == 2.0 => *scale,
        _ => return Err(Error::Precondition("the linear oracle needs G(t) = c t^2 / 2".into())),
    };
    let m = prob
        .far
        .model
        .constant_value()
        .ok_or_else(|| Error::Precondition("the linear oracle needs a constant exterior model".into()))?;
    let n = prob.omega.len();
    let far = c * prob.far.coef * prob.far.radius.powf(-2.0 * prob.s) / (2.0 * prob.s);
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for (i, links) in prob.links.iter().enumerate() {
        for l in links {
            let w = 2.0 * c * l.weight * l.inv_ds * l.inv_ds;
            a[(i, i)] += w;
            match prob.slot[l.j] {
                Some(j) => a[(i, j)] -= w,
                None => b[i] += w * prob.datum.values[l.j],
            }
        }
        a[(i, i)] += far;
        b[i] += far * m;
    }
    Ok((a, b))
}

/// Minimizer of the quadratic energy by LU factorization.
pub fn solve_quadratic(prob: &NonlocalProblem) -> Result<GridFunction> {
    let (a, b) = assemble_quadratic(prob)?;
    let x = a.lu().solve(&b).ok_or_else(|| Error::Precondition("singular quadratic system".into()))?;
    prob.extend(x.as_slice())
}

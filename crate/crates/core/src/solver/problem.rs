use std::sync::Arc;

use crate::error::{Error, Result};
use crate::funcspace::lattice::{distance, Lattice, Point, Region};
use crate::funcspace::{ExteriorModel, GridFunction, Kernel};
use crate::nfunction::NFunction;
use crate::quad::{radial_to_infinity, sphere_area, sphere_mean};

/// Default truncation radius in units of the domain diameter.
pub const DEFAULT_TRUNCATION_FACTOR: f64 = 8.0;

const FAR_TOL: f64 = 1e-11;

/// Exterior data prescribed on the halo nodes.
pub type DataFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Everything needed to assemble a [`NonlocalProblem`].
#[derive(Clone)]
pub struct ProblemSpec {
    pub dim: usize,
    pub h: f64,
    pub omega: Region,
    pub s: f64,
    pub nf: NFunction,
    pub kernel: Kernel,
    /// Model of the datum beyond the truncation radius.
    pub exterior: ExteriorModel,
    /// Datum on halo nodes; the exterior model when `None`.
    pub data: Option<DataFn>,
    /// Interactions beyond this distance are replaced by the analytic far
    /// field; defaults to `8 * diam(omega)`.
    pub truncation_radius: Option<f64>,
}

/// One neighbour `j` of an interior node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Link {
    pub j: usize,
    /// `a(x_i, x_j) d^{-n} h^{2n}`.
    pub weight: f64,
    /// `d^{-s}`.
    pub inv_ds: f64,
    pub interior: bool,
}

/// Analytic contribution of pairs `(x_i, y)` with `|x_i - y| > R_ext`,
/// counted in both orders, using the exterior model for `u(y)`.
#[derive(Debug, Clone)]
pub(crate) struct FarField {
    /// `2 h^n a_far |S^{n-1}|`.
    pub coef: f64,
    pub radius: f64,
    pub s: f64,
    pub dim: usize,
    pub model: ExteriorModel,
}

impl FarField {
    fn shell<F: Fn(f64) -> f64>(&self, x: &Point, rho: f64, f: F) -> f64 {
        match self.model.constant_value() {
            Some(m) => f(m),
            None => {
                let at = |w: [f64; 3]| {
                    let mut y = *x;
                    for k in 0..self.dim {
                        y[k] += rho * w[k];
                    }
                    f(self.model.value(&y))
                };
                sphere_mean(self.dim, &at)
            }
        }
    }

    fn radial(&self, integrand: impl Fn(f64) -> f64) -> Result<f64> {
        Ok(radial_to_infinity(&integrand, self.radius, FAR_TOL)?.value)
    }

    /// `coef * int_R^inf G(|v - m| / rho^s) rho^{-1} d rho`.
    pub fn energy(&self, nf: &NFunction, x: &Point, v: f64) -> Result<f64> {
        if let Some(m) = self.model.constant_value() {
            let t = (v - m).abs() / self.radius.powf(self.s);
            return Ok(self.coef * nf.log_moment(t)? / self.s);
        }
        let val = self.radial(|rho| {
            let ds = rho.powf(-self.s);
            self.shell(x, rho, |m| nf.eval_unchecked((v - m).abs() * ds)) / rho
        })?;
        Ok(self.coef * val)
    }

    pub fn delta(&self, nf: &NFunction, x: &Point, new: f64, old: f64) -> Result<f64> {
        if new == old {
            return Ok(0.0);
        }
        if let Some(m) = self.model.constant_value() {
            let rs = self.radius.powf(-self.s);
            let (a, b) = ((new - m).abs() * rs, (old - m).abs() * rs);
            nf.log_moment(a.max(b))?;
            return Ok(self.coef * nf.log_moment_increment_unchecked(a, b) / self.s);
        }
        let val = self.radial(|rho| {
            let ds = rho.powf(-self.s);
            self.shell(x, rho, |m| nf.increment_unchecked((new - m).abs() * ds, (old - m).abs() * ds)) / rho
        })?;
        Ok(self.coef * val)
    }

    /// Derivative of [`FarField::energy`] in `v`.
    pub fn derivative(&self, nf: &NFunction, x: &Point, v: f64) -> Result<f64> {
        if let Some(m) = self.model.constant_value() {
            if v == m {
                return Ok(0.0);
            }
            let t = (v - m).abs() / self.radius.powf(self.s);
            return Ok(self.coef * (v - m).signum() * nf.eval(t)? / (self.s * (v - m).abs()));
        }
        let val = self.radial(|rho| {
            let ds = rho.powf(-self.s);
            self.shell(x, rho, |m| (v - m).signum() * nf.deriv_unchecked((v - m).abs() * ds)) * ds / rho
        })?;
        Ok(self.coef * val)
    }
}

/// A discrete Dirichlet problem: minimize the nonlocal energy over grid
/// functions that agree with the datum off `omega`.
#[derive(Debug, Clone)]
pub struct NonlocalProblem {
    pub(crate) lattice: Lattice,
    pub(crate) region: Region,
    pub(crate) omega: Vec<usize>,
    pub(crate) slot: Vec<Option<usize>>,
    pub(crate) datum: GridFunction,
    pub(crate) nf: NFunction,
    pub(crate) kernel: Kernel,
    pub(crate) s: f64,
    pub(crate) truncation_radius: f64,
    pub(crate) links: Vec<Vec<Link>>,
    pub(crate) far: FarField,
}

impl NonlocalProblem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let ProblemSpec { dim, h, omega, s, nf, kernel, exterior, data, truncation_radius } = spec;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain { name: "s", value: s, reason: "fractional order must lie in (0, 1)" });
        }
        exterior.validate()?;
        let (lo, hi) = omega.bounds();
        let diam = diameter(&omega, dim).max(h);
        let r_ext = truncation_radius.unwrap_or(DEFAULT_TRUNCATION_FACTOR * diam);
        if !(r_ext >= diam && r_ext.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "truncation radius {r_ext} must be finite and at least the domain diameter {diam}"
            )));
        }
        let min: Vec<f64> = (0..dim).map(|k| lo[k] - r_ext).collect();
        let max: Vec<f64> = (0..dim).map(|k| hi[k] + r_ext).collect();
        let lattice = Lattice::covering(dim, h, &min, &max)?;
        let omega_nodes = lattice.nodes_in(&omega);
        if omega_nodes.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let mut slot = vec![None; lattice.len()];
        for (a, &i) in omega_nodes.iter().enumerate() {
            slot[i] = Some(a);
        }
        let datum = {
            let data = data.clone();
            let model = exterior.clone();
            GridFunction::from_fn(lattice.clone(), exterior.clone(), move |x| match &data {
                Some(d) => d(x),
                None => model.value(x),
            })?
        };
        let n = dim as i32;
        let vol2 = lattice.cell_volume() * lattice.cell_volume();
        let slack = lattice.slack();
        let links = omega_nodes
            .iter()
            .map(|&i| {
                let x = lattice.coords(i);
                (0..lattice.len())
                    .filter(|&j| j != i)
                    .filter_map(|j| {
                        let y = lattice.coords(j);
                        let d = distance(&x, &y);
                        (d <= r_ext + slack).then(|| Link {
                            j,
                            weight: kernel.coefficient(&x, &y) * d.powi(-n) * vol2,
                            inv_ds: d.powf(-s),
                            interior: slot[j].is_some(),
                        })
                    })
                    .collect()
            })
            .collect();
        let far = FarField {
            coef: 2.0 * lattice.cell_volume() * kernel.far_coefficient() * sphere_area(dim),
            radius: r_ext,
            s,
            dim,
            model: exterior,
        };
        Ok(NonlocalProblem {
            lattice,
            region: omega,
            omega: omega_nodes,
            slot,
            datum,
            nf,
            kernel,
            s,
            truncation_radius: r_ext,
            links,
            far,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    /// The domain as a region of space.
    pub fn domain(&self) -> &Region {
        &self.region
    }
    /// Lattice indices of the interior nodes, increasing.
    pub fn omega(&self) -> &[usize] {
        &self.omega
    }
    pub fn is_interior(&self, i: usize) -> bool {
        self.slot[i].is_some()
    }
    /// Datum on every node (interior values are the exterior model's).
    pub fn datum(&self) -> &GridFunction {
        &self.datum
    }
    pub fn nfunction(&self) -> &NFunction {
        &self.nf
    }
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }
    pub fn exterior(&self) -> &ExteriorModel {
        &self.far.model
    }

    /// Admissible function with the given interior values.
    pub fn extend(&self, interior: &[f64]) -> Result<GridFunction> {
        if interior.len() != self.omega.len() {
            return Err(Error::Inadmissible(format!(
                "{} interior values for {} interior nodes",
                interior.len(),
                self.omega.len()
            )));
        }
        let mut v = self.datum.clone();
        for (&i, &x) in self.omega.iter().zip(interior) {
            v.values[i] = x;
        }
        GridFunction::new(v.lattice, v.values, v.exterior)
    }

    pub fn interior_values(&self, v: &GridFunction) -> Vec<f64> {
        self.omega.iter().map(|&i| v.values[i]).collect()
    }

    /// Checks that `v` lives on the problem lattice and equals the datum
    /// on every halo node.
    pub fn check_admissible(&self, v: &GridFunction) -> Result<()> {
        if v.lattice != self.lattice {
            return Err(Error::Inadmissible("grid function lives on a different lattice".into()));
        }
        for (i, (a, b)) in v.values.iter().zip(&self.datum.values).enumerate() {
            if self.slot[i].is_none() && a != b {
                return Err(Error::Inadmissible(format!("value {a} at halo node {i} differs from the datum {b}")));
            }
        }
        if v.exterior != self.far.model {
            return Err(Error::Inadmissible("exterior model differs from the datum".into()));
        }
        Ok(())
    }

    /// Range `[min, max]` of the datum over halo nodes and a constant model.
    pub fn data_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &v) in self.datum.values.iter().enumerate() {
            if self.slot[i].is_none() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if let Some(m) = self.far.model.constant_value() {
            lo = lo.min(m);
            hi = hi.max(m);
        }
        (lo, hi)
    }
}

fn diameter(region: &Region, dim: usize) -> f64 {
    match region {
        Region::Ball(b) => 2.0 * b.radius,
        Region::Box { lo, hi } => (0..dim).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt(),
    }
}

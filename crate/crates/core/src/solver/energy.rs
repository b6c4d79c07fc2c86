use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::NonlocalProblem;
use crate::error::Result;
use crate::funcspace::GridFunction;
use crate::quad::pairwise_sum;

impl NonlocalProblem {
    /// Value at lattice node `j` of the admissible function with interior
    /// values `x`.
    #[inline]
    pub(crate) fn value(&self, x: &[f64], j: usize) -> f64 {
        match self.slot[j] {
            Some(a) => x[a],
            None => self.datum.values[j],
        }
    }

    fn multiplicity(interior: bool) -> f64 {
        if interior {
            1.0
        } else {
            2.0
        }
    }

    pub(crate) fn energy_of(&self, x: &[f64]) -> Result<f64> {
        let nf = &self.nf;
        let parts: Vec<f64> = self
            .omega
            .par_iter()
            .enumerate()
            .map(|(a, &i)| {
                let vi = x[a];
                let mut row = Vec::with_capacity(self.links[a].len() + 1);
                for l in &self.links[a] {
                    let t = (vi - self.value(x, l.j)).abs() * l.inv_ds;
                    row.push(Self::multiplicity(l.interior) * nf.eval(t)? * l.weight);
                }
                row.push(self.far.energy(nf, &self.lattice.coords(i), vi)?);
                Ok(pairwise_sum(&row))
            })
            .collect::<Result<_>>()?;
        Ok(pairwise_sum(&parts))
    }

    /// `E(y) - E(x)` summed from per-pair increments, accurate relative to
    /// the difference itself.
    pub(crate) fn energy_delta_of(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let nf = &self.nf;
        let parts: Vec<f64> = self
            .omega
            .par_iter()
            .enumerate()
            .map(|(a, &i)| {
                let mut row = Vec::with_capacity(self.links[a].len() + 1);
                for l in &self.links[a] {
                    let new = (y[a] - self.value(y, l.j)).abs() * l.inv_ds;
                    let old = (x[a] - self.value(x, l.j)).abs() * l.inv_ds;
                    if new != old {
                        nf.eval(new.max(old))?;
                        row.push(Self::multiplicity(l.interior) * nf.increment_unchecked(new, old) * l.weight);
                    }
                }
                row.push(self.far.delta(nf, &self.lattice.coords(i), y[a], x[a])?);
                Ok(pairwise_sum(&row))
            })
            .collect::<Result<_>>()?;
        Ok(pairwise_sum(&parts))
    }

    pub(crate) fn gradient_of(&self, x: &[f64]) -> Result<Vec<f64>> {
        let nf = &self.nf;
        self.omega
            .par_iter()
            .enumerate()
            .map(|(a, &i)| {
                let vi = x[a];
                let mut row = Vec::with_capacity(self.links[a].len());
                for l in &self.links[a] {
                    let diff = vi - self.value(x, l.j);
                    if diff != 0.0 {
                        row.push(diff.signum() * nf.deriv(diff.abs() * l.inv_ds)? * l.inv_ds * l.weight);
                    }
                }
                Ok(2.0 * pairwise_sum(&row) + self.far.derivative(nf, &self.lattice.coords(i), vi)?)
            })
            .collect()
    }

    /// Pairing `sum_{ordered pairs} g(|dv|/d^s) sign(dv) d^{-s} K h^{2n}`
    /// against every indicator of an interior node, assembled pair by pair.
    pub(crate) fn weak_form_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        let nf = &self.nf;
        let mut r = vec![0.0; self.omega.len()];
        for (a, &i) in self.omega.iter().enumerate() {
            for l in &self.links[a] {
                let diff = x[a] - self.value(x, l.j);
                if diff == 0.0 {
                    continue;
                }
                let flux = diff.signum() * nf.deriv(diff.abs() * l.inv_ds)? * l.inv_ds * l.weight;
                // ordered pair (x_i, x_j): eta(x_i) - eta(x_j)
                r[a] += flux;
                match self.slot[l.j] {
                    Some(b) => r[b] -= flux,
                    // pair (x_j, x_i) with x_j outside the domain
                    None => r[a] += flux,
                }
            }
            r[a] += self.far.derivative(nf, &self.lattice.coords(i), x[a])?;
        }
        Ok(r)
    }

    /// Discrete energy
    /// `sum_{i != j, i or j in omega, d <= R_ext} G(|v_i - v_j| / d^s) K h^{2n}`
    /// over ordered pairs, plus the far-field term.
    pub fn energy(&self, v: &GridFunction) -> Result<f64> {
        self.check_admissible(v)?;
        self.energy_of(&self.interior_values(v))
    }

    /// `energy(w) - energy(v)`, accurate for nearby arguments.
    pub fn energy_delta(&self, v: &GridFunction, w: &GridFunction) -> Result<f64> {
        self.check_admissible(v)?;
        self.check_admissible(w)?;
        self.energy_delta_of(&self.interior_values(v), &self.interior_values(w))
    }

    /// Partial derivatives of the energy with respect to the interior
    /// values, in the order of [`NonlocalProblem::omega`].
    pub fn gradient(&self, v: &GridFunction) -> Result<Vec<f64>> {
        self.check_admissible(v)?;
        self.gradient_of(&self.interior_values(v))
    }

    /// Weak-form pairing of `v` against the test function `eta`, given by
    /// its interior values.
    pub fn weak_form(&self, v: &GridFunction, eta: &[f64]) -> Result<f64> {
        self.check_admissible(v)?;
        let r = self.weak_form_vector(&self.interior_values(v))?;
        Ok(pairwise_sum(&r.iter().zip(eta).map(|(a, b)| a * b).collect::<Vec<_>>()))
    }

    /// Largest weak-form pairing over the indicator basis of interior nodes.
    pub fn weak_residual(&self, v: &GridFunction) -> Result<f64> {
        self.check_admissible(v)?;
        let r = self.weak_form_vector(&self.interior_values(v))?;
        Ok(r.iter().fold(0.0, |m, x| m.max(x.abs())))
    }

    /// Samples `E(theta v1 + (1 - theta) v2) <= theta E(v1) + (1 - theta) E(v2)`.
    pub fn convexity_probe(&self, v1: &GridFunction, v2: &GridFunction, thetas: &[f64]) -> Result<ConvexityProbe> {
        self.check_admissible(v1)?;
        self.check_admissible(v2)?;
        let (x1, x2) = (self.interior_values(v1), self.interior_values(v2));
        let distinct = x1 != x2;
        let (e1, e2) = (self.energy_of(&x1)?, self.energy_of(&x2)?);
        let mut samples = Vec::with_capacity(thetas.len());
        for &theta in thetas {
            let mix: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
            // E(mix) - chord, both differences taken against x2 so that the
            // defect does not suffer cancellation between large energies
            let d_mix = self.energy_delta_of(&x2, &mix)?;
            let d_1 = self.energy_delta_of(&x2, &x1)?;
            let defect = theta * d_1 - d_mix;
            let energy = e2 + d_mix;
            samples.push(ConvexitySample { theta, energy, chord: theta * e1 + (1.0 - theta) * e2, defect });
        }
        let interior = |t: f64| t > 0.0 && t < 1.0;
        let strict = !distinct || samples.iter().filter(|c| interior(c.theta)).all(|c| c.defect > 0.0);
        let convex = samples.iter().all(|c| c.defect >= -1e-12 * c.chord.abs().max(f64::MIN_POSITIVE));
        Ok(ConvexityProbe { distinct, samples, convex, strict })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexitySample {
    pub theta: f64,
    pub energy: f64,
    pub chord: f64,
    /// `chord - energy`.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityProbe {
    /// Whether the two functions differ on the domain.
    pub distinct: bool,
    pub samples: Vec<ConvexitySample>,
    pub convex: bool,
    /// Positive defect at every interior `theta` when `distinct`.
    pub strict: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::lattice::{distance, Region};
    use crate::funcspace::{ExteriorModel, Kernel};
    use crate::nfunction::NFunction;
    use crate::quad::sphere_area;
    use crate::solver::problem::ProblemSpec;
    use std::sync::Arc;

    fn problem(nf: NFunction, data: bool) -> NonlocalProblem {
        NonlocalProblem::new(ProblemSpec {
            dim: 1,
            h: 0.25,
            omega: Region::Box { lo: [0.0; 3], hi: [0.5, 0.0, 0.0] },
            s: 0.4,
            nf,
            kernel: Kernel::Pure,
            exterior: ExteriorModel::Constant { value: 0.5 },
            data: data.then(|| Arc::new(|x: &crate::funcspace::Point| 0.5 + 0.3 * (2.0 * x[0]).sin()) as _),
            truncation_radius: Some(1.0),
        })
        .unwrap()
    }

    #[test]
    fn constant_state_has_zero_energy_and_gradient() {
        let p = problem(NFunction::power(3.0).unwrap(), false);
        let v = p.extend(&vec![0.5; p.omega().len()]).unwrap();
        assert_eq!(p.energy(&v).unwrap(), 0.0);
        assert!(p.gradient(&v).unwrap().iter().all(|g| *g == 0.0));
        assert_eq!(p.weak_residual(&v).unwrap(), 0.0);
    }

    #[test]
    fn energy_by_pair_enumeration() {
        let nf = NFunction::power(2.5).unwrap();
        let p = problem(nf.clone(), true);
        let x = [0.1, -0.4, 0.9];
        let v = p.extend(&x).unwrap();
        let lat = p.lattice();
        let mut e = 0.0;
        for i in 0..lat.len() {
            for j in 0..lat.len() {
                let (xi, xj) = (lat.coords(i), lat.coords(j));
                let d = distance(&xi, &xj);
                let relevant = p.is_interior(i) || p.is_interior(j);
                if i == j || !relevant || d > 1.0 + 1e-12 {
                    continue;
                }
                e += nf.eval((v.values[i] - v.values[j]).abs() / d.powf(0.4)).unwrap() / d * 0.0625;
            }
        }
        // far field: 2 h |S^0| int_1^inf G(|v - 1/2| rho^{-s}) rho^{-1} d rho, G = t^{2.5}/2.5
        for &xi in &x {
            let t = (xi - 0.5_f64).abs();
            e += 2.0 * 0.25 * sphere_area(1) * t.powf(2.5) / 2.5 / (2.5 * 0.4);
        }
        let got = p.energy(&v).unwrap();
        assert!((got / e - 1.0).abs() < 1e-13, "{got} vs {e}");
    }

    #[test]
    fn gradient_matches_weak_form_and_delta() {
        for nf in [NFunction::power(1.5).unwrap(), NFunction::power_log(2.0).unwrap()] {
            let p = problem(nf, true);
            let x = [0.2, 0.7, -0.3];
            let v = p.extend(&x).unwrap();
            let g = p.gradient(&v).unwrap();
            let r = p.weak_form_vector(&x).unwrap();
            for (a, b) in g.iter().zip(&r) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
            let step = 1e-6;
            for k in 0..3 {
                let mut hi = x;
                let mut lo = x;
                hi[k] += step;
                lo[k] -= step;
                let fd = p.energy_delta_of(&lo, &hi).unwrap() / (2.0 * step);
                assert!((fd - g[k]).abs() <= 1e-7 * g[k].abs(), "{fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn quadratic_convexity_defect_is_exact() {
        let nf = NFunction::power(2.0).unwrap();
        let p = problem(nf.clone(), true);
        let v1 = p.extend(&[0.3, 0.1, 0.8]).unwrap();
        let v2 = p.extend(&[-0.2, 0.5, 0.4]).unwrap();
        let probe = p.convexity_probe(&v1, &v2, &[0.0, 0.25, 0.5, 0.9, 1.0]).unwrap();
        assert!(probe.convex && probe.strict && probe.distinct);
        // defect = theta (1 - theta) E_0(v1 - v2) with homogeneous data
        let mut zero = problem(nf, false);
        zero.datum = zero.datum.scaled(0.0);
        zero.far.model = ExteriorModel::Zero;
        let diff: Vec<f64> = [0.5, -0.4, 0.4].to_vec();
        let q = zero.energy_of(&diff).unwrap();
        for c in &probe.samples {
            let want = c.theta * (1.0 - c.theta) * q;
            assert!((c.defect - want).abs() <= 1e-12 * q, "{} vs {want}", c.defect);
        }
        let same = p.convexity_probe(&v1, &v1, &[0.5]).unwrap();
        assert!(!same.distinct && same.samples[0].defect == 0.0);
    }
}

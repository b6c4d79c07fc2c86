//! Seeded families of grid functions for inequality fuzzing.

use std::f64::consts::PI;

use fracg::funcspace::lattice::{distance, point};
use fracg::funcspace::{ExteriorModel, GridFunction, Lattice, Point};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub dim: usize,
    pub h: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<Lattice, CliError> {
        if self.lo.len() != self.dim || self.hi.len() != self.dim {
            return Err(CliError::schema("corpus lattice bounds need one entry per axis"));
        }
        Ok(Lattice::covering(self.dim, self.h, &self.lo, &self.hi)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusFamily {
    /// Sums of random cosine modes with decaying amplitudes.
    RandomSmooth {
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// `|x - center|^gamma`; `gamma` uniform in `[0.1, 0.9]` when omitted.
    PowerCusp {
        center: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
    /// `high` on a random ball about a node, `low` elsewhere.
    TwoLevel { low: f64, high: f64 },
}

fn default_modes() -> usize {
    4
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub family: CorpusFamily,
    pub count: usize,
    pub lattice: LatticeSpec,
}

/// `sum_k a_k cos(2 pi <w_k, x> / period + phi_k) / k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothField {
    modes: Vec<(f64, Point, f64)>,
    period: f64,
}

impl SmoothField {
    pub fn sample(rng: &mut impl Rng, dim: usize, modes: usize, amplitude: f64, period: f64) -> Self {
        let modes = (1..=modes)
            .map(|k| {
                let a = amplitude * rng.random_range(-1.0..=1.0) / k as f64;
                let mut w = [0.0; 3];
                for c in w.iter_mut().take(dim) {
                    *c = rng.random_range(-(k as f64)..=k as f64);
                }
                (a, w, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        SmoothField { modes, period }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.modes
            .iter()
            .map(|(a, w, phi)| {
                let dot: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
                a * (2.0 * PI * dot / self.period + phi).cos()
            })
            .sum()
    }
}

/// `spec.count` functions with zero exterior model, identical for identical
/// seeds.
pub fn generate_corpus(spec: &CorpusSpec, seed: u64) -> Result<Vec<GridFunction>, CliError> {
    let lat = spec.lattice.build()?;
    let dim = lat.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (lat.coords(0), lat.coords(lat.len() - 1));
    let extent = (0..dim).map(|k| hi[k] - lo[k]).fold(0.0_f64, f64::max);
    let build = |f: &dyn Fn(&Point) -> f64| -> Result<GridFunction, CliError> {
        Ok(GridFunction::from_fn(lat.clone(), ExteriorModel::Zero, f)?)
    };
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let g = match &spec.family {
            CorpusFamily::RandomSmooth { modes, amplitude } => {
                let period = extent.max(lat.h());
                let field = SmoothField::sample(&mut rng, dim, *modes, *amplitude, period);
                build(&|x| field.eval(x))?
            }
            CorpusFamily::PowerCusp { center, gamma } => {
                if center.len() != dim {
                    return Err(CliError::schema("power_cusp center needs one entry per axis"));
                }
                let c = point(center);
                let gamma = gamma.unwrap_or_else(|| rng.random_range(0.1..=0.9));
                if !(gamma > 0.0) {
                    return Err(CliError::schema("power_cusp gamma must be positive"));
                }
                build(&|x| distance(x, &c).powf(gamma))?
            }
            CorpusFamily::TwoLevel { low, high } => {
                if low == high || lat.len() < 2 {
                    return Err(CliError::schema("two_level needs distinct levels and at least two nodes"));
                }
                let c = lat.coords(rng.random_range(0..lat.len()));
                let r = rng.random_range(0.0..0.25 * extent);
                build(&|x| if distance(x, &c) <= r { *high } else { *low })?
            }
        };
        out.push(g);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: CorpusFamily, count: usize) -> CorpusSpec {
        CorpusSpec { family, count, lattice: LatticeSpec { dim: 2, h: 0.25, lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] } }
    }

    #[test]
    fn two_level_functions_take_exactly_two_values() {
        for f in generate_corpus(&spec(CorpusFamily::TwoLevel { low: -1.0, high: 2.0 }, 50), 3).unwrap() {
            assert!(f.values.contains(&-1.0));
            assert!(f.values.contains(&2.0));
            assert!(f.values.iter().all(|&v| v == -1.0 || v == 2.0));
        }
    }

    #[test]
    fn power_cusp_oscillation_matches_closed_form() {
        let s = CorpusSpec {
            family: CorpusFamily::PowerCusp { center: vec![0.0], gamma: Some(0.5) },
            count: 1,
            lattice: LatticeSpec { dim: 1, h: 1.0 / 64.0, lo: vec![-1.0], hi: vec![1.0] },
        };
        let f = &generate_corpus(&s, 0).unwrap()[0];
        for r in [0.125, 0.25, 0.5, 1.0] {
            let osc = (0..f.lattice.len())
                .filter(|&i| f.lattice.coords(i)[0].abs() <= r + 1e-12)
                .map(|i| f.values[i])
                .fold(0.0_f64, f64::max);
            assert!((osc - r.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let s = spec(CorpusFamily::RandomSmooth { modes: 5, amplitude: 1.0 }, 8);
        let a = generate_corpus(&s, 42).unwrap();
        assert_eq!(a, generate_corpus(&s, 42).unwrap());
        assert_ne!(a, generate_corpus(&s, 43).unwrap());
    }
}

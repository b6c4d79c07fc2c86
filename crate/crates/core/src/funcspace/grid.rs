use serde::{Deserialize, Serialize};

use super::lattice::{distance, point, Lattice, Point};
use crate::error::{Error, Result};

/// Description of a function outside the computational box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExteriorModel {
    Zero,
    Constant {
        value: f64,
    },
    /// `offset + amplitude * |x - center|^exponent`.
    RadialPower {
        center: Vec<f64>,
        amplitude: f64,
        exponent: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl ExteriorModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ExteriorModel::Zero => true,
            ExteriorModel::Constant { value } => value.is_finite(),
            ExteriorModel::RadialPower { center, amplitude, exponent, offset } => {
                center.len() <= 3
                    && center.iter().all(|c| c.is_finite())
                    && amplitude.is_finite()
                    && offset.is_finite()
                    && exponent.is_finite()
                    && *exponent >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid exterior model {self:?}")))
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        match self {
            ExteriorModel::Zero => 0.0,
            ExteriorModel::Constant { value } => *value,
            ExteriorModel::RadialPower { center, amplitude, exponent, offset } => {
                let d = distance(x, &point(center));
                offset + amplitude * d.powf(*exponent)
            }
        }
    }

    /// True when the model takes a single value everywhere.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            ExteriorModel::Zero => Some(0.0),
            ExteriorModel::Constant { value } => Some(*value),
            ExteriorModel::RadialPower { amplitude, offset, .. } if *amplitude == 0.0 => Some(*offset),
            ExteriorModel::RadialPower { .. } => None,
        }
    }

    /// The model of `c * u`.
    pub fn scaled(&self, c: f64) -> ExteriorModel {
        match self {
            ExteriorModel::Zero => ExteriorModel::Zero,
            ExteriorModel::Constant { value } => ExteriorModel::Constant { value: c * value },
            ExteriorModel::RadialPower { center, amplitude, exponent, offset } => ExteriorModel::RadialPower {
                center: center.clone(),
                amplitude: c * amplitude,
                exponent: *exponent,
                offset: c * offset,
            },
        }
    }

    /// The model of `u + c`.
    pub fn shifted(&self, c: f64) -> ExteriorModel {
        match self {
            ExteriorModel::Zero => ExteriorModel::Constant { value: c },
            ExteriorModel::Constant { value } => ExteriorModel::Constant { value: value + c },
            ExteriorModel::RadialPower { center, amplitude, exponent, offset } => ExteriorModel::RadialPower {
                center: center.clone(),
                amplitude: *amplitude,
                exponent: *exponent,
                offset: offset + c,
            },
        }
    }
}

/// Values on every node of a lattice together with a model of the function
/// beyond it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub lattice: Lattice,
    pub values: Vec<f64>,
    pub exterior: ExteriorModel,
}

impl GridFunction {
    pub fn new(lattice: Lattice, values: Vec<f64>, exterior: ExteriorModel) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for a lattice of {} nodes",
                values.len(),
                lattice.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("value at node {i} is not finite")));
        }
        exterior.validate()?;
        Ok(GridFunction { lattice, values, exterior })
    }

    pub fn from_fn(lattice: Lattice, exterior: ExteriorModel, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = (0..lattice.len()).map(|i| f(&lattice.coords(i))).collect();
        Self::new(lattice, values, exterior)
    }

    /// Nodal values equal to the exterior model everywhere.
    pub fn from_model(lattice: Lattice, exterior: ExteriorModel) -> Result<Self> {
        let m = exterior.clone();
        Self::from_fn(lattice, exterior, |x| m.value(x))
    }

    pub fn zeros(lattice: Lattice) -> Self {
        let n = lattice.len();
        GridFunction { lattice, values: vec![0.0; n], exterior: ExteriorModel::Zero }
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            lattice: self.lattice.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            exterior: self.exterior.scaled(c),
        }
    }

    pub fn shifted(&self, c: f64) -> GridFunction {
        GridFunction {
            lattice: self.lattice.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
            exterior: self.exterior.shifted(c),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinates in up to three dimensions; unused trailing axes are zero.
pub type Point = [f64; 3];

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Pads a coordinate slice to a [`Point`].
pub fn point(coords: &[f64]) -> Point {
    let mut p = [0.0; 3];
    for (dst, src) in p.iter_mut().zip(coords) {
        *dst = *src;
    }
    p
}

pub fn distance(a: &Point, b: &Point) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
}

pub fn norm(a: &Point) -> f64 {
    distance(a, &[0.0; 3])
}

/// Closed ball `B_r(x0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: &[f64], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain { name: "radius", value: radius, reason: "must be positive" });
        }
        Ok(Ball { center: point(center), radius })
    }

    /// Membership by node center, with `slack` absorbing rounding.
    pub fn contains(&self, x: &Point, slack: f64) -> bool {
        distance(&self.center, x) <= self.radius + slack
    }

    /// Concentric ball with the radius multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Ball {
        Ball { center: self.center, radius: self.radius * factor }
    }
}

/// A region of space selecting lattice nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Ball(Ball),
    Box { lo: Point, hi: Point },
}

impl Region {
    pub fn contains(&self, x: &Point, slack: f64) -> bool {
        match self {
            Region::Ball(b) => b.contains(x, slack),
            Region::Box { lo, hi } => (0..MAX_DIM).all(|k| x[k] >= lo[k] - slack && x[k] <= hi[k] + slack),
        }
    }

    /// Axis-aligned bounds of the region.
    pub fn bounds(&self) -> (Point, Point) {
        match self {
            Region::Ball(b) => {
                let mut lo = b.center;
                let mut hi = b.center;
                for k in 0..MAX_DIM {
                    lo[k] -= b.radius;
                    hi[k] += b.radius;
                }
                (lo, hi)
            }
            Region::Box { lo, hi } => (*lo, *hi),
        }
    }
}

impl From<Ball> for Region {
    fn from(b: Ball) -> Self {
        Region::Ball(b)
    }
}

/// Uniform lattice `h * Z^n` restricted to a box of nodes.
///
/// Node coordinates are `h * (lo + idx)` with integer global indices, so
/// lattices with spacing `h` and `h/2` share nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    dim: usize,
    h: f64,
    lo: [i64; 3],
    shape: [usize; 3],
}

impl Lattice {
    pub fn new(dim: usize, h: f64, lo: &[i64], shape: &[usize]) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain { name: "h", value: h, reason: "spacing must be positive" });
        }
        if lo.len() != dim || shape.len() != dim {
            return Err(Error::InvalidParameter("index offsets and shape must have one entry per axis".into()));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidParameter("lattice shape must be non-empty on every axis".into()));
        }
        let mut l = [0i64; 3];
        let mut s = [1usize; 3];
        l[..dim].copy_from_slice(lo);
        s[..dim].copy_from_slice(shape);
        Ok(Lattice { dim, h, lo: l, shape: s })
    }

    /// Smallest lattice box whose nodes cover `[min, max]` on every axis.
    pub fn covering(dim: usize, h: f64, min: &[f64], max: &[f64]) -> Result<Self> {
        if min.len() < dim || max.len() < dim {
            return Err(Error::InvalidParameter("bounds must have one entry per axis".into()));
        }
        let eps = 1e-9;
        let lo: Vec<i64> = (0..dim).map(|k| (min[k] / h - eps).floor() as i64).collect();
        let hi: Vec<i64> = (0..dim).map(|k| (max[k] / h + eps).ceil() as i64).collect();
        let shape: Vec<usize> = (0..dim).map(|k| (hi[k] - lo[k] + 1) as usize).collect();
        Self::new(dim, h, &lo, &shape)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }
    pub fn index_offset(&self) -> &[i64] {
        &self.lo[..self.dim]
    }
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure `h^n` attached to each node.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Slack used for node-center membership tests.
    pub fn slack(&self) -> f64 {
        1e-9 * self.h
    }

    /// Global integer index of node `i` (row-major, last axis fastest).
    pub fn global_index(&self, i: usize) -> [i64; 3] {
        let mut rem = i;
        let mut out = [0i64; 3];
        for k in (0..MAX_DIM).rev() {
            out[k] = self.lo[k] + (rem % self.shape[k]) as i64;
            rem /= self.shape[k];
        }
        out
    }

    #[allow(clippy::needless_range_loop)]
    pub fn index_of(&self, global: &[i64; 3]) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..MAX_DIM {
            let local = global[k] - self.lo[k];
            if local < 0 || local as usize >= self.shape[k] {
                return None;
            }
            idx = idx * self.shape[k] + local as usize;
        }
        Some(idx)
    }

    pub fn coords(&self, i: usize) -> Point {
        let g = self.global_index(i);
        let mut p = [0.0; 3];
        for k in 0..self.dim {
            p[k] = self.h * g[k] as f64;
        }
        p
    }

    pub fn all_coords(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.coords(i)).collect()
    }

    /// Distance from `center` to the boundary of the union of node cells;
    /// negative when `center` lies outside.
    pub fn inscribed_radius(&self, center: &Point) -> f64 {
        let mut r = f64::INFINITY;
        for (k, c) in center.iter().enumerate().take(self.dim) {
            let lo = self.h * (self.lo[k] as f64 - 0.5);
            let hi = self.h * ((self.lo[k] + self.shape[k] as i64) as f64 - 0.5);
            r = r.min(c - lo).min(hi - c);
        }
        r
    }

    /// Nodes inside `region`, in increasing index order.
    pub fn nodes_in(&self, region: &Region) -> Vec<usize> {
        let slack = self.slack();
        (0..self.len()).filter(|&i| region.contains(&self.coords(i), slack)).collect()
    }

    /// Same geometry with spacing halved (node count roughly doubled per axis).
    pub fn refined(&self) -> Lattice {
        let mut lo = [0i64; 3];
        let mut shape = [1usize; 3];
        for k in 0..self.dim {
            lo[k] = 2 * self.lo[k];
            shape[k] = 2 * self.shape[k] - 1;
        }
        Lattice { dim: self.dim, h: 0.5 * self.h, lo, shape }
    }
}

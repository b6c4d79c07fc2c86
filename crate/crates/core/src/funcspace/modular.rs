use rayon::prelude::*;

use super::grid::GridFunction;
use super::lattice::{distance, Region};
use crate::error::{Error, Result};
use crate::nfunction::NFunction;
use crate::quad::pairwise_sum;

fn region_nodes(f: &GridFunction, region: &Region) -> Result<Vec<usize>> {
    let nodes = f.lattice.nodes_in(region);
    if nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(nodes)
}

fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain { name: "s", value: s, reason: "fractional order must lie in (0, 1)" });
    }
    Ok(())
}

fn gagliardo_sum(f: &GridFunction, nodes: &[usize], s: f64, nf: &NFunction, scale: f64) -> Result<f64> {
    let lat = &f.lattice;
    let n = lat.dim() as i32;
    let weight = lat.cell_volume() * lat.cell_volume();
    let coords: Vec<_> = nodes.iter().map(|&i| lat.coords(i)).collect();
    let rows: Vec<f64> = (0..nodes.len())
        .into_par_iter()
        .map(|a| {
            let mut row = Vec::with_capacity(nodes.len());
            for b in 0..nodes.len() {
                if a == b {
                    continue;
                }
                let d = distance(&coords[a], &coords[b]);
                let t = (f.values[nodes[a]] - f.values[nodes[b]]).abs() / (scale * d.powf(s));
                row.push(nf.eval(t)? * d.powi(-n));
            }
            Ok(pairwise_sum(&row))
        })
        .collect::<Result<_>>()?;
    Ok(weight * pairwise_sum(&rows))
}

/// Discrete Gagliardo modular
/// `sum_{i != j} G(|f_i - f_j| / d^s) h^{2n} / d^n` over nodes in `region`.
pub fn gagliardo_modular(f: &GridFunction, region: &Region, s: f64, nf: &NFunction) -> Result<f64> {
    check_order(s)?;
    let nodes = region_nodes(f, region)?;
    gagliardo_sum(f, &nodes, s, nf, 1.0)
}

/// `inf { lambda > 0 : gagliardo_modular(f / lambda) <= 1 }`.
pub fn gagliardo_seminorm(f: &GridFunction, region: &Region, s: f64, nf: &NFunction) -> Result<f64> {
    check_order(s)?;
    let nodes = region_nodes(f, region)?;
    let spread = nodes.iter().map(|&i| f.values[i]).fold(f64::NEG_INFINITY, f64::max)
        - nodes.iter().map(|&i| f.values[i]).fold(f64::INFINITY, f64::min);
    unit_level(spread, |lambda| gagliardo_sum(f, &nodes, s, nf, lambda).unwrap_or(f64::INFINITY))
}

/// `sum G(|f_i| / lambda) h^n` over nodes in `region`.
pub fn orlicz_modular(f: &GridFunction, region: &Region, nf: &NFunction, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain { name: "lambda", value: lambda, reason: "must be positive" });
    }
    let nodes = region_nodes(f, region)?;
    modular_at(f, &nodes, nf, lambda)
}

fn modular_at(f: &GridFunction, nodes: &[usize], nf: &NFunction, lambda: f64) -> Result<f64> {
    let terms = nodes.iter().map(|&i| nf.eval(f.values[i].abs() / lambda)).collect::<Result<Vec<_>>>()?;
    Ok(f.lattice.cell_volume() * pairwise_sum(&terms))
}

/// Luxemburg norm `inf { lambda > 0 : sum G(|f_i| / lambda) h^n <= 1 }`.
pub fn luxemburg_norm(f: &GridFunction, region: &Region, nf: &NFunction) -> Result<f64> {
    let nodes = region_nodes(f, region)?;
    let max = nodes.iter().fold(0.0_f64, |m, &i| m.max(f.values[i].abs()));
    unit_level(max, |lambda| modular_at(f, &nodes, nf, lambda).unwrap_or(f64::INFINITY))
}

/// Root of `modular(lambda) = 1` for a modular decreasing in `lambda`,
/// bisected to adjacent floating-point values; `0` when `size == 0`.
fn unit_level(size: f64, modular: impl Fn(f64) -> f64) -> Result<f64> {
    if size == 0.0 {
        return Ok(0.0);
    }
    let mut hi = size;
    let mut lo = size;
    let mut steps = 0;
    while modular(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 2100 {
            return Err(Error::NoConvergence { iterations: steps, lo, hi });
        }
    }
    if lo == hi {
        lo = 0.5 * hi;
        while modular(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if steps > 2100 || lo == 0.0 {
                return Err(Error::NoConvergence { iterations: steps, lo, hi });
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, Scalar};

/// Cells an energy sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    All,
    Physical,
}

/// Kinetic plus spring energy
/// `½Σ|V|² + ½Σ_δ Σ|(τ_δU − U)/Δx|²` over the cells of `region`.
///
/// Each cell owns the spring to its forward neighbour on every axis, so a
/// physical cell next to the layer contributes the spring that crosses the
/// interface.
pub fn energy<T: Scalar>(u: &Field<T>, v: &Field<T>, region: Region) -> Result<f64> {
    u.check_same_grid(v)?;
    let grid = *u.grid();
    let inv_dx = 1.0 / grid.dx();
    let uv = u.values();
    let mut kinetic = 0.0;
    let mut elastic = 0.0;
    for (off, vv) in v.values().iter().enumerate() {
        if region == Region::Physical && !grid.is_physical(off) {
            continue;
        }
        kinetic += vv.modulus_sqr();
        for axis in 0..grid.dim() {
            let next = forward(&grid, off, axis);
            elastic += ((uv[next] - uv[off]) * inv_dx).modulus_sqr();
        }
    }
    Ok(0.5 * (kinetic + elastic))
}

fn forward(grid: &GridSpec, off: usize, axis: usize) -> usize {
    let (_, n, inner) = grid.axis_blocks(axis);
    let c = (off / inner) % n;
    if c + 1 == n {
        off + inner - n * inner
    } else {
        off + inner
    }
}

/// Energy samples over time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub total: Vec<f64>,
    pub physical: Vec<f64>,
}

impl EnergyReport {
    pub fn record<T: Scalar>(&mut self, t: f64, u: &Field<T>, v: &Field<T>) -> Result<()> {
        self.times.push(t);
        self.total.push(energy(u, v, Region::All)?);
        self.physical.push(energy(u, v, Region::Physical)?);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `max |U − U_ref|` over the physical cells of `u`, pairing cells by
/// lattice coordinate. `u_ref` may live on any grid with the same spacing
/// that covers those coordinates.
pub fn reflection_error<T: Scalar>(u: &Field<T>, u_ref: &Field<T>) -> Result<f64> {
    let grid = u.grid();
    let rg = u_ref.grid();
    if grid.dim() != rg.dim() || grid.dx() != rg.dx() {
        return Err(Error::GridMismatch(format!(
            "spacing/dimension differ: {}-d Δx={} vs {}-d Δx={}",
            grid.dim(),
            grid.dx(),
            rg.dim(),
            rg.dx()
        )));
    }
    let mut worst: f64 = 0.0;
    for (off, &val) in u.values().iter().enumerate() {
        if !grid.is_physical(off) {
            continue;
        }
        let c = grid.lattice_coords(off);
        let r = u_ref.at_lattice(&c[..grid.dim()]).ok_or_else(|| {
            Error::GridMismatch(format!("reference does not cover lattice cell {:?}", &c[..grid.dim()]))
        })?;
        worst = worst.max((val - r).modulus());
    }
    Ok(worst)
}

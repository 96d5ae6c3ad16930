use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, Scalar};
use crate::pml::WaveState;
use crate::rng;

/// Squared distance between the cell at lattice coordinates `c` (position
/// `Δx·c`) and `center`.
fn dist2(grid: &GridSpec, c: &[i64], center: &[f64]) -> f64 {
    c[..grid.dim()]
        .iter()
        .zip(center)
        .map(|(&i, &x)| (grid.dx() * i as f64 - x).powi(2))
        .sum()
}

fn check_center(grid: &GridSpec, center: &[f64]) -> Result<()> {
    if center.len() != grid.dim() {
        return Err(Error::param("center", format!("need {} coordinates", grid.dim())));
    }
    Ok(())
}

/// `U = peak·exp(−|Δx·i − center|²/(2·width²))`, `V = 0`.
pub fn gaussian_bump_ic(grid: &GridSpec, center: &[f64], width: f64, peak: f64) -> Result<WaveState<f64>> {
    check_center(grid, center)?;
    if !(width > 0.0) {
        return Err(Error::param("width", format!("must be positive, got {width}")));
    }
    let s = 2.0 * width * width;
    let u = Field::from_lattice_fn(*grid, |c| peak * (-dist2(grid, c, center) / s).exp());
    WaveState::new(u, Field::zeros(*grid))
}

/// i.i.d. `N(0, variance)` values on cells within `radius` of `center`,
/// zero elsewhere, `V = 0`. Cells draw in storage order from one stream.
pub fn noise_disk_ic(
    grid: &GridSpec,
    center: &[f64],
    radius: f64,
    variance: f64,
    seed: u64,
) -> Result<WaveState<f64>> {
    check_center(grid, center)?;
    if !(radius > 0.0) {
        return Err(Error::param("radius", format!("must be positive, got {radius}")));
    }
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::param("variance", format!("must be finite and >= 0, got {variance}")));
    }
    let normal = Normal::new(0.0, variance.sqrt()).map_err(|e| Error::param("variance", e.to_string()))?;
    let mut r = rng::stream(seed, 0);
    let r2 = radius * radius;
    let u = Field::from_lattice_fn(*grid, |c| {
        if dist2(grid, c, center) <= r2 {
            normal.sample(&mut r)
        } else {
            0.0
        }
    });
    WaveState::new(u, Field::zeros(*grid))
}

/// Zeroes every cell outside the physical block.
pub fn restrict_to_physical<T: Scalar>(field: &mut Field<T>) {
    let grid = *field.grid();
    for (off, v) in field.values_mut().iter_mut().enumerate() {
        if !grid.is_physical(off) {
            *v = T::zero();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::with_layer(2, 0.0125, 80, 80).unwrap()
    }

    #[test]
    fn bump_peak_and_width() {
        let g = grid();
        let s = gaussian_bump_ic(&g, &[-0.5, -0.5], 0.1, 2.0).unwrap();
        assert_eq!(s.u.at_lattice(&[-40, -40]), Some(2.0));
        // 8 cells = 0.1 away along one axis
        let v = s.u.at_lattice(&[-32, -40]).unwrap();
        assert!((v - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!(s.v.values().iter().all(|&x| x == 0.0));
        let flat = gaussian_bump_ic(&g, &[-0.5, -0.5], 0.1, 0.0).unwrap();
        assert!(flat.u.values().iter().all(|&x| x == 0.0));
        assert!(gaussian_bump_ic(&g, &[-0.5, -0.5], 0.0, 2.0).is_err());
        assert!(gaussian_bump_ic(&g, &[-0.5], 0.1, 2.0).is_err());
    }

    #[test]
    fn noise_statistics_and_support() {
        let g = grid();
        let s = noise_disk_ic(&g, &[-0.5, -0.5], 0.25, 0.25, 42).unwrap();
        let inside: Vec<f64> = (0..g.len())
            .filter(|&o| dist2(&g, &g.lattice_coords(o), &[-0.5, -0.5]) <= 0.0625)
            .map(|o| s.u.values()[o])
            .collect();
        assert!(inside.len() >= 1000);
        let n = inside.len() as f64;
        let mean = inside.iter().sum::<f64>() / n;
        let var = inside.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 0.25).abs() < 0.025, "{var}");
        let nonzero = s.u.values().iter().filter(|&&x| x != 0.0).count();
        assert_eq!(nonzero, inside.len());
        let again = noise_disk_ic(&g, &[-0.5, -0.5], 0.25, 0.25, 42).unwrap();
        assert_eq!(again.u, s.u);
        let silent = noise_disk_ic(&g, &[-0.5, -0.5], 0.25, 0.0, 42).unwrap();
        assert!(silent.u.values().iter().all(|&x| x == 0.0));
        assert!(noise_disk_ic(&g, &[-0.5, -0.5], 0.0, 0.25, 42).is_err());
        assert!(noise_disk_ic(&g, &[-0.5, -0.5], 0.25, -1.0, 42).is_err());
    }

    #[test]
    fn restriction_keeps_only_the_physical_block() {
        let g = GridSpec::with_layer(2, 0.1, 4, 4).unwrap();
        let mut f = Field::from_values(g, vec![1.0; g.len()]).unwrap();
        restrict_to_physical(&mut f);
        let kept = f.values().iter().filter(|&&x| x == 1.0).count();
        assert_eq!(kept, 16);
    }
}

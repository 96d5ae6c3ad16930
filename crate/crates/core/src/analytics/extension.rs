use num_complex::Complex64;

use super::dispersion::WaveMode;
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::lattice::{build_holomorphic_extension, ComplexDomainSpec, HolomorphicField, LatticeFunction};
use crate::pml::{DampingProfile, PmlState};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A lattice wave continued into the damping layer, one holomorphic
/// extension per axis.
#[derive(Debug, Clone)]
pub struct ExtendedSolution {
    mode: WaveMode,
    profile: DampingProfile,
    axes: Vec<HolomorphicField>,
}

impl ExtendedSolution {
    pub fn new(mode: WaveMode, profile: &DampingProfile) -> Result<Self> {
        let grid = profile.grid();
        let dx = grid.dx();
        if mode.dim() != grid.dim() {
            return Err(Error::param(
                "mode",
                format!("{} wave numbers for a {}-d grid", mode.dim(), grid.dim()),
            ));
        }
        let mut axes = Vec::with_capacity(grid.dim());
        for axis in 0..grid.dim() {
            let lo = grid.origin()[axis];
            let hi = lo + grid.shape()[axis] as i64 - 1;
            let gaps: Vec<f64> = (0..=hi.max(0)).map(|j| profile.at_lattice(axis, j)).collect();
            let spec = ComplexDomainSpec::new(dx, mode.omega, gaps)?;
            axes.push(build_holomorphic_extension(mode.k[axis], &spec, lo - 1..=hi + 1)?);
        }
        Ok(Self {
            mode,
            profile: profile.clone(),
            axes,
        })
    }

    pub fn mode(&self) -> &WaveMode {
        &self.mode
    }

    pub fn profile(&self) -> &DampingProfile {
        &self.profile
    }

    /// Amplitude factor `r_δ(i)`: 1 for `i ≤ 0`, else `Π_{j<i} ρ(σ_δ(j))`.
    pub fn amplitude(&self, axis: usize, i: i64) -> Complex64 {
        self.axes[axis].factor(i)
    }

    /// `Û` restricted to one axis: `r(i)·e^{𝕚kΔx i}`.
    fn g(&self, axis: usize, i: i64) -> Complex64 {
        self.axes[axis].value(0, i)
    }

    /// One-axis `Φ̂` from the face to the upper left of the path vertex.
    fn phi_1d(&self, axis: usize, i: i64) -> Complex64 {
        let f = &self.axes[axis];
        let dx = self.profile.grid().dx();
        let w = self.mode.omega;
        let s = self.profile.at_lattice(axis, i);
        (f.value(0, i + 1) - f.value(-1, i)) / (I * w * dx * (2.0 + I * (s / w)))
    }

    /// One-axis `Ψ̂` from the face to the lower right of the path vertex.
    fn psi_1d(&self, axis: usize, i: i64) -> Complex64 {
        let f = &self.axes[axis];
        let dx = self.profile.grid().dx();
        let w = self.mode.omega;
        let s = self.profile.at_lattice(axis, i - 1);
        (f.value(1, i) - f.value(0, i - 1)) / (I * w * dx * (2.0 + I * (s / w)))
    }

    /// Exact layer state at time `t` on the profile's grid.
    pub fn state(&self, t: f64) -> PmlState<Complex64> {
        let grid = *self.profile.grid();
        let d = grid.dim();
        let clock = (-I * self.mode.omega * t).exp();
        let mut s = PmlState::zeros(grid);
        for off in 0..grid.len() {
            let c = grid.lattice_coords(off);
            let g: Vec<Complex64> = (0..d).map(|a| self.g(a, c[a])).collect();
            let u: Complex64 = g.iter().product::<Complex64>() * clock;
            s.u.values_mut()[off] = u;
            s.v.values_mut()[off] = -I * self.mode.omega * u;
            for axis in 0..d {
                let rest: Complex64 = (0..d).filter(|&a| a != axis).map(|a| g[a]).product::<Complex64>() * clock;
                s.phi[axis].values_mut()[off] = self.phi_1d(axis, c[axis]) * rest;
                s.psi[axis].values_mut()[off] = self.psi_1d(axis, c[axis]) * rest;
            }
        }
        s
    }
}

/// Exact solution of the layer system at time `t` for `mode`.
pub fn theorem1_state(mode: &WaveMode, profile: &DampingProfile, t: f64) -> Result<PmlState<Complex64>> {
    Ok(ExtendedSolution::new(mode.clone(), profile)?.state(t))
}

/// Pointwise residuals of the time-harmonic layer equations, each paired
/// with the sum of the moduli of the terms entering it.
#[derive(Debug, Clone)]
pub struct FourierResiduals {
    pub phi: Vec<Field<Complex64>>,
    pub psi: Vec<Field<Complex64>>,
    pub u: Field<Complex64>,
    pub phi_scale: Vec<Field<f64>>,
    pub psi_scale: Vec<Field<f64>>,
    pub u_scale: Field<f64>,
}

/// True when no stencil of the cell crosses the periodic wrap.
pub fn is_interior(grid: &GridSpec, offset: usize) -> bool {
    let idx = grid.index(offset);
    (0..grid.dim()).all(|a| idx[a] >= 1 && idx[a] + 1 < grid.shape()[a])
}

impl FourierResiduals {
    /// Largest per-cell relative residual over interior cells, for the
    /// `Φ`, `Ψ` and `U` equations respectively.
    pub fn max_relative(&self) -> [f64; 3] {
        let grid = *self.u.grid();
        let rel = |r: &Field<Complex64>, s: &Field<f64>| {
            (0..grid.len())
                .filter(|&o| is_interior(&grid, o))
                .map(|o| {
                    let scale = s.values()[o];
                    if scale == 0.0 {
                        0.0
                    } else {
                        r.values()[o].norm() / scale
                    }
                })
                .fold(0.0, f64::max)
        };
        let phi = self.phi.iter().zip(&self.phi_scale).map(|(r, s)| rel(r, s)).fold(0.0, f64::max);
        let psi = self.psi.iter().zip(&self.psi_scale).map(|(r, s)| rel(r, s)).fold(0.0, f64::max);
        [phi, psi, rel(&self.u, &self.u_scale)]
    }

    pub fn max_overall(&self) -> f64 {
        self.max_relative().into_iter().fold(0.0, f64::max)
    }
}

/// Evaluates, cell by cell,
///
/// ```text
/// −𝕚ωΦ̂ + ½((τ⁻¹σ)τ⁻¹Φ̂ + σΦ̂) + (τÛ − τ⁻¹Û)/(2Δx)
/// −𝕚ωΨ̂ + ½((τ⁻¹σ)Ψ̂ + στΨ̂) + (τÛ − τ⁻¹Û)/(2Δx)
/// −ω²Û − Σ(−2Û + τ⁻¹Û + τÛ)/Δx² − Σ(στΨ̂ − (τ⁻¹σ)τ⁻¹Φ̂)/Δx
/// ```
///
/// with `σ` read at lattice coordinates (zero outside the window). Only
/// `U`, `Φ` and `Ψ` of `state` are used.
pub fn fourier_residuals(
    state: &PmlState<Complex64>,
    profile: &DampingProfile,
    omega: f64,
) -> Result<FourierResiduals> {
    state.validate()?;
    let grid = *state.grid();
    if !grid.same_layout(profile.grid()) {
        return Err(Error::GridMismatch("state and profile grids differ".into()));
    }
    let d = grid.dim();
    let dx = grid.dx();
    let w = Complex64::new(omega, 0.0);
    let mut out = FourierResiduals {
        phi: vec![Field::zeros(grid); d],
        psi: vec![Field::zeros(grid); d],
        u: Field::zeros(grid),
        phi_scale: vec![Field::zeros(grid); d],
        psi_scale: vec![Field::zeros(grid); d],
        u_scale: Field::zeros(grid),
    };
    for off in 0..grid.len() {
        let idx = grid.index(off);
        let lc = grid.lattice_coords(off);
        let at = |f: &Field<Complex64>, axis: usize, step: i64| {
            let mut j = [idx[0] as i64, idx[1] as i64, idx[2] as i64];
            j[axis] += step;
            f.values()[grid.offset(&j[..d])]
        };
        let u0 = state.u.values()[off];
        let mut u_res = -w * w * u0;
        let mut u_scale = (w * w * u0).norm();
        for axis in 0..d {
            let s0 = profile.at_lattice(axis, lc[axis]);
            let sm = profile.at_lattice(axis, lc[axis] - 1);
            let (um, up) = (at(&state.u, axis, -1), at(&state.u, axis, 1));
            let phi0 = state.phi[axis].values()[off];
            let phim = at(&state.phi[axis], axis, -1);
            let psi0 = state.psi[axis].values()[off];
            let psip = at(&state.psi[axis], axis, 1);
            let grad = (up - um) / (2.0 * dx);

            let terms = [-I * w * phi0, (phim * sm + phi0 * s0) * 0.5, grad];
            out.phi[axis].values_mut()[off] = terms[0] + terms[1] + terms[2];
            out.phi_scale[axis].values_mut()[off] =
                terms[0].norm() + 0.5 * ((phim * sm).norm() + (phi0 * s0).norm()) + (up.norm() + um.norm()) / (2.0 * dx);

            let terms = [-I * w * psi0, (psi0 * sm + psip * s0) * 0.5, grad];
            out.psi[axis].values_mut()[off] = terms[0] + terms[1] + terms[2];
            out.psi_scale[axis].values_mut()[off] =
                terms[0].norm() + 0.5 * ((psi0 * sm).norm() + (psip * s0).norm()) + (up.norm() + um.norm()) / (2.0 * dx);

            u_res -= (um + up - u0 * 2.0) / (dx * dx);
            u_res -= (psip * s0 - phim * sm) / dx;
            u_scale += (um.norm() + up.norm() + 2.0 * u0.norm()) / (dx * dx);
            u_scale += ((psip * s0).norm() + (phim * sm).norm()) / dx;
        }
        out.u.values_mut()[off] = u_res;
        out.u_scale.values_mut()[off] = u_scale;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::dispersion::solve_mode;
    use crate::grid::GridSpec;
    use crate::lattice::rho;
    use crate::pml::{make_damping_profile, ProfileKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid2() -> GridSpec {
        GridSpec::with_layer(2, 0.1, 10, 8).unwrap()
    }

    #[test]
    fn undamped_extension_is_the_plane_wave() {
        let grid = grid2();
        let p = DampingProfile::zero(&grid);
        let mode = solve_mode(0.1, &[Some(c(2.0, 0.0)), None], Some(7.0)).unwrap();
        let s = theorem1_state(&mode, &p, 0.0).unwrap();
        for off in 0..grid.len() {
            let lc = grid.lattice_coords(off);
            let want = super::super::dispersion::plane_wave_at(&mode, 0.1, &lc[..2]);
            assert!((s.u.values()[off] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn constant_layer_amplitude_is_a_power_of_rho() {
        let grid = grid2();
        let p = make_damping_profile(&grid, ProfileKind::Constant, 2.0, 8, None).unwrap();
        let mode = solve_mode(0.1, &[Some(c(1.0, 0.0)), None], Some(5.0)).unwrap();
        let ext = ExtendedSolution::new(mode.clone(), &p).unwrap();
        for axis in 0..2 {
            let r = rho(20.0, mode.k[axis], mode.omega, 0.1).unwrap();
            assert!((ext.amplitude(axis, 3) - r.powi(3)).norm() < 1e-14);
            assert_eq!(ext.amplitude(axis, 0), c(1.0, 0.0));
            assert_eq!(ext.amplitude(axis, -4), c(1.0, 0.0));
        }
    }

    #[test]
    fn random_layer_amplitude_ratios() {
        let grid = grid2();
        let p = make_damping_profile(&grid, ProfileKind::Random, 2.0, 8, Some(4)).unwrap();
        let mode = solve_mode(0.1, &[Some(c(-3.0, -1.0)), None], Some(9.0)).unwrap();
        let ext = ExtendedSolution::new(mode.clone(), &p).unwrap();
        for i in 0..8 {
            let ratio = ext.amplitude(1, i + 1) / ext.amplitude(1, i);
            let r = rho(p.at_lattice(1, i), mode.k[1], mode.omega, 0.1).unwrap();
            assert!((ratio - r).norm() < 1e-14 * r.norm().max(1.0));
        }
    }

    #[test]
    fn extension_satisfies_time_harmonic_equations() {
        let grid = grid2();
        for kind in [ProfileKind::Constant, ProfileKind::Random] {
            let p = make_damping_profile(&grid, kind, 1.5, 8, Some(8)).unwrap();
            let mode = solve_mode(0.1, &[Some(c(4.0, -2.0)), None], Some(-11.0)).unwrap();
            let s = theorem1_state(&mode, &p, 0.0).unwrap();
            let res = fourier_residuals(&s, &p, mode.omega).unwrap();
            assert!(res.max_overall() < 1e-12, "{:?}", res.max_relative());
        }
    }

    #[test]
    fn detuned_frequency_breaks_the_wave_equation() {
        let grid = grid2();
        let p = make_damping_profile(&grid, ProfileKind::Constant, 2.0, 8, None).unwrap();
        let mode = solve_mode(0.1, &[Some(c(3.0, 0.0)), None], Some(6.0)).unwrap();
        let s = theorem1_state(&mode, &p, 0.0).unwrap();
        let res = fourier_residuals(&s, &p, mode.omega * 1.01).unwrap();
        let off = grid.offset(&[4, 4]);
        let w = mode.omega * 1.01;
        assert!(res.u.values()[off].norm() > 1e-4 * (w * w * s.u.values()[off].norm()));
    }

    #[test]
    fn interior_excludes_one_cell_per_end() {
        let grid = GridSpec::new(1.0, &[4, 5], &[-2, -2]).unwrap();
        let count = (0..grid.len()).filter(|&o| is_interior(&grid, o)).count();
        assert_eq!(count, 2 * 3);
    }
}

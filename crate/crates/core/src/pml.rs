//! Right-hand sides of the semi-discrete wave equation and of the discrete
//! perfectly matched layer, written as first-order systems in time.
//!
//! With `V = ∂U/∂t` the layer equations read, per axis `δ`,
//!
//! ```text
//! dU/dt = V
//! dV/dt = Σ_δ (-2U + τ⁻¹U + τU)/Δx²  +  Σ_δ (σ·τΨ − (τ⁻¹σ)·τ⁻¹Φ)/Δx
//! dΦ/dt = −½((τ⁻¹σ)·τ⁻¹Φ + σ·Φ) − (τU − τ⁻¹U)/(2Δx)
//! dΨ/dt = −½((τ⁻¹σ)·Ψ + σ·τΨ) − (τU − τ⁻¹U)/(2Δx)
//! ```
//!
//! where `σ = σ_δ(i_δ)` depends on the axis coordinate only and all shifts
//! wrap periodically (`τ⁻¹σ` at storage index 0 reads the last entry).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{laplacian_into, Field, GridSpec, Scalar};
use crate::rng;

/// How a damping profile was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileKind {
    Constant,
    Random,
    /// Caller-supplied `σΔx` values per axis, one per storage index.
    Explicit { sigma_dx: Vec<Vec<f64>> },
}

/// Per-axis damping coefficients `σ_δ(i_δ)`, stored by storage index.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingProfile {
    grid: GridSpec,
    kind: ProfileKind,
    level: f64,
    thickness: usize,
    seed: Option<u64>,
    sigma: Vec<Vec<f64>>,
    sigma_dx: Vec<Vec<f64>>,
}

/// Serialized form: `σΔx` values per axis plus the layer geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub dx: f64,
    pub shape: Vec<usize>,
    pub origin: Vec<i64>,
    pub physical_cells: Vec<usize>,
    pub thickness: usize,
    pub kind: String,
    pub level: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub sigma_dx: Vec<Vec<f64>>,
}

/// Builds a profile that is zero in the physical block and occupies lattice
/// coordinates `0..thickness` on every axis, except that `σ` at the last
/// storage index is always zero when a physical block exists: it belongs to
/// the edge that wraps into the physical block, and a damped edge there would
/// make the first physical cell part of the layer.
///
/// `level` is the dimensionless product `σΔx`: constant profiles use
/// `σ = level/Δx`, random ones draw i.i.d. `Uniform[0, level/Δx]` per layer
/// cell and axis. For [`ProfileKind::Explicit`] the values are taken as
/// given and `level`/`thickness` are only recorded.
pub fn make_damping_profile(
    grid: &GridSpec,
    kind: ProfileKind,
    level: f64,
    thickness: usize,
    seed: Option<u64>,
) -> Result<DampingProfile> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::param("level", format!("must be finite and >= 0, got {level}")));
    }
    let dx = grid.dx();
    let sigma_dx: Vec<Vec<f64>> = match &kind {
        ProfileKind::Explicit { sigma_dx } => {
            if sigma_dx.len() != grid.dim() {
                return Err(Error::param(
                    "sigma_dx",
                    format!("{} axes given for a {}-d grid", sigma_dx.len(), grid.dim()),
                ));
            }
            for (axis, seq) in sigma_dx.iter().enumerate() {
                if seq.len() != grid.shape()[axis] {
                    return Err(Error::param(
                        "sigma_dx",
                        format!("axis {axis}: {} values for {} cells", seq.len(), grid.shape()[axis]),
                    ));
                }
                if let Some(v) = seq.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                    return Err(Error::param("sigma_dx", format!("entries must be finite and >= 0, got {v}")));
                }
                let phys = grid.physical_cells(axis);
                if seq[..phys].iter().any(|&v| v != 0.0) {
                    return Err(Error::param(
                        "sigma_dx",
                        format!("axis {axis}: damping must vanish in the physical block"),
                    ));
                }
                if phys > 0 && seq[seq.len() - 1] != 0.0 {
                    return Err(Error::param(
                        "sigma_dx",
                        format!("axis {axis}: damping must vanish on the edge wrapping into the physical block"),
                    ));
                }
            }
            sigma_dx.clone()
        }
        ProfileKind::Constant | ProfileKind::Random => {
            for axis in 0..grid.dim() {
                let n = grid.shape()[axis];
                let room = n - grid.physical_cells(axis);
                if thickness >= n || thickness > room {
                    return Err(Error::param(
                        "thickness",
                        format!("{thickness} cells do not fit axis {axis} ({room} non-physical of {n})"),
                    ));
                }
            }
            let seed = match (&kind, seed) {
                (ProfileKind::Random, None) => {
                    return Err(Error::param("seed", "random profiles need an explicit seed"))
                }
                (_, s) => s,
            };

            (0..grid.dim())
                .map(|axis| {
                    let mut stream = seed.map(|s| rng::stream(s, axis as u64));
                    let first = grid.physical_cells(axis);
                    let n = grid.shape()[axis];
                    let mut seq = vec![0.0; n];
                    // the last entry couples the wrapped edge back into the physical block
                    let end = if first > 0 { (first + thickness).min(n - 1) } else { first + thickness };
                    for v in &mut seq[first..end] {
                        *v = match stream.as_mut() {
                            Some(r) => rand::Rng::random_range(r, 0.0..=level),
                            None => level,
                        };
                    }
                    seq
                })
                .collect()
        }
    };
    let seed = if kind == ProfileKind::Random { seed } else { None };
    let sigma = sigma_dx.iter().map(|s| s.iter().map(|v| v / dx).collect()).collect();
    Ok(DampingProfile {
        grid: *grid,
        kind,
        level,
        thickness,
        seed,
        sigma,
        sigma_dx,
    })
}

impl DampingProfile {
    /// All-zero profile.
    pub fn zero(grid: &GridSpec) -> Self {
        make_damping_profile(grid, ProfileKind::Constant, 0.0, 0, None)
            .expect("zero profile is always valid")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn thickness(&self) -> usize {
        self.thickness
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `σ_axis` by storage index.
    pub fn axis(&self, axis: usize) -> &[f64] {
        &self.sigma[axis]
    }

    /// `σ_axis(i)` at lattice coordinate `i`; zero outside the stored window.
    pub fn at_lattice(&self, axis: usize, i: i64) -> f64 {
        let s = i - self.grid.origin()[axis];
        if s < 0 || s >= self.grid.shape()[axis] as i64 {
            0.0
        } else {
            self.sigma[axis][s as usize]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.iter().flatten().all(|&s| s == 0.0)
    }

    pub fn to_record(&self) -> ProfileRecord {
        ProfileRecord {
            dx: self.grid.dx(),
            shape: self.grid.shape().to_vec(),
            origin: self.grid.origin().to_vec(),
            physical_cells: (0..self.grid.dim()).map(|a| self.grid.physical_cells(a)).collect(),
            thickness: self.thickness,
            kind: match self.kind {
                ProfileKind::Constant => "constant",
                ProfileKind::Random => "random",
                ProfileKind::Explicit { .. } => "explicit",
            }
            .into(),
            level: self.level,
            seed: self.seed,
            sigma_dx: self.sigma_dx.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record())?)
    }

    /// Rebuilds a profile from its record; the stored `σΔx` values are
    /// authoritative and validated like an explicit profile.
    pub fn from_record(record: &ProfileRecord) -> Result<Self> {
        let grid = GridSpec::new(record.dx, &record.shape, &record.origin)?;
        let mut p = make_damping_profile(
            &grid,
            ProfileKind::Explicit {
                sigma_dx: record.sigma_dx.clone(),
            },
            record.level,
            record.thickness,
            None,
        )?;
        p.kind = match record.kind.as_str() {
            "constant" => ProfileKind::Constant,
            "random" => ProfileKind::Random,
            _ => p.kind,
        };
        p.seed = record.seed;
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(text)?)
    }
}

/// Whether the auxiliary fields are evolved on the whole grid or pinned to
/// zero wherever their coupling into `dV/dt` carries a vanishing `σ`
/// (`Φ_δ` where `σ_δ(i) = 0`, `Ψ_δ` where `σ_δ(i-1) = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuxSupport {
    #[default]
    Full,
    Restricted,
}

/// Wave field `U`, velocity `V = ∂U/∂t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState<T> {
    pub u: Field<T>,
    pub v: Field<T>,
}

impl<T: Scalar> WaveState<T> {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            u: Field::zeros(grid),
            v: Field::zeros(grid),
        }
    }

    pub fn new(u: Field<T>, v: Field<T>) -> Result<Self> {
        u.check_same_grid(&v)?;
        Ok(Self { u, v })
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }
}

/// Layer unknowns `U, V, Φ_δ, Ψ_δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmlState<T> {
    pub u: Field<T>,
    pub v: Field<T>,
    pub phi: Vec<Field<T>>,
    pub psi: Vec<Field<T>>,
}

impl<T: Scalar> PmlState<T> {
    pub fn zeros(grid: GridSpec) -> Self {
        let d = grid.dim();
        Self {
            u: Field::zeros(grid),
            v: Field::zeros(grid),
            phi: vec![Field::zeros(grid); d],
            psi: vec![Field::zeros(grid); d],
        }
    }

    /// State with the given `U`, `V` and zero auxiliary fields.
    pub fn from_wave(wave: WaveState<T>) -> Self {
        let grid = *wave.u.grid();
        let d = grid.dim();
        Self {
            u: wave.u,
            v: wave.v,
            phi: vec![Field::zeros(grid); d],
            psi: vec![Field::zeros(grid); d],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.grid().dim();
        if self.phi.len() != d || self.psi.len() != d {
            return Err(Error::GridMismatch("one Φ and Ψ per axis required".into()));
        }
        self.u.check_same_grid(&self.v)?;
        for f in self.phi.iter().chain(&self.psi) {
            self.u.check_same_grid(f)?;
        }
        Ok(())
    }

    pub(crate) fn fields(&self) -> impl Iterator<Item = &Field<T>> {
        [&self.u, &self.v].into_iter().chain(&self.phi).chain(&self.psi)
    }

    pub(crate) fn fields_mut(&mut self) -> impl Iterator<Item = &mut Field<T>> {
        [&mut self.u, &mut self.v]
            .into_iter()
            .chain(&mut self.phi)
            .chain(&mut self.psi)
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, b: f64, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, y) in out.fields_mut().zip(other.fields()) {
            for (p, &q) in x.values_mut().iter_mut().zip(y.values()) {
                *p = *p * a + q * b;
            }
        }
        out
    }
}

/// `(dU/dt, dV/dt) = (V, ΔU)`.
pub fn wave_rhs<T: Scalar>(state: &WaveState<T>) -> WaveState<T> {
    let mut out = WaveState::zeros(*state.grid());
    WaveOperator.apply(state, &mut out);
    out
}

/// Time derivative of the full layer system.
pub fn pml_rhs<T: Scalar>(state: &PmlState<T>, profile: &DampingProfile) -> Result<PmlState<T>> {
    let op = PmlOperator::new(profile.clone(), AuxSupport::Full);
    op.check(state)?;
    let mut out = PmlState::zeros(*state.grid());
    op.apply(state, &mut out);
    Ok(out)
}

/// The undamped wave equation as an in-place operator.
#[derive(Debug, Clone, Copy, Default)]
pub struct WaveOperator;

impl WaveOperator {
    pub fn apply<T: Scalar>(&self, state: &WaveState<T>, out: &mut WaveState<T>) {
        out.u.values_mut().copy_from_slice(state.v.values());
        laplacian_into(state.grid(), state.u.values(), out.v.values_mut());
    }
}

/// The layer system for a fixed damping profile.
#[derive(Debug, Clone)]
pub struct PmlOperator {
    profile: DampingProfile,
    support: AuxSupport,
}

impl PmlOperator {
    pub fn new(profile: DampingProfile, support: AuxSupport) -> Self {
        Self { profile, support }
    }

    pub fn profile(&self) -> &DampingProfile {
        &self.profile
    }

    pub fn support(&self) -> AuxSupport {
        self.support
    }

    pub fn check<T: Scalar>(&self, state: &PmlState<T>) -> Result<()> {
        state.validate()?;
        if !state.grid().same_layout(self.profile.grid()) {
            return Err(Error::GridMismatch("state and damping profile grids differ".into()));
        }
        Ok(())
    }

    /// Writes the time derivative of `state` into `out`. Both must live on
    /// the profile's grid (see [`PmlOperator::check`]).
    pub fn apply<T: Scalar>(&self, state: &PmlState<T>, out: &mut PmlState<T>) {
        let grid = *state.grid();
        let inv_dx = 1.0 / grid.dx();
        let inv_2dx = 0.5 / grid.dx();
        out.u.values_mut().copy_from_slice(state.v.values());
        laplacian_into(&grid, state.u.values(), out.v.values_mut());

        let u = state.u.values();
        let dv = out.v.values_mut();
        for axis in 0..grid.dim() {
            let sigma = self.profile.axis(axis);
            let phi = state.phi[axis].values();
            let psi = state.psi[axis].values();
            let dphi = out.phi[axis].values_mut();
            let dpsi = out.psi[axis].values_mut();
            let (outer, n, inner) = grid.axis_blocks(axis);
            for o in 0..outer {
                let base = o * n * inner;
                for c in 0..n {
                    let cm = (c + n - 1) % n;
                    let cp = (c + 1) % n;
                    let (s0, sm) = (sigma[c], sigma[cm]);
                    let row = base + c * inner;
                    let rm = base + cm * inner;
                    let rp = base + cp * inner;
                    for t in 0..inner {
                        let grad = (u[rp + t] - u[rm + t]) * inv_2dx;
                        dv[row + t] += (psi[rp + t] * s0 - phi[rm + t] * sm) * inv_dx;
                        dphi[row + t] = -(phi[rm + t] * sm + phi[row + t] * s0) * 0.5 - grad;
                        dpsi[row + t] = -(psi[row + t] * sm + psi[rp + t] * s0) * 0.5 - grad;
                    }
                    if self.support == AuxSupport::Restricted {
                        if s0 == 0.0 {
                            dphi[row..row + inner].iter_mut().for_each(|x| *x = T::zero());
                        }
                        if sm == 0.0 {
                            dpsi[row..row + inner].iter_mut().for_each(|x| *x = T::zero());
                        }
                    }
                }
            }
        }
    }

    /// Zeroes the auxiliary entries outside the restricted support; a no-op
    /// for [`AuxSupport::Full`].
    pub fn project<T: Scalar>(&self, state: &mut PmlState<T>) {
        if self.support == AuxSupport::Full {
            return;
        }
        let grid = *state.grid();
        for axis in 0..grid.dim() {
            let sigma = self.profile.axis(axis);
            let (outer, n, inner) = grid.axis_blocks(axis);
            for o in 0..outer {
                let base = o * n * inner;
                for c in 0..n {
                    let row = base + c * inner;
                    if sigma[c] == 0.0 {
                        state.phi[axis].values_mut()[row..row + inner]
                            .iter_mut()
                            .for_each(|x| *x = T::zero());
                    }
                    if sigma[(c + n - 1) % n] == 0.0 {
                        state.psi[axis].values_mut()[row..row + inner]
                            .iter_mut()
                            .for_each(|x| *x = T::zero());
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    fn random_state(grid: GridSpec, seed: u64) -> PmlState<f64> {
        let mut r = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut s = PmlState::zeros(grid);
        for f in s.fields_mut() {
            f.values_mut().iter_mut().for_each(|v| *v = r.random_range(-1.0..1.0));
        }
        s
    }

    #[test]
    fn constant_profile_layout() {
        let grid = make_grid(2, 1.0 / 80.0, 160).unwrap();
        let p = make_damping_profile(&grid, ProfileKind::Constant, 2.0, 80, None).unwrap();
        for axis in 0..2 {
            let s = p.axis(axis);
            assert!(s[..80].iter().all(|&v| v == 0.0));
            assert!(s[80..159].iter().all(|&v| v == 2.0 * 80.0));
            assert_eq!(s[159], 0.0);
            assert_eq!(p.at_lattice(axis, -1), 0.0);
            assert_eq!(p.at_lattice(axis, 0), 160.0);
        }
    }

    #[test]
    fn zero_level_profile_is_zero() {
        let grid = make_grid(2, 0.1, 10).unwrap();
        let p = make_damping_profile(&grid, ProfileKind::Constant, 0.0, 3, None).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn random_profile_bounds_and_reproducibility() {
        let grid = make_grid(2, 0.05, 40).unwrap();
        let a = make_damping_profile(&grid, ProfileKind::Random, 2.0, 20, Some(42)).unwrap();
        let b = make_damping_profile(&grid, ProfileKind::Random, 2.0, 20, Some(42)).unwrap();
        assert_eq!(a, b);
        let c = make_damping_profile(&grid, ProfileKind::Random, 2.0, 20, Some(43)).unwrap();
        assert_ne!(a.axis(0), c.axis(0));
        for axis in 0..2 {
            let s = a.axis(axis);
            assert!(s[..20].iter().all(|&v| v == 0.0));
            assert!(s[20..].iter().all(|&v| (0.0..=2.0 / 0.05).contains(&v)));
        }
        assert_ne!(a.axis(0), a.axis(1));
    }

    #[test]
    fn profile_errors() {
        let grid = make_grid(1, 0.1, 8).unwrap();
        assert!(make_damping_profile(&grid, ProfileKind::Constant, -1.0, 2, None).is_err());
        assert!(make_damping_profile(&grid, ProfileKind::Constant, 1.0, 8, None).is_err());
        assert!(make_damping_profile(&grid, ProfileKind::Constant, 1.0, 5, None).is_err());
        assert!(make_damping_profile(&grid, ProfileKind::Random, 1.0, 2, None).is_err());
        let bad = ProfileKind::Explicit {
            sigma_dx: vec![vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]],
        };
        assert!(make_damping_profile(&grid, bad, 0.0, 0, None).is_err());
        let neg = ProfileKind::Explicit {
            sigma_dx: vec![vec![0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0]],
        };
        assert!(make_damping_profile(&grid, neg, 0.0, 0, None).is_err());
    }

    #[test]
    fn profile_json_roundtrip() {
        let grid = GridSpec::with_layer(2, 0.025, 40, 20).unwrap();
        let p = make_damping_profile(&grid, ProfileKind::Random, 2.0, 20, Some(7)).unwrap();
        let text = p.to_json().unwrap();
        let back = DampingProfile::from_json(&text).unwrap();
        assert_eq!(back.seed(), Some(7));
        assert_eq!(back.kind(), &ProfileKind::Random);
        for axis in 0..2 {
            for (a, b) in back.axis(axis).iter().zip(p.axis(axis)) {
                assert!((a - b).abs() <= 1e-15 * b.abs());
            }
        }
    }

    #[test]
    fn zero_state_zero_derivative() {
        let grid = make_grid(2, 0.1, 8).unwrap();
        let p = make_damping_profile(&grid, ProfileKind::Constant, 2.0, 4, None).unwrap();
        let d = pml_rhs(&PmlState::<f64>::zeros(grid), &p).unwrap();
        assert!(d.fields().all(|f| f.values().iter().all(|&v| v == 0.0)));
        let w = wave_rhs(&WaveState::<f64>::zeros(grid));
        assert!(w.v.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_u_has_no_acceleration() {
        let grid = make_grid(3, 0.2, 5).unwrap();
        let u = Field::from_values(grid, vec![1.5; grid.len()]).unwrap();
        let s = WaveState::new(u, Field::zeros(grid)).unwrap();
        let d = wave_rhs(&s);
        assert!(d.v.values().iter().all(|&v| v == 0.0));
        assert!(d.u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn plane_wave_acceleration() {
        let n = 16;
        let dx = 0.125;
        let grid = GridSpec::new(dx, &[n, n], &[-8, -8]).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let k = [tau * 2.0 / (n as f64 * dx), tau * 3.0 / (n as f64 * dx)];
        let omega2: f64 = k.iter().map(|k| 4.0 * (k * dx / 2.0).sin().powi(2)).sum::<f64>() / (dx * dx);
        let omega = omega2.sqrt();
        let u = Field::from_lattice_fn(grid, |c| {
            Complex64::new(0.0, dx * (k[0] * c[0] as f64 + k[1] * c[1] as f64)).exp()
        });
        let v = u.scaled(Complex64::new(0.0, -omega));
        let s = WaveState::new(u.clone(), v).unwrap();
        let d = wave_rhs(&s);
        for (a, b) in d.v.values().iter().zip(u.values()) {
            assert!((a + b * omega2).norm() < 1e-11 * omega2);
        }
    }

    #[test]
    fn undamped_layer_reduces_to_wave_equation_bitwise() {
        let grid = make_grid(2, 0.1, 9).unwrap();
        let s = random_state(grid, 1);
        let p = DampingProfile::zero(&grid);
        let d = pml_rhs(&s, &p).unwrap();
        let w = wave_rhs(&WaveState::new(s.u.clone(), s.v.clone()).unwrap());
        assert_eq!(d.u, w.u);
        assert_eq!(d.v, w.v);
        // Φ̇ = Ψ̇ = −centered gradient
        let up = s.u.shift(1, 1).unwrap();
        let um = s.u.shift(1, -1).unwrap();
        for i in 0..grid.len() {
            let g = -(up.values()[i] - um.values()[i]) * (0.5 / 0.1);
            assert_eq!(d.phi[1].values()[i], g);
            assert_eq!(d.psi[1].values()[i], g);
        }
    }

    #[test]
    fn rhs_is_linear() {
        let grid = GridSpec::with_layer(2, 0.1, 5, 4).unwrap();
        let p = make_damping_profile(&grid, ProfileKind::Random, 2.0, 4, Some(3)).unwrap();
        let a = random_state(grid, 10);
        let b = random_state(grid, 11);
        let (ca, cb) = (0.7, -1.9);
        let lhs = pml_rhs(&a.combine(ca, cb, &b), &p).unwrap();
        let rhs = pml_rhs(&a, &p).unwrap().combine(ca, cb, &pml_rhs(&b, &p).unwrap());
        let scale = 4.0 / (0.1 * 0.1) * 2.0 * 8.0;
        for (x, y) in lhs.fields().zip(rhs.fields()) {
            for (p, q) in x.values().iter().zip(y.values()) {
                assert!((p - q).abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn rhs_is_local() {
        let grid = GridSpec::with_layer(2, 0.1, 6, 6).unwrap();
        let p = make_damping_profile(&grid, ProfileKind::Constant, 1.0, 6, None).unwrap();
        let base = random_state(grid, 5);
        let mut bumped = base.clone();
        let center = [6usize, 7usize];
        let off = grid.offset(&[center[0] as i64, center[1] as i64]);
        bumped.u.values_mut()[off] += 1.0;
        let d0 = pml_rhs(&base, &p).unwrap();
        let d1 = pml_rhs(&bumped, &p).unwrap();
        for (f0, f1) in d0.fields().zip(d1.fields()) {
            for cell in 0..grid.len() {
                if f0.values()[cell] != f1.values()[cell] {
                    let idx = grid.index(cell);
                    let dist: usize = (0..2).map(|a| idx[a].abs_diff(center[a])).sum();
                    assert!(dist <= 1, "change at {idx:?}");
                }
            }
        }
    }

    #[test]
    fn restricted_support_pins_aux_fields() {
        let grid = GridSpec::with_layer(1, 0.1, 6, 6).unwrap();
        let p = make_damping_profile(&grid, ProfileKind::Constant, 1.0, 6, None).unwrap();
        let op = PmlOperator::new(p, AuxSupport::Restricted);
        let mut s = random_state(grid, 9);
        op.project(&mut s);
        let mut d = PmlState::zeros(grid);
        op.apply(&s, &mut d);
        // σ vanishes at storage 0..6 and on the wrapped edge at storage 11
        for c in (0..6).chain([11]) {
            assert_eq!(s.phi[0].values()[c], 0.0);
            assert_eq!(d.phi[0].values()[c], 0.0);
        }
        for c in 0..7 {
            assert_eq!(s.psi[0].values()[c], 0.0);
            assert_eq!(d.psi[0].values()[c], 0.0);
        }
        assert_ne!(d.phi[0].values()[6], 0.0);
        assert_ne!(d.psi[0].values()[7], 0.0);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let g1 = make_grid(1, 0.1, 8).unwrap();
        let g2 = make_grid(1, 0.1, 10).unwrap();
        let p = DampingProfile::zero(&g1);
        assert!(pml_rhs(&PmlState::<f64>::zeros(g2), &p).is_err());
    }
}

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{DampingKind, InitialConfig, ScenarioConfig};
use super::initial::{gaussian_bump_ic, noise_disk_ic, restrict_to_physical};
use super::report;
use crate::analytics::{energy, reflection_error, solve_mode, EnergyReport, Region};
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, Scalar};
use crate::integrator::{simulate, stable_dt, TimeGrid};
use crate::pml::{make_damping_profile, DampingProfile, PmlOperator, PmlState, ProfileKind, WaveOperator, WaveState};

/// Everything a run needs besides the initial data.
#[derive(Debug, Clone)]
pub struct Setup {
    pub grid: GridSpec,
    pub profile: DampingProfile,
    pub operator: PmlOperator,
    pub time: TimeGrid,
}

pub fn build_setup(cfg: &ScenarioConfig) -> Result<Setup> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let thickness = cfg.damping.thickness.unwrap_or(cfg.grid.layer_cells);
    let profile = match cfg.damping.kind {
        DampingKind::None => DampingProfile::zero(&grid),
        DampingKind::Constant => {
            make_damping_profile(&grid, ProfileKind::Constant, cfg.damping.level.0, thickness, None)?
        }
        DampingKind::Random => make_damping_profile(
            &grid,
            ProfileKind::Random,
            cfg.damping.level.0,
            thickness,
            cfg.damping.seed,
        )?,
    };
    let dt = match cfg.time.dt {
        Some(dt) => dt.0,
        None => stable_dt(&grid, cfg.time.safety.0)?,
    };
    let time = TimeGrid::covering(cfg.time.t_end.0, dt)?;
    let operator = PmlOperator::new(profile.clone(), cfg.damping.support);
    Ok(Setup {
        grid,
        profile,
        operator,
        time,
    })
}

/// Real initial data, restricted to the physical block.
pub fn real_initial_state(cfg: &ScenarioConfig, grid: &GridSpec) -> Result<WaveState<f64>> {
    let mut s = match &cfg.initial {
        InitialConfig::Zero => WaveState::zeros(*grid),
        InitialConfig::Bump { center, width, peak } => {
            let c: Vec<f64> = center.iter().map(|x| x.0).collect();
            gaussian_bump_ic(grid, &c, width.0, peak.0)?
        }
        InitialConfig::Noise {
            center,
            radius,
            variance,
            seed,
        } => {
            let c: Vec<f64> = center.iter().map(|x| x.0).collect();
            let seed = seed.ok_or_else(|| Error::Config("initial: noise needs an explicit seed".into()))?;
            noise_disk_ic(grid, &c, radius.0, variance.0, seed)?
        }
        InitialConfig::PlaneWave { .. } => {
            return Err(Error::Config("plane-wave initial data is complex".into()))
        }
    };
    restrict_to_physical(&mut s.u);
    restrict_to_physical(&mut s.v);
    Ok(s)
}

/// Reference grid with `round(ℓ·n)` cells starting at lattice coordinate
/// `round(ℓ·origin)` on every axis.
pub fn reference_grid(grid: &GridSpec, enlargement: f64) -> Result<GridSpec> {
    let d = grid.dim();
    let shape: Vec<usize> = (0..d).map(|a| (enlargement * grid.shape()[a] as f64).round() as usize).collect();
    let origin: Vec<i64> = (0..d).map(|a| (enlargement * grid.origin()[a] as f64).round() as i64).collect();
    let g = GridSpec::new(grid.dx(), &shape, &origin)?;
    for a in 0..d {
        if origin[a] > grid.origin()[a] || origin[a] + shape[a] as i64 <= -1 {
            return Err(Error::Preflight("reference grid does not cover the physical block".into()));
        }
    }
    Ok(g)
}

/// Rejects a reference grid on which a wave leaving the physical block
/// could wrap around and come back within `t_end` (unit wave speed).
pub fn reference_preflight(grid: &GridSpec, reference: &GridSpec, t_end: f64) -> Result<()> {
    for a in 0..grid.dim() {
        let gap = reference.shape()[a].saturating_sub(grid.physical_cells(a)) as f64 * grid.dx();
        if gap <= t_end {
            return Err(Error::Preflight(format!(
                "axis {a}: a wave can wrap back into the physical block after {gap:.4} < T = {t_end}; enlarge the reference"
            )));
        }
    }
    Ok(())
}

/// Samples of the reference solution on the physical block.
#[derive(Debug, Clone)]
pub struct ReferenceTrajectory {
    pub grid: GridSpec,
    pub period: usize,
    /// `(step, t, U on the physical block)`.
    pub samples: Vec<(usize, f64, Field<f64>)>,
}

impl ReferenceTrajectory {
    pub fn at_step(&self, step: usize) -> Option<&Field<f64>> {
        self.samples
            .binary_search_by_key(&step, |s| s.0)
            .ok()
            .map(|i| &self.samples[i].2)
    }
}

fn physical_block(grid: &GridSpec) -> Result<GridSpec> {
    let d = grid.dim();
    let shape: Vec<usize> = (0..d).map(|a| grid.physical_cells(a)).collect();
    let origin: Vec<i64> = shape.iter().map(|&p| -(p as i64)).collect();
    GridSpec::new(grid.dx(), &shape, &origin)
}

fn sample_block(block: &GridSpec, u: &Field<f64>) -> Field<f64> {
    Field::from_lattice_fn(*block, |c| u.at_lattice(c).unwrap_or(0.0))
}

/// Pure wave equation on the enlarged grid with the same initial data,
/// step and step count; keeps the physical block every `period` steps.
pub fn reference_run(cfg: &ScenarioConfig, period: usize) -> Result<ReferenceTrajectory> {
    let setup = build_setup(cfg)?;
    let enlargement = cfg
        .reference
        .as_ref()
        .ok_or_else(|| Error::Config("reference: missing enlargement".into()))?
        .enlargement
        .0;
    let rgrid = reference_grid(&setup.grid, enlargement)?;
    reference_preflight(&setup.grid, &rgrid, setup.time.t_end())?;
    let init = real_initial_state(cfg, &setup.grid)?;
    let embed = |f: &Field<f64>| Field::from_lattice_fn(rgrid, |c| f.at_lattice(c).unwrap_or(0.0));
    let state = WaveState::new(embed(&init.u), embed(&init.v))?;
    let block = physical_block(&setup.grid)?;
    let mut samples = Vec::new();
    simulate(state, &WaveOperator, setup.time, period, |n, t, s: &WaveState<f64>| {
        samples.push((n, t, sample_block(&block, &s.u)));
        Ok(())
    })?;
    Ok(ReferenceTrajectory {
        grid: block,
        period,
        samples,
    })
}

/// Summary written next to the traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub dt: f64,
    pub steps: usize,
    pub t_end: f64,
    pub initial_energy: f64,
    pub final_total_energy: f64,
    pub final_physical_energy: f64,
    /// `max_t E_all(t) / E_all(0)`, energy summed over every cell.
    pub max_total_energy_ratio: f64,
    /// `max_t E_phys(t) / E_phys(0)`, energy summed over the physical block.
    pub max_physical_energy_ratio: f64,
    pub max_reflection: Option<f64>,
    /// `max |U(T) − e^{−𝕚ωT}U(0)|` for plane-wave runs.
    pub plane_wave_error: Option<f64>,
}

/// `U` at the final time.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalField {
    Real(Field<f64>),
    Complex(Field<Complex64>),
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub summary: RunSummary,
    pub energy: EnergyReport,
    /// `(t, max |U − U_ref|)` over the physical block.
    pub reflection: Vec<(f64, f64)>,
    pub final_u: FinalField,
    pub files: Vec<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub runtime_seconds: f64,
}

/// Builds grid, profile and initial data, integrates, and writes traces to
/// `out_dir` when given.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunArtifacts> {
    let started = Instant::now();
    let setup = build_setup(cfg)?;
    let mut art = match &cfg.initial {
        InitialConfig::PlaneWave { k_dx } => run_plane_wave(cfg, &setup, k_dx.iter().map(|k| k.0).collect())?,
        _ => run_real(cfg, &setup)?,
    };
    art.runtime_seconds = started.elapsed().as_secs_f64();
    if let Some(dir) = out_dir {
        report::write_run(dir, cfg, &setup, &mut art)?;
    }
    Ok(art)
}

fn run_real(cfg: &ScenarioConfig, setup: &Setup) -> Result<RunArtifacts> {
    let reference = match cfg.reference {
        Some(_) => Some(reference_run(cfg, cfg.time.reflection_period)?),
        None => None,
    };
    let init = real_initial_state(cfg, &setup.grid)?;
    let mut state = PmlState::from_wave(init);
    setup.operator.project(&mut state);
    let mut energy_trace = EnergyReport::default();
    let mut reflection = Vec::new();
    let (ep, rp) = (cfg.time.energy_period, cfg.time.reflection_period);
    let last = setup.time.steps;
    let final_state = simulate(state, &setup.operator, setup.time, ep.min(rp), |n, t, s: &PmlState<f64>| {
        if n % ep == 0 || n == last {
            energy_trace.record(t, &s.u, &s.v)?;
        }
        if let Some(r) = &reference {
            if n % rp == 0 || n == last {
                let sample = r.at_step(n).ok_or_else(|| {
                    Error::GridMismatch(format!("reference has no sample at step {n}"))
                })?;
                reflection.push((t, reflection_error(&s.u, sample)?));
            }
        }
        Ok(())
    })?;
    let u = FinalField::Real(final_state.u.clone());
    Ok(finish(cfg, setup, energy_trace, reflection, None, &final_state, u))
}

fn run_plane_wave(cfg: &ScenarioConfig, setup: &Setup, k_dx: Vec<f64>) -> Result<RunArtifacts> {
    let dx = setup.grid.dx();
    let comps: Vec<Option<Complex64>> = k_dx.iter().map(|&k| Some(Complex64::new(k / dx, 0.0))).collect();
    let mode = solve_mode(dx, &comps, None).map_err(|e| Error::Config(format!("initial: {e}")))?;
    let u0 = Field::from_lattice_fn(setup.grid, |c| crate::analytics::plane_wave_at(&mode, dx, c));
    let v0 = u0.scaled(Complex64::new(0.0, -mode.omega));
    let mut state = PmlState::from_wave(WaveState::new(u0.clone(), v0)?);
    setup.operator.project(&mut state);
    let mut energy_trace = EnergyReport::default();
    let ep = cfg.time.energy_period;
    let last = setup.time.steps;
    let final_state = simulate(state, &setup.operator, setup.time, ep, |n, t, s: &PmlState<Complex64>| {
        if n % ep == 0 || n == last {
            energy_trace.record(t, &s.u, &s.v)?;
        }
        Ok(())
    })?;
    let clock = Complex64::new(0.0, -mode.omega * setup.time.t_end()).exp();
    let err = final_state
        .u
        .values()
        .iter()
        .zip(u0.values())
        .map(|(a, b)| (a - b * clock).norm())
        .fold(0.0, f64::max);
    let u = FinalField::Complex(final_state.u.clone());
    Ok(finish(cfg, setup, energy_trace, Vec::new(), Some(err), &final_state, u))
}

fn finish<T: Scalar>(
    cfg: &ScenarioConfig,
    setup: &Setup,
    energy_trace: EnergyReport,
    reflection: Vec<(f64, f64)>,
    plane_wave_error: Option<f64>,
    final_state: &PmlState<T>,
    final_u: FinalField,
) -> RunArtifacts {
    let max_ratio = |trace: &[f64]| match trace.first() {
        Some(&e0) if e0 > 0.0 => trace.iter().fold(0.0f64, |m, &e| m.max(e / e0)),
        _ => 0.0,
    };
    let e0 = energy_trace.total.first().copied().unwrap_or(0.0);
    let summary = RunSummary {
        name: cfg.label().to_string(),
        dt: setup.time.dt,
        steps: setup.time.steps,
        t_end: setup.time.t_end(),
        initial_energy: e0,
        final_total_energy: energy(&final_state.u, &final_state.v, Region::All).unwrap_or(f64::NAN),
        final_physical_energy: energy(&final_state.u, &final_state.v, Region::Physical).unwrap_or(f64::NAN),
        max_total_energy_ratio: max_ratio(&energy_trace.total),
        max_physical_energy_ratio: max_ratio(&energy_trace.physical),
        max_reflection: (!reflection.is_empty()).then(|| reflection.iter().fold(0.0f64, |m, r| m.max(r.1))),
        plane_wave_error,
    };
    RunArtifacts {
        summary,
        energy: energy_trace,
        reflection,
        final_u,
        files: Vec::new(),
        snapshot: None,
        runtime_seconds: 0.0,
    }
}

//! Built-in scenarios for the standard experiments.

use super::config::{
    DampingConfig, DampingKind, Dec, GridConfig, InitialConfig, OutputConfig, ReferenceConfig, ScenarioConfig,
    TimeConfig, SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::pml::AuxSupport;
use crate::rng::splitmix64;

pub const PRESETS: [&str; 5] = ["bump", "noise", "residual", "energy", "energy-random"];

fn d(x: f64) -> Dec {
    Dec(x)
}

fn bump(dim: usize) -> InitialConfig {
    InitialConfig::Bump {
        center: vec![d(-0.5); dim],
        width: d(0.1),
        peak: d(2.0),
    }
}

fn time(t_end: f64) -> TimeConfig {
    TimeConfig {
        t_end: d(t_end),
        safety: d(0.5),
        dt: None,
        energy_period: 1,
        reflection_period: 1,
    }
}

/// Bump in `[-1,0]²`, `Δx = 1/80`, constant `σΔx = 2` layer of 80 cells,
/// `T = 0.5`, reference on `[-5,5]²`.
pub fn bump_benchmark() -> ScenarioConfig {
    ScenarioConfig {
        version: SCHEMA_VERSION,
        name: Some("bump".into()),
        grid: GridConfig {
            d: 2,
            dx: d(0.0125),
            physical_cells: 80,
            layer_cells: 80,
        },
        damping: DampingConfig {
            kind: DampingKind::Constant,
            level: d(2.0),
            thickness: None,
            seed: None,
            support: AuxSupport::Full,
        },
        initial: bump(2),
        time: time(0.5),
        outputs: OutputConfig::default(),
        reference: Some(ReferenceConfig { enlargement: d(5.0) }),
    }
}

/// As [`bump_benchmark`] with `σ ~ Unif[0, 2/Δx]` per cell and white noise
/// of variance 1/4 in a disk of radius 1/4.
pub fn noise_benchmark(seed: u64) -> ScenarioConfig {
    let mut c = bump_benchmark();
    c.name = Some("noise".into());
    c.damping.kind = DampingKind::Random;
    c.damping.seed = Some(seed);
    c.initial = InitialConfig::Noise {
        center: vec![d(-0.5); 2],
        radius: d(0.25),
        variance: d(0.25),
        seed: Some(splitmix64(seed)),
    };
    c
}

/// Enlargement that keeps wrapped waves out of the physical block until
/// `t_end` on a grid of `physical + layer` cells.
pub fn enlargement_for(physical: usize, layer: usize, dx: f64, t_end: f64) -> f64 {
    let need = (t_end / dx).ceil() + physical as f64 + 2.0;
    (need / (physical + layer) as f64).ceil().max(1.0)
}

/// `Δx = 1/40`, 40 physical cells, `σΔx = 1` layer of `thickness` cells,
/// bump, reference sized for `t_end`.
pub fn residual_scenario(thickness: usize, t_end: f64) -> ScenarioConfig {
    let dx = 0.025;
    ScenarioConfig {
        version: SCHEMA_VERSION,
        name: Some(format!("residual-m{thickness}")),
        grid: GridConfig {
            d: 2,
            dx: d(dx),
            physical_cells: 40,
            layer_cells: thickness,
        },
        damping: DampingConfig {
            kind: DampingKind::Constant,
            level: d(1.0),
            thickness: None,
            seed: None,
            support: AuxSupport::Full,
        },
        initial: bump(2),
        time: time(t_end),
        outputs: OutputConfig::default(),
        reference: Some(ReferenceConfig {
            enlargement: d(enlargement_for(40, thickness, dx, t_end)),
        }),
    }
}

/// `Δx = 1/40`, 40 physical cells, 20-cell `σΔx = 2` layer (constant, or
/// uniform random when `seed` is given), bump, `T = 10`.
pub fn energy_scenario(seed: Option<u64>) -> ScenarioConfig {
    ScenarioConfig {
        version: SCHEMA_VERSION,
        name: Some(if seed.is_some() { "energy-random" } else { "energy" }.into()),
        grid: GridConfig {
            d: 2,
            dx: d(0.025),
            physical_cells: 40,
            layer_cells: 20,
        },
        damping: DampingConfig {
            kind: if seed.is_some() {
                DampingKind::Random
            } else {
                DampingKind::Constant
            },
            level: d(2.0),
            thickness: None,
            seed,
            support: AuxSupport::Full,
        },
        initial: bump(2),
        time: time(10.0),
        outputs: OutputConfig::default(),
        reference: None,
    }
}

pub fn preset(name: &str, seed: u64) -> Result<ScenarioConfig> {
    match name {
        "bump" => Ok(bump_benchmark()),
        "noise" => Ok(noise_benchmark(seed)),
        "residual" => Ok(residual_scenario(20, 3.0)),
        "energy" => Ok(energy_scenario(None)),
        "energy-random" => Ok(energy_scenario(Some(seed))),
        _ => Err(Error::Config(format!(
            "unknown preset {name:?} (available: {})",
            PRESETS.join(", ")
        ))),
    }
}

//! Parameter sweeps behind the `verify-theorem`, `rho-study` and
//! `residual-study` subcommands.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::presets::residual_scenario;
use super::scenario::run_scenario;
use crate::analytics::{
    exp_asymptote, fourier_residuals, is_interior, pade_asymptote, random_mode, ExtendedSolution, FourierResiduals,
    WaveMode,
};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::lattice::rho;
use crate::pml::{make_damping_profile, pml_rhs, DampingProfile, PmlState, ProfileKind};
use crate::rng;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremStudy {
    pub samples: usize,
    pub seed: u64,
    pub dx: f64,
    pub physical_cells: usize,
    pub layer_cells: usize,
}

impl Default for TheoremStudy {
    fn default() -> Self {
        Self {
            samples: 120,
            seed: 1,
            dx: 1.0 / 16.0,
            physical_cells: 12,
            layer_cells: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRow {
    pub sample: usize,
    pub profile: String,
    pub omega_dx: f64,
    pub k_dx: Vec<[f64; 2]>,
    pub evanescent: bool,
    /// Largest relative residual of the `Φ`, `Ψ` and `U` equations.
    pub fourier: [f64; 3],
    /// Largest relative value of `pml_rhs(S) + 𝕚ωS` over all components.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub rows: Vec<TheoremRow>,
    pub modes: usize,
    pub evanescent_modes: usize,
    pub max_fourier: f64,
    pub max_rhs: f64,
}

/// The three damping profiles of the sweep: constant `σΔx = 2`, constant
/// `σΔx = 1` and uniform random on `[0, 2/Δx]`.
pub fn theorem_profiles(grid: &GridSpec, seed: u64) -> Result<Vec<(String, DampingProfile)>> {
    let m = grid.shape()[0] - grid.physical_cells(0);
    Ok(vec![
        ("constant-2".into(), make_damping_profile(grid, ProfileKind::Constant, 2.0, m, None)?),
        ("constant-1".into(), make_damping_profile(grid, ProfileKind::Constant, 1.0, m, None)?),
        (
            "random-2".into(),
            make_damping_profile(grid, ProfileKind::Random, 2.0, m, Some(rng::splitmix64(seed ^ 0x5eed)))?,
        ),
    ])
}

/// Largest relative `|pml_rhs(S) + 𝕚ωS|` over interior cells, normalized by
/// the term sums from `scales` (the same equations in the time-harmonic
/// form).
pub fn rhs_residual(state: &PmlState<Complex64>, profile: &DampingProfile, omega: f64, scales: &FourierResiduals) -> Result<f64> {
    let d = pml_rhs(state, profile)?;
    let grid = *state.grid();
    let iw = I * omega;
    let mut worst: f64 = 0.0;
    let mut take = |num: Complex64, den: f64| {
        if den > 0.0 {
            worst = worst.max(num.norm() / den);
        }
    };
    for off in (0..grid.len()).filter(|&o| is_interior(&grid, o)) {
        let (u, v) = (state.u.values()[off], state.v.values()[off]);
        take(d.u.values()[off] + iw * u, v.norm() + (omega * u).norm());
        take(d.v.values()[off] + iw * v, scales.u_scale.values()[off]);
        for a in 0..grid.dim() {
            take(d.phi[a].values()[off] + iw * state.phi[a].values()[off], scales.phi_scale[a].values()[off]);
            take(d.psi[a].values()[off] + iw * state.psi[a].values()[off], scales.psi_scale[a].values()[off]);
        }
    }
    Ok(worst)
}

fn mode_row(sample: usize, profile_name: &str, profile: &DampingProfile, mode: &WaveMode) -> Result<TheoremRow> {
    let dx = profile.grid().dx();
    let state = ExtendedSolution::new(mode.clone(), profile)?.state(0.0);
    let res = fourier_residuals(&state, profile, mode.omega)?;
    let rhs = rhs_residual(&state, profile, mode.omega, &res)?;
    Ok(TheoremRow {
        sample,
        profile: profile_name.to_string(),
        omega_dx: mode.omega * dx,
        k_dx: mode.k.iter().map(|k| [k.re * dx, k.im * dx]).collect(),
        evanescent: mode.is_evanescent(),
        fourier: res.max_relative(),
        rhs,
    })
}

/// Draws `samples` feasible 2-d modes and checks the extended solution of
/// each against every profile of [`theorem_profiles`].
pub fn verify_theorem(study: &TheoremStudy) -> Result<TheoremReport> {
    let grid = GridSpec::with_layer(2, study.dx, study.physical_cells, study.layer_cells)?;
    let profiles = theorem_profiles(&grid, study.seed)?;
    let modes: Vec<WaveMode> = (0..study.samples)
        .map(|i| {
            let mut r = rng::stream(study.seed, i as u64);
            random_mode(&mut r, 2, study.dx, i % 3 == 0)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<TheoremRow> = modes
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, m)| profiles.iter().map(move |(name, p)| mode_row(i, name, p, m)))
        .collect::<Result<_>>()?;
    let max_fourier = rows.iter().flat_map(|r| r.fourier).fold(0.0, f64::max);
    let max_rhs = rows.iter().map(|r| r.rhs).fold(0.0, f64::max);
    Ok(TheoremReport {
        modes: modes.len(),
        evanescent_modes: modes.iter().filter(|m| m.is_evanescent()).count(),
        rows,
        max_fourier,
        max_rhs,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RhoReport {
    pub samples: usize,
    /// Samples with `|ρ| ≥ 1`.
    pub modulus_violations: usize,
    /// Samples with `|ρ(k)| ≥ |ρ(−conj k)|`.
    pub reflected_violations: usize,
    pub max_modulus: f64,
    pub max_reflected_ratio: f64,
    /// `|ρ(0, k, ω) − 1|`.
    pub zero_damping_error: f64,
    /// `|ρ(s, π/Δx, ω) − 1|`.
    pub nyquist_error: f64,
    /// `|ρ(s, k, ω)·ρ(s, −k, ω) − 1|`.
    pub inverse_error: f64,
    /// `|ρ(s, k, −ω) − conj ρ(s, −conj k, ω)| / |ρ(s, k, −ω)|`.
    pub conjugation_error: f64,
}

fn log_uniform<R: Rng>(r: &mut R, lo: f64, hi: f64) -> f64 {
    (r.random_range(lo.ln()..hi.ln())).exp()
}

/// Random samples with `sΔx ∈ [1e-2, 1e2]`, `|ωΔx| ∈ [1e-2, 1e1]` (both
/// log-uniform, random sign of `ω`), `sgn(ω)·Re(kΔx) ∈ (0.01, π − 0.01)`
/// and `Im(kΔx) ∈ [−3, 0]`.
pub fn rho_study(samples: usize, seed: u64, dx: f64) -> Result<RhoReport> {
    let pi = std::f64::consts::PI;
    let parts: Vec<RhoReport> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<RhoReport> {
            let mut r = rng::stream(seed, i as u64);
            let s = log_uniform(&mut r, 1e-2, 1e2) / dx;
            let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
            let omega = sign * log_uniform(&mut r, 1e-2, 1e1) / dx;
            let k = Complex64::new(sign * r.random_range(0.01..pi - 0.01), -r.random_range(0.0..=3.0)) / dx;

            let p = rho(s, k, omega, dx)?;
            let back = rho(s, -k.conj(), omega, dx)?;
            let flipped = rho(s, k, -omega, dx)?;
            let inverse = rho(s, -k, omega, dx)?;
            let conj_ref = rho(s, -k.conj(), omega, dx)?.conj();
            let nyq = rho(s, Complex64::new(pi / dx, 0.0), omega, dx)?;
            Ok(RhoReport {
                samples: 1,
                modulus_violations: usize::from(p.norm() >= 1.0),
                reflected_violations: usize::from(p.norm() / back.norm() >= 1.0),
                max_modulus: p.norm(),
                max_reflected_ratio: p.norm() / back.norm(),
                zero_damping_error: (rho(0.0, k, omega, dx)? - 1.0).norm(),
                nyquist_error: (nyq - 1.0).norm(),
                inverse_error: (p * inverse - 1.0).norm(),
                conjugation_error: (flipped - conj_ref).norm() / flipped.norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(RhoReport::default(), |a, b| RhoReport {
        samples: a.samples + b.samples,
        modulus_violations: a.modulus_violations + b.modulus_violations,
        reflected_violations: a.reflected_violations + b.reflected_violations,
        max_modulus: a.max_modulus.max(b.max_modulus),
        max_reflected_ratio: a.max_reflected_ratio.max(b.max_reflected_ratio),
        zero_damping_error: a.zero_damping_error.max(b.zero_damping_error),
        nyquist_error: a.nyquist_error.max(b.nyquist_error),
        inverse_error: a.inverse_error.max(b.inverse_error),
        conjugation_error: a.conjugation_error.max(b.conjugation_error),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteRow {
    pub dx: f64,
    pub rho: [f64; 2],
    pub pade: [f64; 2],
    /// `| |ρ| − |Padé| |`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteReport {
    pub sigma_dx: f64,
    pub slowness: f64,
    pub wavenumber: f64,
    pub rows: Vec<AsymptoteRow>,
    /// `log₂(e_j / e_{j+1})` between consecutive rows.
    pub orders: Vec<f64>,
    /// `(σΔx, |Padé − exp|)` for shrinking `σΔx`.
    pub pade_vs_exp: Vec<[f64; 2]>,
    pub pade_vs_exp_orders: Vec<f64>,
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Evaluates `ρ(σ, k, ω)` with `σ = sigma_dx/Δx`, `ω = k/slowness` on the
/// dyadic sweep `Δx = dx0·2^{-j}` and compares the modulus with the Padé
/// limit; then compares Padé and exponential as `σΔx` halves.
pub fn asymptote_study(sigma_dx: f64, slowness: f64, wavenumber: f64, dx0: f64, levels: usize) -> Result<AsymptoteReport> {
    let kappa = Complex64::new(slowness, 0.0);
    let pade = pade_asymptote(sigma_dx, kappa)?;
    let rows: Vec<AsymptoteRow> = (0..levels)
        .map(|j| {
            let dx = dx0 / (1u64 << j) as f64;
            let k = Complex64::new(wavenumber, 0.0);
            let r = rho(sigma_dx / dx, k, wavenumber / slowness, dx)?;
            Ok(AsymptoteRow {
                dx,
                rho: [r.re, r.im],
                pade: [pade.re, pade.im],
                error: (r.norm() - pade.norm()).abs(),
            })
        })
        .collect::<Result<_>>()?;
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let pade_vs_exp: Vec<[f64; 2]> = (0..levels)
        .map(|j| {
            let x = sigma_dx / (1u64 << (j + 1)) as f64;
            let diff = (pade_asymptote(x, kappa).map(|p| p - exp_asymptote(x, kappa)))?.norm();
            Ok([x, diff])
        })
        .collect::<Result<_>>()?;
    let pe: Vec<f64> = pade_vs_exp.iter().map(|p| p[1]).collect();
    Ok(AsymptoteReport {
        sigma_dx,
        slowness,
        wavenumber,
        orders: orders(&errs),
        rows,
        pade_vs_exp_orders: orders(&pe),
        pade_vs_exp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub thickness: usize,
    pub max_residual: f64,
    pub trace: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub window: [f64; 2],
    pub rows: Vec<ResidualRow>,
    /// Least-squares slope of `ln(max residual)` against thickness.
    pub log_slope: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Residual-wave sweep: one bump run per layer thickness, each compared
/// with its own reference; reports the largest physical-block error with
/// `t` inside `window`.
pub fn residual_study(thicknesses: &[usize], window: [f64; 2]) -> Result<ResidualReport> {
    let rows: Vec<ResidualRow> = thicknesses
        .par_iter()
        .map(|&m| {
            let cfg = residual_scenario(m, window[1]);
            let art = run_scenario(&cfg, None)?;
            let max_residual = art
                .reflection
                .iter()
                .filter(|r| r.0 >= window[0] - 1e-12)
                .fold(0.0f64, |a, r| a.max(r.1));
            Ok(ResidualRow {
                thickness: m,
                max_residual,
                trace: art.reflection,
            })
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.thickness as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.max_residual.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(ResidualReport {
        window,
        log_slope: if rows.len() > 1 { fit_slope(&x, &y) } else { f64::NAN },
        rows,
    })
}

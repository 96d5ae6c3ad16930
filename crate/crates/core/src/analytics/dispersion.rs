use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::in_feasible_region;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const RESIDUAL_TOL: f64 = 1e-12;

/// Time-harmonic lattice wave `e^{-𝕚ωt} e^{𝕚Σ k_δ Δx i_δ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveMode {
    pub omega: f64,
    pub k: Vec<Complex64>,
}

impl WaveMode {
    /// Checks `ω ≠ 0`, feasibility of every component and the dispersion
    /// relation.
    pub fn new(omega: f64, k: Vec<Complex64>, dx: f64) -> Result<Self> {
        if omega == 0.0 || !omega.is_finite() {
            return Err(Error::param("omega", "must be finite and nonzero"));
        }
        if k.is_empty() || k.len() > 3 {
            return Err(Error::param("k", format!("need 1..=3 components, got {}", k.len())));
        }
        for &kk in &k {
            if !in_feasible_region(kk, dx) {
                return Err(Error::Infeasible { k: kk, dx });
            }
        }
        let mode = Self { omega, k };
        let res = dispersion_residual(&mode, dx);
        if res.norm() > RESIDUAL_TOL * dispersion_scale(&mode, dx) {
            return Err(Error::param(
                "k",
                format!("dispersion residual {:.3e} exceeds tolerance", res.norm()),
            ));
        }
        Ok(mode)
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn is_evanescent(&self) -> bool {
        self.k.iter().any(|k| k.im < 0.0)
    }
}

fn sin2_half(k: Complex64, dx: f64) -> Complex64 {
    let s = (k * (dx / 2.0)).sin();
    s * s * 4.0
}

/// `ω²Δx² − Σ_δ 4 sin²(k_δΔx/2)`.
pub fn dispersion_residual(mode: &WaveMode, dx: f64) -> Complex64 {
    let wd = mode.omega * dx;
    mode.k.iter().fold(Complex64::new(wd * wd, 0.0), |acc, &k| acc - sin2_half(k, dx))
}

fn dispersion_scale(mode: &WaveMode, dx: f64) -> f64 {
    let wd = mode.omega * dx;
    mode.k.iter().map(|&k| sin2_half(k, dx).norm()).sum::<f64>() + wd * wd + 1.0
}

/// Shifts `Re(kΔx)` into `(-π, π]`.
fn wrap_into_strip(k: Complex64, dx: f64) -> Complex64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut re = (k.re * dx).rem_euclid(tau);
    if re > std::f64::consts::PI {
        re -= tau;
    }
    Complex64::new(re / dx, k.im)
}

/// Completes a mode from the dispersion relation.
///
/// Either exactly one entry of `components` is `None` and `omega` is given,
/// or all components are given and `omega` is optional (it is derived when
/// absent and must come out real). For a solved component the branch with
/// `Im k < 0` is chosen; a real solution is oriented so that
/// `sgn(ω)·Re k ≥ 0`.
pub fn solve_mode(dx: f64, components: &[Option<Complex64>], omega: Option<f64>) -> Result<WaveMode> {
    if !(dx > 0.0) {
        return Err(Error::param("dx", "must be positive"));
    }
    let unknown: Vec<usize> = (0..components.len()).filter(|&i| components[i].is_none()).collect();
    match (unknown.as_slice(), omega) {
        ([], Some(w)) => WaveMode::new(w, components.iter().map(|c| c.unwrap()).collect(), dx),
        ([], None) => {
            let k: Vec<Complex64> = components.iter().map(|c| c.unwrap()).collect();
            let sum: Complex64 = k.iter().map(|&kk| sin2_half(kk, dx)).sum();
            if sum.im.abs() > RESIDUAL_TOL * (1.0 + sum.norm()) || sum.re <= 0.0 {
                return Err(Error::param(
                    "omega",
                    format!("wave numbers give no real nonzero frequency (ω²Δx² = {sum})"),
                ));
            }
            WaveMode::new(sum.re.sqrt() / dx, k, dx)
        }
        ([u], Some(w)) => {
            let wd = w * dx;
            let others: Complex64 = components
                .iter()
                .flatten()
                .map(|&kk| sin2_half(kk, dx))
                .sum();
            // sin²(kΔx/2) = q
            let q = (Complex64::new(wd * wd, 0.0) - others) / 4.0;
            let half = if q.im == 0.0 && (0.0..=1.0).contains(&q.re) {
                Complex64::new(q.re.sqrt().asin(), 0.0)
            } else {
                q.sqrt().asin()
            };
            let a = wrap_into_strip(half * (2.0 / dx), dx);
            let b = wrap_into_strip(-half * (2.0 / dx), dx);
            let tiny = 64.0 * f64::EPSILON / dx;
            let pick = if a.im.abs() <= tiny && b.im.abs() <= tiny {
                let (a, b) = (Complex64::new(a.re, 0.0), Complex64::new(b.re, 0.0));
                if w.signum() * a.re >= 0.0 {
                    a
                } else {
                    b
                }
            } else if a.im < b.im {
                a
            } else {
                b
            };
            let mut k: Vec<Complex64> = components.iter().map(|c| c.unwrap_or_default()).collect();
            k[*u] = pick;
            if !in_feasible_region(pick, dx) {
                return Err(Error::Infeasible { k: pick, dx });
            }
            WaveMode::new(w, k, dx)
        }
        ([_], None) => Err(Error::param("omega", "required when a component is unknown")),
        _ => Err(Error::param("components", "at most one component may be unknown")),
    }
}

/// Random feasible `d`-dimensional mode. The first `d-1` components are
/// drawn (real, or with negative imaginary part when `complex_given`), the
/// frequency from `|ωΔx| ∈ [0.05, 2√d)` with random sign, and the last
/// component is solved for. Draws are retried until a feasible mode appears.
pub fn random_mode<R: Rng>(rng: &mut R, d: usize, dx: f64, complex_given: bool) -> Result<WaveMode> {
    let pi = std::f64::consts::PI;
    for _ in 0..1000 {
        let mut comps: Vec<Option<Complex64>> = (0..d.saturating_sub(1))
            .map(|_| {
                let re = rng.random_range(-pi + 1e-3..pi) / dx;
                let im = if complex_given { -rng.random_range(0.0..2.0) / dx } else { 0.0 };
                Some(Complex64::new(re, im))
            })
            .collect();
        comps.push(None);
        let wd = rng.random_range(0.05..2.0 * (d as f64).sqrt() - 0.05);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        if let Ok(m) = solve_mode(dx, &comps, Some(sign * wd / dx)) {
            return Ok(m);
        }
    }
    Err(Error::param("mode", "no feasible mode found"))
}

/// `e^{𝕚 Σ k_δΔx c_δ}` at lattice coordinates `c`.
pub fn plane_wave_at(mode: &WaveMode, dx: f64, c: &[i64]) -> Complex64 {
    let phase: Complex64 = mode.k.iter().zip(c).map(|(&k, &i)| k * (dx * i as f64)).sum();
    (I * phase).exp()
}

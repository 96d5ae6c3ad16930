use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smooth-wave limit of the decay rate, `(2 − σΔx·κ)/(2 + σΔx·κ)` with
/// slowness `κ = k/ω`.
pub fn pade_asymptote(sigma_dx: f64, slowness: Complex64) -> Result<Complex64> {
    let a = slowness * sigma_dx;
    let den = 2.0 + a;
    if den.norm() <= f64::EPSILON * (1.0 + a.norm()) {
        return Err(Error::param("slowness", format!("pole at σΔx·k/ω = {a}")));
    }
    Ok((2.0 - a) / den)
}

/// `exp(−σΔx·k/ω)`, the function the asymptote approximates.
pub fn exp_asymptote(sigma_dx: f64, slowness: Complex64) -> Complex64 {
    (-slowness * sigma_dx).exp()
}

//! Dispersion, exact extended solutions, residual checks, energy and
//! reflection metrics.

pub mod asymptote;
pub mod dispersion;
pub mod energy;
pub mod extension;

pub use asymptote::{exp_asymptote, pade_asymptote};
pub use dispersion::{dispersion_residual, plane_wave_at, random_mode, solve_mode, WaveMode};
pub use energy::{energy, reflection_error, EnergyReport, Region};
pub use extension::{fourier_residuals, is_interior, theorem1_state, ExtendedSolution, FourierResiduals};

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pml_lab::harness::config::{DampingKind, Dec, InitialConfig, ScenarioConfig};
use pml_lab::harness::presets::{self, PRESETS};
use pml_lab::harness::report::{ensure_dir, write_csv_trace, write_json};
use pml_lab::harness::scenario::{run_scenario, RunArtifacts};
use pml_lab::harness::studies::{asymptote_study, residual_study, rho_study, verify_theorem, TheoremStudy};
use pml_lab::rng::splitmix64;
use pml_lab::Error;

/// Discrete perfectly matched layer experiments for the lattice wave equation.
#[derive(Parser, Debug)]
#[command(name = "pml-lab", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed for random profiles, noise and sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for traces and summaries.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the time-step safety factor in (0, 1].
    #[arg(long, global = true)]
    dt_safety: Option<f64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    /// Exit with status 4 when a result misses its acceptance threshold.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Args, Debug)]
struct ScenarioSource {
    /// Scenario file (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write its traces.
    Simulate(ScenarioSource),
    /// Check extended solutions of random modes against the layer equations.
    VerifyTheorem {
        #[arg(long, default_value_t = 120)]
        samples: usize,
    },
    /// Sample the decay rate and tabulate its smooth-wave limit.
    RhoStudy {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Long run recording total and physical-block energy.
    EnergyTrace {
        #[command(flatten)]
        source: ScenarioSource,
        /// Use a random damping profile for the built-in scenario.
        #[arg(long)]
        random: bool,
    },
    /// Residual waves against layer thickness.
    ResidualStudy {
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 40])]
        thickness: Vec<usize>,
        /// Start of the measurement window.
        #[arg(long, default_value_t = 1.5)]
        window_start: f64,
        /// End of the run and of the window.
        #[arg(long, default_value_t = 3.0)]
        t_end: f64,
    },
}

enum Failure {
    Error(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("PML_LAB_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: PML_LAB_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(2);
            }
        }
    }
    let result = match &cli.command {
        Command::Simulate(src) => simulate(&cli.common, src, "bump"),
        Command::VerifyTheorem { samples } => theorem(&cli.common, *samples),
        Command::RhoStudy { samples } => rho(&cli.common, *samples),
        Command::EnergyTrace { source, random } => {
            simulate(&cli.common, source, if *random { "energy-random" } else { "energy" })
        }
        Command::ResidualStudy {
            thickness,
            window_start,
            t_end,
        } => residual(&cli.common, thickness, [*window_start, *t_end]),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Preflight(_) | Error::InvalidParameter { .. } | Error::Json(_) => 2,
                Error::Instability { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn say(common: &Common, msg: impl AsRef<str>) {
    if !common.quiet {
        println!("{}", msg.as_ref());
    }
}

fn check(common: &Common, ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if common.check && !ok {
        return Err(Failure::Check(what()));
    }
    Ok(())
}

fn load_scenario(common: &Common, src: &ScenarioSource, default_preset: &str) -> Result<ScenarioConfig, Error> {
    let mut cfg = match &src.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => presets::preset(src.preset.as_deref().unwrap_or(default_preset), common.seed.unwrap_or(1))?,
    };
    if src.config.is_some() {
        if let Some(seed) = common.seed {
            if cfg.damping.kind == DampingKind::Random {
                cfg.damping.seed = Some(seed);
            }
            if let InitialConfig::Noise { seed: s, .. } = &mut cfg.initial {
                *s = Some(splitmix64(seed));
            }
        }
    }
    if let Some(safety) = common.dt_safety {
        cfg.time.safety = Dec(safety);
        cfg.time.dt = None;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(common: &Common, src: &ScenarioSource, default_preset: &str) -> Outcome {
    let cfg = load_scenario(common, src, default_preset)?;
    let dir = common.out_dir.join(cfg.label());
    let art = run_scenario(&cfg, Some(&dir))?;
    report_run(common, &art, &dir);
    let s = &art.summary;
    if s.max_reflection.is_some() {
        // nothing can re-enter the physical block before crossing the whole layer
        let transit = cfg.grid.layer_cells as f64 * cfg.grid.dx.0;
        let r = art.reflection.iter().filter(|e| e.0 < transit).fold(0.0f64, |m, e| m.max(e.1));
        check(common, r <= 1e-10, || format!("max reflection before t = {transit} is {r:.3e} > 1e-10"))?;
    }
    if cfg.reference.is_none() && s.initial_energy > 0.0 && cfg.damping.kind != DampingKind::None {
        check(common, s.max_physical_energy_ratio <= 1.0 + 1e-6, || {
            format!("physical-block energy grew by a factor {:.12}", s.max_physical_energy_ratio)
        })?;
        let frac = s.final_physical_energy / s.initial_energy;
        check(common, frac <= 1e-6, || format!("physical-block energy fraction {frac:.3e} > 1e-6"))?;
    }
    Ok(())
}

fn report_run(common: &Common, art: &RunArtifacts, dir: &Path) {
    let s = &art.summary;
    say(common, format!("{}: {} steps of dt = {:.6e} to t = {}", s.name, s.steps, s.dt, s.t_end));
    say(
        common,
        format!(
            "  energy: initial {:.6e}, final {:.6e} (physical block) {:.6e} (all cells), max ratio {:.12} (physical block) {:.6} (all cells)",
            s.initial_energy,
            s.final_physical_energy,
            s.final_total_energy,
            s.max_physical_energy_ratio,
            s.max_total_energy_ratio
        ),
    );
    if let Some(r) = s.max_reflection {
        say(common, format!("  max reflection {r:.3e}"));
    }
    if let Some(e) = s.plane_wave_error {
        say(common, format!("  plane-wave error {e:.3e}"));
    }
    say(common, format!("  wrote {} files to {} in {:.2} s", art.files.len(), dir.display(), art.runtime_seconds));
}

fn theorem(common: &Common, samples: usize) -> Outcome {
    let study = TheoremStudy {
        samples,
        seed: common.seed.unwrap_or(1),
        ..TheoremStudy::default()
    };
    let rep = verify_theorem(&study)?;
    ensure_dir(&common.out_dir)?;
    write_json(&common.out_dir.join("theorem.json"), &rep)?;
    let profiles = ["constant-2", "constant-1", "random-2"];
    write_csv_trace(
        &common.out_dir.join("theorem.csv"),
        &[
            "sample", "profile", "omega_dx", "k1_re", "k1_im", "k2_re", "k2_im", "res_phi", "res_psi", "res_u", "res_rhs",
        ],
        rep.rows.iter().map(|r| {
            let p = profiles.iter().position(|&n| n == r.profile).unwrap_or(usize::MAX) as f64;
            vec![
                r.sample as f64,
                p,
                r.omega_dx,
                r.k_dx[0][0],
                r.k_dx[0][1],
                r.k_dx[1][0],
                r.k_dx[1][1],
                r.fourier[0],
                r.fourier[1],
                r.fourier[2],
                r.rhs,
            ]
        }),
    )?;
    say(
        common,
        format!(
            "{} modes ({} evanescent) x 3 profiles: max residual {:.3e} (time-harmonic), {:.3e} (right-hand side)",
            rep.modes, rep.evanescent_modes, rep.max_fourier, rep.max_rhs
        ),
    );
    let worst = rep.max_fourier.max(rep.max_rhs);
    check(common, worst <= 1e-11, || format!("max residual {worst:.3e} > 1e-11"))?;
    check(common, rep.modes >= 100 && rep.evanescent_modes >= 20, || {
        format!("only {} modes / {} evanescent", rep.modes, rep.evanescent_modes)
    })
}

fn rho(common: &Common, samples: usize) -> Outcome {
    let rep = rho_study(samples, common.seed.unwrap_or(1), 1.0)?;
    let asym = asymptote_study(2.0, 1.0, 2.0 * std::f64::consts::PI, 1.0 / 8.0, 7)?;
    ensure_dir(&common.out_dir)?;
    write_json(&common.out_dir.join("rho.json"), &rep)?;
    write_json(&common.out_dir.join("asymptote.json"), &asym)?;
    write_csv_trace(
        &common.out_dir.join("asymptote.csv"),
        &["dx", "rho_re", "rho_im", "abs_rho", "pade", "error"],
        asym.rows.iter().map(|r| vec![r.dx, r.rho[0], r.rho[1], r.rho[0].hypot(r.rho[1]), r.pade[0], r.error]),
    )?;
    say(
        common,
        format!(
            "{} samples: {} |rho| >= 1, {} reflected >= 1; max |rho| {:.6}; identities {:.1e} {:.1e} {:.1e} {:.1e}",
            rep.samples,
            rep.modulus_violations,
            rep.reflected_violations,
            rep.max_modulus,
            rep.zero_damping_error,
            rep.nyquist_error,
            rep.inverse_error,
            rep.conjugation_error
        ),
    );
    let orders: Vec<String> = asym.orders.iter().map(|o| format!("{o:.3}")).collect();
    say(common, format!("asymptote sweep (sigma dx = 2, k/omega = 1): orders {}", orders.join(" ")));
    let ident = rep
        .zero_damping_error
        .max(rep.nyquist_error)
        .max(rep.inverse_error)
        .max(rep.conjugation_error);
    check(common, rep.modulus_violations == 0 && rep.reflected_violations == 0, || {
        format!("{} + {} bound violations", rep.modulus_violations, rep.reflected_violations)
    })?;
    check(common, ident <= 1e-14, || format!("identity error {ident:.3e} > 1e-14"))
}

fn residual(common: &Common, thickness: &[usize], window: [f64; 2]) -> Outcome {
    let rep = residual_study(thickness, window)?;
    ensure_dir(&common.out_dir)?;
    write_json(&common.out_dir.join("residual.json"), &rep)?;
    for row in &rep.rows {
        write_csv_trace(
            &common.out_dir.join(format!("residual_m{}.csv", row.thickness)),
            &["t", "max_residual"],
            row.trace.iter().map(|r| vec![r.0, r.1]),
        )?;
        say(common, format!("M = {:3}: max residual in window {:.3e}", row.thickness, row.max_residual));
    }
    say(common, format!("slope of ln(residual) vs M: {:.4}", rep.log_slope));
    for w in rep.rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let ok = b.max_residual <= 1e-13 || a.max_residual >= 10.0 * b.max_residual;
        check(common, ok, || {
            format!("M {} -> {}: {:.3e} -> {:.3e}", a.thickness, b.thickness, a.max_residual, b.max_residual)
        })?;
    }
    check(common, rep.log_slope < 0.0, || format!("slope {:.4} is not negative", rep.log_slope))
}

use pml_lab::harness::config::{DampingKind, Dec, InitialConfig, ReferenceConfig};
use pml_lab::harness::presets::{bump_benchmark, noise_benchmark, residual_scenario};
use pml_lab::harness::scenario::{build_setup, FinalField};
use pml_lab::harness::run_scenario;
use pml_lab::pml::{AuxSupport, DampingProfile};
use pml_lab::Error;

fn small_bump() -> pml_lab::harness::ScenarioConfig {
    let mut cfg = residual_scenario(10, 0.6);
    cfg.grid.physical_cells = 20;
    cfg.grid.dx = Dec(0.05);
    cfg.reference = Some(ReferenceConfig { enlargement: Dec(3.0) });
    cfg
}

fn final_real(f: &FinalField) -> &[f64] {
    match f {
        FinalField::Real(u) => u.values(),
        FinalField::Complex(_) => panic!("expected a real run"),
    }
}

#[test]
fn zero_initial_data_stays_zero() {
    let mut cfg = small_bump();
    cfg.initial = InitialConfig::Zero;
    let art = run_scenario(&cfg, None).unwrap();
    assert!(art.energy.total.iter().all(|&e| e == 0.0));
    assert!(art.reflection.iter().all(|r| r.1 == 0.0));
    assert!(final_real(&art.final_u).iter().all(|&u| u == 0.0));
}

#[test]
fn restricted_support_matches_full_evolution_bitwise() {
    let mut cfg = small_bump();
    cfg.damping.kind = DampingKind::Random;
    cfg.damping.seed = Some(3);
    let full = run_scenario(&cfg, None).unwrap();
    cfg.damping.support = AuxSupport::Restricted;
    let restricted = run_scenario(&cfg, None).unwrap();
    assert_eq!(final_real(&full.final_u), final_real(&restricted.final_u));
    assert_eq!(full.energy, restricted.energy);
}

#[test]
fn undamped_run_matches_reference_until_wrap() {
    let mut cfg = small_bump();
    cfg.damping.kind = DampingKind::None;
    cfg.initial = InitialConfig::Bump {
        center: vec![Dec(-0.5); 2],
        width: Dec(0.03),
        peak: Dec(1.0),
    };
    cfg.time.t_end = Dec(0.1);
    let art = run_scenario(&cfg, None).unwrap();
    assert!(art.summary.max_reflection.unwrap() < 1e-14);
}

#[test]
fn short_reference_is_rejected() {
    let mut cfg = small_bump();
    cfg.reference = Some(ReferenceConfig { enlargement: Dec(1.1) });
    cfg.time.t_end = Dec(10.0);
    assert!(matches!(run_scenario(&cfg, None), Err(Error::Preflight(_))));
}

#[test]
fn seeded_runs_are_reproducible() {
    let mut a = noise_benchmark(11);
    a.grid.physical_cells = 20;
    a.grid.layer_cells = 20;
    a.grid.dx = Dec(0.05);
    let mut b = a.clone();
    let r1 = run_scenario(&a, None).unwrap();
    let r2 = run_scenario(&b, None).unwrap();
    assert_eq!(r1.energy, r2.energy);
    assert_eq!(r1.summary, r2.summary);
    b.damping.seed = Some(12);
    let r3 = run_scenario(&b, None).unwrap();
    assert_ne!(r1.energy, r3.energy);
    assert!(r3.summary.max_reflection.unwrap() <= 1e-10);
}

#[test]
fn written_profile_reloads() {
    let mut cfg = small_bump();
    cfg.damping.kind = DampingKind::Random;
    cfg.damping.seed = Some(5);
    cfg.outputs.write_profile = true;
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&cfg, Some(dir.path())).unwrap();
    let text = std::fs::read_to_string(dir.path().join("profile.json")).unwrap();
    let loaded = DampingProfile::from_json(&text).unwrap();
    let built = build_setup(&cfg).unwrap().profile;
    assert_eq!(loaded.axis(0), built.axis(0));
    assert_eq!(loaded.axis(1), built.axis(1));
}

#[test]
fn bump_benchmark_geometry() {
    let setup = build_setup(&bump_benchmark()).unwrap();
    assert_eq!(setup.grid.shape(), &[160, 160]);
    assert_eq!(setup.grid.origin(), &[-80, -80]);
    assert_eq!(setup.profile.at_lattice(0, -1), 0.0);
    assert_eq!(setup.profile.at_lattice(0, 0), 160.0);
    assert_eq!(setup.profile.at_lattice(1, 78), 160.0);
    assert_eq!(setup.profile.at_lattice(1, 79), 0.0);
    assert_eq!(setup.time.steps, 80);
}

//! Cross-module checks: Stark pulses through the pulse engine, shipped example
//! configs through the harness, and config round trips.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use nalgebra::Vector3;
use proptest::prelude::*;

use spinphase::constants::phase_distance;
use spinphase::faraday::{magnetization, mk_closed_form, ProbeGeometry};
use spinphase::geophase::{aa_phase_measured, decompose, geometric_gate};
use spinphase::harness::config::{parse_config, ExperimentKind};
use spinphase::harness::run;
use spinphase::pulse::{composite, trace_sequence, PulseSequence};
use spinphase::qstate::{evolve, mixed_initial, sigma_y_eigenstates};
use spinphase::stark::{pi_duration, to_field_pulse, LevelScheme, Polarization, TippingPulse};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn tipping_pulses_reproduce_the_field_protocol() {
    let g = 0.864;
    let scheme = LevelScheme::new(1.0, 0.0, 1.0, 1.0, Polarization::SigmaPlus).unwrap();
    let t = pi_duration(1.0);
    for theta in [0.1, 0.5, 1.2] {
        let (s, c) = f64::sin_cos(theta);
        let pulses = [Vector3::new(s, 0.0, c), Vector3::new(-s, 0.0, c)]
            .into_iter()
            .map(|d| to_field_pulse(&TippingPulse::new(scheme, t, d).unwrap(), g).unwrap())
            .collect();
        let seq = PulseSequence::from_pulses(pulses, g);
        let (plus, _) = sigma_y_eigenstates();
        let (_, traj) = trace_sequence(&seq, &plus, 512).unwrap();
        let optical = decompose(&traj).unwrap();
        let magnetic = aa_phase_measured(s, c, g).unwrap();
        assert!(optical.dynamic_phase.abs() < 1e-9);
        assert!(phase_distance(optical.geometric_phase, magnetic.phases.geometric_phase) < 1e-9);
        // Same composite, so the Faraday observable agrees too.
        let rho = evolve(&mixed_initial(0.1, 0.9).unwrap(), &composite(&seq));
        let geom = ProbeGeometry::new(0.7, 1.0).unwrap();
        let rho_m = evolve(&mixed_initial(0.1, 0.9).unwrap(), &magnetic.composite);
        assert!((magnetization(&rho, &geom) - magnetization(&rho_m, &geom)).abs() < 1e-12);
    }
}

#[test]
fn composite_acts_as_gate_at_measured_phase() {
    // The composite is −exp(2iθσ_y), i.e. exactly the gate at the measured
    // |+⟩ phase 2θ + π.
    let m = aa_phase_measured(0.6, 1.0, 0.864).unwrap();
    let gamma = m.phases.geometric_phase;
    assert!(m.composite.max_abs_diff(&geometric_gate(gamma)) < 1e-12);
    let rho_gate = evolve(&mixed_initial(0.3, 0.7).unwrap(), &geometric_gate(gamma));
    let rho_pulse = evolve(&mixed_initial(0.3, 0.7).unwrap(), &m.composite);
    for alpha in [0.0, 0.4, 1.9, PI] {
        let geom = ProbeGeometry::new(alpha, 1.0).unwrap();
        let a = magnetization(&rho_gate, &geom);
        let b = magnetization(&rho_pulse, &geom);
        assert!((a - b).abs() < 1e-12, "alpha {alpha}: {a} vs {b}");
        assert!((a - mk_closed_form(0.3, 0.7, alpha, gamma).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn shipped_configs_parse_and_run() {
    let mut seen = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(configs_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries.iter().filter(|p| p.extension().is_some_and(|e| e == "toml")) {
        let text = fs::read_to_string(path).unwrap();
        let cfg = parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg, "{}", path.display());
        let dir = tempfile::tempdir().unwrap();
        let report = run(&cfg, dir.path()).unwrap();
        assert_eq!(report.point_errors, 0, "{}:\n{}", path.display(), report.summary);
        assert!(report.files.iter().all(|f| f.exists()));
        seen.push(cfg.kind);
    }
    assert!(seen.len() >= 3);
    for kind in [ExperimentKind::AaProtocol, ExperimentKind::VerifyAa, ExperimentKind::StarkPipeline, ExperimentKind::Sweep] {
        assert!(seen.contains(&kind), "no example config for {kind}");
    }
}

#[test]
fn report_echo_reparses_and_hash_matches() {
    let text = fs::read_to_string(configs_dir().join("stark_20T.toml")).unwrap();
    let cfg = parse_config(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path()).unwrap();
    let echoed = parse_config(&report.config_echo).unwrap();
    assert_eq!(echoed, cfg);
    assert_eq!(echoed.hash(), report.config_hash);
    let body = fs::read_to_string(dir.path().join("stark_pipeline_report.txt")).unwrap();
    assert!(body.contains(&report.config_hash));
    assert!(!body.contains("wall"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sweep_configs_round_trip(
        w1 in 0.0..=1.0f64,
        alpha in 0.0..=PI,
        kappa in 0.01..10.0f64,
        points in 1usize..200,
        end in 0.1..10.0f64,
    ) {
        let text = format!(
            "kind = \"sweep\"\ng_factor = 0.864\n[initial]\nw0 = {}\nw1 = {w1}\n[probe]\nalpha = {alpha}\nkappa = {kappa}\n[sweep]\nsource = \"gamma\"\ngammas = {{ start = 0.0, end = {end}, points = {points} }}\n",
            1.0 - w1
        );
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.hash(), cfg.hash());
    }
}

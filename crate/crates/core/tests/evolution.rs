use furthlab_core::stats::log_log_fit;
use furthlab_core::timeslice::*;
use furthlab_core::{Grid1D, PhysicsConstants, PotentialSpec, WaveFunction};

const HARMONIC: PotentialSpec = PotentialSpec::Harmonic { k: 1.0 };

fn ground_state(grid: Grid1D) -> WaveFunction {
    WaveFunction::gaussian_packet(grid, 0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0).unwrap()
}

#[test]
fn harmonic_ground_state_is_stationary() {
    let c = PhysicsConstants::natural();
    let psi0 = ground_state(Grid1D::symmetric(8.0, 0.05).unwrap());
    let cfg = EvolutionConfig::new(0.01, 100, PotentialMode::FullExponential).unwrap();
    let evo = evolve(&psi0, &cfg, &HARMONIC, &c, 100).unwrap();
    let dev = evo.last().max_modulus_diff(&psi0).unwrap();
    assert!(dev < 1e-3, "{dev}");
}

#[test]
fn harmonic_norm_loss_per_step_matches_midpoint_estimate() {
    // midpoint potential sampling loses ε²k/(4m)·‖ψ‖² per step on the ground state
    let c = PhysicsConstants::natural();
    let psi0 = ground_state(Grid1D::symmetric(8.0, 0.05).unwrap());
    for eps in [0.01, 0.005] {
        let cfg = EvolutionConfig::new(eps, 1, PotentialMode::FullExponential).unwrap();
        let evo = evolve(&psi0, &cfg, &HARMONIC, &c, 1).unwrap();
        let predicted = -eps * eps / 4.0;
        assert!((evo.norm_drift[0] / predicted - 1.0).abs() < 0.05, "{eps}: {}", evo.norm_drift[0]);
    }
}

#[test]
fn free_step_is_unitary() {
    let c = PhysicsConstants::natural();
    let psi0 = WaveFunction::gaussian_packet(Grid1D::symmetric(15.0, 0.05).unwrap(), 0.0, 1.0, 1.0).unwrap();
    let cfg = EvolutionConfig::new(0.01, 20, PotentialMode::FullExponential).unwrap();
    let evo = evolve(&psi0, &cfg, &PotentialSpec::Free, &c, 20).unwrap();
    assert!(evo.norm_drift.iter().all(|d| d.abs() < 1e-6));
}

#[test]
fn harmonic_matches_split_operator_reference() {
    let c = PhysicsConstants::natural();
    let psi0 = WaveFunction::gaussian_packet(Grid1D::symmetric(10.0, 0.05).unwrap(), 1.0, 0.8, 0.5).unwrap();
    let cfg = EvolutionConfig::new(0.01, 100, PotentialMode::FullExponential).unwrap();
    let evo = evolve(&psi0, &cfg, &HARMONIC, &c, 100).unwrap();
    let reference = spectral_reference_evolve(&psi0, &cfg, &HARMONIC, &c).unwrap();
    let dev = evo.last().max_abs_diff(&reference).unwrap();
    assert!(dev < 1e-3, "{dev}");
}

#[test]
fn global_error_is_first_order_in_both_modes() {
    // the expanded factor needs max|U|·ε/ħ < 0.1, hence the narrower grid and smaller steps
    let c = PhysicsConstants::natural();
    let psi0 = WaveFunction::gaussian_packet(Grid1D::symmetric(6.0, 0.05).unwrap(), 1.0, 0.8, 0.5).unwrap();
    let fine = EvolutionConfig::new(1e-4, 10_000, PotentialMode::FullExponential).unwrap();
    let reference = spectral_reference_evolve(&psi0, &fine, &HARMONIC, &c).unwrap();
    for (mode, epsilons) in [
        (PotentialMode::FullExponential, [0.04, 0.02, 0.01]),
        (PotentialMode::ExpandedFirstOrder, [0.004, 0.002, 0.001]),
    ] {
        let errors: Vec<f64> = epsilons
            .iter()
            .map(|&eps| {
                let cfg = EvolutionConfig::new(eps, (1.0 / eps).round() as usize, mode).unwrap();
                evolve(&psi0, &cfg, &HARMONIC, &c, usize::MAX).unwrap().last().max_abs_diff(&reference).unwrap()
            })
            .collect();
        let fit = log_log_fit(&epsilons, &errors).unwrap();
        assert!(fit.slope >= 0.9, "{mode:?}: {} from {errors:?}", fit.slope);
    }
}

#[test]
fn barrier_transmission_matches_reference() {
    let c = PhysicsConstants::natural();
    let grid = Grid1D::symmetric(20.0, 0.05).unwrap();
    let psi0 = WaveFunction::gaussian_packet(grid, -6.0, 1.5, 2.0).unwrap();
    let width = 0.5;
    let barrier = PotentialSpec::Barrier { height: 4.0, width };
    let mut cfg = EvolutionConfig::new(0.01, 500, PotentialMode::FullExponential).unwrap();
    let reference = spectral_reference_evolve(&psi0, &cfg, &barrier, &c).unwrap();
    cfg.renormalize = true;
    let evo = evolve(&psi0, &cfg, &barrier, &c, 500).unwrap();
    let t = probability_beyond(evo.last(), width / 2.0);
    let t_ref = probability_beyond(&reference, width / 2.0);
    assert!(t > 0.1 && t < 0.9);
    assert!((t - t_ref).abs() < 1e-2, "{t} vs {t_ref}");
}

#[test]
fn sharp_barrier_without_renormalization_aborts() {
    let c = PhysicsConstants::natural();
    let grid = Grid1D::symmetric(20.0, 0.05).unwrap();
    let psi0 = WaveFunction::gaussian_packet(grid, -6.0, 1.5, 2.0).unwrap();
    let barrier = PotentialSpec::Barrier { height: 4.0, width: 0.5 };
    let cfg = EvolutionConfig::new(0.01, 500, PotentialMode::FullExponential).unwrap();
    assert!(matches!(evolve(&psi0, &cfg, &barrier, &c, 500), Err(furthlab_core::Error::NormDrift { .. })));
}

#[test]
fn halving_dx_converges() {
    let c = PhysicsConstants::natural();
    let spread = |dx: f64| {
        let psi0 = WaveFunction::gaussian_packet(Grid1D::symmetric(10.0, dx).unwrap(), 0.5, 0.8, 0.0).unwrap();
        let cfg = EvolutionConfig::new(0.02, 25, PotentialMode::FullExponential).unwrap();
        evolve(&psi0, &cfg, &HARMONIC, &c, 25).unwrap().last().position_variance()
    };
    let (a, b, d) = (spread(0.1), spread(0.05), spread(0.025));
    assert!((d - b).abs() < ((b - a).abs()).max(1e-12), "{a} {b} {d}");
}

//! End-to-end dynamics checks: step-halving gate, cross-form Hamiltonian
//! agreement, the reference drive's strength, and dressed convergence.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qphonon_core::dressed::{dressed_first_order, DressedParams};
use qphonon_core::dynamics::{
    beta, evolve, hamiltonian_atomic_form, hamiltonian_phonon_form, reference_model,
    reference_time_grid, DrivenHamiltonian, ModelParams, PulseProfile, QuadraticSign,
};
use qphonon_core::gardiner::GardinerAlgebra;
use qphonon_core::{FockSector, StateVector};

#[test]
fn step_halving_leaves_the_trajectory_unchanged() {
    // the automatic step budget must sit far below the 1e-8 gate: halving
    // the step (doubling the rate) may not move any state visibly
    let n = 64u64;
    let params = reference_model(n).unwrap();
    let grid = reference_time_grid();
    let sector = FockSector::build(n, None).unwrap();
    let algebra = GardinerAlgebra::new(&sector).unwrap();
    let h = DrivenHamiltonian::for_phonon_pair(&algebra, params.omega_e, 0.0, params.mu.clone())
        .unwrap();
    let initial = StateVector::basis(&sector, 0).unwrap();
    let rate = h.recommended_steps_per_unit();
    let coarse = evolve(&h, &initial, &grid, Some(rate)).unwrap();
    let fine = evolve(&h, &initial, &grid, Some(2.0 * rate)).unwrap();
    let worst = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a.amplitudes() - b.amplitudes()).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "halving moved the trajectory by {worst:.3e}");
}

#[test]
fn hamiltonian_forms_agree_on_random_draws() {
    // the atomic-transfer assembly and the phonon-pair assembly are the
    // same operator; 100 random (sector, pulse, time) draws at roundoff
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for draw in 0..100 {
        let n = rng.gen_range(1..=12u64);
        let omega_e = rng.gen_range(0.0..2.0);
        let amplitude = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let pulse = match draw % 3 {
            0 => PulseProfile::Constant { amplitude },
            1 => PulseProfile::Monochromatic {
                amplitude,
                omega_f: rng.gen_range(0.0..3.0),
            },
            _ => PulseProfile::GaussianEnvelope {
                amplitude,
                omega_f: rng.gen_range(0.0..3.0),
                center: rng.gen_range(0.0..5.0),
                width: rng.gen_range(0.2..2.0),
            },
        };
        let t = rng.gen_range(0.0..5.0);
        let params = ModelParams::new(n, omega_e, pulse).unwrap();
        let sector = FockSector::build(n, None).unwrap();
        let algebra = GardinerAlgebra::new(&sector).unwrap();
        let atomic = hamiltonian_atomic_form(&params, &sector, t).unwrap();
        let phonon = hamiltonian_phonon_form(&params, &algebra, t).unwrap();
        let residual = atomic.sub(&phonon).unwrap().max_abs();
        assert!(
            residual <= 1e-12,
            "draw {draw} (N = {n}, t = {t}): residual = {residual:.3e}"
        );
        assert!(atomic.is_hermitian(1e-12));
    }
}

#[test]
fn reference_drive_reaches_its_design_strength() {
    // reshaping the reference pulse would silently weaken every cross-size
    // window; pin its peak coherent population
    let params = reference_model(64).unwrap();
    let b = beta(&params, &reference_time_grid()).unwrap();
    let peak = b.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    assert!(
        (2.2..2.3).contains(&peak),
        "max |beta|^2 = {peak}, expected ~2.256"
    );
}

#[test]
fn dressed_population_errors_shrink_at_first_order_rate() {
    // doubling both N and Delta halves eta_eff: the leading-order defect
    // should halve and the first-order defect should quarter
    let grid = reference_time_grid();
    let mut e0s = Vec::new();
    let mut e1s = Vec::new();
    for (n, d) in [(32u64, 48u64), (64, 96), (128, 192)] {
        let g = 0.7 / ((n * d) as f64).sqrt();
        let params = DressedParams::new(n, d, g, 1.0).unwrap();
        let series = dressed_first_order(&params, &grid, QuadraticSign::Negative, None).unwrap();
        assert!((params.mu_d() - 0.7).abs() < 1e-12);
        assert!(!series.validity_warning);
        let (e0, e1) = series.population_errors();
        e0s.push(e0);
        e1s.push(e1);
    }
    for k in 0..2 {
        let r0 = e0s[k + 1] / e0s[k];
        let r1 = e1s[k + 1] / e1s[k];
        assert!(
            (0.375..0.625).contains(&r0),
            "e0 ratio {k}: {r0} (errors {e0s:?})"
        );
        assert!(
            (0.15..0.35).contains(&r1),
            "e1 ratio {k}: {r1} (errors {e1s:?})"
        );
    }
}

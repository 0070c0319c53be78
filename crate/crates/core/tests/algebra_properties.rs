//! Property and exhaustive checks of the pair algebra across sector sizes.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qphonon_core::dressed::make_dressed;
use qphonon_core::gardiner::{q_number, GardinerAlgebra, PhononAlgebra};
use qphonon_core::{FockSector, StateVector};

fn algebra(n_total: u64) -> GardinerAlgebra {
    let sector = FockSector::build(n_total, None).unwrap();
    GardinerAlgebra::new(&sector).unwrap()
}

/// Random normalized state in an (n+1)-dimensional sector.
fn random_state(algebra: &GardinerAlgebra, rng: &mut ChaCha8Rng) -> StateVector {
    let dim = algebra.sector().dimension();
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    StateVector::from_amplitudes(algebra.sector(), amps)
        .unwrap()
        .normalized()
        .unwrap()
}

#[test]
fn ladder_amplitudes_are_deformed_integers_exhaustively() {
    // <n+1| b^dag |n>^2 = [n+1] at eta = 1/N, every transition of every
    // sector up to N = 100
    for n_total in 1..=100u64 {
        let algebra = algebra(n_total);
        let eta = 1.0 / n_total as f64;
        for n in 0..n_total {
            let amp = algebra.raise().matrix()[((n + 1) as usize, n as usize)];
            let expected = q_number(n + 1, eta);
            assert!(
                (amp.re * amp.re - expected).abs() <= 1e-12,
                "N = {n_total}, n = {n}: amp^2 = {}, [n+1] = {expected}",
                amp.re * amp.re
            );
            assert_eq!(amp.im, 0.0);
        }
    }
}

#[test]
fn deformed_integer_matches_its_lattice_form_exhaustively() {
    // n - n(n-1)/N and n(N - n + 1)/N are the same rational number
    for n_total in 1..=100u64 {
        let eta = 1.0 / n_total as f64;
        for n in 0..=n_total {
            let lattice = n as f64 * (n_total - n + 1) as f64 / n_total as f64;
            assert!((q_number(n, eta) - lattice).abs() <= 1e-12 * lattice.max(1.0));
        }
    }
}

#[test]
fn random_dressed_sectors_verify_at_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let n = rng.gen_range(1..=200u64);
        let d = rng.gen_range(1..=200u64);
        let dressed = make_dressed(n, d).unwrap_or_else(|e| {
            panic!("construction-time verification failed at (N, Delta) = ({n}, {d}): {e}")
        });
        let report = dressed.verify().unwrap();
        assert!(report.all_pass(), "({n}, {d}): {:?}", report.entries);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_identity_holds_on_random_sector_sizes(n_total in 1u64..=60) {
        let report = algebra(n_total).verify().unwrap();
        prop_assert!(report.all_pass(), "N = {n_total}: {:?}", report.entries);
    }

    #[test]
    fn commutator_expectation_stays_inside_its_spectrum(
        n_total in 1u64..=40,
        seed in 0u64..1_000_000,
    ) {
        let algebra = algebra(n_total);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_state(&algebra, &mut rng);
        let comm = algebra.lower().commutator(algebra.raise()).unwrap();
        let value = state.expectation(&comm).unwrap();
        prop_assert!(value.im.abs() < 1e-12);
        let diag = algebra.commutator_diagonal();
        let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(value.re >= lo - 1e-12 && value.re <= hi + 1e-12,
            "<comm> = {} outside [{lo}, {hi}]", value.re);
    }

    #[test]
    fn deformed_commutator_is_undeformed_on_the_lowest_pair(
        n_total in 2u64..=50,
        c0 in -1.0f64..1.0,
        c1 in -1.0f64..1.0,
    ) {
        // (b b^dag - q b^dag b) acts as the identity on span{|0>, |1>}
        prop_assume!(c0.abs() + c1.abs() > 1e-3);
        let algebra = algebra(n_total);
        let qc = algebra
            .lower()
            .q_commutator(algebra.raise(), algebra.q())
            .unwrap();
        let dim = algebra.sector().dimension();
        let mut amps = vec![Complex64::ZERO; dim];
        amps[0] = Complex64::new(c0, 0.0);
        amps[1] = Complex64::new(0.0, c1);
        let state = StateVector::from_amplitudes(algebra.sector(), amps)
            .unwrap()
            .normalized()
            .unwrap();
        let image = qc.apply(&state).unwrap();
        let residual = (image.amplitudes() - state.amplitudes()).norm();
        prop_assert!(residual <= 1e-12, "residual = {residual:.3e}");
    }

    #[test]
    fn quadratures_close_on_the_commutator(n_total in 1u64..=40) {
        // [X1, X2] = i [b, b^dag] entrywise
        let algebra = algebra(n_total);
        let (x1, x2) = algebra.quadrature_pair();
        let left = x1.commutator(&x2).unwrap();
        let right = algebra
            .lower()
            .commutator(algebra.raise())
            .unwrap()
            .scale(Complex64::new(0.0, 1.0));
        prop_assert!(left.sub(&right).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn number_states_diagonalize_the_deformed_number(
        n_total in 1u64..=40,
        n in 0u64..=40,
    ) {
        prop_assume!(n <= n_total);
        let algebra = algebra(n_total);
        let state = StateVector::basis(algebra.sector(), n).unwrap();
        let btb = algebra.raise().mul(algebra.lower()).unwrap();
        let value = state.expectation(&btb).unwrap();
        let expected = q_number(n, 1.0 / n_total as f64);
        prop_assert!((value.re - expected).abs() <= 1e-12);
        prop_assert!(value.im.abs() <= 1e-14);
    }
}

//! Photon-dressed phonon pair on a three-mode sector.
//!
//! When the outcoupling runs through an auxiliary photon mode prepared with
//! Delta quanta, the role of the collective pair is taken by
//! B = a^dag b_g^dag b_e / sqrt(N Delta): one transfer now consumes a
//! ground atom and a photon together. The pair closes on
//!
//! ```text
//! [B, B^dag] = 1 - 2 (eta + eta_0) N_e + eta_0 eta (3 N_e^2 - N_e)
//! ```
//!
//! with eta = 1/N and eta_0 = 1/Delta, so to first order the photon budget
//! simply adds its own deformation: every two-mode result applies with
//! eta -> eta + eta_0. The closure above is exact and is verified at
//! construction; anything built on a `DressedAlgebra` may take it for
//! granted.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::observables::{observable_series, ObservableSeries};
use crate::dynamics::perturbative::perturbative_solution;
use crate::dynamics::propagator::{evolve, DrivenHamiltonian};
use crate::dynamics::pulse::PulseProfile;
use crate::dynamics::{ModelParams, QuadraticSign};
use crate::error::{CoreError, Result};
use crate::fock::{FockSector, Mode, OperatorMatrix, StateVector, Transfer};
use crate::gardiner::{AlgebraReport, PhononAlgebra, EXACT_IDENTITY_TOL};

/// Inputs of a dressed run. The atom-photon coupling g is a fixed machine
/// constant, so the collective drive mu_d = g sqrt(N Delta) is constant in
/// time; there is no pulse freedom here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedParams {
    pub n_total: u64,
    pub delta: u64,
    pub g: f64,
    pub omega_e: f64,
    pub omega_g: f64,
    pub omega_0: f64,
}

impl DressedParams {
    /// Bare ground and photon frequencies default to zero; they only shift
    /// the constant sector energy.
    pub fn new(n_total: u64, delta: u64, g: f64, omega_e: f64) -> Result<Self> {
        let params = Self {
            n_total,
            delta,
            g,
            omega_e,
            omega_g: 0.0,
            omega_0: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_mode_frequencies(mut self, omega_g: f64, omega_0: f64) -> Result<Self> {
        self.omega_g = omega_g;
        self.omega_0 = omega_0;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 || self.delta == 0 {
            return Err(CoreError::InvalidParameter(
                "the dressed sector needs at least one atom and one photon".into(),
            ));
        }
        if !(self.g.is_finite()
            && self.omega_e.is_finite()
            && self.omega_g.is_finite()
            && self.omega_0.is_finite())
        {
            return Err(CoreError::InvalidParameter(
                "dressed parameters must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Transition frequency of one transfer: omega_e - omega_g - omega_0.
    pub fn omega_delta(&self) -> f64 {
        self.omega_e - self.omega_g - self.omega_0
    }

    /// Collective drive strength g sqrt(N Delta).
    pub fn mu_d(&self) -> f64 {
        self.g * ((self.n_total * self.delta) as f64).sqrt()
    }

    /// Constant sector energy omega_g N + omega_0 Delta.
    pub fn energy_offset(&self) -> f64 {
        self.omega_g * self.n_total as f64 + self.omega_0 * self.delta as f64
    }
}

/// The dressed pair with its exact closure, verified at construction.
#[derive(Debug, Clone)]
pub struct DressedAlgebra {
    sector: Arc<FockSector>,
    lower: OperatorMatrix,
    raise: OperatorMatrix,
    excited: OperatorMatrix,
    eta: f64,
    eta0: f64,
}

/// Build the dressed pair on the (N, Delta) sector and verify every closure
/// identity before handing it out; a residual breach is a hard error.
pub fn make_dressed(n_total: u64, delta: u64) -> Result<DressedAlgebra> {
    if delta == 0 {
        return Err(CoreError::InvalidParameter(
            "the photon budget must be at least one quantum".into(),
        ));
    }
    let sector = FockSector::build(n_total, Some(delta))?;
    let scale = Complex64::new(1.0 / ((n_total * delta) as f64).sqrt(), 0.0);
    let algebra = DressedAlgebra {
        lower: OperatorMatrix::transfer(&sector, Transfer::DressedLower)?.scale(scale),
        raise: OperatorMatrix::transfer(&sector, Transfer::DressedRaise)?.scale(scale),
        excited: OperatorMatrix::number(&sector, Mode::Excited)?,
        eta: 1.0 / n_total as f64,
        eta0: 1.0 / delta as f64,
        sector,
    };
    let report = algebra.verify()?;
    if !report.all_pass() {
        let failed: Vec<&str> = report
            .entries
            .iter()
            .filter(|e| !e.pass)
            .map(|e| e.key)
            .collect();
        return Err(CoreError::AlgebraResidual(format!(
            "dressed pair on (N = {n_total}, Delta = {delta}) breaks {:?} with max residual {:.3e}",
            failed,
            report.max_residual()
        )));
    }
    Ok(algebra)
}

impl DressedAlgebra {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    /// Deformation of the dressed quommutator: q_d = 1 - 2 (eta + eta_0).
    pub fn q_d(&self) -> f64 {
        1.0 - 2.0 * (self.eta + self.eta0)
    }

    /// Exact eigenvalue of [B, B^dag] on the n-th basis state.
    fn closure_eigenvalue(&self, n: f64) -> f64 {
        1.0 - 2.0 * (self.eta + self.eta0) * n + self.eta0 * self.eta * n * (3.0 * n - 1.0)
    }

    /// The closure as an operator, assembled from the scalar formula rather
    /// than from products of the pair.
    pub fn commutator_reference(&self) -> OperatorMatrix {
        let diag = DVector::from_iterator(
            self.sector.dimension(),
            (0..self.sector.dimension())
                .map(|n| Complex64::new(self.closure_eigenvalue(n as f64), 0.0)),
        );
        OperatorMatrix::from_matrix(&self.sector, DMatrix::from_diagonal(&diag))
            .expect("diagonal built to sector dimension")
    }

    /// Run every closure identity at its pinned tolerance.
    pub fn verify(&self) -> Result<AlgebraReport> {
        let mut report = AlgebraReport::default();
        let dim = self.sector.dimension();

        let comm = self.lower.commutator(&self.raise)?;
        report.push(
            "dressed_commutator_closure",
            comm.sub(&self.commutator_reference())?.max_abs(),
            EXACT_IDENTITY_TOL,
        );

        // the defect against the first-order closure 1 - 2(eta + eta_0) n
        // is eta_0 eta n (3n - 1) exactly
        let linear = OperatorMatrix::identity(&self.sector).sub(
            &self
                .excited
                .scale(Complex64::new(2.0 * (self.eta + self.eta0), 0.0)),
        )?;
        let defect = comm.sub(&linear)?;
        let worst_defect = (0..dim)
            .map(|n| {
                let expected = self.eta0 * self.eta * n as f64 * (3.0 * n as f64 - 1.0);
                (defect.matrix()[(n, n)] - Complex64::new(expected, 0.0)).norm()
            })
            .fold(0.0, f64::max);
        report.push("closure_deviation_diagonal", worst_defect, EXACT_IDENTITY_TOL);

        let vacuum = StateVector::basis(&self.sector, 0)?;
        report.push("vacuum_annihilation", self.lower.apply(&vacuum)?.norm(), 0.0);
        let top = StateVector::basis(&self.sector, (dim - 1) as u64)?;
        report.push("top_state_annihilation", self.raise.apply(&top)?.norm(), 0.0);

        report.push(
            "adjoint_pairing",
            self.raise.sub(&self.lower.adjoint())?.max_abs(),
            0.0,
        );

        let n_total = self.sector.n_total() as f64;
        let delta = self.sector.delta().expect("dressed sector") as f64;
        let worst_ladder = (0..dim - 1)
            .map(|m| {
                let mf = m as f64;
                let expected =
                    ((delta - mf) * (n_total - mf) * (mf + 1.0) / (n_total * delta)).sqrt();
                (self.raise.matrix()[(m + 1, m)] - Complex64::new(expected, 0.0)).norm()
            })
            .fold(0.0, f64::max);
        report.push("ladder_amplitudes", worst_ladder, EXACT_IDENTITY_TOL);

        Ok(report)
    }
}

impl PhononAlgebra for DressedAlgebra {
    fn sector(&self) -> &Arc<FockSector> {
        &self.sector
    }

    fn lower(&self) -> &OperatorMatrix {
        &self.lower
    }

    fn raise(&self) -> &OperatorMatrix {
        &self.raise
    }

    fn excited_number(&self) -> &OperatorMatrix {
        &self.excited
    }

    fn commutator_diagonal(&self) -> Vec<f64> {
        (0..self.sector.dimension())
            .map(|n| self.closure_eigenvalue(n as f64))
            .collect()
    }

    fn eta_effective(&self) -> f64 {
        self.eta + self.eta0
    }
}

fn check_sector(params: &DressedParams, algebra: &DressedAlgebra) -> Result<()> {
    if algebra.sector.n_total() != params.n_total || algebra.sector.delta() != Some(params.delta) {
        return Err(CoreError::SectorMismatch(format!(
            "algebra sector (N = {}, Delta = {:?}) does not match params (N = {}, Delta = {})",
            algebra.sector.n_total(),
            algebra.sector.delta(),
            params.n_total,
            params.delta
        )));
    }
    Ok(())
}

/// The microscopic three-mode Hamiltonian,
/// H = omega_0 N_0 + omega_g N_g + omega_e N_e + g (raise transfer + h.c.).
pub fn dressed_hamiltonian_full(
    params: &DressedParams,
    algebra: &DressedAlgebra,
) -> Result<OperatorMatrix> {
    params.validate()?;
    check_sector(params, algebra)?;
    let sector = &algebra.sector;
    let gc = Complex64::new(params.g, 0.0);
    OperatorMatrix::number(sector, Mode::Photon)?
        .scale(Complex64::new(params.omega_0, 0.0))
        .add(&OperatorMatrix::number(sector, Mode::Ground)?.scale(Complex64::new(
            params.omega_g,
            0.0,
        )))?
        .add(&OperatorMatrix::number(sector, Mode::Excited)?.scale(Complex64::new(
            params.omega_e,
            0.0,
        )))?
        .add(&OperatorMatrix::transfer(sector, Transfer::DressedRaise)?.scale(gc))?
        .add(&OperatorMatrix::transfer(sector, Transfer::DressedLower)?.scale(gc))
}

/// The same Hamiltonian written on the dressed pair,
/// H = (omega_g N + omega_0 Delta) + omega_delta N_e + mu_d (B + B^dag),
/// packaged for the propagator with a constant drive.
pub fn dressed_hamiltonian(
    params: &DressedParams,
    algebra: &DressedAlgebra,
) -> Result<DrivenHamiltonian> {
    params.validate()?;
    check_sector(params, algebra)?;
    DrivenHamiltonian::for_phonon_pair(
        algebra,
        params.omega_delta(),
        params.energy_offset(),
        PulseProfile::constant_real(params.mu_d()),
    )
}

/// Worst entry of the difference between the two Hamiltonian forms. The
/// forms are algebraically identical; this measures float reassociation.
pub fn hamiltonian_form_residual(
    params: &DressedParams,
    algebra: &DressedAlgebra,
) -> Result<f64> {
    let full = dressed_hamiltonian_full(params, algebra)?;
    let pair = dressed_hamiltonian(params, algebra)?.matrix_at(0.0);
    Ok(full.sub(&pair)?.max_abs())
}

/// Evolve the dressed vacuum (Delta, 0, N) exactly and compare against the
/// two-mode first-order machinery with eta -> eta + eta_0. Everything
/// downstream of the response functions is reused verbatim; only the
/// deformation strength knows about the photon mode.
pub fn dressed_first_order(
    params: &DressedParams,
    grid: &[f64],
    sign: QuadraticSign,
    steps_per_unit: Option<f64>,
) -> Result<ObservableSeries> {
    params.validate()?;
    let algebra = make_dressed(params.n_total, params.delta)?;
    let hamiltonian = dressed_hamiltonian(params, &algebra)?;
    let initial = StateVector::basis(&algebra.sector, 0)?;
    let trajectory = evolve(&hamiltonian, &initial, grid, steps_per_unit)?;
    let model = ModelParams::new(
        params.n_total,
        params.omega_delta(),
        PulseProfile::constant_real(params.mu_d()),
    )?;
    let solution = perturbative_solution(&model, grid, sign)?;
    observable_series(&trajectory, &algebra, &solution)
}

//! The deformed phonon pair carved out of two atomic modes at fixed total
//! particle number, and the verification of its algebra.
//!
//! With N atoms shared between an untrapped excited mode and a trapped
//! ground mode, the pair
//!
//! ```text
//! b      = b_g^dag b_e / sqrt(N)        (lower)
//! b^dag  = b_e^dag b_g / sqrt(N)        (raise)
//! ```
//!
//! acts on the (N+1)-dimensional sector like a boson weakly deformed by
//! eta = 1/N: the commutator closes on 1 - 2 eta N_e instead of 1, and
//! b^dag b counts excitations with the corrected spectrum
//! [n] = n - n(n-1) eta. Every identity in this module is an exact finite-N
//! statement, so the checks run at roundoff tolerances.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::fock::{FockSector, Mode, OperatorMatrix, StateVector, Transfer};

/// Residual tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_IDENTITY_TOL: f64 = 1e-12;
/// Residual tolerance for the square-root closure, which loses a little
/// precision to the radicand near its double root.
pub const BRANCH_FUNCTION_TOL: f64 = 1e-10;

/// Deformed integer: [n] = n - n(n-1) eta. At eta = 1/N this equals
/// n(N - n + 1)/N, the eigenvalue of b^dag b on the n-th number state.
pub fn q_number(n: u64, eta: f64) -> f64 {
    let nf = n as f64;
    nf - nf * (nf - 1.0) * eta
}

/// Deformed factorial: [n]! = [1][2]...[n], with [0]! = 1.
pub fn q_factorial(n: u64, eta: f64) -> f64 {
    (1..=n).map(|k| q_number(k, eta)).product()
}

/// Square-root form of the commutator closure:
///
/// ```text
/// f(x) = sqrt(1 + 2(1 - 2x) eta + eta^2) - eta
/// ```
///
/// On the deformed spectrum x(n) = n(N - n + 1)/N the radicand is the
/// perfect square ((N + 1 - 2n)/N)^2; floating point lands a few ulp on
/// either side of zero at the double root (n = (N+1)/2, the side depends on
/// evaluation order), so radicands within 1e-12 of zero snap to the exact
/// double root. The smallest genuine on-spectrum radicand is 1/N^2, far
/// above the snap window for any sector this library can hold densely.
/// Radicands below the window are a genuine domain error.
pub fn f_function(x: f64, eta: f64) -> Result<f64> {
    let radicand = 1.0 + 2.0 * (1.0 - 2.0 * x) * eta + eta * eta;
    let clamped = clamp_radicand(radicand, 1.0)?;
    Ok(clamped.sqrt() - eta)
}

/// Lower-branch occupation recovered from an eigenvalue x of b^dag b.
/// The spectrum x(n) = n(N - n + 1)/N is symmetric under n -> N + 1 - n,
/// so x alone determines only min(n, N + 1 - n); this returns that branch.
pub fn branch_occupation(x: f64, n_total: u64) -> Result<f64> {
    let np1 = n_total as f64 + 1.0;
    let radicand = np1 * np1 - 4.0 * n_total as f64 * x;
    let clamped = clamp_radicand(radicand, np1 * np1)?;
    Ok(0.5 * (np1 - clamped.sqrt()))
}

fn clamp_radicand(radicand: f64, scale: f64) -> Result<f64> {
    let window = 1e-12 * scale.max(1.0);
    if radicand.abs() <= window {
        Ok(0.0)
    } else if radicand > 0.0 {
        Ok(radicand)
    } else {
        Err(CoreError::Domain(format!(
            "radicand {radicand:.3e} is negative beyond roundoff"
        )))
    }
}

/// One checked identity: a residual against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualEntry {
    pub key: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Outcome of an algebra verification run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct AlgebraReport {
    pub entries: Vec<ResidualEntry>,
}

impl AlgebraReport {
    pub fn push(&mut self, key: &'static str, residual: f64, tolerance: f64) {
        self.entries.push(ResidualEntry {
            key,
            residual,
            tolerance,
            pass: residual <= tolerance,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    pub fn entry(&self, key: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

/// Common face of the two phonon constructions (plain and photon-dressed):
/// a lowering/raising pair on a conserved sector whose commutator is
/// diagonal in the number basis.
pub trait PhononAlgebra {
    fn sector(&self) -> &Arc<FockSector>;
    /// The annihilation-like member of the pair.
    fn lower(&self) -> &OperatorMatrix;
    /// The creation-like member of the pair.
    fn raise(&self) -> &OperatorMatrix;
    /// Occupation of the excited mode (the phonon number to leading order).
    fn excited_number(&self) -> &OperatorMatrix;
    /// Eigenvalues of [lower, raise] in the sector basis, exact.
    fn commutator_diagonal(&self) -> Vec<f64>;
    /// Deformation strength entering first-order corrections.
    fn eta_effective(&self) -> f64;

    /// Quadratures X1 = (b + b^dag)/sqrt(2), X2 = (b - b^dag)/(i sqrt(2)).
    fn quadrature_pair(&self) -> (OperatorMatrix, OperatorMatrix) {
        let inv_sqrt2 = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        let x1 = self
            .lower()
            .add(self.raise())
            .expect("pair members share a sector")
            .scale(inv_sqrt2);
        let x2 = self
            .lower()
            .sub(self.raise())
            .expect("pair members share a sector")
            .scale(Complex64::new(0.0, -1.0 / 2f64.sqrt()));
        (x1, x2)
    }
}

/// The phonon pair on a two-mode sector, with its verification suite.
#[derive(Debug, Clone)]
pub struct GardinerAlgebra {
    sector: Arc<FockSector>,
    lower: OperatorMatrix,
    raise: OperatorMatrix,
    excited: OperatorMatrix,
}

impl GardinerAlgebra {
    pub fn new(sector: &Arc<FockSector>) -> Result<Self> {
        if sector.has_photon_mode() {
            return Err(CoreError::InvalidParameter(
                "the plain phonon pair is defined on a two-mode sector".into(),
            ));
        }
        let scale = Complex64::new(1.0 / (sector.n_total() as f64).sqrt(), 0.0);
        Ok(Self {
            sector: Arc::clone(sector),
            lower: OperatorMatrix::transfer(sector, Transfer::LowerExcited)?.scale(scale),
            raise: OperatorMatrix::transfer(sector, Transfer::RaiseExcited)?.scale(scale),
            excited: OperatorMatrix::number(sector, Mode::Excited)?,
        })
    }

    pub fn eta(&self) -> f64 {
        1.0 / self.sector.n_total() as f64
    }

    /// Deformation parameter of the quommutator: q = 1 - 2 eta.
    pub fn q(&self) -> f64 {
        1.0 - 2.0 * self.eta()
    }

    /// Number state built by raising the vacuum n times and dividing by
    /// sqrt([n]!). Coincides with the sector basis state of n excitations.
    pub fn q_fock_state(&self, n: u64) -> Result<StateVector> {
        if n > self.sector.n_total() {
            return Err(CoreError::OutOfRange(format!(
                "number state {n} in a sector of {} atoms",
                self.sector.n_total()
            )));
        }
        let mut state = StateVector::basis(&self.sector, 0)?;
        for _ in 0..n {
            state = self.raise.apply(&state)?;
        }
        let norm = q_factorial(n, self.eta()).sqrt();
        Ok(state.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    /// su(2)-like partner of the pair: h = 1 - 2 eta N_e, the closure of
    /// [b, b^dag].
    pub fn commutator_closure(&self) -> OperatorMatrix {
        OperatorMatrix::identity(&self.sector)
            .sub(&self.excited.scale(Complex64::new(2.0 * self.eta(), 0.0)))
            .expect("same sector")
    }

    /// Run every algebra identity at its pinned tolerance.
    pub fn verify(&self) -> Result<AlgebraReport> {
        let n_total = self.sector.n_total();
        let eta = self.eta();
        let mut report = AlgebraReport::default();

        // [b, b^dag] = 1 - 2 eta N_e, exact at finite N.
        let comm = self.lower.commutator(&self.raise)?;
        let closure = self.commutator_closure();
        report.push(
            "commutator_linear_closure",
            comm.sub(&closure)?.max_abs(),
            EXACT_IDENTITY_TOL,
        );

        // Square-root closure, branch resolved. The literal f(x) agrees with
        // the commutator eigenvalue only on the lower half of the spectrum
        // because x(n) is two-to-one; recovering the lower-branch occupation
        // m(x) makes the statement exact everywhere.
        let mut branch_res = 0.0_f64;
        for n in 0..=n_total {
            let x = q_number(n, eta);
            let m = branch_occupation(x, n_total)?;
            let expected = 1.0 - 2.0 * m / n_total as f64;
            branch_res = branch_res.max((f_function(x, eta)? - expected).abs());
        }
        report.push(
            "commutator_sqrt_closure_branch",
            branch_res,
            BRANCH_FUNCTION_TOL,
        );

        // b b^dag - q b^dag b = 1 - 2 eta^2 N_e (N_e - 1), exact.
        let qc = self.lower.q_commutator(&self.raise, self.q())?;
        let ne_sq = self.excited.mul(&self.excited)?;
        let deviation = ne_sq
            .sub(&self.excited)?
            .scale(Complex64::new(2.0 * eta * eta, 0.0));
        let q_expected = OperatorMatrix::identity(&self.sector).sub(&deviation)?;
        report.push(
            "quommutator_closure",
            qc.sub(&q_expected)?.max_abs(),
            EXACT_IDENTITY_TOL,
        );

        // The deviation vanishes on the lowest two number states, where the
        // pair is indistinguishable from an undeformed boson.
        let mut first_two = 0.0_f64;
        for n in 0..=1.min(n_total) {
            let idx = n as usize;
            first_two = first_two.max((qc.matrix()[(idx, idx)] - Complex64::ONE).norm());
        }
        report.push("quommutator_first_two_states", first_two, EXACT_IDENTITY_TOL);

        // h = 1 - 2 eta N_e closes an su(2)-like triple with the pair:
        // [h, b^dag] = -2 eta b^dag and [h, b] = +2 eta b.
        let two_eta = Complex64::new(2.0 * eta, 0.0);
        let su2_raise = closure
            .commutator(&self.raise)?
            .add(&self.raise.scale(two_eta))?;
        report.push("su2_raise", su2_raise.max_abs(), EXACT_IDENTITY_TOL);
        let su2_lower = closure
            .commutator(&self.lower)?
            .sub(&self.lower.scale(two_eta))?;
        report.push("su2_lower", su2_lower.max_abs(), EXACT_IDENTITY_TOL);

        // Structural zeros at the sector endpoints: the vacuum is killed by
        // b and the fully inverted state by b^dag. These hold exactly.
        let vacuum = StateVector::basis(&self.sector, 0)?;
        report.push("vacuum_annihilation", self.lower.apply(&vacuum)?.norm(), 0.0);
        let top = StateVector::basis(&self.sector, n_total)?;
        report.push("top_state_annihilation", self.raise.apply(&top)?.norm(), 0.0);

        // b^dag b = (N - N_e + 1) N_e / N, the operator form of [n].
        let nf = n_total as f64;
        let number_expected = self
            .excited
            .scale(Complex64::new((nf + 1.0) / nf, 0.0))
            .sub(&ne_sq.scale(Complex64::new(1.0 / nf, 0.0)))?;
        report.push(
            "number_operator_quadratic",
            self.raise.mul(&self.lower)?.sub(&number_expected)?.max_abs(),
            EXACT_IDENTITY_TOL,
        );

        // Ladder amplitudes are sqrt([n]) on both sides of the diagonal.
        let mut ladder_res = 0.0_f64;
        for n in 1..=n_total {
            let amp = q_number(n, eta).sqrt();
            let i = n as usize;
            ladder_res = ladder_res
                .max((self.raise.matrix()[(i, i - 1)] - Complex64::new(amp, 0.0)).norm())
                .max((self.lower.matrix()[(i - 1, i)] - Complex64::new(amp, 0.0)).norm());
        }
        report.push("ladder_amplitudes", ladder_res, EXACT_IDENTITY_TOL);

        // Raising the vacuum n times and normalizing by sqrt([n]!) must land
        // exactly on the n-th basis state.
        let mut fock_res = 0.0_f64;
        for n in 0..=n_total.min(40) {
            let built = self.q_fock_state(n)?;
            let target = StateVector::basis(&self.sector, n)?;
            let diff = built.amplitudes() - target.amplitudes();
            fock_res = fock_res.max(diff.norm());
        }
        report.push("number_state_reconstruction", fock_res, EXACT_IDENTITY_TOL);

        Ok(report)
    }
}

impl PhononAlgebra for GardinerAlgebra {
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
        let nf = self.sector.n_total() as f64;
        (0..self.sector.dimension())
            .map(|n| 1.0 - 2.0 * n as f64 / nf)
            .collect()
    }

    fn eta_effective(&self) -> f64 {
        self.eta()
    }
}

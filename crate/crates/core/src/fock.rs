//! Particle-number-conserving Fock sectors and dense operators on them.
//!
//! A two-mode sector holds N atoms split between an excited (untrapped) and a
//! ground (trapped) mode; basis states are ordered by ascending excited
//! occupation, so index n corresponds to (n_e = n, n_g = N - n). A three-mode
//! sector adds a photon mode with the joint constraint n_0 + n_e = Delta on
//! top of n_e + n_g = N; its basis is again ordered by ascending n_e and has
//! dimension min(N, Delta) + 1.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Occupation numbers of one basis state. `photon` is `None` on two-mode sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occupation {
    pub photon: Option<u64>,
    pub excited: u64,
    pub ground: u64,
}

/// One conserved sector: fixed N (and, with a photon mode, fixed Delta).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSector {
    n_total: u64,
    delta: Option<u64>,
    labels: Vec<Occupation>,
}

impl FockSector {
    /// Enumerate the sector basis. Deterministic: ascending excited occupation.
    pub fn build(n_total: u64, delta: Option<u64>) -> Result<Arc<Self>> {
        if n_total < 1 {
            return Err(CoreError::InvalidParameter(format!(
                "n_total must be >= 1, got {n_total}"
            )));
        }
        let labels = match delta {
            None => (0..=n_total)
                .map(|ne| Occupation {
                    photon: None,
                    excited: ne,
                    ground: n_total - ne,
                })
                .collect(),
            Some(d) => (0..=n_total.min(d))
                .map(|ne| Occupation {
                    photon: Some(d - ne),
                    excited: ne,
                    ground: n_total - ne,
                })
                .collect(),
        };
        Ok(Arc::new(Self {
            n_total,
            delta,
            labels,
        }))
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn delta(&self) -> Option<u64> {
        self.delta
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Occupation] {
        &self.labels
    }

    pub fn has_photon_mode(&self) -> bool {
        self.delta.is_some()
    }

    fn same_sector(&self, other: &Self) -> bool {
        self.n_total == other.n_total && self.delta == other.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Photon,
    Excited,
    Ground,
}

/// Normal-ordered transfer products that stay inside a sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transfer {
    /// b_e^dag b_g: moves one atom into the excited mode.
    RaiseExcited,
    /// b_g^dag b_e: moves one atom back into the ground mode.
    LowerExcited,
    /// a b_g b_e^dag: absorbs a photon and promotes one atom.
    DressedRaise,
    /// a^dag b_g^dag b_e: emits a photon and demotes one atom.
    DressedLower,
}

/// Dense complex matrix tagged with its sector.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    sector: Arc<FockSector>,
    mat: DMatrix<Complex64>,
}

fn check_same_sector(a: &OperatorMatrix, b: &OperatorMatrix, what: &str) -> Result<()> {
    if !a.sector.same_sector(&b.sector) {
        return Err(CoreError::SectorMismatch(format!(
            "{what}: (N={}, delta={:?}) vs (N={}, delta={:?})",
            a.sector.n_total, a.sector.delta, b.sector.n_total, b.sector.delta
        )));
    }
    Ok(())
}

impl OperatorMatrix {
    pub fn identity(sector: &Arc<FockSector>) -> Self {
        let dim = sector.dimension();
        Self {
            sector: Arc::clone(sector),
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(sector: &Arc<FockSector>) -> Self {
        let dim = sector.dimension();
        Self {
            sector: Arc::clone(sector),
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_matrix(sector: &Arc<FockSector>, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = sector.dimension();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(CoreError::InvalidParameter(format!(
                "matrix is {}x{} but the sector dimension is {dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self {
            sector: Arc::clone(sector),
            mat,
        })
    }

    /// Diagonal occupation-number operator for one mode.
    pub fn number(sector: &Arc<FockSector>, mode: Mode) -> Result<Self> {
        if mode == Mode::Photon && !sector.has_photon_mode() {
            return Err(CoreError::ModeAbsent(
                "photon number requested on a two-mode sector".into(),
            ));
        }
        let mut op = Self::zeros(sector);
        for (i, occ) in sector.labels().iter().enumerate() {
            let n = match mode {
                Mode::Photon => occ.photon.unwrap(),
                Mode::Excited => occ.excited,
                Mode::Ground => occ.ground,
            };
            op.mat[(i, i)] = Complex64::new(n as f64, 0.0);
        }
        Ok(op)
    }

    /// Transfer operator with bosonic matrix elements; zero rows at sector
    /// endpoints, so endpoint annihilation is structurally exact.
    pub fn transfer(sector: &Arc<FockSector>, kind: Transfer) -> Result<Self> {
        let dressed = matches!(kind, Transfer::DressedRaise | Transfer::DressedLower);
        if dressed != sector.has_photon_mode() {
            return Err(CoreError::ModeAbsent(format!(
                "{kind:?} requires a {} sector",
                if dressed { "three-mode" } else { "two-mode" }
            )));
        }
        let mut op = Self::zeros(sector);
        for (i, occ) in sector.labels().iter().enumerate() {
            let ne = occ.excited as f64;
            let ng = occ.ground as f64;
            match kind {
                // b_e^dag b_g |n_e, n_g> = sqrt((n_e+1) n_g) |n_e+1, n_g-1>
                Transfer::RaiseExcited => {
                    if occ.ground > 0 {
                        op.mat[(i + 1, i)] = Complex64::new(((ne + 1.0) * ng).sqrt(), 0.0);
                    }
                }
                // b_g^dag b_e |n_e, n_g> = sqrt(n_e (n_g+1)) |n_e-1, n_g+1>
                Transfer::LowerExcited => {
                    if occ.excited > 0 {
                        op.mat[(i - 1, i)] = Complex64::new((ne * (ng + 1.0)).sqrt(), 0.0);
                    }
                }
                // a b_g b_e^dag: amplitude sqrt(n_0 n_g (n_e+1))
                Transfer::DressedRaise => {
                    let n0 = occ.photon.unwrap() as f64;
                    if occ.photon.unwrap() > 0 && occ.ground > 0 {
                        op.mat[(i + 1, i)] =
                            Complex64::new((n0 * ng * (ne + 1.0)).sqrt(), 0.0);
                    }
                }
                // a^dag b_g^dag b_e: amplitude sqrt((n_0+1)(n_g+1) n_e)
                Transfer::DressedLower => {
                    let n0 = occ.photon.unwrap() as f64;
                    if occ.excited > 0 {
                        op.mat[(i - 1, i)] =
                            Complex64::new(((n0 + 1.0) * (ng + 1.0) * ne).sqrt(), 0.0);
                    }
                }
            }
        }
        Ok(op)
    }

    pub fn sector(&self) -> &Arc<FockSector> {
        &self.sector
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            sector: Arc::clone(&self.sector),
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            sector: Arc::clone(&self.sector),
            mat: &self.mat * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_sector(self, other, "add")?;
        Ok(Self {
            sector: Arc::clone(&self.sector),
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_sector(self, other, "sub")?;
        Ok(Self {
            sector: Arc::clone(&self.sector),
            mat: &self.mat - &other.mat,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_same_sector(self, other, "mul")?;
        Ok(Self {
            sector: Arc::clone(&self.sector),
            mat: &self.mat * &other.mat,
        })
    }

    /// [A, B] = AB - BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        check_same_sector(self, other, "commutator")?;
        Ok(Self {
            sector: Arc::clone(&self.sector),
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        })
    }

    /// [A, B]_q = AB - q BA; reduces to the plain commutator at q = 1.
    pub fn q_commutator(&self, other: &Self, q: f64) -> Result<Self> {
        check_same_sector(self, other, "q_commutator")?;
        Ok(Self {
            sector: Arc::clone(&self.sector),
            mat: &self.mat * &other.mat - (&other.mat * &self.mat) * Complex64::new(q, 0.0),
        })
    }

    /// Largest entry magnitude; the residual norm used by all identity checks.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let dim = self.mat.nrows();
        for i in 0..dim {
            for j in 0..=i {
                if (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if !self.sector.same_sector(&state.sector) {
            return Err(CoreError::SectorMismatch(
                "apply: operator and state live in different sectors".into(),
            ));
        }
        Ok(StateVector {
            sector: Arc::clone(&state.sector),
            amplitudes: &self.mat * &state.amplitudes,
        })
    }
}

/// State in one sector. Physical states are unit norm; unnormalized vectors
/// appear only as intermediates (e.g. ladder construction, operator images).
#[derive(Debug, Clone)]
pub struct StateVector {
    sector: Arc<FockSector>,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Basis state with excited occupation `n_e` (index n_e in the sector order).
    pub fn basis(sector: &Arc<FockSector>, n_e: u64) -> Result<Self> {
        let idx = n_e as usize;
        if idx >= sector.dimension() {
            return Err(CoreError::OutOfRange(format!(
                "basis state n_e = {n_e} in a sector of dimension {}",
                sector.dimension()
            )));
        }
        let mut amplitudes = DVector::zeros(sector.dimension());
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self {
            sector: Arc::clone(sector),
            amplitudes,
        })
    }

    pub fn from_amplitudes(sector: &Arc<FockSector>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != sector.dimension() {
            return Err(CoreError::InvalidParameter(format!(
                "{} amplitudes for a sector of dimension {}",
                amplitudes.len(),
                sector.dimension()
            )));
        }
        Ok(Self {
            sector: Arc::clone(sector),
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    pub fn sector(&self) -> &Arc<FockSector> {
        &self.sector
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(CoreError::InvalidParameter(
                "cannot normalize a zero vector".into(),
            ));
        }
        Ok(Self {
            sector: Arc::clone(&self.sector),
            amplitudes: &self.amplitudes / Complex64::new(n, 0.0),
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            sector: Arc::clone(&self.sector),
            amplitudes: &self.amplitudes * factor,
        }
    }

    pub fn overlap(&self, other: &Self) -> Result<Complex64> {
        if !self.sector.same_sector(&other.sector) {
            return Err(CoreError::SectorMismatch("overlap".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        let image = op.apply(self)?;
        self.overlap(&image)
    }

    /// <M^2> - <M>^2 for Hermitian M, clamping roundoff negatives to zero.
    pub fn variance(&self, op: &OperatorMatrix) -> Result<f64> {
        if !op.is_hermitian(1e-12) {
            return Err(CoreError::NonHermitian(
                "variance is defined for Hermitian operators".into(),
            ));
        }
        let image = op.apply(self)?;
        let mean = self.overlap(&image)?.re;
        let second = image.norm().powi(2);
        let var = second - mean * mean;
        if var < -1e-9 {
            return Err(CoreError::Domain(format!(
                "variance {var:.3e} is negative beyond roundoff"
            )));
        }
        Ok(var.max(0.0))
    }
}

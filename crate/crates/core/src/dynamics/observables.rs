//! Observable columns: exact sector expectations next to their first-order
//! predictions, plus the per-size error summary used by convergence scans.

use num_complex::Complex64;

use crate::dynamics::perturbative::PerturbativeSolution;
use crate::dynamics::propagator::{evolve, DrivenHamiltonian};
use crate::dynamics::{ModelParams, QuadraticSign};
use crate::error::{CoreError, Result};
use crate::fock::{FockSector, Mode, OperatorMatrix, StateVector};
use crate::gardiner::{GardinerAlgebra, PhononAlgebra};

/// First-order results are flagged once max |beta|^2 * eta exceeds this.
pub const VALIDITY_LIMIT: f64 = 0.25;

/// Allowed defect per atom in the conserved mode sums.
const CONSERVATION_TOL: f64 = 1e-9;

/// Initial-state invariants: vacuum population and variance 1/2.
const INITIAL_NODE_TOL: f64 = 1e-10;

/// Per-node exact expectations computed from a unitary trajectory.
#[derive(Debug, Clone)]
pub struct ExactColumns {
    pub mean_ne: Vec<f64>,
    pub mean_btb: Vec<f64>,
    pub var_x1: Vec<f64>,
    pub var_x2: Vec<f64>,
    pub product: Vec<f64>,
    pub comm_x1x2: Vec<Complex64>,
}

/// Per-node first-order predictions evaluated from the response functions.
#[derive(Debug, Clone)]
pub struct PerturbativeColumns {
    pub mean_ne_order0: Vec<f64>,
    pub mean_ne_order1: Vec<f64>,
    pub var_x1: Vec<f64>,
    pub var_x2: Vec<f64>,
    pub product: Vec<f64>,
    pub max_beta_sq: f64,
    pub validity_warning: bool,
}

/// Exact and first-order columns merged on one grid, ready for output.
#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub time_grid: Vec<f64>,
    pub beta: Vec<Complex64>,
    pub mean_ne_exact: Vec<f64>,
    pub mean_ne_order0: Vec<f64>,
    pub mean_ne_order1: Vec<f64>,
    pub var_x1_exact: Vec<f64>,
    pub var_x2_exact: Vec<f64>,
    pub var_x1_pert: Vec<f64>,
    pub var_x2_pert: Vec<f64>,
    pub product_exact: Vec<f64>,
    pub product_pert: Vec<f64>,
    pub comm_x1x2: Vec<Complex64>,
    pub mean_btb_exact: Vec<f64>,
    pub eta: f64,
    pub max_beta_sq: f64,
    pub robertson_excess_max: f64,
    pub validity_warning: bool,
}

impl ObservableSeries {
    /// Worst-case population deviations (e0, e1) of the leading and
    /// first-order predictions from the exact trajectory.
    pub fn population_errors(&self) -> (f64, f64) {
        (
            max_abs_diff(&self.mean_ne_exact, &self.mean_ne_order0),
            max_abs_diff(&self.mean_ne_exact, &self.mean_ne_order1),
        )
    }
}

/// Worst-case deviations between the exact trajectory and the first-order
/// predictions for one sector size, with both sign branches retained so a
/// scan over sizes can arbitrate the quadratic term.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub n_total: u64,
    pub max_beta_sq: f64,
    pub e0: f64,
    pub e1: f64,
    pub var_x1_err: f64,
    pub var_x2_err: f64,
    pub product_err: f64,
    pub comm_err: f64,
    pub robertson_excess: f64,
    pub validity_warning: bool,
    pub sign: QuadraticSign,
    var_err_by_sign: [[f64; 2]; 2],
}

impl SweepPoint {
    /// Max variance errors (X1, X2) under the given sign branch.
    pub fn variance_errors(&self, sign: QuadraticSign) -> (f64, f64) {
        let row = self.var_err_by_sign[sign.index()];
        (row[0], row[1])
    }
}

/// Exact expectations at every trajectory node. Asserts the conserved mode
/// sums at each node before reporting anything.
pub fn observables_exact(
    trajectory: &[StateVector],
    algebra: &dyn PhononAlgebra,
) -> Result<ExactColumns> {
    if trajectory.is_empty() {
        return Err(CoreError::InvalidParameter(
            "observables need at least one trajectory node".into(),
        ));
    }
    let sector = algebra.sector();
    let n_total = sector.n_total() as f64;
    let (x1, x2) = algebra.quadrature_pair();
    let comm_op = x1.commutator(&x2)?;
    let ne_op = algebra.excited_number();
    let ng_op = OperatorMatrix::number(sector, Mode::Ground)?;
    let n0_op = if sector.has_photon_mode() {
        Some(OperatorMatrix::number(sector, Mode::Photon)?)
    } else {
        None
    };

    let len = trajectory.len();
    let mut cols = ExactColumns {
        mean_ne: Vec::with_capacity(len),
        mean_btb: Vec::with_capacity(len),
        var_x1: Vec::with_capacity(len),
        var_x2: Vec::with_capacity(len),
        product: Vec::with_capacity(len),
        comm_x1x2: Vec::with_capacity(len),
    };
    let tol = CONSERVATION_TOL * n_total.max(1.0);
    for (k, state) in trajectory.iter().enumerate() {
        let ne = state.expectation(ne_op)?.re;
        let ng = state.expectation(&ng_op)?.re;
        if (ne + ng - n_total).abs() > tol {
            return Err(CoreError::AlgebraResidual(format!(
                "mode sum Ne + Ng = {} drifted from {n_total} at node {k}",
                ne + ng
            )));
        }
        if let Some(op) = &n0_op {
            let n0 = state.expectation(op)?.re;
            let delta = sector.delta().unwrap_or(0) as f64;
            if (ne + n0 - delta).abs() > tol {
                return Err(CoreError::AlgebraResidual(format!(
                    "mode sum Ne + N0 = {} drifted from {delta} at node {k}",
                    ne + n0
                )));
            }
        }
        let v1 = state.variance(&x1)?;
        let v2 = state.variance(&x2)?;
        cols.mean_ne.push(ne);
        cols.mean_btb.push(algebra.lower().apply(state)?.norm().powi(2));
        cols.var_x1.push(v1);
        cols.var_x2.push(v2);
        cols.product.push(v1 * v2);
        cols.comm_x1x2.push(state.expectation(&comm_op)?);
    }
    Ok(cols)
}

/// First-order predictions from the response functions at deformation eta.
/// The uncertainty product is computed twice, from its own closed form and
/// from the truncated product of the variance columns, and the two must
/// agree to roundoff before either is reported.
pub fn observables_perturbative(
    solution: &PerturbativeSolution,
    eta: f64,
) -> Result<PerturbativeColumns> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(CoreError::InvalidParameter(format!(
            "deformation eta = {eta} outside [0, 1]"
        )));
    }
    let len = solution.len();
    let mut cols = PerturbativeColumns {
        mean_ne_order0: Vec::with_capacity(len),
        mean_ne_order1: Vec::with_capacity(len),
        var_x1: Vec::with_capacity(len),
        var_x2: Vec::with_capacity(len),
        product: Vec::with_capacity(len),
        max_beta_sq: solution.max_beta_sq(),
        validity_warning: solution.max_beta_sq() * eta > VALIDITY_LIMIT,
    };
    for k in 0..len {
        let (v1, v2) = solution.variance_printed(k, eta);
        let product = solution.product_first_order(k, eta);
        // truncated cross-check: v1 v2 = 1/4 - eta (u + v)/2 + O(eta^2)
        let cross = 0.25 - 0.5 * ((0.5 - v1) + (0.5 - v2));
        if (product - cross).abs() > 1e-14 {
            return Err(CoreError::AlgebraResidual(format!(
                "product forms disagree by {:.3e} at node {k}",
                (product - cross).abs()
            )));
        }
        cols.mean_ne_order0.push(solution.mean_ne_order0(k));
        cols.mean_ne_order1.push(solution.mean_ne_order1(k, eta));
        cols.var_x1.push(v1);
        cols.var_x2.push(v2);
        cols.product.push(product);
    }
    Ok(cols)
}

/// Merge one exact trajectory with its first-order prediction. The grid of
/// the solution names the nodes; the trajectory must align with it, start in
/// the phonon vacuum, and open with exact vacuum variances.
pub fn observable_series(
    trajectory: &[StateVector],
    algebra: &dyn PhononAlgebra,
    solution: &PerturbativeSolution,
) -> Result<ObservableSeries> {
    if trajectory.len() != solution.len() {
        return Err(CoreError::InvalidParameter(format!(
            "trajectory has {} nodes but the solution grid has {}",
            trajectory.len(),
            solution.len()
        )));
    }
    let eta = algebra.eta_effective();
    let exact = observables_exact(trajectory, algebra)?;
    let pert = observables_perturbative(solution, eta)?;

    if exact.mean_ne[0].abs() > INITIAL_NODE_TOL {
        return Err(CoreError::AlgebraResidual(format!(
            "initial mean occupation {} is not the vacuum",
            exact.mean_ne[0]
        )));
    }
    for (label, v0) in [("X1", exact.var_x1[0]), ("X2", exact.var_x2[0])] {
        if (v0 - 0.5).abs() > INITIAL_NODE_TOL {
            return Err(CoreError::AlgebraResidual(format!(
                "initial {label} variance {v0} is not the vacuum value 1/2"
            )));
        }
    }

    let robertson_excess_max = exact
        .comm_x1x2
        .iter()
        .zip(&exact.product)
        .map(|(c, p)| 0.25 * c.norm_sqr() - p)
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(ObservableSeries {
        time_grid: solution.time_grid.clone(),
        beta: solution.beta.clone(),
        mean_ne_exact: exact.mean_ne,
        mean_ne_order0: pert.mean_ne_order0,
        mean_ne_order1: pert.mean_ne_order1,
        var_x1_exact: exact.var_x1,
        var_x2_exact: exact.var_x2,
        var_x1_pert: pert.var_x1,
        var_x2_pert: pert.var_x2,
        product_exact: exact.product,
        product_pert: pert.product,
        comm_x1x2: exact.comm_x1x2,
        mean_btb_exact: exact.mean_btb,
        eta,
        max_beta_sq: pert.max_beta_sq,
        robertson_excess_max,
        validity_warning: pert.validity_warning,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Run one sector size end to end: evolve the vacuum under the drive, solve
/// the response functions, and reduce both to worst-case deviations.
pub fn sweep_point(
    params: &ModelParams,
    grid: &[f64],
    sign: QuadraticSign,
    steps_per_unit: Option<f64>,
) -> Result<SweepPoint> {
    let sector = FockSector::build(params.n_total, None)?;
    let algebra = GardinerAlgebra::new(&sector)?;
    let hamiltonian =
        DrivenHamiltonian::for_phonon_pair(&algebra, params.omega_e, 0.0, params.mu.clone())?;
    let initial = StateVector::basis(&sector, 0)?;
    let trajectory = evolve(&hamiltonian, &initial, grid, steps_per_unit)?;
    let solution = crate::dynamics::perturbative::perturbative_solution(params, grid, sign)?;
    let eta = algebra.eta_effective();
    let exact = observables_exact(&trajectory, &algebra)?;
    let pert = observables_perturbative(&solution, eta)?;

    let len = grid.len();
    let order0: Vec<f64> = (0..len).map(|k| solution.mean_ne_order0(k)).collect();
    let order1: Vec<f64> = (0..len).map(|k| solution.mean_ne_order1(k, eta)).collect();
    let e0 = max_abs_diff(&exact.mean_ne, &order0);
    let e1 = max_abs_diff(&exact.mean_ne, &order1);

    let mut var_err_by_sign = [[0.0f64; 2]; 2];
    for branch in QuadraticSign::BOTH {
        let mut worst = [0.0f64; 2];
        for k in 0..len {
            let (v1, v2) = solution.variance_first_order(k, eta, branch);
            worst[0] = worst[0].max((exact.var_x1[k] - v1).abs());
            worst[1] = worst[1].max((exact.var_x2[k] - v2).abs());
        }
        var_err_by_sign[branch.index()] = worst;
    }

    let product_err = max_abs_diff(&exact.product, &pert.product);
    let comm_err = exact
        .comm_x1x2
        .iter()
        .zip(&exact.mean_btb)
        .map(|(c, btb)| (c.im - (1.0 - 2.0 * eta * btb)).abs().max(c.re.abs()))
        .fold(0.0, f64::max);
    let robertson_excess = exact
        .comm_x1x2
        .iter()
        .zip(&exact.product)
        .map(|(c, p)| 0.25 * c.norm_sqr() - p)
        .fold(f64::NEG_INFINITY, f64::max);

    let headline = var_err_by_sign[sign.index()];
    Ok(SweepPoint {
        n_total: params.n_total,
        max_beta_sq: pert.max_beta_sq,
        e0,
        e1,
        var_x1_err: headline[0],
        var_x2_err: headline[1],
        product_err,
        comm_err,
        robertson_excess,
        validity_warning: pert.validity_warning,
        sign,
        var_err_by_sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::perturbative::perturbative_solution;
    use crate::dynamics::pulse::PulseProfile;
    use crate::dynamics::time_grid;

    fn short_gaussian() -> PulseProfile {
        PulseProfile::GaussianEnvelope {
            amplitude: Complex64::new(0.6, 0.0),
            omega_f: 1.0,
            center: 1.5,
            width: 0.5,
        }
    }

    #[test]
    fn undriven_vacuum_reports_vacuum_columns() {
        let n = 12;
        let params = ModelParams::new(n, 1.0, PulseProfile::constant_real(0.0)).unwrap();
        let grid = time_grid(2.0, 21).unwrap();
        let sector = FockSector::build(n, None).unwrap();
        let algebra = GardinerAlgebra::new(&sector).unwrap();
        let h = DrivenHamiltonian::for_phonon_pair(&algebra, 1.0, 0.0, params.mu.clone()).unwrap();
        let initial = StateVector::basis(&sector, 0).unwrap();
        let trajectory = evolve(&h, &initial, &grid, None).unwrap();
        let solution = perturbative_solution(&params, &grid, QuadraticSign::Negative).unwrap();
        let series = observable_series(&trajectory, &algebra, &solution).unwrap();
        for k in 0..grid.len() {
            assert!(series.mean_ne_exact[k].abs() < 1e-12);
            assert!((series.var_x1_exact[k] - 0.5).abs() < 1e-12);
            assert!((series.var_x2_exact[k] - 0.5).abs() < 1e-12);
            // vacuum commutator expectation is exactly i
            assert!((series.comm_x1x2[k] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
            assert_eq!(series.var_x1_pert[k], 0.5);
            assert_eq!(series.product_pert[k], 0.25);
        }
        assert!(!series.validity_warning);
        assert!(series.robertson_excess_max <= 1e-12);
    }

    #[test]
    fn first_order_beats_leading_order_on_a_driven_run() {
        let params = ModelParams::new(48, 1.0, short_gaussian()).unwrap();
        let grid = time_grid(3.0, 61).unwrap();
        let point = sweep_point(&params, &grid, QuadraticSign::Negative, None).unwrap();
        assert!(point.e0 > 1e-6, "drive too weak for the comparison");
        assert!(point.e1 < point.e0, "e1 = {} e0 = {}", point.e1, point.e0);
        assert!(point.product_err < 1e-3);
        assert!(point.robertson_excess <= 1e-10);
        assert!(!point.validity_warning);
        // the retained branch must be the headline column
        let (v1m, v2m) = point.variance_errors(QuadraticSign::Negative);
        assert_eq!(v1m, point.var_x1_err);
        assert_eq!(v2m, point.var_x2_err);
    }

    #[test]
    fn variance_branches_are_distinguishable() {
        let params = ModelParams::new(48, 1.0, short_gaussian()).unwrap();
        let grid = time_grid(3.0, 61).unwrap();
        let point = sweep_point(&params, &grid, QuadraticSign::Negative, None).unwrap();
        let (m1, m2) = point.variance_errors(QuadraticSign::Negative);
        let (p1, p2) = point.variance_errors(QuadraticSign::Positive);
        assert!(m1 < p1, "X1: minus {m1} vs plus {p1}");
        assert!(m2 < p2, "X2: minus {m2} vs plus {p2}");
    }

    #[test]
    fn norm_loss_trips_the_conservation_check() {
        let sector = FockSector::build(6, None).unwrap();
        let algebra = GardinerAlgebra::new(&sector).unwrap();
        let damaged = StateVector::basis(&sector, 0)
            .unwrap()
            .scale(Complex64::new(0.9, 0.0));
        let err = observables_exact(&[damaged], &algebra).unwrap_err();
        assert!(matches!(err, CoreError::AlgebraResidual(_)));
    }

    #[test]
    fn trajectory_and_solution_grids_must_align() {
        let n = 8;
        let params = ModelParams::new(n, 1.0, PulseProfile::constant_real(0.1)).unwrap();
        let grid = time_grid(1.0, 11).unwrap();
        let sector = FockSector::build(n, None).unwrap();
        let algebra = GardinerAlgebra::new(&sector).unwrap();
        let h = DrivenHamiltonian::for_phonon_pair(&algebra, 1.0, 0.0, params.mu.clone()).unwrap();
        let initial = StateVector::basis(&sector, 0).unwrap();
        let trajectory = evolve(&h, &initial, &grid, None).unwrap();
        let short = time_grid(1.0, 6).unwrap();
        let solution = perturbative_solution(&params, &short, QuadraticSign::Negative).unwrap();
        assert!(observable_series(&trajectory, &algebra, &solution).is_err());
    }

    #[test]
    fn perturbative_columns_reject_bad_eta() {
        let params = ModelParams::new(8, 1.0, PulseProfile::constant_real(0.1)).unwrap();
        let grid = time_grid(1.0, 11).unwrap();
        let solution = perturbative_solution(&params, &grid, QuadraticSign::Negative).unwrap();
        assert!(observables_perturbative(&solution, -0.1).is_err());
        assert!(observables_perturbative(&solution, 1.5).is_err());
        assert!(observables_perturbative(&solution, 0.125).is_ok());
    }

    #[test]
    fn product_forms_agree_on_a_driven_solution() {
        let params = ModelParams::new(32, 1.0, short_gaussian()).unwrap();
        let grid = time_grid(3.0, 61).unwrap();
        let solution = perturbative_solution(&params, &grid, QuadraticSign::Negative).unwrap();
        let cols = observables_perturbative(&solution, 1.0 / 32.0).unwrap();
        for k in 0..grid.len() {
            let cross = 0.25 - 0.5 * ((0.5 - cols.var_x1[k]) + (0.5 - cols.var_x2[k]));
            assert!((cols.product[k] - cross).abs() <= 1e-14);
        }
    }
}

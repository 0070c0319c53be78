//! Simulation library for the phonon description of an atom-laser output
//! coupler: exact evolution on particle-number-conserving Fock sectors next
//! to the first-order large-N expansion it is meant to validate.
//!
//! Layout:
//! - [`fock`]: conserved sectors, dense operators, states.
//! - [`gardiner`]: the q-deformed phonon pair b, b-dagger on a two-mode
//!   sector and its algebra checks.
//! - [`dressed`]: the photon-dressed three-mode variant.
//! - [`dynamics`]: exact propagation, the first-order perturbative solution,
//!   observable series, and the two-level crosscheck.

// Validation deliberately writes !(x > 0.0) instead of x <= 0.0 so NaN
// inputs fail too; same for the norm-drift gate, where a NaN drift must
// abort the run.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dressed;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod gardiner;

pub use dressed::{make_dressed, DressedAlgebra, DressedParams};
pub use error::{CoreError, Result};
pub use fock::{FockSector, Mode, Occupation, OperatorMatrix, StateVector, Transfer};
pub use gardiner::{GardinerAlgebra, PhononAlgebra};

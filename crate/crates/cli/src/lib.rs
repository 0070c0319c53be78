//! Config-driven front end for the phonon simulation library.
//!
//! The binary reads one strict JSON document per run, dispatches to one of
//! five commands (algebra-check, evolve, sweep, dressed-check, rabi), and
//! writes byte-stable CSV tables plus a JSON report into the output
//! directory. Exit codes: 0 on success, 1 for numerical or assertion
//! failures during a run, 2 for configuration problems.

pub mod commands;
pub mod config;
pub mod csvout;
pub mod error;
pub mod report;

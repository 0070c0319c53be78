//! Machine-readable run reports.
//!
//! Every command writes one JSON report carrying the resolved quadratic
//! sign, every residual it checked together with the tolerance it was
//! held to and whether it passed, and a few free-form diagnostics.
//! Residual keys are sorted (BTreeMap) so reports diff cleanly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use qphonon_core::dynamics::QuadraticSign;
use qphonon_core::gardiner::AlgebraReport;

use crate::config::SCHEMA_VERSION;
use crate::csvout::write_atomic;
use crate::error::Result;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualValue {
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u64,
    pub command: &'static str,
    /// The sign s in the first-order variance correction, as +1 or -1.
    pub resolved_sign_s: i8,
    /// Where the sign came from: "protocol", "config", or "default".
    pub sign_source: &'static str,
    pub all_residuals_pass: bool,
    pub residuals: BTreeMap<String, ResidualValue>,
    pub convergence_ratios: BTreeMap<String, Vec<f64>>,
    pub validity_warning: bool,
    pub warnings: Vec<String>,
    pub diagnostics: BTreeMap<String, f64>,
    pub wall_clock_seconds: f64,
}

pub fn sign_value(sign: QuadraticSign) -> i8 {
    match sign {
        QuadraticSign::Negative => -1,
        QuadraticSign::Positive => 1,
    }
}

impl RunReport {
    pub fn new(command: &'static str, sign: QuadraticSign, sign_source: &'static str) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command,
            resolved_sign_s: sign_value(sign),
            sign_source,
            all_residuals_pass: true,
            residuals: BTreeMap::new(),
            convergence_ratios: BTreeMap::new(),
            validity_warning: false,
            warnings: Vec::new(),
            diagnostics: BTreeMap::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn add_residual(&mut self, key: impl Into<String>, residual: f64, tolerance: f64) {
        let pass = residual.abs() <= tolerance;
        self.residuals.insert(
            key.into(),
            ResidualValue {
                residual,
                tolerance,
                pass,
            },
        );
    }

    /// Merge an algebra verification, namespacing its keys under `prefix`.
    pub fn add_algebra_report(&mut self, prefix: &str, report: &AlgebraReport) {
        for entry in &report.entries {
            let key = if prefix.is_empty() {
                entry.key.to_string()
            } else {
                format!("{prefix}.{}", entry.key)
            };
            self.add_residual(key, entry.residual, entry.tolerance);
        }
    }

    pub fn add_diagnostic(&mut self, key: impl Into<String>, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }

    pub fn finish(&mut self, start: Instant) {
        self.all_residuals_pass = self.residuals.values().all(|r| r.pass);
        self.wall_clock_seconds = start.elapsed().as_secs_f64();
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)
            .expect("report serialization cannot fail");
        bytes.push(b'\n');
        write_atomic(path, &bytes)
    }
}

pub fn report_path(output_dir: &Path, command: &str) -> PathBuf {
    output_dir.join(format!("{}_report.json", command.replace('-', "_")))
}

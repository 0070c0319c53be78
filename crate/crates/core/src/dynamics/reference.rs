//! The fixed reference drive, and the protocol that resolves the sign of
//! the quadratic term in the evolved lowering operator.
//!
//! The substitution step that carries the evolved operator back through the
//! commutator leaves the sign of the beta^2 b0^dag term ambiguous: both
//! branches are algebraically consistent at the order the derivation is
//! written. The branches are distinguishable dynamically. Under the matched
//! sign the first-order variances track the exact ones to O(1/N^2); under
//! the mismatched sign the residual stays at O(1/N). The protocol runs the
//! reference drive at two sector sizes, measures the worst-case variance
//! errors under both branches, and retains the branch whose error is
//! smaller at the larger size.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::dynamics::observables::{sweep_point, SweepPoint};
use crate::dynamics::pulse::PulseProfile;
use crate::dynamics::{time_grid, ModelParams, QuadraticSign};
use crate::error::{CoreError, Result};

/// Branch errors measured across sector sizes, and the verdict.
#[derive(Debug, Clone)]
pub struct SignEvidence {
    /// Sector sizes, ascending.
    pub sizes: Vec<u64>,
    /// Worst variance error per size under s = -1.
    pub err_negative: Vec<f64>,
    /// Worst variance error per size under s = +1.
    pub err_positive: Vec<f64>,
    /// Consecutive-size error ratios under s = -1 (1/N^2 scaling gives
    /// ~0.25 on size doubling).
    pub scaling_negative: Vec<f64>,
    /// Consecutive-size error ratios under s = +1 (1/N scaling gives ~0.5).
    pub scaling_positive: Vec<f64>,
    /// Mismatched over matched error at the largest size.
    pub separation: f64,
    /// The branch retained by the protocol.
    pub resolved: QuadraticSign,
}

/// The drive all cross-size comparisons share: a Gaussian envelope on a
/// carrier at the mode frequency, strong enough that max |beta|^2 > 2.
pub fn reference_pulse() -> PulseProfile {
    PulseProfile::GaussianEnvelope {
        amplitude: Complex64::new(0.6, 0.0),
        omega_f: 1.0,
        center: 3.0,
        width: 1.0,
    }
}

/// Reference model at a given sector size: unit mode frequency under the
/// reference pulse.
pub fn reference_model(n_total: u64) -> Result<ModelParams> {
    ModelParams::new(n_total, 1.0, reference_pulse())
}

/// The output grid every reference run reports on: [0, 7] at 351 nodes.
pub fn reference_time_grid() -> Vec<f64> {
    time_grid(7.0, 351).expect("static grid parameters are valid")
}

/// One full reference run at the given sector size.
pub fn reference_sweep_point(n_total: u64, sign: QuadraticSign) -> Result<SweepPoint> {
    let params = reference_model(n_total)?;
    sweep_point(&params, &reference_time_grid(), sign, None)
}

/// Reduce measured sweep points to sign evidence. Points are compared in
/// ascending sector size; the verdict comes from the largest.
pub fn sign_evidence_from_points(points: &[SweepPoint]) -> Result<SignEvidence> {
    if points.is_empty() {
        return Err(CoreError::InvalidParameter(
            "sign evidence needs at least one sweep point".into(),
        ));
    }
    let mut ordered: Vec<&SweepPoint> = points.iter().collect();
    ordered.sort_by_key(|p| p.n_total);

    let worst = |p: &SweepPoint, sign: QuadraticSign| -> f64 {
        let (v1, v2) = p.variance_errors(sign);
        v1.max(v2)
    };
    let sizes: Vec<u64> = ordered.iter().map(|p| p.n_total).collect();
    let err_negative: Vec<f64> = ordered
        .iter()
        .map(|p| worst(p, QuadraticSign::Negative))
        .collect();
    let err_positive: Vec<f64> = ordered
        .iter()
        .map(|p| worst(p, QuadraticSign::Positive))
        .collect();
    let ratios = |errs: &[f64]| -> Vec<f64> {
        errs.windows(2).map(|w| w[1] / w[0]).collect()
    };

    let last_neg = *err_negative.last().unwrap();
    let last_pos = *err_positive.last().unwrap();
    if !(last_neg.is_finite() && last_pos.is_finite()) || last_neg.max(last_pos) == 0.0 {
        return Err(CoreError::Domain(
            "variance errors are degenerate; the drive cannot resolve the sign".into(),
        ));
    }
    let (resolved, separation) = if last_neg <= last_pos {
        (QuadraticSign::Negative, last_pos / last_neg)
    } else {
        (QuadraticSign::Positive, last_neg / last_pos)
    };
    Ok(SignEvidence {
        sizes,
        scaling_negative: ratios(&err_negative),
        scaling_positive: ratios(&err_positive),
        err_negative,
        err_positive,
        separation,
        resolved,
    })
}

/// Minimum separation for the protocol to call a verdict.
const SEPARATION_FLOOR: f64 = 2.0;

/// Sector sizes the memoized protocol runs at.
const PROTOCOL_SIZES: [u64; 2] = [64, 128];

fn run_protocol() -> Result<SignEvidence> {
    let mut points = Vec::with_capacity(PROTOCOL_SIZES.len());
    for n in PROTOCOL_SIZES {
        // the requested sign only selects the headline columns; both
        // branches are always measured
        points.push(reference_sweep_point(n, QuadraticSign::Negative)?);
    }
    let evidence = sign_evidence_from_points(&points)?;
    if evidence.separation < SEPARATION_FLOOR {
        return Err(CoreError::Domain(format!(
            "sign branches separate by only {:.2}x on the reference drive",
            evidence.separation
        )));
    }
    Ok(evidence)
}

/// Evidence from the reference drive at the protocol sizes, computed once
/// per process and shared.
pub fn sign_protocol() -> Result<&'static SignEvidence> {
    static EVIDENCE: OnceLock<std::result::Result<SignEvidence, String>> = OnceLock::new();
    EVIDENCE
        .get_or_init(|| run_protocol().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|msg| CoreError::Domain(msg.clone()))
}

/// The sign the protocol resolves.
pub fn resolved_sign() -> Result<QuadraticSign> {
    Ok(sign_protocol()?.resolved)
}

//! Drive profiles for the linear coupling term.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Complex drive amplitude mu(t) entering H(t) = omega_e N_e + mu b^dag + h.c.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseProfile {
    /// mu(t) = amplitude.
    Constant { amplitude: Complex64 },
    /// mu(t) = amplitude exp(-i omega_f t).
    Monochromatic { amplitude: Complex64, omega_f: f64 },
    /// mu(t) = amplitude exp(-(t - center)^2 / (2 width^2)) exp(-i omega_f t).
    GaussianEnvelope {
        amplitude: Complex64,
        omega_f: f64,
        center: f64,
        width: f64,
    },
}

impl PulseProfile {
    pub fn constant_real(amplitude: f64) -> Self {
        PulseProfile::Constant {
            amplitude: Complex64::new(amplitude, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        match *self {
            PulseProfile::Constant { amplitude } => {
                if !finite(amplitude) {
                    return Err(CoreError::InvalidParameter(
                        "pulse amplitude must be finite".into(),
                    ));
                }
            }
            PulseProfile::Monochromatic { amplitude, omega_f } => {
                if !finite(amplitude) || !omega_f.is_finite() {
                    return Err(CoreError::InvalidParameter(
                        "pulse amplitude and omega_f must be finite".into(),
                    ));
                }
            }
            PulseProfile::GaussianEnvelope {
                amplitude,
                omega_f,
                center,
                width,
            } => {
                if !finite(amplitude) || !omega_f.is_finite() || !center.is_finite() {
                    return Err(CoreError::InvalidParameter(
                        "pulse parameters must be finite".into(),
                    ));
                }
                if !(width > 0.0) || !width.is_finite() {
                    return Err(CoreError::InvalidParameter(format!(
                        "gaussian width must be positive and finite, got {width}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mu(&self, t: f64) -> Complex64 {
        match *self {
            PulseProfile::Constant { amplitude } => amplitude,
            PulseProfile::Monochromatic { amplitude, omega_f } => {
                amplitude * Complex64::new(0.0, -omega_f * t).exp()
            }
            PulseProfile::GaussianEnvelope {
                amplitude,
                omega_f,
                center,
                width,
            } => {
                let arg = (t - center) / width;
                amplitude
                    * (-0.5 * arg * arg).exp()
                    * Complex64::new(0.0, -omega_f * t).exp()
            }
        }
    }

    /// Largest |mu(t)| over all t; sets the drive part of the step budget.
    pub fn peak_magnitude(&self) -> f64 {
        match *self {
            PulseProfile::Constant { amplitude }
            | PulseProfile::Monochromatic { amplitude, .. }
            | PulseProfile::GaussianEnvelope { amplitude, .. } => amplitude.norm(),
        }
    }

    /// Fastest frequency the profile injects (carrier and envelope).
    pub fn frequency_scale(&self) -> f64 {
        match *self {
            PulseProfile::Constant { .. } => 0.0,
            PulseProfile::Monochromatic { omega_f, .. } => omega_f.abs(),
            PulseProfile::GaussianEnvelope { omega_f, width, .. } => {
                omega_f.abs().max(1.0 / width)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.peak_magnitude() == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_monochromatic_values() {
        let c = PulseProfile::constant_real(0.5);
        assert_eq!(c.mu(3.7), Complex64::new(0.5, 0.0));
        assert_eq!(c.frequency_scale(), 0.0);

        let m = PulseProfile::Monochromatic {
            amplitude: Complex64::new(0.3, 0.0),
            omega_f: 2.0,
        };
        let t = 0.7;
        let expect = 0.3 * Complex64::new(0.0, -2.0 * t).exp();
        assert!((m.mu(t) - expect).norm() < 1e-15);
        assert_eq!(m.peak_magnitude(), 0.3);
        assert_eq!(m.frequency_scale(), 2.0);
    }

    #[test]
    fn gaussian_envelope_values() {
        let g = PulseProfile::GaussianEnvelope {
            amplitude: Complex64::new(0.6, 0.0),
            omega_f: 1.0,
            center: 3.0,
            width: 1.0,
        };
        // at the center the envelope is 1 and only the carrier phase remains
        let expect = 0.6 * Complex64::new(0.0, -3.0).exp();
        assert!((g.mu(3.0) - expect).norm() < 1e-15);
        // one width away the envelope is exp(-1/2)
        assert!((g.mu(4.0).norm() - 0.6 * (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(g.frequency_scale(), 1.0);

        let narrow = PulseProfile::GaussianEnvelope {
            amplitude: Complex64::new(0.6, 0.0),
            omega_f: 0.2,
            center: 3.0,
            width: 0.25,
        };
        assert_eq!(narrow.frequency_scale(), 4.0);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(PulseProfile::Constant {
            amplitude: Complex64::new(f64::NAN, 0.0)
        }
        .validate()
        .is_err());
        assert!(PulseProfile::GaussianEnvelope {
            amplitude: Complex64::new(0.1, 0.0),
            omega_f: 1.0,
            center: 0.0,
            width: 0.0,
        }
        .validate()
        .is_err());
        assert!(PulseProfile::GaussianEnvelope {
            amplitude: Complex64::new(0.1, 0.0),
            omega_f: 1.0,
            center: 0.0,
            width: -2.0,
        }
        .validate()
        .is_err());
        assert!(PulseProfile::constant_real(0.0).is_zero());
    }
}

//! Closed-form uncertainty products used as error references.
//!
//! A Gaussian packet of width sigma spreads at its natural frequency
//! `omega0 = hbar / 2 m sigma^2`. In free space the uncertainty product grows
//! as `(hbar/2) sqrt(1 + omega0^2 t^2)`; in a harmonic trap of frequency
//! omega it breathes periodically with period pi / omega.

use crate::error::{Result, TdseError};
use crate::grid::{PhysicalConstants, WavePacketSpec};

/// Natural spreading frequency `hbar / 2 m sigma^2` of a Gaussian packet.
pub fn omega0_of(spec: &WavePacketSpec, constants: &PhysicalConstants) -> f64 {
    constants.hbar / (2.0 * constants.mass * spec.sigma * spec.sigma)
}

/// Uncertainty product of a freely spreading packet.
pub fn uncertainty_free(constants: &PhysicalConstants, omega0: f64, t: f64) -> f64 {
    0.5 * constants.hbar * (1.0 + omega0 * omega0 * t * t).sqrt()
}

/// Uncertainty product of a packet breathing in a harmonic trap.
///
/// Evaluated as `1 - sin^2(2 w t) / 2 + (w0^2/w^2 + w^2/w0^2) sin^2(2 w t) / 4`
/// under the square root, which is identical to the cos^4 + sin^4 form
/// (cos^4 + sin^4 = 1 - sin^2(2 theta) / 2) but avoids cancellation when
/// omega0 and omega are far apart.
pub fn uncertainty_harmonic(constants: &PhysicalConstants, omega: f64, omega0: f64, t: f64) -> f64 {
    let s2 = (2.0 * omega * t).sin().powi(2);
    let ratio = (omega0 / omega).powi(2) + (omega / omega0).powi(2);
    0.5 * constants.hbar * (1.0 - 0.5 * s2 + 0.25 * ratio * s2).sqrt()
}

/// Which closed-form reference applies to a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceCase {
    Free { omega0: f64 },
    Harmonic { omega: f64, omega0: f64 },
}

impl ReferenceCase {
    pub fn free(omega0: f64) -> Result<Self> {
        if omega0 <= 0.0 || !omega0.is_finite() {
            return Err(TdseError::InvalidParameter {
                name: "omega0",
                value: omega0,
            });
        }
        Ok(ReferenceCase::Free { omega0 })
    }

    pub fn harmonic(omega: f64, omega0: f64) -> Result<Self> {
        if omega <= 0.0 || !omega.is_finite() {
            return Err(TdseError::InvalidParameter {
                name: "omega",
                value: omega,
            });
        }
        if omega0 <= 0.0 || !omega0.is_finite() {
            return Err(TdseError::InvalidParameter {
                name: "omega0",
                value: omega0,
            });
        }
        Ok(ReferenceCase::Harmonic { omega, omega0 })
    }

    /// Closed-form uncertainty product at time `t`.
    pub fn uncertainty(&self, constants: &PhysicalConstants, t: f64) -> f64 {
        match *self {
            ReferenceCase::Free { omega0 } => uncertainty_free(constants, omega0, t),
            ReferenceCase::Harmonic { omega, omega0 } => {
                uncertainty_harmonic(constants, omega, omega0, t)
            }
        }
    }
}

//! Induced-EMF impedances of thin center-fed dipoles with sinusoidal current.
//!
//! Both elements are z-oriented and side by side. For a separation `d` the
//! open-circuit voltage induced on dipole 2 by dipole 1 gives
//!
//! ```text
//! Z21(d) = j η / (4π sin²(kl/2)) ∫ sin(k(l/2 − |z|)) K(d, z) dz
//! K(d, z) = e^{−jkR1}/R1 + e^{−jkR2}/R2 − 2 cos(kl/2) e^{−jkR0}/R0
//! ```
//!
//! with `R0 = √(d² + z²)` and `R1,2 = √(d² + (z ∓ l/2)²)`. The self impedance
//! takes its resistance from the filament limit `d → 0` and its reactance from
//! the kernel evaluated at the wire surface (`d = radius`).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Free-space wave impedance, ohms.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730_313_668;

/// Absolute quadrature tolerance on impedance values, ohms.
const QUAD_TOL: f64 = 1e-10;

/// Geometry of one dipole element and the carrier it operates at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleSpec {
    /// Total length in meters.
    pub length: f64,
    /// Wire radius in meters.
    pub radius: f64,
    /// Carrier frequency in hertz.
    pub carrier_frequency: f64,
}

impl DipoleSpec {
    pub fn new(length: f64, radius: f64, carrier_frequency: f64) -> Result<Self> {
        let spec = Self {
            length,
            radius,
            carrier_frequency,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Half-wave dipole with radius `λ / radius_divisor`.
    pub fn half_wave(carrier_frequency: f64, radius_divisor: f64) -> Result<Self> {
        let lambda = SPEED_OF_LIGHT / carrier_frequency;
        Self::new(lambda / 2.0, lambda / radius_divisor, carrier_frequency)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.length.is_finite()
            && self.radius.is_finite()
            && self.carrier_frequency.is_finite();
        if !finite || self.length <= 0.0 || self.radius <= 0.0 || self.carrier_frequency <= 0.0 {
            return Err(Error::Domain(format!(
                "dipole length, radius and frequency must be positive and finite (got {self:?})"
            )));
        }
        if self.radius >= self.length / 10.0 {
            return Err(Error::Domain(format!(
                "thin-wire model needs radius < length/10 (radius {} m, length {} m)",
                self.radius, self.length
            )));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }
}

impl Default for DipoleSpec {
    /// Half-wave dipole at 7 GHz with radius λ/500.
    fn default() -> Self {
        Self::half_wave(7e9, 500.0).expect("default dipole is valid")
    }
}

struct Kernel {
    k: f64,
    half: f64,
    cos_half: f64,
    scale: f64,
}

impl Kernel {
    fn new(spec: &DipoleSpec) -> Result<Self> {
        spec.validate()?;
        let k = spec.wavenumber();
        let half = spec.length / 2.0;
        let sin_half = (k * half).sin();
        if sin_half.abs() < 1e-6 {
            return Err(Error::Domain(format!(
                "feed-point current vanishes for length {} m (kl/2 is a multiple of π)",
                spec.length
            )));
        }
        Ok(Self {
            k,
            half,
            cos_half: (k * half).cos(),
            scale: FREE_SPACE_IMPEDANCE / (4.0 * PI * sin_half * sin_half),
        })
    }

    fn current(&self, z: f64) -> f64 {
        (self.k * (self.half - z.abs())).sin()
    }

    /// Integrand of the full complex impedance at separation `d > 0`.
    fn field(&self, d: f64, z: f64) -> Complex64 {
        let term = |r: f64| Complex64::from_polar(1.0 / r, -self.k * r);
        let r0 = d.hypot(z);
        let r1 = d.hypot(z - self.half);
        let r2 = d.hypot(z + self.half);
        let kernel = term(r1) + term(r2) - 2.0 * self.cos_half * term(r0);
        Complex64::new(0.0, self.scale) * self.current(z) * kernel
    }

    /// Real part of `field`, written with sin(kR)/R so it stays finite at R = 0.
    fn resistance(&self, d: f64, z: f64) -> f64 {
        let sinc = |r: f64| {
            if r == 0.0 {
                self.k
            } else {
                (self.k * r).sin() / r
            }
        };
        let r0 = d.hypot(z);
        let r1 = d.hypot(z - self.half);
        let r2 = d.hypot(z + self.half);
        self.scale * self.current(z) * (sinc(r1) + sinc(r2) - 2.0 * self.cos_half * sinc(r0))
    }
}

fn finite(value: Complex64, what: &str) -> Result<Complex64> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{what} integral is not finite")))
    }
}

/// Self impedance `z_00` of an isolated dipole.
pub fn dipole_self_impedance(spec: &DipoleSpec) -> Result<Complex64> {
    let kernel = Kernel::new(spec)?;
    // The integrand is even in z, so integrate one half and double.
    let resistance = quadrature::integrate(
        |z| Complex64::new(kernel.resistance(0.0, z), 0.0),
        0.0,
        kernel.half,
        QUAD_TOL / 2.0,
    );
    let surface = quadrature::integrate(|z| kernel.field(spec.radius, z), 0.0, kernel.half, QUAD_TOL / 2.0);
    if !resistance.converged || !surface.converged {
        log::debug!(
            "self-impedance quadrature stopped at error {:.2e}/{:.2e}",
            resistance.error,
            surface.error
        );
    }
    finite(
        Complex64::new(2.0 * resistance.value.re, 2.0 * surface.value.im),
        "self-impedance",
    )
}

/// Mutual impedance between two identical side-by-side dipoles.
pub fn dipole_mutual_impedance(spec: &DipoleSpec, separation: f64) -> Result<Complex64> {
    if !(separation > 0.0) || !separation.is_finite() {
        return Err(Error::Domain(format!(
            "mutual impedance needs a positive finite separation (got {separation}); use the self impedance at zero"
        )));
    }
    let kernel = Kernel::new(spec)?;
    let est = quadrature::integrate(|z| kernel.field(separation, z), 0.0, kernel.half, QUAD_TOL / 2.0);
    if !est.converged {
        log::debug!("mutual-impedance quadrature stopped at error {:.2e}", est.error);
    }
    finite(2.0 * est.value, "mutual-impedance")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_in_wavelengths(length: f64, radius: f64) -> DipoleSpec {
        // 1 m wavelength keeps distances readable
        DipoleSpec::new(length, radius, SPEED_OF_LIGHT).unwrap()
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(DipoleSpec::new(0.5, 0.1, SPEED_OF_LIGHT).is_err());
        assert!(DipoleSpec::new(-0.5, 0.001, SPEED_OF_LIGHT).is_err());
        assert!(DipoleSpec::new(0.5, 0.001, f64::NAN).is_err());
        let full_wave = spec_in_wavelengths(1.0, 0.002);
        assert!(matches!(dipole_self_impedance(&full_wave), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_separation_is_a_domain_error() {
        let spec = spec_in_wavelengths(0.5, 0.002);
        assert!(matches!(dipole_mutual_impedance(&spec, 0.0), Err(Error::Domain(_))));
        assert!(dipole_mutual_impedance(&spec, -1.0).is_err());
    }

    #[test]
    fn self_impedance_is_deterministic() {
        let spec = DipoleSpec::default();
        assert_eq!(dipole_self_impedance(&spec).unwrap(), dipole_self_impedance(&spec).unwrap());
    }

    #[test]
    fn default_is_half_wave_at_7ghz() {
        let spec = DipoleSpec::default();
        assert!((spec.wavelength() - 0.042_827_494).abs() < 1e-9);
        assert!((spec.length - spec.wavelength() / 2.0).abs() < 1e-15);
        assert!((spec.radius - spec.wavelength() / 500.0).abs() < 1e-15);
    }
}

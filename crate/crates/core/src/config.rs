//! JSON configuration shared by the sweep, pattern and impedance commands.
//!
//! Syntax errors carry serde's line and column. Semantic errors are reported
//! at the first line mentioning the offending key.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::em_model::{ArrayGeometry, DipoleSpec};
use crate::error::{Error, Result};

/// A semantic validation failure tied to a config key.
#[derive(Debug, Clone, PartialEq)]
pub struct Invalid {
    pub key: &'static str,
    pub message: String,
}

impl Invalid {
    pub fn new(key: &'static str, message: impl Into<String>) -> Self {
        Self {
            key,
            message: message.into(),
        }
    }
}

pub trait Validate {
    fn check(&self) -> std::result::Result<(), Invalid>;
}

/// 1-based line of the first occurrence of `"key"` in `text`.
pub fn locate_key(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}

/// Formats a validation failure against the source text.
pub fn invalid_to_error(text: &str, invalid: &Invalid) -> Error {
    let line = locate_key(text, invalid.key).unwrap_or(1);
    Error::Config(format!("line {line}: `{}`: {}", invalid.key, invalid.message))
}

/// Parses and validates a JSON config.
pub fn from_json<T: DeserializeOwned + Validate>(text: &str) -> Result<T> {
    let value: T = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    value.check().map_err(|inv| invalid_to_error(text, &inv))?;
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub n_active: usize,
    /// Parasitics per active element.
    pub n_parasitic: usize,
    pub dx_over_lambda: f64,
    pub dy_over_lambda: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            n_active: 6,
            n_parasitic: 2,
            dx_over_lambda: 0.4,
            dy_over_lambda: 0.5,
        }
    }
}

impl GeometryConfig {
    pub fn build(&self, dipole: &DipoleSpec) -> Result<ArrayGeometry> {
        ArrayGeometry::in_wavelengths(
            self.n_active,
            self.n_parasitic,
            self.dx_over_lambda,
            self.dy_over_lambda,
            *dipole,
        )
    }
}

impl Validate for GeometryConfig {
    fn check(&self) -> std::result::Result<(), Invalid> {
        if self.n_active == 0 {
            return Err(Invalid::new("n_active", "at least one active element is required"));
        }
        if !(self.dx_over_lambda > 0.0) || !self.dx_over_lambda.is_finite() {
            return Err(Invalid::new("dx_over_lambda", "spacing must be positive"));
        }
        if !(self.dy_over_lambda > 0.0) || !self.dy_over_lambda.is_finite() {
            return Err(Invalid::new("dy_over_lambda", "spacing must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DipoleConfig {
    pub carrier_frequency_hz: f64,
    pub length_over_lambda: f64,
    pub radius_over_lambda: f64,
}

impl Default for DipoleConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 7e9,
            length_over_lambda: 0.5,
            radius_over_lambda: 0.002,
        }
    }
}

impl DipoleConfig {
    pub fn spec(&self) -> Result<DipoleSpec> {
        let lambda = crate::em_model::SPEED_OF_LIGHT / self.carrier_frequency_hz;
        DipoleSpec::new(
            self.length_over_lambda * lambda,
            self.radius_over_lambda * lambda,
            self.carrier_frequency_hz,
        )
    }
}

impl Validate for DipoleConfig {
    fn check(&self) -> std::result::Result<(), Invalid> {
        if !(self.carrier_frequency_hz > 0.0) || !self.carrier_frequency_hz.is_finite() {
            return Err(Invalid::new("carrier_frequency_hz", "must be positive"));
        }
        self.spec()
            .map(|_| ())
            .map_err(|e| Invalid::new("length_over_lambda", e.to_string()))
    }
}

/// Input of `parasim zmatrix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZMatrixConfig {
    pub geometry: GeometryConfig,
    pub dipole: DipoleConfig,
    /// Reference impedance written to the header, ohms.
    pub z0: f64,
}

impl Default for ZMatrixConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            dipole: DipoleConfig::default(),
            z0: 50.0,
        }
    }
}

impl Validate for ZMatrixConfig {
    fn check(&self) -> std::result::Result<(), Invalid> {
        self.geometry.check()?;
        self.dipole.check()?;
        if !(self.z0 > 0.0) || !self.z0.is_finite() {
            return Err(Invalid::new("z0", "reference impedance must be positive"));
        }
        Ok(())
    }
}

/// Optional override of the computed impedance matrix by a file.
pub(crate) fn load_impedance_override(
    path: &Option<PathBuf>,
    geom: &ArrayGeometry,
) -> Result<Option<crate::em_model::PartitionedImpedance>> {
    let Some(path) = path else {
        return Ok(None);
    };
    let file = crate::em_model::import_impedance(path)?;
    let z = file.impedance;
    if z.n_active != geom.n_active || z.n_parasitic_per_active != geom.n_parasitic_per_active {
        return Err(Error::Config(format!(
            "{} holds n_active={} n_parasitic={}, configuration expects {} and {}",
            path.display(),
            z.n_active,
            z.n_parasitic_per_active,
            geom.n_active,
            geom.n_parasitic_per_active
        )));
    }
    Ok(Some(z))
}

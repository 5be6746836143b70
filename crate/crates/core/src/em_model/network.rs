//! Scattering ↔ impedance conversion for a multiport with a common reference.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

/// Largest 1-norm condition number accepted for the matrix being inverted.
const MAX_CONDITION: f64 = 1e14;

fn check_square(m: &DMatrix<Complex64>, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square (got {}x{})",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `Z = z0 (I − S)⁻¹ (I + S)`.
pub fn scattering_to_impedance(s: &DMatrix<Complex64>, z0: f64) -> Result<DMatrix<Complex64>> {
    check_square(s, "scattering matrix")?;
    let identity = DMatrix::<Complex64>::identity(s.nrows(), s.ncols());
    let inv = linalg::inverse_with_condition(&(&identity - s), MAX_CONDITION)
        .map_err(|c| Error::Conversion(format!("I − S is singular (condition {c:.3e})")))?;
    Ok(inv * (&identity + s) * Complex64::from(z0))
}

/// `S = (Z − z0 I)(Z + z0 I)⁻¹`.
pub fn impedance_to_scattering(z: &DMatrix<Complex64>, z0: f64) -> Result<DMatrix<Complex64>> {
    check_square(z, "impedance matrix")?;
    let shift = DMatrix::<Complex64>::identity(z.nrows(), z.ncols()) * Complex64::from(z0);
    let inv = linalg::inverse_with_condition(&(z + &shift), MAX_CONDITION)
        .map_err(|c| Error::Conversion(format!("Z + z0·I is singular (condition {c:.3e})")))?;
    Ok((z - &shift) * inv)
}

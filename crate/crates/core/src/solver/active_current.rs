use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::circuit::EffectiveSystem;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

/// Relative eigenvalue floor for a positive-definite power form.
pub const PD_TOLERANCE: f64 = 1e-9;

/// Maximizes `|iᵀh|²` subject to `i* Z i = p_max`.
///
/// The maximizer is `i = √p_max Z⁻¹hᶜ / √(hᵀZ⁻¹hᶜ)`, computed through a
/// Cholesky factorization of the Hermitian part of `Z`.
pub fn optimal_current(h: &CVector, z: &CMatrix, p_max: f64) -> Result<CVector> {
    if !(p_max > 0.0) || !p_max.is_finite() {
        return Err(Error::Domain(format!("power budget must be positive (got {p_max})")));
    }
    if z.nrows() != h.len() || z.ncols() != h.len() || h.is_empty() {
        return Err(Error::Dimension(format!(
            "power form is {}x{} for a channel of length {}",
            z.nrows(),
            z.ncols(),
            h.len()
        )));
    }
    let herm = (z + z.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(herm.clone()).eigenvalues;
    let scale = eig.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let min = eig.min();
    if !(min > PD_TOLERANCE * scale) {
        return Err(Error::NotPositiveDefinite {
            what: "effective impedance",
            min_eigenvalue: min,
        });
    }
    let chol = herm.clone().cholesky().ok_or(Error::NotPositiveDefinite {
        what: "effective impedance",
        min_eigenvalue: min,
    })?;
    let x = chol.solve(&h.conjugate());
    let gain = h.dot(&x).re;
    if !(gain > 0.0) {
        // A null channel: every feasible current is optimal.
        let mut i = CVector::zeros(h.len());
        i[0] = Complex64::from((p_max / herm[(0, 0)].re).sqrt());
        return Ok(i);
    }
    Ok(x * Complex64::from((p_max / gain).sqrt()))
}

/// Power-constrained optimal active currents for an effective system.
pub fn optimal_active_current(eff: &EffectiveSystem, p_max: f64) -> Result<CVector> {
    optimal_current(&eff.h_eff, &eff.z_eff, p_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let h = CVector::from_vec(vec![Complex64::from_polar(0.7, 1.2)]);
        let z = CMatrix::from_element(1, 1, Complex64::new(73.0, 0.0));
        let i = optimal_current(&h, &z, 0.01).unwrap();
        assert!((i[0].norm_sqr() - 0.01 / 73.0).abs() < 1e-15);
        assert!((i[0].arg() + 1.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_forms() {
        let h = CVector::from_vec(vec![Complex64::new(1.0, 0.0); 2]);
        let z = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(optimal_current(&h, &z, 1.0), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn null_channel_still_meets_the_budget() {
        let h = CVector::zeros(2);
        let z = CMatrix::identity(2, 2) * Complex64::from(50.0);
        let i = optimal_current(&h, &z, 2.0).unwrap();
        assert!((i.dotc(&(&z * &i)).re - 2.0).abs() < 1e-12);
    }
}

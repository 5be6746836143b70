//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverts `m`, returning the 1-norm condition number on failure.
pub(crate) fn inverse_with_condition(m: &CMatrix, max_condition: f64) -> Result<CMatrix, f64> {
    let (inv, condition) = inverse_and_condition(m);
    match inv {
        Some(inv) if condition < max_condition => Ok(inv),
        _ => Err(condition),
    }
}

/// Explicit inverse (if the LU factorization succeeds) and `‖m‖₁‖m⁻¹‖₁`.
pub(crate) fn inverse_and_condition(m: &CMatrix) -> (Option<CMatrix>, f64) {
    if m.is_empty() {
        return (Some(m.clone()), 1.0);
    }
    match m.clone().lu().try_inverse() {
        Some(inv) => {
            let condition = one_norm(m) * one_norm(&inv);
            let condition = if condition.is_finite() { condition } else { f64::INFINITY };
            (Some(inv), condition)
        }
        None => (None, f64::INFINITY),
    }
}

/// Eigenvalues of the Hermitian part `(M + M*)/2`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex64::from(0.5);
    let mut eig: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// `x* M y`.
pub fn quadratic_form(x: &CVector, m: &CMatrix, y: &CVector) -> Complex64 {
    x.dotc(&(m * y))
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(Complex64::from)
}

//! Dense eigenvalues for small real matrices.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EigenError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix dimension {0} exceeds the supported maximum of 64")]
    TooLarge(usize),
    #[error("QR iteration did not converge")]
    NoConvergence,
}

const MAX_DIM: usize = 64;

/// All eigenvalues with multiplicity, sorted by `(re, im)`.
///
/// Uses a real Schur decomposition (Hessenberg reduction followed by shifted
/// QR steps) and reads the eigenvalues off the quasi-triangular factor.
pub fn eig_dense(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>, EigenError> {
    if m.nrows() != m.ncols() {
        return Err(EigenError::NotSquare);
    }
    let n = m.nrows();
    if n > MAX_DIM {
        return Err(EigenError::TooLarge(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 50_000)
        .ok_or(EigenError::NoConvergence)?;
    let mut values: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(values)
}

/// Largest absolute difference between two sorted eigenvalue lists.
pub fn eigenvalue_distance(found: &[Complex<f64>], expected: &[(f64, f64)]) -> f64 {
    assert_eq!(found.len(), expected.len(), "eigenvalue count mismatch");
    found
        .iter()
        .zip(expected)
        .map(|(v, (re, im))| ((v.re - re).powi(2) + (v.im - im).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

//! Small dense complex-matrix kernels backing synthesis verification and the
//! block-resolvent norm estimate. Backed by nalgebra; sizes stay at the head
//! dimension or the input support, never the full truncation.

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type CMatrix = DMatrix<Complex<f64>>;

pub(crate) fn from_rows(n: usize, rows: impl Fn(usize, usize) -> Complex64) -> CMatrix {
    CMatrix::from_fn(n, n, rows)
}

/// Eigenvalues of a small dense complex matrix via its Schur form.
pub(crate) fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let schur = m.clone().schur();
    let eigs = schur.eigenvalues().ok_or_else(|| {
        Error::InvalidParameter("Schur form did not triangularize; eigenvalues unavailable".into())
    })?;
    Ok(eigs.iter().copied().collect())
}

/// Largest singular value (operator 2-norm) of a dense complex matrix.
pub(crate) fn sigma_max(m: &CMatrix) -> f64 {
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Inverse via LU; errors if singular to working precision.
pub(crate) fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("dense block is singular".into()))
}

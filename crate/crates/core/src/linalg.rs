use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

pub const JITTER_START: f64 = 1e-10;
pub const JITTER_MAX: f64 = 1e-4;

/// Cholesky factorization that retries with diagonal jitter
/// `1e-10, 1e-9, ..., 1e-4` when the matrix is numerically singular.
/// Returns the factor and the jitter that was needed (0 when none).
pub fn cholesky_with_jitter(matrix: DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    cholesky_with_scaled_jitter(matrix, 1.0)
}

/// Same escalation with every jitter multiplied by the mean diagonal, for
/// matrices whose scale is far from one.
pub fn cholesky_with_relative_jitter(matrix: DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = matrix.nrows().max(1) as f64;
    let mean = matrix.diagonal().iter().map(|v| v.abs()).sum::<f64>() / n;
    let scale = if mean.is_finite() && mean > 0.0 { mean } else { 1.0 };
    cholesky_with_scaled_jitter(matrix, scale)
}

fn cholesky_with_scaled_jitter(matrix: DMatrix<f64>, scale: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(chol) = matrix.clone().cholesky() {
        return Ok((chol, 0.0));
    }
    let mut jitter = JITTER_START;
    let mut last = 0.0;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        let mut m = matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter * scale;
        }
        if let Some(chol) = m.cholesky() {
            return Ok((chol, jitter * scale));
        }
        last = jitter * scale;
        jitter *= 10.0;
    }
    Err(Error::Cholesky { jitter: last })
}

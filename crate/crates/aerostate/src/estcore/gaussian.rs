use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Asymmetry accepted before a covariance is rejected.
const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// A multivariate Gaussian: mean vector plus covariance matrix.
///
/// Construction symmetrizes the covariance (rejecting asymmetry beyond
/// 1e-9). Positive semi-definiteness is preserved by the operations in
/// this crate and can be audited with [`GaussianVec::min_eigenvalue`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVec {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianVec {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::invalid(format!(
                "covariance is {}x{}, expected {n}x{n}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_asym = max_asym.max((cov[(i, j)] - cov[(j, i)]).abs());
            }
        }
        if max_asym > SYMMETRY_TOLERANCE {
            return Err(Error::invalid(format!(
                "covariance asymmetry {max_asym:.3e} exceeds tolerance"
            )));
        }
        let cov = symmetrize(&cov);
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn into_parts(self) -> (DVector<f64>, DMatrix<f64>) {
        (self.mean, self.cov)
    }

    /// Smallest eigenvalue of the covariance; slightly negative values
    /// (>= -1e-9) are floating-point drift, anything lower is a bug.
    pub fn min_eigenvalue(&self) -> f64 {
        self.cov
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Exact symmetrization `(M + M^T) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Zero-mean normal density of `residual` with standard deviation `sigma`.
pub fn gaussian_prob(residual: f64, sigma: f64) -> Result<f64> {
    Ok(log_gaussian_prob(residual, sigma)?.exp())
}

/// Log of [`gaussian_prob`]; the particle filters accumulate weights in
/// the log domain so densities never underflow.
pub fn log_gaussian_prob(residual: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    let z = residual / sigma;
    Ok(-0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln())
}

use nalgebra::{DMatrix, DVector};

use super::angles::angle_wrap;
use super::gaussian::{symmetrize, GaussianVec};
use crate::error::{Error, Result};

/// Scaled sigma-point parameters (Van der Merwe form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for SigmaParams {
    fn default() -> Self {
        Self { alpha: 0.1, beta: 2.0, kappa: 0.0 }
    }
}

/// 2n+1 deterministically chosen samples encoding a Gaussian, with the
/// weights that reconstruct its mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaPointSet {
    pub points: Vec<DVector<f64>>,
    pub mean_weights: Vec<f64>,
    pub cov_weights: Vec<f64>,
    pub params: SigmaParams,
}

impl SigmaPointSet {
    /// Map every point through `f`, keeping the weights. The image may
    /// live in a different-dimensional space (e.g. measurement space).
    pub fn map<F>(&self, f: F) -> SigmaPointSet
    where
        F: Fn(&DVector<f64>) -> DVector<f64>,
    {
        SigmaPointSet {
            points: self.points.iter().map(f).collect(),
            mean_weights: self.mean_weights.clone(),
            cov_weights: self.cov_weights.clone(),
            params: self.params,
        }
    }

    /// Weighted mean of the points. `angular` flags dimensions that must
    /// be averaged on the circle (deviations taken relative to point 0).
    pub fn weighted_mean(&self, angular: &[bool]) -> DVector<f64> {
        let dim = self.points[0].len();
        debug_assert!(angular.is_empty() || angular.len() == dim);
        let mut mean = DVector::zeros(dim);
        for (p, &w) in self.points.iter().zip(&self.mean_weights) {
            for d in 0..dim {
                let v = if angular.get(d).copied().unwrap_or(false) {
                    // unwrap relative to the central point so points
                    // straddling +/-pi average correctly
                    self.points[0][d] + angle_wrap(p[d] - self.points[0][d])
                } else {
                    p[d]
                };
                mean[d] += w * v;
            }
        }
        for d in 0..dim {
            if angular.get(d).copied().unwrap_or(false) {
                mean[d] = angle_wrap(mean[d]);
            }
        }
        mean
    }

    /// Residual of point `i` against `center`, wrapping angular dimensions.
    pub fn residual(&self, i: usize, center: &DVector<f64>, angular: &[bool]) -> DVector<f64> {
        let mut r = &self.points[i] - center;
        for d in 0..r.len() {
            if angular.get(d).copied().unwrap_or(false) {
                r[d] = angle_wrap(r[d]);
            }
        }
        r
    }
}

/// Cholesky factorization with diagonal jitter retries: on failure add
/// `1e-9 * trace/n` to the diagonal, up to 3 times.
pub fn cholesky_with_jitter(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let mut attempt = m.clone();
    let jitter = 1e-9 * m.trace() / n as f64;
    for retry in 0..=3 {
        if let Some(chol) = attempt.clone().cholesky() {
            return Ok(chol.l());
        }
        if retry < 3 {
            for i in 0..n {
                attempt[(i, i)] += jitter.max(f64::MIN_POSITIVE);
            }
        }
    }
    Err(Error::degenerate(
        "covariance not positive definite after jitter retries",
    ))
}

/// Generate the 2n+1 scaled sigma points of `g`.
pub fn sigma_points(g: &GaussianVec, params: SigmaParams) -> Result<SigmaPointSet> {
    let n = g.dim();
    if n == 0 {
        return Err(Error::invalid("cannot form sigma points in dimension 0"));
    }
    let nf = n as f64;
    let lambda = params.alpha * params.alpha * (nf + params.kappa) - nf;
    let scale = nf + lambda;
    if scale <= 0.0 {
        return Err(Error::invalid(format!(
            "sigma-point scale n + lambda = {scale} must be positive"
        )));
    }

    let root = cholesky_with_jitter(&(g.cov() * scale))?;

    let mut points = Vec::with_capacity(2 * n + 1);
    points.push(g.mean().clone());
    for i in 0..n {
        let col = root.column(i);
        points.push(g.mean() + col);
        points.push(g.mean() - col);
    }

    let w0_mean = lambda / scale;
    let w0_cov = w0_mean + (1.0 - params.alpha * params.alpha + params.beta);
    let wi = 1.0 / (2.0 * scale);
    let mut mean_weights = vec![wi; 2 * n + 1];
    let mut cov_weights = vec![wi; 2 * n + 1];
    mean_weights[0] = w0_mean;
    cov_weights[0] = w0_cov;

    Ok(SigmaPointSet { points, mean_weights, cov_weights, params })
}

/// Recombine (already transformed) sigma points into a Gaussian, adding
/// `additive_noise` to the covariance.
pub fn unscented_transform(
    points: &SigmaPointSet,
    additive_noise: &DMatrix<f64>,
) -> Result<GaussianVec> {
    unscented_transform_angular(points, additive_noise, &[])
}

/// [`unscented_transform`] with circular averaging for the dimensions
/// flagged in `angular`.
pub fn unscented_transform_angular(
    points: &SigmaPointSet,
    additive_noise: &DMatrix<f64>,
    angular: &[bool],
) -> Result<GaussianVec> {
    let dim = points.points[0].len();
    if additive_noise.nrows() != dim || additive_noise.ncols() != dim {
        return Err(Error::invalid(format!(
            "additive noise is {}x{}, expected {dim}x{dim}",
            additive_noise.nrows(),
            additive_noise.ncols()
        )));
    }
    let mean = points.weighted_mean(angular);
    let mut cov = DMatrix::zeros(dim, dim);
    for i in 0..points.points.len() {
        let d = points.residual(i, &mean, angular);
        cov.ger(points.cov_weights[i], &d, &d, 1.0);
    }
    cov += additive_noise;
    GaussianVec::new(mean, symmetrize(&cov))
}

use nalgebra::{DMatrix, DVector};

use super::models::{
    control_body_to_global, g2, g7, h7, Control2, Control7Body, Measurement2, Measurement7,
    State2, State7,
};
use crate::error::{Error, Result};
use crate::estcore::{
    angle_wrap, sigma_points, symmetrize, unscented_transform_angular, EulerAttitude,
    GaussianVec, SigmaParams,
};

/// Noise configuration for one filter variant. The process noise is a
/// continuous-time density: `predict` integrates `Q * dt` per step so the
/// loop rate can vary without retuning.
#[derive(Debug, Clone, PartialEq)]
pub struct UkfConfig {
    pub process_noise: DMatrix<f64>,
    pub measurement_noise: DMatrix<f64>,
    pub sigma: SigmaParams,
}

impl UkfConfig {
    /// Altitude filter defaults. The measurement variance comes from the
    /// simulator's infrared noise spec (sigma_r = 0.02 m), which plays the
    /// role of the sensor characterization data.
    pub fn default_2d() -> Self {
        let sigma_r = 0.02f64;
        Self {
            process_noise: DMatrix::from_diagonal(&DVector::from_row_slice(&[1e-6, 2.5e-3])),
            measurement_noise: DMatrix::from_element(1, 1, sigma_r * sigma_r),
            sigma: SigmaParams::default(),
        }
    }

    /// 7D filter defaults; measurement order is `r, x, y, x_dot, y_dot, yaw`.
    pub fn default_7d() -> Self {
        let diag_q = [1e-6, 1e-6, 1e-6, 2.5e-3, 2.5e-3, 2.5e-3, 1e-6];
        let diag_r = [4e-4, 1e-3, 1e-3, 4e-3, 4e-3, 1e-3];
        Self {
            process_noise: DMatrix::from_diagonal(&DVector::from_row_slice(&diag_q)),
            measurement_noise: DMatrix::from_diagonal(&DVector::from_row_slice(&diag_r)),
            sigma: SigmaParams::default(),
        }
    }
}

/// Sigma-point prediction: propagate each point through `transition`, then
/// recombine with `Q * dt` added.
pub fn ukf_predict<F>(
    estimate: &GaussianVec,
    config: &UkfConfig,
    dt: f64,
    angular: &[bool],
    transition: F,
) -> Result<GaussianVec>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    let n = estimate.dim();
    if config.process_noise.nrows() != n {
        return Err(Error::invalid("process noise dimension mismatch"));
    }
    let points = sigma_points(estimate, config.sigma)?;
    let mut propagated = Vec::with_capacity(points.points.len());
    for p in &points.points {
        propagated.push(transition(p)?);
    }
    let mapped = crate::estcore::SigmaPointSet {
        points: propagated,
        mean_weights: points.mean_weights,
        cov_weights: points.cov_weights,
        params: points.params,
    };
    unscented_transform_angular(&mapped, &(&config.process_noise * dt), angular)
}

/// Sigma-point measurement update.
///
/// `measurement_fn` maps a state point into measurement space;
/// `meas_angular` flags measurement rows holding angles (their residuals
/// are wrapped), `state_angular` the same for state rows.
pub fn ukf_update<H>(
    estimate: &GaussianVec,
    z: &DVector<f64>,
    meas_noise: &DMatrix<f64>,
    config: &UkfConfig,
    state_angular: &[bool],
    meas_angular: &[bool],
    measurement_fn: H,
) -> Result<GaussianVec>
where
    H: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let m = z.len();
    if meas_noise.nrows() != m || meas_noise.ncols() != m {
        return Err(Error::invalid("measurement noise dimension mismatch"));
    }
    let points = sigma_points(estimate, config.sigma)?;
    let mut z_points = Vec::with_capacity(points.points.len());
    for p in &points.points {
        let zp = measurement_fn(p)?;
        if zp.len() != m {
            return Err(Error::invalid("measurement function dimension mismatch"));
        }
        z_points.push(zp);
    }
    let z_set = crate::estcore::SigmaPointSet {
        points: z_points,
        mean_weights: points.mean_weights.clone(),
        cov_weights: points.cov_weights.clone(),
        params: points.params,
    };

    let z_hat = z_set.weighted_mean(meas_angular);

    let n = estimate.dim();
    let mut innovation_cov = meas_noise.clone();
    let mut cross_cov = DMatrix::zeros(n, m);
    for i in 0..points.points.len() {
        let dz = z_set.residual(i, &z_hat, meas_angular);
        let dx = points.residual(i, estimate.mean(), state_angular);
        innovation_cov.ger(points.cov_weights[i], &dz, &dz, 1.0);
        cross_cov.ger(points.cov_weights[i], &dx, &dz, 1.0);
    }

    let chol = symmetrize(&innovation_cov)
        .cholesky()
        .ok_or_else(|| Error::degenerate("singular innovation covariance"))?;
    // K = P_xz * S^-1  via  S K^T = P_xz^T
    let gain = chol.solve(&cross_cov.transpose()).transpose();

    let mut innovation = z - &z_hat;
    for d in 0..m {
        if meas_angular.get(d).copied().unwrap_or(false) {
            innovation[d] = angle_wrap(innovation[d]);
        }
    }

    let mut mean = estimate.mean() + &gain * innovation;
    for d in 0..n {
        if state_angular.get(d).copied().unwrap_or(false) {
            mean[d] = angle_wrap(mean[d]);
        }
    }
    let cov = estimate.cov() - &gain * symmetrize(&innovation_cov) * gain.transpose();
    GaussianVec::new(mean, symmetrize(&cov))
}

/// Stateful altitude filter: owns the current estimate, is stepped by the
/// driving loop, and must stay single-owner (clone for a second thread).
#[derive(Debug, Clone)]
pub struct Ukf2 {
    estimate: GaussianVec,
    config: UkfConfig,
}

impl Ukf2 {
    pub fn new(initial: State2, initial_cov: DMatrix<f64>, config: UkfConfig) -> Result<Self> {
        Ok(Self { estimate: GaussianVec::new(initial.to_vector(), initial_cov)?, config })
    }

    pub fn estimate(&self) -> &GaussianVec {
        &self.estimate
    }

    pub fn state(&self) -> State2 {
        State2::from_vector(self.estimate.mean())
    }

    pub fn predict(&mut self, u: Control2, dt: f64) -> Result<()> {
        self.estimate = ukf_predict(&self.estimate, &self.config, dt, &[], |p| {
            Ok(g2(State2::from_vector(p), u, dt)?.to_vector())
        })?;
        Ok(())
    }

    pub fn update(&mut self, z: Measurement2) -> Result<()> {
        self.estimate = ukf_update(
            &self.estimate,
            &DVector::from_row_slice(&[z.r]),
            &self.config.measurement_noise,
            &self.config,
            &[],
            &[],
            |p| Ok(DVector::from_row_slice(&[p[0]])),
        )?;
        Ok(())
    }
}

const STATE7_ANGULAR: [bool; 7] = [false, false, false, false, false, false, true];

/// Stateful 7D filter. Roll and pitch enter as known side-channel inputs
/// from the IMU; yaw is the only attitude component in the state.
#[derive(Debug, Clone)]
pub struct Ukf7 {
    estimate: GaussianVec,
    config: UkfConfig,
}

impl Ukf7 {
    pub fn new(initial: State7, initial_cov: DMatrix<f64>, config: UkfConfig) -> Result<Self> {
        Ok(Self { estimate: GaussianVec::new(initial.to_vector(), initial_cov)?, config })
    }

    pub fn estimate(&self) -> &GaussianVec {
        &self.estimate
    }

    pub fn state(&self) -> State7 {
        State7::from_vector(self.estimate.mean())
    }

    /// Prediction step: the body-frame control is rotated per sigma point
    /// using that point's own yaw estimate.
    pub fn predict(&mut self, u: Control7Body, attitude: &EulerAttitude, dt: f64) -> Result<()> {
        self.estimate = ukf_predict(&self.estimate, &self.config, dt, &STATE7_ANGULAR, |p| {
            let state = State7::from_vector(p);
            let u_global = control_body_to_global(u, attitude, state.yaw);
            Ok(g7(state, u_global, dt)?.to_vector())
        })?;
        Ok(())
    }

    /// Measurement update with whichever components arrived this tick.
    pub fn update(&mut self, z: &Measurement7, attitude: &EulerAttitude) -> Result<()> {
        if z.is_empty() {
            return Ok(());
        }
        let rows = z.present_rows();
        let meas_noise = select_rows(&self.config.measurement_noise, &rows);
        let meas_angular: Vec<bool> = rows.iter().map(|&r| r == 5).collect();
        let att = *attitude;
        self.estimate = ukf_update(
            &self.estimate,
            &z.to_vector(),
            &meas_noise,
            &self.config,
            &STATE7_ANGULAR,
            &meas_angular,
            move |p| {
                let full = h7(State7::from_vector(p), &att)?;
                Ok(DVector::from_iterator(rows.len(), rows.iter().map(|&r| full[r])))
            },
        )?;
        Ok(())
    }
}

fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let k = rows.len();
    DMatrix::from_fn(k, k, |i, j| m[(rows[i], rows[j])])
}

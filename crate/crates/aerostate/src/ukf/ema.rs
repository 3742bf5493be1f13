use crate::error::{Error, Result};

/// One step of an exponential moving average: `alpha * sample + (1 - alpha) * prev`.
///
/// The pre-UKF altitude smoother; kept as the latency baseline the filter
/// is compared against.
pub fn ema_filter(prev_smoothed: f64, sample: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha must be in (0, 1], got {alpha}")));
    }
    Ok(alpha * sample + (1.0 - alpha) * prev_smoothed)
}

/// Stateful wrapper around [`ema_filter`].
#[derive(Debug, Clone, Copy)]
pub struct EmaFilter {
    alpha: f64,
    value: Option<f64>,
}

impl EmaFilter {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0, 1], got {alpha}")));
        }
        Ok(Self { alpha, value: None })
    }

    /// Feed one sample; the first sample seeds the average.
    pub fn push(&mut self, sample: f64) -> f64 {
        let next = match self.value {
            None => sample,
            Some(prev) => ema_filter(prev, sample, self.alpha).expect("alpha validated"),
        };
        self.value = Some(next);
        next
    }

    pub fn value(&self) -> Option<f64> {
        self.value
    }
}

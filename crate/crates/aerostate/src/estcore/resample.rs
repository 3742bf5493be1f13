use rand::Rng;

use crate::error::{Error, Result};

/// Shift log-weights by their max and exponentiate into normalized linear
/// weights. Returns `None` when every weight is -inf.
pub fn normalize_log_weights(log_weights: &[f64]) -> Option<Vec<f64>> {
    let max = log_weights
        .iter()
        .cloned()
        .filter(|w| w.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let mut linear: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = linear.iter().sum();
    for w in &mut linear {
        *w /= total;
    }
    Some(linear)
}

/// Low-variance (systematic) resampling.
///
/// Draws a single uniform offset and walks a comb of `n_out` equally
/// spaced pointers through the cumulative weights, so the multiplicity
/// of index `i` is within one of `n_out * w_i`. Deterministic given the
/// generator state.
pub fn systematic_resample<R: Rng + ?Sized>(
    log_weights: &[f64],
    n_out: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if log_weights.is_empty() {
        return Err(Error::invalid("cannot resample an empty weight vector"));
    }
    let weights = normalize_log_weights(log_weights).ok_or(Error::DegenerateWeights)?;

    let step = 1.0 / n_out as f64;
    let offset: f64 = rng.random_range(0.0..step);

    let mut indices = Vec::with_capacity(n_out);
    let mut cumulative = weights[0];
    let mut j = 0usize;
    for k in 0..n_out {
        let pointer = offset + k as f64 * step;
        while pointer > cumulative && j + 1 < weights.len() {
            j += 1;
            cumulative += weights[j];
        }
        indices.push(j);
    }
    Ok(indices)
}

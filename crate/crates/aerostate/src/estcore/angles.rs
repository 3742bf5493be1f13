use std::f64::consts::PI;

/// Wrap an angle into `(-pi, pi]`.
pub fn angle_wrap(theta: f64) -> f64 {
    let x = theta.rem_euclid(2.0 * PI); // [0, 2pi)
    if x > PI {
        x - 2.0 * PI
    } else {
        x
    }
}

/// Weighted circular mean of angles. Weights need not be normalized but
/// must not all be zero.
pub fn circular_mean(angles: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(angles.len(), weights.len());
    let mut s = 0.0;
    let mut c = 0.0;
    for (&a, &w) in angles.iter().zip(weights) {
        s += w * a.sin();
        c += w * a.cos();
    }
    angle_wrap(s.atan2(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wraps_into_half_open_interval() {
        assert_abs_diff_eq!(angle_wrap(0.0), 0.0);
        assert_abs_diff_eq!(angle_wrap(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(angle_wrap(-3.5 * PI), 0.5 * PI, epsilon = 1e-12);
        // -pi maps to +pi: the interval is open at -pi
        assert_abs_diff_eq!(angle_wrap(-PI), PI, epsilon = 1e-12);
        for k in -6..=6 {
            let theta = 0.7 + 2.0 * PI * k as f64;
            let w = angle_wrap(theta);
            assert!(w > -PI && w <= PI);
            assert_abs_diff_eq!(w, 0.7, epsilon = 1e-9);
        }
    }

    #[test]
    fn circular_mean_handles_wraparound() {
        // two equal-weight angles at +3 and -3 rad average to +/-pi, not 0
        let m = circular_mean(&[3.0, -3.0], &[0.5, 0.5]);
        assert_abs_diff_eq!(m.abs(), PI, epsilon = 1e-9);
    }
}

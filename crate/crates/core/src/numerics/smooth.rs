//! C^∞ transition functions built from `exp(-1/x)`.

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `y <= 0`, 1 for `y >= 1`, C^∞ and monotone in between.
pub fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let a = psi(y);
    let b = psi(1.0 - y);
    a / (a + b)
}

/// Derivative of [`smooth_step`]. Its integral over ℝ is exactly 1, so it is
/// a compactly supported bump usable as a mollifier density on `[0, 1]`.
pub fn smooth_step_derivative(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        return 0.0;
    }
    let a = psi(y);
    let b = psi(1.0 - y);
    let da = a / (y * y);
    let db = -b / ((1.0 - y) * (1.0 - y));
    (da * b - a * db) / ((a + b) * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_limits_and_symmetry() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.2), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for y in [0.1, 0.3, 0.45] {
            assert!((smooth_step(y) + smooth_step(1.0 - y) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for y in [0.2, 0.5, 0.77] {
            let h = 1e-6;
            let fd = (smooth_step(y + h) - smooth_step(y - h)) / (2.0 * h);
            assert!((fd - smooth_step_derivative(y)).abs() < 1e-7);
        }
    }
}

//! Tridiagonal matrix solver
//!     A x = rhs
//! with A given by its three diagonals.

/// Solves a tridiagonal system in place by the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (so `lower[0]` is ignored),
/// `upper[i]` multiplies `x[i+1]` (so `upper[n-1]` is ignored).
/// `scratch` must have the same length as `rhs`; it avoids an allocation per
/// call inside time-stepping loops.
///
/// Returns `false` when a zero pivot is met.
pub fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) -> bool {
    let n = rhs.len();
    assert!(
        lower.len() == n && diag.len() == n && upper.len() == n && scratch.len() == n,
        "tridiagonal dimensions disagree"
    );
    if n == 0 {
        return true;
    }
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return false;
    }
    scratch[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return false;
        }
        scratch[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_laplacian() {
        // -x'' = 2 on 5 interior points with zero boundary data, h = 1/6.
        let n = 5;
        let h: f64 = 1.0 / 6.0;
        let lower = vec![-1.0; n];
        let diag = vec![2.0; n];
        let upper = vec![-1.0; n];
        let mut rhs = vec![2.0 * h * h; n];
        let mut scratch = vec![0.0; n];
        assert!(solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch));
        for (i, v) in rhs.iter().enumerate() {
            let x = (i + 1) as f64 * h;
            assert!((v - x * (1.0 - x)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let mut rhs = vec![1.0, 1.0];
        let mut scratch = vec![0.0; 2];
        assert!(!solve_in_place(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &mut rhs, &mut scratch));
    }
}

//! Finite-volume form of `ψ⁻¹ (ψ u')'` on a nonuniform grid.
//!
//! With `ψ' = -kψ`, `u'' - k u' = ψ⁻¹ (ψ u')'`. Face coefficients are
//! `1 / ∫ ψ⁻¹` over the cell between two nodes, which makes the flux exact
//! for the stationary linear problem however sharply `k` varies inside a
//! cell; node masses are `∫ ψ` over the dual cell. The resulting matrix is
//! symmetric and an M-matrix, so implicit steps obey a discrete maximum
//! principle.

use crate::drift::DriftTerm;

#[derive(Clone, Debug)]
pub struct WeightedOperator {
    x: Vec<f64>,
    /// Coefficient on the face between nodes `i` and `i+1`.
    face: Vec<f64>,
    /// `∫ψ` over the dual cell of node `i`.
    mass: Vec<f64>,
}

impl WeightedOperator {
    /// `x` must be strictly increasing with at least 3 nodes.
    pub fn new(x: &[f64], drift: &DriftTerm) -> Self {
        let n = x.len();
        assert!(n >= 3, "weighted operator needs at least 3 nodes");
        let face: Vec<f64> = x.windows(2).map(|p| 1.0 / drift.integral_inv_psi(p[0], p[1])).collect();
        let mut mass = vec![0.0; n];
        for i in 0..n {
            let lo = if i == 0 { x[0] } else { 0.5 * (x[i - 1] + x[i]) };
            let hi = if i + 1 == n { x[n - 1] } else { 0.5 * (x[i] + x[i + 1]) };
            mass[i] = drift.integral_psi(lo, hi);
        }
        Self {
            x: x.to_vec(),
            face,
            mass,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn face(&self) -> &[f64] {
        &self.face
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `(ψ u')'` integrated over the dual cell of interior node `i`.
    #[inline]
    pub fn flux_divergence(&self, u: &[f64], i: usize) -> f64 {
        self.face[i] * (u[i + 1] - u[i]) - self.face[i - 1] * (u[i] - u[i - 1])
    }

    /// `ψ⁻¹ (ψ u')'` at interior node `i` (i.e. `u'' - k u'`).
    #[inline]
    pub fn apply(&self, u: &[f64], i: usize) -> f64 {
        self.flux_divergence(u, i) / self.mass[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_laplacian_without_drift() {
        let d = DriftTerm::zero(1.0).unwrap();
        let x: Vec<f64> = (0..11).map(|i| -2.0 + 0.4 * i as f64).collect();
        let op = WeightedOperator::new(&x, &d);
        let u: Vec<f64> = x.iter().map(|v| v * v).collect();
        for i in 1..10 {
            assert!((op.apply(&u, i) - 2.0).abs() < 1e-10);
        }
        assert!((op.mass()[0] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn stationary_flux_is_exact_across_a_sharp_drift() {
        // The solution of (ψ u')' = 0 is u = ∫ψ⁻¹ up to affine change.
        let d = DriftTerm::mollified_indicator(8.0, 0.05, 0.001).unwrap();
        let x: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
        let op = WeightedOperator::new(&x, &d);
        let u: Vec<f64> = x.iter().map(|&v| d.integral_inv_psi(-1.0, v)).collect();
        for i in 1..20 {
            assert!(op.flux_divergence(&u, i).abs() < 1e-10 * u[20]);
        }
    }
}

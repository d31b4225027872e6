//! A posteriori check that `w̃_∞` is a stationary supersolution.

use serde::{Deserialize, Serialize};

use super::{StationarySupersolution, WeightedFunction};
use crate::drift::DriftTerm;
use crate::fv::WeightedOperator;
use crate::nonlinearity::Nonlinearity;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub h1_psi_distance: f64,
    pub delta_used: f64,
    /// Smallest `-w'' + k w' - f(w)` over the interior nodes.
    pub residual_min: f64,
    pub residual_min_at: f64,
    /// One-sided slope `w'(a⁻)`.
    pub kink_slope: f64,
    pub tail_rate: f64,
    pub interior_min: f64,
    pub interior_max: f64,
    pub tol: f64,
    pub residual_ok: bool,
    pub kink_ok: bool,
    pub bounds_ok: bool,
    pub distance_ok: bool,
    pub passed: bool,
}

/// `-w'' + k w' - f(w)` at every node (NaN at the two boundary nodes).
pub(super) fn pointwise_residual(w: &WeightedFunction, d: &DriftTerm, nl: &Nonlinearity) -> Vec<f64> {
    let n = w.len();
    let op = WeightedOperator::new(&w.x, d);
    let mut out = vec![f64::NAN; n];
    for i in 1..n - 1 {
        out[i] = -op.apply(&w.w, i) - nl.f(w.w[i]);
    }
    out
}

/// Checks the interior residual, the slope at the pasting point `a` and the
/// strict bounds `0 < w < 1`. Beyond `a` the extension is the constant 1,
/// whose residual `-f(1)` vanishes identically.
pub fn verify_supersolution(s: &StationarySupersolution, d: &DriftTerm, nl: &Nonlinearity, tol: f64) -> VerificationReport {
    let w = &s.w;
    let n = w.len();
    let residual = pointwise_residual(w, d, nl);
    let (mut residual_min, mut residual_min_at) = (f64::INFINITY, w.x[0]);
    for i in 1..n - 1 {
        if residual[i] < residual_min {
            residual_min = residual[i];
            residual_min_at = w.x[i];
        }
    }
    let kink_slope = (w.w[n - 1] - w.w[n - 2]) / (w.x[n - 1] - w.x[n - 2]);
    let interior = &w.w[1..n - 1];
    let interior_min = interior.iter().copied().fold(f64::INFINITY, f64::min);
    let interior_max = interior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let residual_ok = residual_min >= -tol;
    let kink_ok = kink_slope >= -tol;
    let bounds_ok = interior_min > 0.0 && interior_max < 1.0;
    let distance_ok = s.h1_psi_distance <= s.delta_used;
    VerificationReport {
        h1_psi_distance: s.h1_psi_distance,
        delta_used: s.delta_used,
        residual_min,
        residual_min_at,
        kink_slope,
        tail_rate: s.tail_rate,
        interior_min,
        interior_max,
        tol,
        residual_ok,
        kink_ok,
        bounds_ok,
        distance_ok,
        passed: residual_ok && kink_ok && bounds_ok && distance_ok,
    }
}

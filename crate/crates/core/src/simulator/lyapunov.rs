//! The moving-frame energy `L` and its dissipation `Q`.
//!
//! In `z = x + ct` the cut-off state `w` equals `u` on `|z| ≤ mt`, 0 left of
//! `-mt - 1` and 1 right of `mt + 1`, with smooth blends in between. Then
//! `L = ∫ e^{-cz} (½ w_z² - F₀(w) + H(z) F₀(1))` and
//! `Q = ∫ e^{-cz} (w_zz - c w_z + f(w))²` with `F₀(s) = ∫_0^s f`. Both
//! integrands vanish outside `|z| ≤ mt + 1`.

use serde::{Deserialize, Serialize};

use super::{Grid1D, SimError, SimState};
use crate::nonlinearity::Nonlinearity;
use crate::numerics::smooth::smooth_step;
use crate::wave::WaveProfile;

/// `½ min{2ω/c, c}`; admissible cutoff speeds lie strictly below it.
pub fn max_cutoff_speed(c: f64, omega: f64) -> f64 {
    0.5 * (2.0 * omega / c).min(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovValue {
    pub t: f64,
    pub l: f64,
    pub q: f64,
    /// `Q` of the exact translate `φ(z + β)` under the same cutoff and
    /// grid: what `Q` reads for a state with no defect at all.
    pub q_floor: f64,
}

struct Window {
    lo: usize,
    hi: usize,
    half_width: f64,
}

fn window(s: &SimState, grid: &Grid1D, c: f64, m: f64) -> Result<Window, SimError> {
    let half_width = m * s.t;
    let z_lo = -half_width - 1.0;
    let z_hi = half_width + 1.0;
    let (x_lo, x_hi) = (z_lo - c * s.t, z_hi - c * s.t);
    let dx = grid.dx();
    if x_lo < grid.x_min + 2.0 * dx || x_hi > grid.x_max - 2.0 * dx {
        return Err(SimError::GridTooNarrow { lo: x_lo, hi: x_hi });
    }
    let lo = ((x_lo - grid.x_min) / dx).floor() as usize;
    let hi = ((x_hi - grid.x_min) / dx).ceil() as usize;
    Ok(Window { lo, hi, half_width })
}

fn cutoff(z: f64, v: f64, h: f64) -> f64 {
    let right = smooth_step(z - h);
    let left = smooth_step(-h - z);
    (1.0 - right - left) * v + right
}

/// `(L, Q)` of the sampled field `g(z)` on the window.
fn integrate(grid: &Grid1D, w: &Window, c: f64, t: f64, nl: &Nonlinearity, g: impl Fn(usize) -> f64) -> (f64, f64) {
    let dx = grid.dx();
    let f1 = nl.primitive(1.0);
    // One extra node each side feeds the centered differences.
    let vals: Vec<f64> = (w.lo - 1..=w.hi + 1).map(&g).collect();
    let (mut l, mut q) = (0.0, 0.0);
    for (j, i) in (w.lo..=w.hi).enumerate() {
        let k = j + 1;
        let z = grid.x(i) + c * t;
        let wz = (vals[k + 1] - vals[k - 1]) / (2.0 * dx);
        let wzz = (vals[k + 1] - 2.0 * vals[k] + vals[k - 1]) / (dx * dx);
        let weight = (-c * z).exp() * if i == w.lo || i == w.hi { 0.5 } else { 1.0 };
        let heaviside = if z > 0.0 { f1 } else { 0.0 };
        l += weight * (0.5 * wz * wz - nl.primitive(vals[k]) + heaviside);
        let defect = wzz - c * wz + nl.f(vals[k]);
        q += weight * defect * defect;
    }
    (l * dx, q * dx)
}

/// `L`, `Q` and the floor of `Q` at time `s.t > 0`; `beta` aligns the
/// reference wave used for the floor. Returns `Ok(None)` for `t ≤ 0`, where
/// the cutoff window is empty.
pub fn lyapunov(
    s: &SimState,
    grid: &Grid1D,
    wave: &WaveProfile,
    nl: &Nonlinearity,
    cutoff_speed: f64,
    beta: f64,
) -> Result<Option<LyapunovValue>, SimError> {
    if !(s.t > 0.0) {
        return Ok(None);
    }
    let c = wave.c();
    let w = window(s, grid, c, cutoff_speed)?;
    let h = w.half_width;
    let t = s.t;
    let (l, q) = integrate(grid, &w, c, t, nl, |i| cutoff(grid.x(i) + c * t, s.u[i], h));
    let (_, q_floor) = integrate(grid, &w, c, t, nl, |i| {
        let z = grid.x(i) + c * t;
        cutoff(z, wave.phi(z + beta), h)
    });
    Ok(Some(LyapunovValue { t, l, q, q_floor }))
}

//! Shifted and damped wave profiles that trap `u` once the front has left
//! the drift behind.
//!
//! Both envelopes are anchored at a time `T` where the ordering with the
//! computed `u` is established directly: the shifts `β∓` are the smallest
//! ones for which `u⁻(T) ≤ u(T)` and `u(T) ≤ u⁺(T)` hold on the grid. From
//! then on the closed forms for `v∓` and `V∓` take over.

use serde::{Deserialize, Serialize};

use super::{Grid1D, SimState};
use crate::drift::DriftTerm;
use crate::wave::{EnvelopeConstants, WaveProfile};

const FIXED_POINT_ITERATIONS: usize = 200;
const SHIFT_RANGE: f64 = 200.0;

/// `u⁻(t,x) = φ(x + ct - β⁻ - V⁻(t)) - v⁻(t)` for `t ≥ t_s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerEnvelope {
    pub t_start: f64,
    pub beta: f64,
    /// Initial gap `ε = ρ/4`.
    pub eps: f64,
    pub c_v: f64,
    /// Fixed point `m = V⁻(∞)`.
    pub shift_budget_m: f64,
    /// `(‖f'‖ + 2ω)/δ`.
    pub coef: f64,
    pub omega: f64,
    pub mu_c: f64,
    /// Whether `v⁻ ≤ ρ/2` holds, as the construction needs.
    pub admissible: bool,
}

/// `u⁺(t,x) = min{φ(x + ct + β⁺ + V⁺(t)) + v⁺(t), 1}` for `t ≥ T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperEnvelope {
    pub t_start: f64,
    pub beta: f64,
    /// `v⁺(T) = γ = ρ/4`.
    pub gamma: f64,
    /// `‖k‖ C_φ e^{μx0} e^{-cμT} / (cμ - ω)`.
    pub e: f64,
    /// `(‖f'‖ + ω)/δ`.
    pub coef: f64,
    pub omega: f64,
    pub mu_c: f64,
    pub admissible: bool,
}

/// Both envelopes; each has its own anchor time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Envelopes {
    pub lower: Option<LowerEnvelope>,
    pub upper: Option<UpperEnvelope>,
}

impl LowerEnvelope {
    pub fn v(&self, t: f64) -> f64 {
        let tau = (t - self.t_start).max(0.0);
        (self.eps + self.c_v) * (-self.omega * tau).exp() - self.c_v * (-self.mu_c * tau).exp()
    }

    pub fn shift(&self, t: f64) -> f64 {
        let tau = (t - self.t_start).max(0.0);
        self.coef
            * ((self.eps + self.c_v) * (1.0 - (-self.omega * tau).exp()) / self.omega
                - self.c_v * (1.0 - (-self.mu_c * tau).exp()) / self.mu_c)
    }

    pub fn shift_limit(&self) -> f64 {
        self.coef * ((self.eps + self.c_v) / self.omega - self.c_v / self.mu_c)
    }

    pub fn eval(&self, wave: &WaveProfile, t: f64, x: f64) -> f64 {
        wave.phi(x + wave.c() * t - self.beta - self.shift(t)) - self.v(t)
    }
}

impl UpperEnvelope {
    pub fn v(&self, t: f64) -> f64 {
        let tau = (t - self.t_start).max(0.0);
        (self.gamma + self.e) * (-self.omega * tau).exp() - self.e * (-self.mu_c * tau).exp()
    }

    pub fn shift(&self, t: f64) -> f64 {
        let tau = (t - self.t_start).max(0.0);
        self.coef
            * ((self.gamma + self.e) * (1.0 - (-self.omega * tau).exp()) / self.omega
                - self.e * (1.0 - (-self.mu_c * tau).exp()) / self.mu_c)
    }

    pub fn eval(&self, wave: &WaveProfile, t: f64, x: f64) -> f64 {
        (wave.phi(x + wave.c() * t + self.beta + self.shift(t)) + self.v(t)).min(1.0)
    }
}

/// Ratio `C_v/ε` aimed for when picking the lower anchor time.
const LOWER_ANCHOR_RATIO: f64 = 0.1;

impl Envelopes {
    /// Earliest anchor time allowed by the upper construction:
    /// `T ≥ x0/c`, `A - cT ≤ -x0` and
    /// `‖k‖ C_φ e^{μx0} e^{-cμT}/(cμ) < ρ/4`.
    pub fn earliest_upper_anchor(wave: &WaveProfile, drift: &DriftTerm, consts: &EnvelopeConstants) -> f64 {
        let c = wave.c();
        let d = wave.decay();
        let x0 = drift.x0();
        let mut t = (x0 / c).max((consts.a + x0) / c);
        let k = drift.k_sup();
        if k > 0.0 {
            let log_lhs = (k * d.c_phi / (c * d.mu)).ln() + d.mu * x0;
            // Strict inequality: step a hair past the equality point.
            t = t.max((log_lhs - (consts.rho / 4.0).ln()) / (c * d.mu) + 1e-9);
        }
        t
    }

    /// Anchor time from which the drift contribution `C_v` to the lower
    /// envelope is a tenth of `ε`, estimated with `β = 0` and the drift-free
    /// budget `m = (‖f'‖+2ω)ε/(δω)` enlarged by a quarter.
    pub fn earliest_lower_anchor(wave: &WaveProfile, drift: &DriftTerm, consts: &EnvelopeConstants) -> f64 {
        let c = wave.c();
        let d = wave.decay();
        let x0 = drift.x0();
        let base = (consts.a + x0) / c;
        let k_plus = drift.k_plus();
        if k_plus <= 0.0 {
            return base;
        }
        let eps = consts.rho / 4.0;
        let m = 1.25 * (consts.norm_f_prime + 2.0 * consts.omega) / consts.delta * eps / consts.omega;
        let log_cv = (d.c_phi * k_plus / (d.mu * c - consts.omega)).ln() + d.mu * (x0 + m);
        base.max((log_cv - (LOWER_ANCHOR_RATIO * eps).ln()) / (d.mu * c))
    }

    /// Lower envelope from the state at its anchor time, or `None` if the
    /// shift budget has no fixed point there.
    pub fn anchor_lower(
        s: &SimState,
        grid: &Grid1D,
        wave: &WaveProfile,
        drift: &DriftTerm,
        consts: &EnvelopeConstants,
    ) -> Option<LowerEnvelope> {
        let c = wave.c();
        let d = wave.decay();
        let (omega, mu_c) = (consts.omega, d.mu * c);
        if !(mu_c > omega) {
            return None;
        }
        let t = s.t;
        let x0 = drift.x0();
        // Smallest β with φ(x + ct - β) - ε ≤ u(t, x) everywhere.
        let eps = consts.rho / 4.0;
        let gap = |beta: f64| {
            s.u.iter()
                .enumerate()
                .map(|(i, &u)| wave.phi(grid.x(i) + c * t - beta) - eps - u)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let beta = smallest_admissible(gap)?;
        let coef = (consts.norm_f_prime + 2.0 * omega) / consts.delta;
        let k_plus = drift.k_plus();
        let c_v_of = |m: f64| d.c_phi * k_plus * (d.mu * (x0 + m + beta) - d.mu * c * t).exp() / (mu_c - omega);
        let mut m = coef * eps / omega;
        let mut converged = false;
        for _ in 0..FIXED_POINT_ITERATIONS {
            let c_v = c_v_of(m);
            let next = coef * ((eps + c_v) / omega - c_v / mu_c);
            if !next.is_finite() || next > 1e6 {
                break;
            }
            if (next - m).abs() <= 1e-12 * next.abs().max(1.0) {
                m = next;
                converged = true;
                break;
            }
            m = next;
        }
        if !converged {
            return None;
        }
        let c_v = c_v_of(m);
        Some(LowerEnvelope {
            t_start: t,
            beta,
            eps,
            c_v,
            shift_budget_m: m,
            coef,
            omega,
            mu_c,
            admissible: eps + c_v <= consts.rho / 2.0,
        })
    }

    /// Upper envelope from the state at its anchor time.
    pub fn anchor_upper(
        s: &SimState,
        grid: &Grid1D,
        wave: &WaveProfile,
        drift: &DriftTerm,
        consts: &EnvelopeConstants,
    ) -> Option<UpperEnvelope> {
        let c = wave.c();
        let d = wave.decay();
        let (omega, mu_c) = (consts.omega, d.mu * c);
        if !(mu_c > omega) {
            return None;
        }
        let t = s.t;
        // Smallest β with u(t, x) ≤ min{φ(x + ct + β) + γ, 1}.
        let gamma = consts.rho / 4.0;
        let e = drift.k_sup() * d.c_phi * (d.mu * drift.x0() - mu_c * t).exp() / (mu_c - omega);
        let gap = |beta: f64| {
            s.u.iter()
                .enumerate()
                .map(|(i, &u)| u - (wave.phi(grid.x(i) + c * t + beta) + gamma).min(1.0))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let beta = smallest_admissible(gap)?;
        Some(UpperEnvelope {
            t_start: t,
            beta,
            gamma,
            e,
            coef: (consts.norm_f_prime + omega) / consts.delta,
            omega,
            mu_c,
            admissible: t >= Self::earliest_upper_anchor(wave, drift, consts) && gamma + e <= consts.rho / 2.0,
        })
    }
}

const ROUNDOFF_SLACK: f64 = 1e-12;

/// Smallest `β` in the search range with `gap(β) ≤ 0`, for a `gap` that
/// decreases in `β`.
fn smallest_admissible(gap: impl Fn(f64) -> f64) -> Option<f64> {
    // Roundoff lets the computed state exceed 1 by a few ulps.
    let gap = |beta: f64| gap(beta) - ROUNDOFF_SLACK;
    if gap(SHIFT_RANGE) > 0.0 {
        return None;
    }
    if gap(-SHIFT_RANGE) <= 0.0 {
        return Some(-SHIFT_RANGE);
    }
    let (mut lo, mut hi) = (-SHIFT_RANGE, SHIFT_RANGE);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::make_cubic;
    use crate::wave::{solve_wave, WaveOptions};

    fn fixture() -> (WaveProfile, DriftTerm, EnvelopeConstants, Grid1D) {
        let nl = make_cubic(0.25).unwrap();
        let w = solve_wave(&nl, &WaveOptions::default()).unwrap();
        let d = DriftTerm::gaussian_bump(0.05, 1.0, None, None).unwrap();
        let consts = EnvelopeConstants::compute(&nl, &w).unwrap();
        let g = Grid1D::new(-120.0, 40.0, 3201).unwrap();
        (w, d, consts, g)
    }

    fn wave_state(w: &WaveProfile, g: &Grid1D, t: f64) -> SimState {
        SimState {
            t,
            u: g.nodes().iter().map(|&x| w.phi(x + w.c() * t)).collect(),
            step_count: 0,
        }
    }

    #[test]
    fn anchors_enclose_the_state() {
        let (w, d, consts, g) = fixture();
        let s_lo = wave_state(&w, &g, Envelopes::earliest_lower_anchor(&w, &d, &consts));
        let s_up = wave_state(&w, &g, Envelopes::earliest_upper_anchor(&w, &d, &consts));
        let lo = Envelopes::anchor_lower(&s_lo, &g, &w, &d, &consts).unwrap();
        let up = Envelopes::anchor_upper(&s_up, &g, &w, &d, &consts).unwrap();
        for i in 0..g.n {
            let x = g.x(i);
            assert!(lo.eval(&w, s_lo.t, x) <= s_lo.u[i] + 1e-12);
            assert!(up.eval(&w, s_up.t, x) >= s_up.u[i] - 1e-12);
        }
        assert!(lo.admissible && up.admissible);
        assert!(lo.c_v <= 0.2 * lo.eps);
        // An exact wave needs no shift beyond the ε slack.
        assert!(lo.beta <= 0.0 && up.beta <= 0.0);
    }

    #[test]
    fn closed_forms_at_the_anchor_and_at_infinity() {
        let (w, d, consts, g) = fixture();
        let t_lo = Envelopes::earliest_lower_anchor(&w, &d, &consts);
        let t_up = Envelopes::earliest_upper_anchor(&w, &d, &consts);
        let lo = Envelopes::anchor_lower(&wave_state(&w, &g, t_lo), &g, &w, &d, &consts).unwrap();
        let up = Envelopes::anchor_upper(&wave_state(&w, &g, t_up), &g, &w, &d, &consts).unwrap();
        assert!((lo.v(t_lo) - lo.eps).abs() < 1e-15);
        assert!((up.v(t_up) - up.gamma).abs() < 1e-15);
        assert_eq!(lo.shift(t_lo), 0.0);
        let far = t_lo + 2000.0;
        assert!(lo.v(far) < 1e-40);
        assert!(lo.shift(far) <= lo.shift_limit() + 1e-12);
        assert!((lo.shift_limit() - lo.shift_budget_m).abs() <= 1e-9 * lo.shift_budget_m);
        let mut prev = 0.0;
        for i in 0..200 {
            let (tl, tu) = (t_lo + i as f64, t_up + i as f64);
            assert!(lo.v(tl) >= lo.eps * (-lo.omega * (tl - t_lo)).exp() - 1e-15);
            let vp = up.v(tu);
            assert!(vp > 0.0 && vp <= consts.rho / 2.0);
            assert!(vp >= up.gamma * (-up.omega * (tu - t_up)).exp() - 1e-15);
            let sh = up.shift(tu);
            assert!(sh >= prev);
            prev = sh;
        }
    }
}

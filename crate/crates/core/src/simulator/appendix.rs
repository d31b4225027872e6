//! Early-time barriers built from a wave and its mirror image.
//!
//! `w⁺(t,x) = min{φ(x+ct+ξ) + φ(-x+ct+ξ), 1}` for `x ≥ 0` and
//! `min{2φ(ct+ξ), 1}` for `x < 0`; `w̃⁻(t,x) = max{φ(x+ct-ξ) - φ(-x+ct-ξ), 0}`
//! for `x ≥ 0` and 0 for `x < 0`. The correction `ξ` solves
//! `ξ' = M e^{λ(ct+ξ)}` with `ξ(-∞) = 0` by default; the form
//! `ξ' = M e^{λ(c+ξ)}` has no decay in `t` and is integrated from an
//! anchor time with `ξ = 0` there instead.

use serde::{Deserialize, Serialize};

use crate::wave::WaveProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum XiForm {
    #[default]
    TimeDependent,
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixParams {
    #[serde(rename = "M")]
    pub m: f64,
    pub lambda: f64,
    /// Last time at which the bounds are monitored.
    pub horizon: f64,
    #[serde(default)]
    pub form: XiForm,
    /// Start of the integration for [`XiForm::Literal`].
    #[serde(default)]
    pub anchor: Option<f64>,
}

/// `ξ(t)` in closed form, or `None` once it has blown up.
pub fn xi(p: &AppendixParams, c: f64, t: f64) -> Option<f64> {
    let q = match p.form {
        XiForm::TimeDependent => p.m / c * (p.lambda * c * t).exp(),
        XiForm::Literal => {
            let anchor = p.anchor.unwrap_or(t);
            p.lambda * p.m * (p.lambda * c).exp() * (t - anchor).max(0.0)
        }
    };
    (q < 1.0).then(|| -(-q).ln_1p() / p.lambda)
}

const SHIFT_SAMPLES: usize = 32;
const SHIFT_SPAN: f64 = 10.0;

fn w_minus_tilde(wave: &WaveProfile, c: f64, xi: f64, t: f64, x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        (wave.phi(x + c * t - xi) - wave.phi(-x + c * t - xi)).max(0.0)
    }
}

/// `(w⁺, w⁻)` at `(t, x)`, with `w⁻` the largest of `w̃⁻(t+s, x)` over
/// sampled `s ∈ [-10, 0]`. `None` where `ξ` is undefined.
pub fn appendix_bounds(t: f64, x: f64, wave: &WaveProfile, p: &AppendixParams) -> Option<(f64, f64)> {
    let c = wave.c();
    let xi_t = xi(p, c, t)?;
    let w_plus = if x >= 0.0 {
        (wave.phi(x + c * t + xi_t) + wave.phi(-x + c * t + xi_t)).min(1.0)
    } else {
        (2.0 * wave.phi(c * t + xi_t)).min(1.0)
    };
    let mut w_minus = 0.0f64;
    for j in 0..=SHIFT_SAMPLES {
        let ts = t - SHIFT_SPAN * j as f64 / SHIFT_SAMPLES as f64;
        if let Some(xs) = xi(p, c, ts) {
            w_minus = w_minus.max(w_minus_tilde(wave, c, xs, ts, x));
        }
    }
    Some((w_plus, w_minus))
}

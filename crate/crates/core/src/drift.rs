//! Compactly supported drifts `k`, the weight `ψ` with `ψ' = -kψ`, and the
//! blocking criterion.
//!
//! Every [`DriftTerm`] caches the running integral `K(x) = ∫_{-x0}^x k` on a
//! uniform table over its support, together with the running integrals of
//! `e^{±K}`. Everything downstream (ψ, the concentration integral, the cell
//! coefficients of the weighted schemes) reads from these tables.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::nonlinearity::{BlockingConstants, Nonlinearity};
use crate::numerics::ode::hermite;
use crate::numerics::quadrature::{adaptive_simpson, adaptive_simpson_split};
use crate::numerics::smooth::smooth_step;
use crate::numerics::spline::CubicSpline;
use crate::wave::{EnvelopeConstants, WaveProfile};

/// Number of panels of the cumulative table over `[-x0, 0]`.
pub const TABLE_PANELS: usize = 10_000;
/// Default value of the technical constant inside the criterion.
pub const TRACE_CONSTANT: f64 = 14.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DriftError {
    #[error("eps must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error("smoothing must lie in (0, eps/4), got {smoothing} with eps = {eps}")]
    BadSmoothing { eps: f64, smoothing: f64 },
    #[error("support length x0 must be positive, got {0}")]
    NonPositiveSupport(f64),
    #[error("bump width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("psi(-x0) must be positive, got {0}")]
    NonPositiveNormalization(f64),
    #[error("invalid drift table: {0}")]
    Table(String),
}

/// Shape of the drift on its support.
#[derive(Clone, Debug)]
pub enum DriftShape {
    Zero,
    /// `(K/ε)[S((x+ε+2s)/2s) - S((x+2s)/2s)]` with the C^∞ step `S`.
    MollifiedIndicator { amplitude: f64, eps: f64, smoothing: f64 },
    /// `(K/ε) χ_[-ε,0]`; discontinuous, used as a quadrature oracle.
    SharpIndicator { amplitude: f64, eps: f64 },
    /// Gaussian `A exp(-((x-center)/width)²)` cut off smoothly inside
    /// `[-x0, 0]` over a tenth of the support at each end.
    GaussianBump { amplitude: f64, center: f64, width: f64 },
    /// Spline through `(x, k)` samples spanning `[-x0, 0]`.
    Table(Arc<CubicSpline>),
}

/// A drift term with its cached integrals.
#[derive(Clone, Debug)]
pub struct DriftTerm {
    shape: DriftShape,
    x0: f64,
    psi_at_minus_x0: f64,
    h: f64,
    k_nodes: Vec<f64>,
    cum_k: Vec<f64>,
    cum_exp_pos: Vec<f64>,
    cum_exp_neg: Vec<f64>,
    k_plus: f64,
    k_sup: f64,
}

// Five-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..5 {
        s += GL_W[i] * f(m + r * GL_X[i]);
    }
    s * r
}

impl DriftTerm {
    fn build(shape: DriftShape, x0: f64) -> Self {
        let n = TABLE_PANELS;
        let h = x0 / n as f64;
        let mut term = Self {
            shape,
            x0,
            psi_at_minus_x0: 1.0,
            h,
            k_nodes: Vec::new(),
            cum_k: Vec::new(),
            cum_exp_pos: Vec::new(),
            cum_exp_neg: Vec::new(),
            k_plus: 0.0,
            k_sup: 0.0,
        };
        // Pin the last node to 0 so roundoff cannot push it off the support.
        let xs: Vec<f64> = (0..=n).map(|j| if j == n { 0.0 } else { -x0 + j as f64 * h }).collect();
        let k_nodes: Vec<f64> = xs.iter().map(|&x| term.k_inside(x)).collect();
        let mut cum_k = vec![0.0; n + 1];
        for j in 0..n {
            cum_k[j + 1] = cum_k[j] + gauss5(|x| term.k_inside(x), xs[j], xs[j + 1]);
        }
        term.k_nodes = k_nodes;
        term.cum_k = cum_k;
        let mut pos = vec![0.0; n + 1];
        let mut neg = vec![0.0; n + 1];
        for j in 0..n {
            pos[j + 1] = pos[j] + gauss5(|x| term.cumulative(x).exp(), xs[j], xs[j + 1]);
            neg[j + 1] = neg[j] + gauss5(|x| (-term.cumulative(x)).exp(), xs[j], xs[j + 1]);
        }
        term.cum_exp_pos = pos;
        term.cum_exp_neg = neg;
        let mut k_max = term.k_nodes.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let mut k_abs = term.k_nodes.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        for j in 0..n {
            let v = term.k_inside(-x0 + (j as f64 + 0.5) * h);
            k_max = k_max.max(v);
            k_abs = k_abs.max(v.abs());
        }
        term.k_plus = k_max.max(0.0);
        term.k_sup = k_abs;
        term
    }

    /// `k ≡ 0` with a nominal support `[-x0, 0]`.
    pub fn zero(x0: f64) -> Result<Self, DriftError> {
        if !(x0 > 0.0) {
            return Err(DriftError::NonPositiveSupport(x0));
        }
        Ok(Self::build(DriftShape::Zero, x0))
    }

    /// Smoothed `(K/ε) χ_[-ε,0]` with support `[-(ε+2s), 0]` and `∫k = K`.
    pub fn mollified_indicator(amplitude: f64, eps: f64, smoothing: f64) -> Result<Self, DriftError> {
        if !(eps > 0.0) {
            return Err(DriftError::NonPositiveEps(eps));
        }
        if !(smoothing > 0.0 && smoothing < eps / 4.0) {
            return Err(DriftError::BadSmoothing { eps, smoothing });
        }
        let x0 = eps + 2.0 * smoothing;
        Ok(Self::build(
            DriftShape::MollifiedIndicator {
                amplitude,
                eps,
                smoothing,
            },
            x0,
        ))
    }

    pub fn sharp_indicator(amplitude: f64, eps: f64) -> Result<Self, DriftError> {
        if !(eps > 0.0) {
            return Err(DriftError::NonPositiveEps(eps));
        }
        Ok(Self::build(DriftShape::SharpIndicator { amplitude, eps }, eps))
    }

    /// Gaussian bump with peak value `amplitude` at `center`, cut off to
    /// `[-x0, 0]`. `center` and `width` default to `-x0/2` and `x0/4`.
    pub fn gaussian_bump(amplitude: f64, x0: f64, center: Option<f64>, width: Option<f64>) -> Result<Self, DriftError> {
        if !(x0 > 0.0) {
            return Err(DriftError::NonPositiveSupport(x0));
        }
        let center = center.unwrap_or(-x0 / 2.0);
        let width = width.unwrap_or(x0 / 4.0);
        if !(width > 0.0) {
            return Err(DriftError::NonPositiveWidth(width));
        }
        Ok(Self::build(
            DriftShape::GaussianBump {
                amplitude,
                center,
                width,
            },
            x0,
        ))
    }

    /// Spline drift through samples whose abscissae run from `-x0` to `0`.
    pub fn from_table(xs: Vec<f64>, ks: Vec<f64>) -> Result<Self, DriftError> {
        let last = xs.last().copied().unwrap_or(f64::NAN);
        if last.abs() > 1e-12 {
            return Err(DriftError::Table(format!("last abscissa must be 0, got {last}")));
        }
        let x0 = -xs.first().copied().unwrap_or(f64::NAN);
        if !(x0 > 0.0) {
            return Err(DriftError::NonPositiveSupport(x0));
        }
        let spline = CubicSpline::new(xs, ks).map_err(|e| DriftError::Table(e.to_string()))?;
        Ok(Self::build(DriftShape::Table(Arc::new(spline)), x0))
    }

    /// Returns a copy with a different normalization `ψ(-x0)`.
    pub fn with_psi_normalization(mut self, psi_at_minus_x0: f64) -> Result<Self, DriftError> {
        if !(psi_at_minus_x0 > 0.0) {
            return Err(DriftError::NonPositiveNormalization(psi_at_minus_x0));
        }
        self.psi_at_minus_x0 = psi_at_minus_x0;
        Ok(self)
    }

    pub fn shape(&self) -> &DriftShape {
        &self.shape
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn psi_at_minus_x0(&self) -> f64 {
        self.psi_at_minus_x0
    }

    /// `max{sup k, 0}`.
    pub fn k_plus(&self) -> f64 {
        self.k_plus
    }

    /// `‖k‖_∞`.
    pub fn k_sup(&self) -> f64 {
        self.k_sup
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.shape, DriftShape::Zero)
    }

    fn k_inside(&self, x: f64) -> f64 {
        match &self.shape {
            DriftShape::Zero => 0.0,
            DriftShape::MollifiedIndicator {
                amplitude,
                eps,
                smoothing,
            } => {
                let w = 2.0 * smoothing;
                amplitude / eps * (smooth_step((x + eps + w) / w) - smooth_step((x + w) / w))
            }
            DriftShape::SharpIndicator { amplitude, eps } => {
                if x >= -eps && x <= 0.0 {
                    amplitude / eps
                } else {
                    0.0
                }
            }
            DriftShape::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                let tau = 0.1 * self.x0;
                let g = ((x - center) / width).powi(2);
                amplitude * (-g).exp() * smooth_step((x + self.x0) / tau) * smooth_step(-x / tau)
            }
            DriftShape::Table(s) => s.eval(x),
        }
    }

    /// `k(x)`; zero outside `[-x0, 0]`.
    pub fn k(&self, x: f64) -> f64 {
        if x < -self.x0 || x > 0.0 {
            0.0
        } else {
            self.k_inside(x)
        }
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x + self.x0) / self.h;
        let j = (s.floor().max(0.0) as usize).min(TABLE_PANELS - 1);
        (j, -self.x0 + j as f64 * self.h)
    }

    /// `∫_{-x0}^x k`: zero left of the support, `∫k` right of it.
    pub fn cumulative(&self, x: f64) -> f64 {
        if x <= -self.x0 {
            return 0.0;
        }
        if x >= 0.0 && !self.cum_k.is_empty() {
            return self.cum_k[TABLE_PANELS];
        }
        if self.cum_k.is_empty() {
            // Only reached while the table itself is being built.
            return adaptive_simpson(|s| self.k_inside(s), -self.x0, x.min(0.0), 1e-14, 1e-13);
        }
        let (j, xj) = self.locate(x);
        hermite(
            xj,
            self.cum_k[j],
            self.k_nodes[j],
            xj + self.h,
            self.cum_k[j + 1],
            self.k_nodes[j + 1],
            x,
        )
    }

    /// `∫_ℝ k`.
    pub fn net_drift(&self) -> f64 {
        self.cum_k[TABLE_PANELS]
    }

    /// `ψ(x) = ψ(-x0) exp(-∫_{-x0}^x k)`.
    pub fn psi(&self, x: f64) -> f64 {
        self.psi_at_minus_x0 * (-self.cumulative(x)).exp()
    }

    /// `ln ψ(x)`.
    pub fn log_psi(&self, x: f64) -> f64 {
        self.psi_at_minus_x0.ln() - self.cumulative(x)
    }

    /// ψ by adaptive quadrature of `k` directly, bypassing the table.
    pub fn psi_by_quadrature(&self, x: f64) -> f64 {
        let hi = x.clamp(-self.x0, 0.0);
        let breaks = self.kinks();
        let integral = adaptive_simpson_split(|s| self.k(s), -self.x0, hi, &breaks, 1e-13, 1e-13);
        self.psi_at_minus_x0 * (-integral).exp()
    }

    fn kinks(&self) -> Vec<f64> {
        match &self.shape {
            DriftShape::MollifiedIndicator { eps, smoothing, .. } => {
                vec![-eps - 2.0 * smoothing, -eps, -2.0 * smoothing, 0.0]
            }
            DriftShape::SharpIndicator { eps, .. } => vec![-eps, 0.0],
            _ => vec![-self.x0, 0.0],
        }
    }

    /// `∫_a^b exp(sign · K(x)) dx` with `K = ∫_{-x0}^x k`, `sign = ±1`.
    pub fn integral_exp(&self, a: f64, b: f64, sign: f64) -> f64 {
        if b < a {
            return -self.integral_exp(b, a, sign);
        }
        let table = if sign > 0.0 {
            &self.cum_exp_pos
        } else {
            &self.cum_exp_neg
        };
        let total = self.net_drift();
        let mut sum = 0.0;
        let lo = a.max(-self.x0);
        let hi = b.min(0.0);
        if a < -self.x0 {
            sum += b.min(-self.x0) - a;
        }
        if b > 0.0 {
            sum += (sign * total).exp() * (b - a.max(0.0));
        }
        if hi > lo {
            sum += self.table_integral(table, hi, sign) - self.table_integral(table, lo, sign);
        }
        sum
    }

    fn table_integral(&self, table: &[f64], x: f64, sign: f64) -> f64 {
        if x >= 0.0 {
            return table[TABLE_PANELS];
        }
        let (j, xj) = self.locate(x);
        if x <= xj {
            return table[j];
        }
        table[j] + gauss5(|s| (sign * self.cumulative(s)).exp(), xj, x)
    }

    /// `∫_{-x0}^0 exp(∫_{-x0}^t k) dt`.
    pub fn concentration_integral(&self) -> f64 {
        let breaks = self.kinks();
        adaptive_simpson_split(|t| self.cumulative(t).exp(), -self.x0, 0.0, &breaks, 1e-12, 1e-12)
    }

    /// `∫_a^b ψ`.
    pub fn integral_psi(&self, a: f64, b: f64) -> f64 {
        self.psi_at_minus_x0 * self.integral_exp(a, b, -1.0)
    }

    /// `∫_a^b 1/ψ`.
    pub fn integral_inv_psi(&self, a: f64, b: f64) -> f64 {
        self.integral_exp(a, b, 1.0) / self.psi_at_minus_x0
    }
}

/// Verdict of the blocking criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    BlockingCertified,
    Undetermined,
}

/// Evaluation of the blocking criterion for one drift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub net_drift: f64,
    pub concentration: f64,
    pub rhs: f64,
    #[serde(rename = "C_f")]
    pub c_f: f64,
    pub delta: f64,
    pub verdict: Verdict,
}

/// `exp(-∫k) (2 + max{tc, √conc})²` and the δ radius; certified iff
/// `C(f)` exceeds the right-hand side.
pub fn blocking_criterion(constants: &BlockingConstants, drift: &DriftTerm, trace_constant: f64) -> CriterionReport {
    let net_drift = drift.net_drift();
    let concentration = drift.concentration_integral();
    let factor = 2.0 + trace_constant.max(concentration.sqrt());
    let rhs = (-net_drift).exp() * factor * factor;
    let delta = constants.alpha * drift.psi_at_minus_x0().sqrt() / (constants.norm_f_double_prime * factor);
    let verdict = if constants.c_f > rhs {
        Verdict::BlockingCertified
    } else {
        Verdict::Undetermined
    };
    CriterionReport {
        net_drift,
        concentration,
        rhs,
        c_f: constants.c_f,
        delta,
        verdict,
    }
}

/// The smallness threshold on `k⁺` under which the wave passes the drift
/// with a bounded shift, evaluated at a start time `t_eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationBound {
    /// Natural log of the threshold; finite even when `value` underflows.
    pub log_value: f64,
    pub value: f64,
    pub rho: f64,
    pub omega: f64,
    pub a_minus: f64,
    pub delta_minus: f64,
    pub shift_budget_m: f64,
    pub k_plus: f64,
    /// `k⁺ < value`.
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error("wave profile is not strictly increasing on [-A, A] (min phi' = {0:e})")]
    NotMonotone(f64),
    #[error(transparent)]
    Constants(#[from] crate::wave::WaveError),
}

/// `min{(ρ/4)(μc/C_φ) e^{-μ(x0+m)} e^{-μ c t_eps}, e^{-μm}}`.
pub fn propagation_bound(
    nl: &Nonlinearity,
    wave: &WaveProfile,
    drift: &DriftTerm,
    t_eps: f64,
) -> Result<PropagationBound, BoundError> {
    let env = EnvelopeConstants::compute(nl, wave)?;
    if !(env.delta > 0.0) {
        return Err(BoundError::NotMonotone(env.delta));
    }
    let d = wave.decay();
    let (c, mu, c_phi) = (wave.c(), d.mu, d.c_phi);
    let omega = env.omega;
    let eps = env.rho / 4.0;
    let x0 = drift.x0();
    let coef = (env.norm_f_prime + 2.0 * omega) / env.delta;
    // The second term is formed in logs; it overflows for very negative t_eps.
    let log_second = c_phi.ln() + mu * x0 - mu * c * t_eps - (mu * c * omega).ln();
    let m = coef * (eps / omega + log_second.exp());
    let log_first = (env.rho / 4.0 * mu * c / c_phi).ln() - mu * (x0 + m) - mu * c * t_eps;
    let log_value = log_first.min(-mu * m);
    let value = log_value.exp();
    Ok(PropagationBound {
        log_value,
        value,
        rho: env.rho,
        omega,
        a_minus: env.a,
        delta_minus: env.delta,
        shift_budget_m: m,
        k_plus: drift.k_plus(),
        satisfied: drift.k_plus() < value,
    })
}

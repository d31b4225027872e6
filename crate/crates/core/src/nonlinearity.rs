//! Bistable reaction terms, their extension to the whole real line and the
//! constants that enter the blocking criterion.
//!
//! A [`Nonlinearity`] wraps a reaction `f` given on `[0, 1]` (a cubic, a
//! tabulated spline, or the degenerate zero reaction used in tests) and extends
//! it to ℝ by C² blends into linear tails. The blend keeps `|f''|` bounded by
//! its supremum on `[0, 1]`, keeps `f > 0` left of 0 and `f < 0` right of 1,
//! and makes `F(s) = ∫_s^1 f` grow quadratically at ±∞.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::optimize::{bisect, golden_section, linspace, logspace, scan_then_golden};
use crate::numerics::quadrature::adaptive_simpson_split;
use crate::numerics::spline::CubicSpline;

/// Absolute tolerance at the pinned zeros f(0), f(1).
pub const ZERO_TOL: f64 = 1e-9;
/// Number of sample points for sign and sup-norm checks on `[0, 1]`.
pub const SIGN_SAMPLES: usize = 10_000;
/// Default half-width of the C² blend into the linear tails.
pub const DEFAULT_TAIL_WIDTH: f64 = 0.5;
/// Search range for the quadratic lower bound of `F`.
pub const K_QUAD_RANGE: (f64, f64) = (-5.0, 6.0);
/// Upper end of the search for the auxiliary length `a`.
pub const A_MAX: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NonlinearityError {
    #[error("theta must lie in (0, 1/2) for the cubic, got {0}")]
    ThetaOutOfRange(f64),
    #[error("nonlinearity fails {condition}: {detail}")]
    Invalid { condition: Condition, detail: String },
    #[error("quadratic lower bound constant is not positive ({0:e}); extension is broken")]
    NonPositiveQuadraticBound(f64),
    #[error("the optimal auxiliary length is not bracketed in (0, {0}]")]
    AuxiliaryLengthNotBracketed(f64),
    #[error("invalid reaction table: {0}")]
    Table(String),
}

/// The reaction on `[0, 1]`, before extension.
#[derive(Clone, Debug)]
pub enum Reaction {
    /// `f(u) = u (1 - u) (u - θ)`.
    Cubic { theta: f64 },
    /// `f ≡ 0`; degenerate, for tests of the validators and solvers.
    Zero,
    /// Natural cubic spline through `(u, f(u))` samples covering `[0, 1]`.
    Table(Arc<CubicSpline>),
}

impl Reaction {
    /// `(f, f', f'')` at `u ∈ [0, 1]`.
    fn eval_all(&self, u: f64) -> (f64, f64, f64) {
        match self {
            Reaction::Cubic { theta } => {
                let t = *theta;
                let v = u * (1.0 - u) * (u - t);
                let d = -3.0 * u * u + 2.0 * (1.0 + t) * u - t;
                let dd = -6.0 * u + 2.0 * (1.0 + t);
                (v, d, dd)
            }
            Reaction::Zero => (0.0, 0.0, 0.0),
            Reaction::Table(s) => s.eval_all(u),
        }
    }

    /// `∫_0^u f` for `u ∈ [0, 1]`.
    fn primitive(&self, u: f64) -> f64 {
        match self {
            Reaction::Cubic { theta } => {
                let t = *theta;
                -u.powi(4) / 4.0 + (1.0 + t) * u.powi(3) / 3.0 - t * u * u / 2.0
            }
            Reaction::Zero => 0.0,
            Reaction::Table(s) => s.integral_from_start(u) - s.integral_from_start(0.0),
        }
    }

    fn extra_samples(&self) -> Vec<f64> {
        match self {
            Reaction::Table(s) => s.knots().iter().copied().filter(|x| (0.0..=1.0).contains(x)).collect(),
            Reaction::Cubic { theta } => vec![(1.0 + theta) / 3.0],
            Reaction::Zero => Vec::new(),
        }
    }
}

/// One side of the C² extension: `f'' = f''(edge)·(1 - y/w)` on `y ∈ [0, w]`,
/// linear beyond, where `y` is the distance from the edge into the tail.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TailParams {
    pub width: f64,
    /// Asymptotic slope `f'(±∞)`.
    pub slope: f64,
    edge_value: f64,
    edge_slope: f64,
    edge_curvature: f64,
}

impl TailParams {
    /// `edge_slope` is the derivative in the outward direction; `sign` is the
    /// required sign of the asymptotic outward slope.
    fn new(edge_value: f64, edge_slope: f64, edge_curvature: f64, max_width: f64, sign: f64) -> Self {
        // Moving outward by w, the slope picks up f''(edge)·w/2. Halving the
        // largest admissible width keeps both the tail slope and f itself
        // away from zero on the blend.
        let mut width = max_width;
        if sign * edge_curvature < 0.0 && sign * edge_slope > 0.0 {
            width = width.min(edge_slope.abs() / edge_curvature.abs());
        }
        let slope = edge_slope + edge_curvature * width / 2.0;
        Self {
            width,
            slope,
            edge_value,
            edge_slope,
            edge_curvature,
        }
    }

    /// `(f, df/dy, d²f/dy²)` at distance `y ≥ 0` outward, where `y` is
    /// signed so that `df/dy` is the derivative in the outward direction.
    fn eval(&self, y: f64) -> (f64, f64, f64) {
        let w = self.width;
        let (f0, d0, c0) = (self.edge_value, self.edge_slope, self.edge_curvature);
        if y <= w {
            let v = f0 + d0 * y + c0 * (y * y / 2.0 - y.powi(3) / (6.0 * w));
            let d = d0 + c0 * (y - y * y / (2.0 * w));
            let dd = c0 * (1.0 - y / w);
            (v, d, dd)
        } else {
            let fw = f0 + d0 * w + c0 * (w * w / 2.0 - w * w / 6.0);
            (fw + self.slope * (y - w), self.slope, 0.0)
        }
    }

    /// `∫_0^y f` along the outward coordinate.
    fn primitive(&self, y: f64) -> f64 {
        let w = self.width;
        let (f0, d0, c0) = (self.edge_value, self.edge_slope, self.edge_curvature);
        let blend = |y: f64| f0 * y + d0 * y * y / 2.0 + c0 * (y.powi(3) / 6.0 - y.powi(4) / (24.0 * w));
        if y <= w {
            blend(y)
        } else {
            let fw = f0 + d0 * w + c0 * (w * w / 3.0);
            blend(w) + fw * (y - w) + self.slope * (y - w).powi(2) / 2.0
        }
    }
}

/// A reaction term extended to ℝ together with its cached norms.
#[derive(Clone, Debug)]
pub struct Nonlinearity {
    reaction: Reaction,
    theta: f64,
    left: TailParams,
    right: TailParams,
    norm_f_prime: f64,
    norm_f_double_prime: f64,
    mass: f64,
}

impl Nonlinearity {
    /// Builds the extension of `reaction` without validating it. Use
    /// [`Nonlinearity::validate`] to check the bistability conditions.
    pub fn new(reaction: Reaction, tail_width: f64) -> Self {
        let (f0, d0, c0) = reaction.eval_all(0.0);
        let (f1, d1, c1) = reaction.eval_all(1.0);
        // Left tail runs toward -∞: outward derivative is -d/ds.
        let left = TailParams::new(f0, -d0, c0, tail_width, 1.0);
        let right = TailParams::new(f1, d1, c1, tail_width, -1.0);
        let mut samples = linspace(0.0, 1.0, SIGN_SAMPLES + 1);
        samples.extend(reaction.extra_samples());
        let norm_fpp = samples.iter().fold(0.0f64, |m, &u| m.max(reaction.eval_all(u).2.abs()));
        let norm_fpp = match &reaction {
            Reaction::Table(s) => norm_fpp.max(s.max_abs_second()),
            _ => norm_fpp,
        };
        let norm_fp = samples.iter().fold(0.0f64, |m, &u| m.max(reaction.eval_all(u).1.abs()));
        let theta = match &reaction {
            Reaction::Cubic { theta } if *theta > 0.0 && *theta < 1.0 => *theta,
            _ => locate_unstable_zero(&reaction),
        };
        let mass = reaction.primitive(1.0);
        Self {
            reaction,
            theta,
            left,
            right,
            norm_f_prime: norm_fp,
            norm_f_double_prime: norm_fpp,
            mass,
        }
    }

    /// Builds a tabulated reaction from `(u, f(u))` samples covering `[0, 1]`.
    pub fn from_table(us: Vec<f64>, fs: Vec<f64>, tail_width: f64) -> Result<Self, NonlinearityError> {
        let lo = us.first().copied().unwrap_or(f64::NAN);
        let hi = us.last().copied().unwrap_or(f64::NAN);
        if !(lo <= 0.0 && hi >= 1.0) {
            return Err(NonlinearityError::Table(format!(
                "samples must cover [0, 1], got [{lo}, {hi}]"
            )));
        }
        let spline = CubicSpline::new(us, fs).map_err(|e| NonlinearityError::Table(e.to_string()))?;
        let nl = Self::new(Reaction::Table(Arc::new(spline)), tail_width);
        nl.ensure_valid()?;
        Ok(nl)
    }

    pub fn reaction(&self) -> &Reaction {
        &self.reaction
    }

    /// The unstable zero θ (NaN if `f` has no sign change on `(0, 1)`).
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `‖f″‖_{L∞}`; equal on `[0, 1]` and on ℝ by construction of the tails.
    pub fn norm_f_double_prime(&self) -> f64 {
        self.norm_f_double_prime
    }

    /// `‖f′‖_{L∞([0,1])}`.
    pub fn norm_f_prime(&self) -> f64 {
        self.norm_f_prime
    }

    /// `(d₋, d₊)`: asymptotic slopes of the extension.
    pub fn tail_slopes(&self) -> (f64, f64) {
        (-self.left.slope, self.right.slope)
    }

    pub fn tail_widths(&self) -> (f64, f64) {
        (self.left.width, self.right.width)
    }

    /// `∫_0^1 f`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `(f, f', f'')` at any `s ∈ ℝ`.
    pub fn eval_all(&self, s: f64) -> (f64, f64, f64) {
        if s < 0.0 {
            let (v, d, dd) = self.left.eval(-s);
            (v, -d, dd)
        } else if s > 1.0 {
            self.right.eval(s - 1.0)
        } else {
            self.reaction.eval_all(s)
        }
    }

    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        if (0.0..=1.0).contains(&s) {
            if let Reaction::Cubic { theta } = self.reaction {
                return s * (1.0 - s) * (s - theta);
            }
        }
        self.eval_all(s).0
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        self.eval_all(s).1
    }

    pub fn f_double_prime(&self, s: f64) -> f64 {
        self.eval_all(s).2
    }

    /// `∫_0^s f`, in closed form (piecewise polynomial or spline).
    pub fn primitive(&self, s: f64) -> f64 {
        if s < 0.0 {
            -self.left.primitive(-s)
        } else if s > 1.0 {
            self.mass + self.right.primitive(s - 1.0)
        } else {
            self.reaction.primitive(s)
        }
    }

    /// `F(t) = ∫_t^1 f(s) ds`, by adaptive quadrature split at the kinks of
    /// the extension. `F(1) = 0` exactly.
    pub fn potential(&self, t: f64) -> f64 {
        let breaks = [0.0, 1.0, -self.left.width, 1.0 + self.right.width];
        adaptive_simpson_split(|s| self.f(s), t, 1.0, &breaks, 1e-13, 1e-14)
    }

    /// `F(t)` from the closed-form primitive; agrees with [`Self::potential`]
    /// to quadrature accuracy and is much cheaper.
    pub fn potential_closed_form(&self, t: f64) -> f64 {
        self.mass - self.primitive(t)
    }

    /// Checks the bistability conditions and the properties of the extension.
    pub fn validate(&self) -> Vec<ConditionResult> {
        let mut out = Vec::with_capacity(7);
        let samples = linspace(0.0, 1.0, SIGN_SAMPLES + 1);

        // Regularity: f'' agrees with a difference quotient of f' and all
        // values are finite.
        let mut worst = (0.0f64, 0.0f64);
        let h = 1e-5;
        for &u in samples.iter().step_by(50) {
            let (v, d, dd) = self.eval_all(u);
            if !(v.is_finite() && d.is_finite() && dd.is_finite()) {
                worst = (f64::INFINITY, u);
                break;
            }
            let lo = (u - h).max(0.0);
            let hi = (u + h).min(1.0);
            let fd = (self.f_prime(hi) - self.f_prime(lo)) / (hi - lo);
            let gap = (fd - dd).abs();
            if gap > worst.0 {
                worst = (gap, u);
            }
        }
        out.push(ConditionResult::new(
            Condition::Regularity,
            worst.0 < 1e-3 * (1.0 + self.norm_f_double_prime),
            format!("max |f'' - D f'| = {:.3e}", worst.0),
            Some(worst.1),
        ));

        let (f0, f1) = (self.f(0.0), self.f(1.0));
        let zeros_ok = f0.abs() <= ZERO_TOL && f1.abs() <= ZERO_TOL;
        out.push(ConditionResult::new(
            Condition::Zeros,
            zeros_ok,
            format!("f(0) = {f0:.3e}, f(1) = {f1:.3e}"),
            if zeros_ok { None } else if f0.abs() > ZERO_TOL { Some(0.0) } else { Some(1.0) },
        ));

        let (d0, d1) = (self.f_prime(0.0), self.f_prime(1.0));
        let slopes_ok = d0 < 0.0 && d1 < 0.0;
        out.push(ConditionResult::new(
            Condition::StableEndpoints,
            slopes_ok,
            format!("f'(0) = {d0:.6}, f'(1) = {d1:.6}"),
            if slopes_ok { None } else if d0 >= 0.0 { Some(0.0) } else { Some(1.0) },
        ));

        let theta = self.theta;
        let mut sign_witness = None;
        if !(theta > 0.0 && theta < 1.0) {
            sign_witness = Some(0.5);
        } else {
            for &u in &samples[1..samples.len() - 1] {
                if (u - theta).abs() < 1e-12 {
                    continue;
                }
                let v = self.f(u);
                let bad = if u < theta { v >= 0.0 } else { v <= 0.0 };
                if bad {
                    sign_witness = Some(u);
                    break;
                }
            }
        }
        out.push(ConditionResult::new(
            Condition::Signs,
            sign_witness.is_none(),
            match sign_witness {
                None => format!("f < 0 on (0, {theta:.6}), f > 0 on ({theta:.6}, 1)"),
                Some(u) => format!("sign condition fails at u = {u:.6} (f = {:.3e})", self.f(u)),
            },
            sign_witness,
        ));

        let mass = self.mass;
        out.push(ConditionResult::new(
            Condition::PositiveMass,
            mass > 0.0,
            format!("∫_0^1 f = {mass:.9}"),
            if mass > 0.0 { None } else { Some(mass) },
        ));

        // Extension: signs outside [0, 1] and asymptotic slopes.
        let mut ext_witness = None;
        for i in 1..=2000 {
            let y = 6.0 * i as f64 / 2000.0;
            if self.f(-y) <= 0.0 {
                ext_witness = Some(-y);
                break;
            }
            if self.f(1.0 + y) >= 0.0 {
                ext_witness = Some(1.0 + y);
                break;
            }
        }
        let (dm, dp) = self.tail_slopes();
        let ext_ok = ext_witness.is_none() && dm < 0.0 && dp < 0.0;
        out.push(ConditionResult::new(
            Condition::ExtensionSigns,
            ext_ok,
            format!("d- = {dm:.6}, d+ = {dp:.6}"),
            ext_witness,
        ));

        let mut curv = (0.0f64, 0.0f64);
        for i in 0..=4000 {
            let y = 8.0 * i as f64 / 4000.0;
            for s in [-y, 1.0 + y] {
                let v = self.f_double_prime(s).abs();
                if v > curv.0 {
                    curv = (v, s);
                }
            }
        }
        let curv_ok = curv.0 <= self.norm_f_double_prime * (1.0 + 1e-12) + 1e-15;
        out.push(ConditionResult::new(
            Condition::ExtensionCurvature,
            curv_ok,
            format!(
                "sup |f''| outside [0,1] = {:.6}, on [0,1] = {:.6}",
                curv.0, self.norm_f_double_prime
            ),
            if curv_ok { None } else { Some(curv.1) },
        ));
        out
    }

    /// Returns the first failed condition as an error.
    pub fn ensure_valid(&self) -> Result<(), NonlinearityError> {
        match self.validate().into_iter().find(|c| !c.passed) {
            None => Ok(()),
            Some(c) => Err(NonlinearityError::Invalid {
                condition: c.condition,
                detail: c.detail,
            }),
        }
    }
}

/// Canonical bistable cubic `u(1-u)(u-θ)` with the default tail width.
pub fn make_cubic(theta: f64) -> Result<Nonlinearity, NonlinearityError> {
    make_cubic_with_tails(theta, DEFAULT_TAIL_WIDTH)
}

pub fn make_cubic_with_tails(theta: f64, tail_width: f64) -> Result<Nonlinearity, NonlinearityError> {
    if !(theta > 0.0 && theta < 0.5) {
        return Err(NonlinearityError::ThetaOutOfRange(theta));
    }
    let nl = Nonlinearity::new(Reaction::Cubic { theta }, tail_width);
    nl.ensure_valid()?;
    Ok(nl)
}

fn locate_unstable_zero(reaction: &Reaction) -> f64 {
    let n = SIGN_SAMPLES;
    let mut prev = reaction.eval_all(1.0 / n as f64).0;
    for i in 2..n {
        let u = i as f64 / n as f64;
        let v = reaction.eval_all(u).0;
        if prev < 0.0 && v >= 0.0 {
            let lo = (i - 1) as f64 / n as f64;
            return bisect(|x| reaction.eval_all(x).0, lo, u, 1e-15).unwrap_or(u);
        }
        prev = v;
    }
    f64::NAN
}

/// Which property a [`ConditionResult`] refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// f ∈ C²([0,1]).
    Regularity,
    /// f(0) = f(1) = 0.
    Zeros,
    /// f′(0) < 0, f′(1) < 0.
    StableEndpoints,
    /// f < 0 on (0,θ), f > 0 on (θ,1).
    Signs,
    /// ∫₀¹ f > 0.
    PositiveMass,
    /// f > 0 left of 0, f < 0 right of 1, negative asymptotic slopes.
    ExtensionSigns,
    /// sup |f″| outside [0,1] does not exceed sup |f″| on [0,1].
    ExtensionCurvature,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Condition::Regularity => "F1 (C² on [0,1])",
            Condition::Zeros => "F2 (f(0)=f(1)=0)",
            Condition::StableEndpoints => "F3 (f'(0)<0, f'(1)<0)",
            Condition::Signs => "F4 (sign pattern)",
            Condition::PositiveMass => "F8 (∫f > 0)",
            Condition::ExtensionSigns => "extension signs",
            Condition::ExtensionCurvature => "extension curvature",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub passed: bool,
    pub detail: String,
    /// Point (or value, for the mass condition) demonstrating a failure.
    pub witness: Option<f64>,
}

impl ConditionResult {
    fn new(condition: Condition, passed: bool, detail: String, witness: Option<f64>) -> Self {
        Self {
            condition,
            passed,
            detail,
            witness,
        }
    }
}

/// Every f-derived constant of the blocking argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockingConstants {
    /// `min{1/4, -f'(0)/4}`.
    pub alpha: f64,
    /// Largest `K` with `F(s) ≥ K (s-1)²` on the search range.
    pub k_quad: f64,
    /// Point where the ratio `F(s)/(s-1)²` is smallest.
    pub k_quad_witness: f64,
    /// `min{K_quad, 1/2}`.
    pub nu: f64,
    pub a_opt: f64,
    /// `1/(2a) + a · max_{[0,1]} F`.
    pub beta_a: f64,
    /// `1/a + a/3`.
    pub gamma_a: f64,
    /// `min{ν/2, α}`.
    pub eta: f64,
    pub max_potential: f64,
    pub norm_f_double_prime: f64,
    /// `α² η / (‖f″‖² (ν γ + β))`.
    pub c_f: f64,
}

/// `1/(2a) + a·max F`.
pub fn beta_of(a: f64, max_potential: f64) -> f64 {
    1.0 / (2.0 * a) + a * max_potential
}

/// `1/a + a/3`.
pub fn gamma_of(a: f64) -> f64 {
    1.0 / a + a / 3.0
}

impl BlockingConstants {
    /// Computes the constants with the auxiliary length chosen optimally.
    pub fn compute(nl: &Nonlinearity) -> Result<Self, NonlinearityError> {
        Self::compute_with(nl, None, 400)
    }

    /// Computes the constants; `a_override` fixes the auxiliary length and
    /// `a_samples` sets the resolution of the initial scan for `a`.
    pub fn compute_with(nl: &Nonlinearity, a_override: Option<f64>, a_samples: usize) -> Result<Self, NonlinearityError> {
        let alpha = (0.25f64).min(-nl.f_prime(0.0) / 4.0);
        let (k_quad, k_quad_witness) = quadratic_lower_bound(nl)?;
        let nu = k_quad.min(0.5);
        let max_potential = max_potential(nl);
        let objective = |a: f64| nu * gamma_of(a) + beta_of(a, max_potential);
        let a_opt = match a_override {
            Some(a) => a,
            None => {
                let grid = logspace(1e-3, A_MAX, a_samples.max(8));
                scan_then_golden(objective, &grid, 1e-12)
                    .ok_or(NonlinearityError::AuxiliaryLengthNotBracketed(A_MAX))?
                    .0
            }
        };
        let beta_a = beta_of(a_opt, max_potential);
        let gamma_a = gamma_of(a_opt);
        let eta = (nu / 2.0).min(alpha);
        let norm = nl.norm_f_double_prime();
        let c_f = alpha * alpha * eta / (norm * norm * (nu * gamma_a + beta_a));
        Ok(Self {
            alpha,
            k_quad,
            k_quad_witness,
            nu,
            a_opt,
            beta_a,
            gamma_a,
            eta,
            max_potential,
            norm_f_double_prime: norm,
            c_f,
        })
    }
}

/// Minimizes `F(s)/(s-1)²` over the search range, using the limit
/// `-f'(1)/2` at the removable point `s = 1`.
fn quadratic_lower_bound(nl: &Nonlinearity) -> Result<(f64, f64), NonlinearityError> {
    let limit = -nl.f_prime(1.0) / 2.0;
    let ratio = |s: f64| {
        let d = s - 1.0;
        if d.abs() < 1e-4 {
            // Second-order expansion around s = 1.
            limit - nl.f_double_prime(1.0) * d / 6.0
        } else {
            nl.potential_closed_form(s) / (d * d)
        }
    };
    let (lo, hi) = K_QUAD_RANGE;
    let n = 11_001;
    let grid = linspace(lo, hi, n);
    let (best_i, _) = grid
        .iter()
        .map(|&s| ratio(s))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    let (s, v) = if best_i == 0 || best_i + 1 == n {
        (grid[best_i], ratio(grid[best_i]))
    } else {
        golden_section(ratio, grid[best_i - 1], grid[best_i + 1], 1e-12, 200)
    };
    // The golden refinement can only lower the grid minimum; take the safe
    // side so that F(s) ≥ K(s-1)² holds at every grid point exactly.
    let k = v.min(ratio(grid[best_i]));
    if !(k > 0.0) {
        return Err(NonlinearityError::NonPositiveQuadraticBound(k));
    }
    Ok((k, s))
}

fn max_potential(nl: &Nonlinearity) -> f64 {
    let grid = linspace(0.0, 1.0, 2001);
    let (i, _) = grid
        .iter()
        .map(|&s| nl.potential_closed_form(s))
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let (_, v) = golden_section(|s| -nl.potential_closed_form(s), lo, hi, 1e-13, 200);
    (-v).max(nl.potential_closed_form(grid[i]))
}

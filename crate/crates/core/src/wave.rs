//! Traveling wave `φ'' - cφ' + f(φ) = 0`, `φ(-∞) = 0`, `φ(+∞) = 1`, by
//! shooting along the unstable manifold of 0.
//!
//! For a trial speed the trajectory leaving `(φ, φ') = (0, 0)` either
//! overshoots 1 (speed too large) or turns back with `φ' = 0` below 1 (speed
//! too small); bisection on that dichotomy pins `c`. The profile joins that
//! trajectory, up to `φ = 1/2`, with one integrated backward from the stable
//! manifold of 1, and is stored on a uniform grid with exponential tails
//! attached beyond both ends.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::nonlinearity::Nonlinearity;
use crate::numerics::ode::{hermite, integrate, Control, OdeEnd, OdeOptions, OdePoint};
use crate::numerics::optimize::bisect;

/// Starting amplitude on the unstable manifold of 0.
const SEED: f64 = 1e-9;
/// `1 - φ` at which the numerical trajectory hands over to the analytic tail.
const TAIL_SWITCH: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WaveError {
    #[error("shooting bracket [{lo}, {hi}] does not separate falldown from overshoot")]
    NoDichotomy { lo: f64, hi: f64 },
    #[error("trajectory did not reach 1 - phi <= {0:e} before turning back")]
    TailNotReached(f64),
    #[error("window Z = {z_max} too small: tail values {left:e}, {right:e}")]
    WindowTooSmall { z_max: f64, left: f64, right: f64 },
    #[error("linearization at {0} has complex exponents (c^2 - 4 f' < 0)")]
    ComplexExponents(&'static str),
    #[error("invalid wave options: {0}")]
    Options(String),
    #[error("ODE integration failed at speed {0}")]
    Integration(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveOptions {
    /// Half-width of the sampling window `[-Z, Z]`.
    #[serde(rename = "Z")]
    pub z_max: f64,
    pub tol: f64,
    pub dz: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            z_max: 40.0,
            tol: 1e-8,
            dz: 0.01,
        }
    }
}

/// Exponential rates and bounds of the profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    /// Growth rate of `φ` at `-∞`: `(c + √(c² - 4f'(0)))/2`.
    pub lambda_left: f64,
    /// Rate of `1 - φ` at `+∞`: `(c - √(c² - 4f'(1)))/2 < 0`.
    pub lambda_right: f64,
    /// `min{λ_left, |λ_right|}`.
    pub mu: f64,
    /// `1.05 · sup φ'(z) e^{μ|z|}`.
    pub c_phi: f64,
    pub sigma: f64,
    /// `min{|f'(0)|/4, |f'(1)|/4, cμ/2, 1}`.
    pub omega: f64,
}

#[derive(Clone, Debug)]
pub struct WaveProfile {
    c: f64,
    z_max: f64,
    dz: f64,
    phi: Vec<f64>,
    phi_prime: Vec<f64>,
    phi_second: Vec<f64>,
    decay: DecayConstants,
    residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shot {
    Overshoot,
    Falldown,
    Undecided,
}

fn lambda_left(c: f64, fp0: f64) -> f64 {
    (c + (c * c - 4.0 * fp0).sqrt()) / 2.0
}

fn shoot(nl: &Nonlinearity, c: f64, opts: OdeOptions, keep: bool) -> (Shot, Vec<OdePoint<2>>) {
    let l0 = lambda_left(c, nl.f_prime(0.0));
    let mut outcome = Shot::Undecided;
    let (traj, end) = integrate(
        |y: &[f64; 2]| [y[1], c * y[1] - nl.f(y[0])],
        0.0,
        [SEED, l0 * SEED],
        2000.0,
        opts,
        |p| {
            if p.y[0] > 1.0 {
                outcome = Shot::Overshoot;
                Control::Stop
            } else if p.y[1] <= 0.0 {
                outcome = Shot::Falldown;
                Control::Stop
            } else {
                Control::Continue
            }
        },
    );
    if end == OdeEnd::Failed {
        outcome = Shot::Undecided;
    }
    (outcome, if keep { traj } else { Vec::new() })
}

/// Finds the speed by bisection on `[c_lo, c_hi]`.
pub fn shooting_speed(nl: &Nonlinearity, c_lo: f64, c_hi: f64, tol: f64) -> Result<(f64, f64), WaveError> {
    let opts = ode_options(tol);
    let (lo_shot, _) = shoot(nl, c_lo, opts, false);
    let (hi_shot, _) = shoot(nl, c_hi, opts, false);
    if lo_shot != Shot::Falldown || hi_shot != Shot::Overshoot {
        return Err(WaveError::NoDichotomy { lo: c_lo, hi: c_hi });
    }
    let (mut lo, mut hi) = (c_lo, c_hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(nl, mid, opts, false).0 {
            Shot::Falldown => lo = mid,
            Shot::Overshoot => hi = mid,
            Shot::Undecided => {
                lo = mid;
                hi = mid;
                break;
            }
        }
    }
    Ok((lo, hi))
}

fn ode_options(tol: f64) -> OdeOptions {
    OdeOptions {
        rel_tol: tol / 100.0,
        abs_tol: SEED * tol / 100.0,
        h_init: 1e-3,
        h_max: 0.02,
        max_steps: 1_000_000,
    }
}

/// Where `φ = 1/2` between two consecutive points of a trajectory.
fn half_crossing(a: &OdePoint<2>, b: &OdePoint<2>) -> Option<f64> {
    let (lo, hi) = if a.t < b.t { (a, b) } else { (b, a) };
    bisect(
        |z| hermite(lo.t, lo.y[0], lo.dy[0], hi.t, hi.y[0], hi.dy[0], z) - 0.5,
        lo.t,
        hi.t,
        1e-15,
    )
}

/// `(φ, φ')` at `t` on a trajectory sorted by increasing time.
fn sample(traj: &[OdePoint<2>], t: f64) -> (f64, f64) {
    let j = traj.partition_point(|p| p.t <= t).clamp(1, traj.len() - 1);
    let (p, q) = (&traj[j - 1], &traj[j]);
    (
        hermite(p.t, p.y[0], p.dy[0], q.t, q.y[0], q.dy[0], t),
        hermite(p.t, p.y[1], p.dy[1], q.t, q.y[1], q.dy[1], t),
    )
}

/// Solves for `(c, φ)` with `φ(0) = 1/2`.
pub fn solve_wave(nl: &Nonlinearity, options: &WaveOptions) -> Result<WaveProfile, WaveError> {
    if !(options.z_max > 0.0 && options.tol > 0.0 && options.dz > 0.0 && options.dz < options.z_max) {
        return Err(WaveError::Options(format!("{options:?}")));
    }
    let c_max = 2.0 * nl.norm_f_prime().sqrt();
    let (c_lo, _c_hi) = shooting_speed(nl, 0.0, c_max, options.tol)?;
    let c = c_lo;
    let (fp0, fp1) = (nl.f_prime(0.0), nl.f_prime(1.0));
    if c * c - 4.0 * fp0 < 0.0 {
        return Err(WaveError::ComplexExponents("0"));
    }
    if c * c - 4.0 * fp1 < 0.0 {
        return Err(WaveError::ComplexExponents("1"));
    }
    let l0 = lambda_left(c, fp0);
    let l1 = (c - (c * c - 4.0 * fp1).sqrt()) / 2.0;

    // Left half: forward from the unstable manifold of 0 up to φ = 1/2.
    let (_, mut left) = shoot(nl, c, ode_options(options.tol), true);
    let i_half = left.iter().position(|p| p.y[0] >= 0.5).ok_or(WaveError::Integration(c))?;
    left.truncate(i_half + 1);
    let z_left = half_crossing(&left[i_half - 1], &left[i_half]).ok_or(WaveError::Integration(c))?;

    // Right half: backward from the stable manifold of 1, so neither half
    // is integrated along the direction in which errors grow.
    // Tail `1 - φ = a e^{λs} + b a² e^{2λs}`, exact to second order in the gap.
    let tail_b = nl.f_double_prime(1.0) / (2.0 * (3.0 * l1 * l1 - c * l1));
    let tail_a = 2.0 * TAIL_SWITCH / (1.0 + (1.0 + 4.0 * tail_b * TAIL_SWITCH).sqrt());
    let tail = |s: f64| {
        let e = (l1 * s).exp();
        let g = tail_a * e + tail_b * tail_a * tail_a * e * e;
        let dg = l1 * e * (tail_a + 2.0 * tail_b * tail_a * tail_a * e);
        (1.0 - g, -dg)
    };
    let (v0, d0) = tail(0.0);
    let (mut right, _) = integrate(
        |y: &[f64; 2]| [y[1], c * y[1] - nl.f(y[0])],
        0.0,
        [v0, d0],
        -2000.0,
        ode_options(options.tol),
        |p| if p.y[0] <= 0.5 || p.y[1] <= 0.0 { Control::Stop } else { Control::Continue },
    );
    let j_half = right.iter().position(|p| p.y[0] <= 0.5).ok_or(WaveError::TailNotReached(TAIL_SWITCH))?;
    if right[..j_half].iter().any(|p| p.y[1] <= 0.0) {
        return Err(WaveError::TailNotReached(TAIL_SWITCH));
    }
    right.truncate(j_half + 1);
    right.reverse();
    let z_right = half_crossing(&right[0], &right[1]).ok_or(WaveError::Integration(c))?;

    let z_first = left[0].t - z_left;
    let phi_first = left[0].y[0];
    // The tail origin sits at `-z_right` in the pinned frame.
    let z_last = -z_right;

    let n = (2.0 * options.z_max / options.dz).round() as usize;
    let dz = 2.0 * options.z_max / n as f64;
    let mut phi = Vec::with_capacity(n + 1);
    let mut phi_prime = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let z = -options.z_max + i as f64 * dz;
        let (v, d) = if z <= z_first {
            let v = phi_first * (l0 * (z - z_first)).exp();
            (v, l0 * v)
        } else if z >= z_last {
            tail(z - z_last)
        } else if z <= 0.0 {
            sample(&left, z + z_left)
        } else {
            sample(&right, z + z_right)
        };
        phi.push(v);
        phi_prime.push(d);
    }
    let phi_second: Vec<f64> = phi.iter().zip(&phi_prime).map(|(&v, &d)| c * d - nl.f(v)).collect();

    let left = phi[0];
    let right = 1.0 - phi[n];
    if left > 1e-6 || right > 1e-6 {
        return Err(WaveError::WindowTooSmall {
            z_max: options.z_max,
            left,
            right,
        });
    }

    let mu = l0.min(-l1);
    let sup = (0..=n)
        .map(|i| phi_prime[i] * (mu * (-options.z_max + i as f64 * dz).abs()).exp())
        .fold(0.0f64, f64::max);
    let sigma = (c * c - 4.0 * fp0).sqrt().min((c * c - 4.0 * fp1).sqrt()) / 2.0;
    let omega = (fp0.abs() / 4.0).min(fp1.abs() / 4.0).min(c * mu / 2.0).min(1.0);
    let decay = DecayConstants {
        lambda_left: l0,
        lambda_right: l1,
        mu,
        c_phi: 1.05 * sup,
        sigma,
        omega,
    };

    let mut residual = 0.0f64;
    for i in 2..n - 1 {
        let d2 = (-phi_prime[i + 2] + 8.0 * phi_prime[i + 1] - 8.0 * phi_prime[i - 1] + phi_prime[i - 2]) / (12.0 * dz);
        residual = residual.max((d2 - c * phi_prime[i] + nl.f(phi[i])).abs());
    }

    Ok(WaveProfile {
        c,
        z_max: options.z_max,
        dz,
        phi,
        phi_prime,
        phi_second,
        decay,
        residual,
    })
}

impl WaveProfile {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn decay(&self) -> &DecayConstants {
        &self.decay
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn z_at(&self, i: usize) -> f64 {
        -self.z_max + i as f64 * self.dz
    }

    pub fn phi_samples(&self) -> &[f64] {
        &self.phi
    }

    pub fn phi_prime_samples(&self) -> &[f64] {
        &self.phi_prime
    }

    /// Sup-norm residual of the wave equation on the grid.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `(φ(z), φ'(z))` anywhere on ℝ.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        let n = self.phi.len() - 1;
        let l0 = self.decay.lambda_left;
        let l1 = self.decay.lambda_right;
        if z <= -self.z_max {
            let v = self.phi[0] * (l0 * (z + self.z_max)).exp();
            return (v, l0 * v);
        }
        if z >= self.z_max {
            let g = (1.0 - self.phi[n]) * (l1 * (z - self.z_max)).exp();
            return (1.0 - g, -l1 * g);
        }
        let s = (z + self.z_max) / self.dz;
        let i = (s.floor() as usize).min(n - 1);
        let z0 = self.z_at(i);
        let z1 = z0 + self.dz;
        let v = hermite(z0, self.phi[i], self.phi_prime[i], z1, self.phi[i + 1], self.phi_prime[i + 1], z);
        let d = hermite(
            z0,
            self.phi_prime[i],
            self.phi_second[i],
            z1,
            self.phi_prime[i + 1],
            self.phi_second[i + 1],
            z,
        );
        (v, d)
    }

    pub fn phi(&self, z: f64) -> f64 {
        self.eval(z).0
    }

    pub fn phi_prime(&self, z: f64) -> f64 {
        self.eval(z).1
    }

    /// The `z` with `φ(z) = level`, for `level ∈ (0, 1)`.
    pub fn position_of(&self, level: f64) -> Option<f64> {
        if !(level > 0.0 && level < 1.0) {
            return None;
        }
        let mut lo = -self.z_max;
        let mut hi = self.z_max;
        while self.phi(lo) > level {
            lo *= 2.0;
            if lo < -1e6 {
                return None;
            }
        }
        while self.phi(hi) < level {
            hi *= 2.0;
            if hi > 1e6 {
                return None;
            }
        }
        bisect(|z| self.phi(z) - level, lo, hi, 1e-13)
    }

    /// Writes `z, phi, phi_prime` rows with a column header comment.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# columns: z,phi,phi_prime")?;
        for i in 0..self.phi.len() {
            writeln!(out, "{:.10},{:.16e},{:.16e}", self.z_at(i), self.phi[i], self.phi_prime[i])?;
        }
        Ok(())
    }
}

/// Constants shared by the lower and upper envelopes. The two constructions
/// use the same `ω`, `ρ`, `A` and `δ` formulas, so one set serves both.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub omega: f64,
    /// Largest `ρ` with `|f'(s) - f'(0)| ≤ ω` on `[0, ρ]` and
    /// `|f'(s) - f'(1)| ≤ ω` on `[1-ρ, 1]`.
    pub rho: f64,
    /// `φ ≤ ρ/2` left of `-A`, `φ ≥ 1 - ρ/2` right of `A`.
    pub a: f64,
    /// `min φ'` on `[-A, A]`.
    pub delta: f64,
    pub norm_f_prime: f64,
}

impl EnvelopeConstants {
    pub fn compute(nl: &Nonlinearity, wave: &WaveProfile) -> Result<Self, WaveError> {
        let omega = wave.decay().omega;
        let (fp0, fp1) = (nl.f_prime(0.0), nl.f_prime(1.0));
        let reach = |edge: f64, dir: f64, slope: f64| {
            let bad = |s: f64| (nl.f_prime(edge + dir * s) - slope).abs() - omega;
            let step = 1e-4;
            let mut s = 0.0;
            while s < 0.5 {
                if bad(s + step) > 0.0 {
                    return bisect(bad, s, s + step, 1e-14).unwrap_or(s);
                }
                s += step;
            }
            0.5
        };
        let rho = reach(0.0, 1.0, fp0).min(reach(1.0, -1.0, fp1));
        let z_lo = wave.position_of(rho / 2.0).ok_or(WaveError::Integration(wave.c()))?;
        let z_hi = wave.position_of(1.0 - rho / 2.0).ok_or(WaveError::Integration(wave.c()))?;
        let a = z_hi.max(-z_lo);
        let samples = 4000;
        let delta = (0..=samples)
            .map(|i| wave.phi_prime(-a + 2.0 * a * i as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            omega,
            rho,
            a,
            delta,
            norm_f_prime: nl.norm_f_prime(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::make_cubic;

    fn logistic(z: f64) -> f64 {
        1.0 / (1.0 + (-z / 2f64.sqrt()).exp())
    }

    #[test]
    fn cubic_speed_and_profile() {
        let nl = make_cubic(0.25).unwrap();
        let w = solve_wave(&nl, &WaveOptions::default()).unwrap();
        assert!((w.c() - 2f64.sqrt() / 4.0).abs() < 1e-9, "c = {}", w.c());
        let mut err = 0.0f64;
        for i in 0..w.len() {
            let z = w.z_at(i);
            err = err.max((w.phi_samples()[i] - logistic(z)).abs());
        }
        assert!(err < 1e-6, "sup error {err:e}");
        assert!((w.phi(0.0) - 0.5).abs() < 1e-12);
        assert!(w.residual() < 1e-7, "residual {:e}", w.residual());
    }

    #[test]
    fn decay_constants_for_cubic() {
        let nl = make_cubic(0.25).unwrap();
        let w = solve_wave(&nl, &WaveOptions::default()).unwrap();
        let d = w.decay();
        let r = 1.0 / 2f64.sqrt();
        assert!((d.lambda_left - r).abs() < 1e-8);
        assert!((d.lambda_right + r).abs() < 1e-8);
        assert!((d.omega - 0.0625).abs() < 1e-12);
        assert!(d.sigma > w.c() / 2.0);
        for i in 0..w.len() {
            let z = w.z_at(i);
            assert!(w.phi_prime_samples()[i] < d.c_phi * (-d.mu * z.abs()).exp());
        }
    }

    #[test]
    fn tails_are_continuous() {
        let nl = make_cubic(0.3).unwrap();
        let w = solve_wave(&nl, &WaveOptions::default()).unwrap();
        let e = 1e-9;
        for z in [-w.z_max(), w.z_max()] {
            let (a, da) = w.eval(z - e);
            let (b, db) = w.eval(z + e);
            assert!((a - b).abs() < 1e-12);
            assert!((da - db).abs() < 1e-10);
        }
        assert!(w.phi(-200.0) > 0.0 && w.phi(-200.0) < 1e-30);
    }

    #[test]
    fn bracket_must_separate() {
        let nl = make_cubic(0.25).unwrap();
        assert!(matches!(
            shooting_speed(&nl, 0.5, 1.0, 1e-8),
            Err(WaveError::NoDichotomy { .. })
        ));
    }

    #[test]
    fn envelope_constants_for_cubic() {
        let nl = make_cubic(0.25).unwrap();
        let w = solve_wave(&nl, &WaveOptions::default()).unwrap();
        let e = EnvelopeConstants::compute(&nl, &w).unwrap();
        // |3.5y - 3y²| = 1/16 near u = 1 binds first.
        let y = (3.5 - (3.5f64 * 3.5 - 12.0 / 16.0).sqrt()) / 6.0;
        assert!((e.rho - y).abs() < 1e-9, "rho = {}", e.rho);
        assert!(e.delta > 0.0 && e.delta < 0.01);
        assert!((w.phi(e.a) - (1.0 - e.rho / 2.0)).abs() < 1e-9 || (w.phi(-e.a) - e.rho / 2.0).abs() < 1e-9);
    }
}

//! Time integration of `u_t - u_xx + k u_x = f(u)` on a truncated line,
//! with front tracking and the monitors used to tell blocking from
//! propagation.

mod appendix;
mod classify;
mod envelope;
mod lyapunov;
mod run;

use serde::{Deserialize, Serialize};

use crate::drift::DriftTerm;
use crate::fv::WeightedOperator;
use crate::nonlinearity::Nonlinearity;
use crate::numerics::tridiag::solve_in_place;
use crate::wave::WaveProfile;

pub use appendix::{appendix_bounds, xi, AppendixParams, XiForm};
pub use classify::{classify, fit_beta, Classification, ClassifyWindows, Decision, FrontSample};
pub use envelope::{Envelopes, LowerEnvelope, UpperEnvelope};
pub use lyapunov::{lyapunov, max_cutoff_speed, LyapunovValue};
pub use run::{
    barrier_excess, run, write_field_csv, EnvelopeViolation, MonitorSample, MonitorToggles, RunOptions, RunOutput,
    RunReport,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("grid needs x_min < x_max and n >= 3 (got [{x_min}, {x_max}], n = {n})")]
    BadGrid { x_min: f64, x_max: f64, n: usize },
    #[error("initial front at x = {front} must lie at least {margin} right of the drift support and inside the grid")]
    BadStart { front: f64, margin: f64 },
    #[error("time stepping needs dt > 0 and duration > 0 (got dt = {dt}, duration = {duration})")]
    BadTime { dt: f64, duration: f64 },
    #[error("dt = {dt} exceeds the stability bound {bound}")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("solution blew up at t = {t} (|u| = {value})")]
    BlowUp { t: f64, value: f64 },
    #[error("u does not cross level {0}")]
    NoCrossing(f64),
    #[error("cutoff window [{lo}, {hi}] leaves the grid")]
    GridTooNarrow { lo: f64, hi: f64 },
}

/// Uniform grid on `[x_min, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for Grid1D {
    fn default() -> Self {
        Self {
            x_min: -150.0,
            x_max: 80.0,
            n: 8192,
        }
    }
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, SimError> {
        if !(x_min < x_max) || n < 3 {
            return Err(SimError::BadGrid { x_min, x_max, n });
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Nodes across the half-maximum width of `φ'`.
    pub fn points_per_wave_width(&self, wave: &WaveProfile) -> f64 {
        let peak = wave.phi_prime_samples().iter().copied().fold(0.0, f64::max);
        let above = wave.phi_prime_samples().iter().filter(|&&v| v >= 0.5 * peak).count();
        above as f64 * wave.dz() / self.dx()
    }
}

/// `u` at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
    pub step_count: u64,
}

/// Margin between the initial front and the drift support, in units of the
/// wave's decay length.
const START_MARGIN_DECAY_LENGTHS: f64 = 10.0;

/// `u(t0, x) = φ(x + c t0)`.
pub fn init_from_wave(wave: &WaveProfile, t0: f64, grid: &Grid1D, drift: &DriftTerm) -> Result<SimState, SimError> {
    let front = -wave.c() * t0;
    let margin = START_MARGIN_DECAY_LENGTHS / wave.decay().mu;
    if front < margin || front >= grid.x_max - margin || front <= grid.x_min + drift.x0() + margin {
        return Err(SimError::BadStart { front, margin });
    }
    let c = wave.c();
    let u = (0..grid.n).map(|i| wave.phi(grid.x(i) + c * t0)).collect();
    Ok(SimState { t: t0, u, step_count: 0 })
}

/// Spatial discretization of the drift term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Implicit centered diffusion, explicit first-order upwind advection.
    Upwind,
    /// Implicit finite volumes for `ψ⁻¹(ψ u_x)_x` with exact cell weights;
    /// resolves drifts much narrower than a cell.
    #[default]
    Weighted,
}

/// Precomputed IMEX step for a fixed grid, drift and time step.
#[derive(Clone, Debug)]
pub struct Stepper {
    scheme: Scheme,
    dt: f64,
    dx: f64,
    nl: Nonlinearity,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Right-boundary coupling added to the last interior row.
    boundary_gain: f64,
    k_nodes: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &Grid1D, drift: &DriftTerm, nl: &Nonlinearity, dt: f64, scheme: Scheme) -> Result<Self, SimError> {
        let dx = grid.dx();
        let bound = Self::stability_bound(grid, drift, nl, scheme);
        if !(dt > 0.0) || dt > bound {
            return Err(SimError::StabilityViolation { dt, bound });
        }
        let m = grid.n - 2;
        let (mut lower, mut diag, mut upper) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let boundary_gain;
        match scheme {
            Scheme::Upwind => {
                let r = dt / (dx * dx);
                lower.fill(-r);
                upper.fill(-r);
                diag.fill(1.0 + 2.0 * r);
                boundary_gain = r;
            }
            Scheme::Weighted => {
                let op = WeightedOperator::new(&grid.nodes(), drift);
                let (face, mass) = (op.face(), op.mass());
                for j in 0..m {
                    let i = j + 1;
                    lower[j] = -dt * face[i - 1] / mass[i];
                    upper[j] = -dt * face[i] / mass[i];
                    diag[j] = 1.0 - lower[j] - upper[j];
                }
                boundary_gain = -upper[m - 1];
            }
        }
        lower[0] = 0.0;
        upper[m - 1] = 0.0;
        let k_nodes = (0..grid.n).map(|i| drift.k(grid.x(i))).collect();
        Ok(Self {
            scheme,
            dt,
            dx,
            nl: nl.clone(),
            lower,
            diag,
            upper,
            boundary_gain,
            k_nodes,
            rhs: vec![0.0; m],
            scratch: vec![0.0; m],
        })
    }

    /// Largest admissible `dt`: `min{dx/(2 max|k|), 1/(2‖f'‖)}` for the
    /// upwind scheme, `1/(2‖f'‖)` for the weighted one.
    pub fn stability_bound(grid: &Grid1D, drift: &DriftTerm, nl: &Nonlinearity, scheme: Scheme) -> f64 {
        let reaction = 1.0 / (2.0 * nl.norm_f_prime());
        match scheme {
            Scheme::Upwind if drift.k_sup() > 0.0 => reaction.min(grid.dx() / (2.0 * drift.k_sup())),
            _ => reaction,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Advances `s` by one step; boundaries are held at 0 and 1.
    pub fn step(&mut self, s: &mut SimState) -> Result<(), SimError> {
        let n = s.u.len();
        let m = n - 2;
        let u = &s.u;
        let (dt, dx) = (self.dt, self.dx);
        for j in 0..m {
            let i = j + 1;
            let mut v = u[i] + dt * self.nl.f(u[i]);
            if self.scheme == Scheme::Upwind {
                let k = self.k_nodes[i];
                let grad = if k > 0.0 {
                    (u[i] - u[i - 1]) / dx
                } else {
                    (u[i + 1] - u[i]) / dx
                };
                v -= dt * k * grad;
            }
            self.rhs[j] = v;
        }
        self.rhs[m - 1] += self.boundary_gain * 1.0;
        if !solve_in_place(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch) {
            return Err(SimError::BlowUp { t: s.t, value: f64::NAN });
        }
        let mut worst = 0.0f64;
        for j in 0..m {
            let v = self.rhs[j];
            if !v.is_finite() || v.abs() > 2.0 {
                worst = if v.is_finite() { worst.max(v.abs()) } else { f64::INFINITY };
            }
            s.u[j + 1] = v;
        }
        s.u[0] = 0.0;
        s.u[n - 1] = 1.0;
        s.t += dt;
        s.step_count += 1;
        if worst > 0.0 {
            return Err(SimError::BlowUp { t: s.t, value: worst });
        }
        Ok(())
    }
}

/// One step from scratch; convenient for tests, use [`Stepper`] in loops.
pub fn step(
    s: &SimState,
    dt: f64,
    grid: &Grid1D,
    drift: &DriftTerm,
    nl: &Nonlinearity,
    scheme: Scheme,
) -> Result<SimState, SimError> {
    let mut stepper = Stepper::new(grid, drift, nl, dt, scheme)?;
    let mut next = s.clone();
    stepper.step(&mut next)?;
    Ok(next)
}

/// Leftmost crossing of `level`, linearly interpolated.
pub fn front_position(s: &SimState, grid: &Grid1D, level: f64) -> Result<f64, SimError> {
    let u = &s.u;
    if u[0] >= level {
        return Err(SimError::NoCrossing(level));
    }
    let i = u.iter().position(|&v| v >= level).ok_or(SimError::NoCrossing(level))?;
    let (a, b) = (u[i - 1], u[i]);
    Ok(grid.x(i - 1) + grid.dx() * (level - a) / (b - a))
}

/// Largest grid point `ζ < -x0` with `sup_{x ≤ ζ} u ≤ eps`.
pub fn left_tail_check(s: &SimState, grid: &Grid1D, x0: f64, eps: f64) -> Option<f64> {
    let mut best = None;
    let mut running = 0.0f64;
    for (i, &v) in s.u.iter().enumerate() {
        let x = grid.x(i);
        if x >= -x0 {
            break;
        }
        running = running.max(v);
        if running > eps {
            break;
        }
        best = Some(x);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{make_cubic, Reaction};
    use crate::wave::{solve_wave, WaveOptions};

    fn setup() -> (Nonlinearity, WaveProfile) {
        let nl = make_cubic(0.25).unwrap();
        let w = solve_wave(&nl, &WaveOptions::default()).unwrap();
        (nl, w)
    }

    #[test]
    fn initial_state_places_the_front() {
        let (_, w) = setup();
        let g = Grid1D::default();
        let d = DriftTerm::zero(1.0).unwrap();
        let s = init_from_wave(&w, -40.0 / w.c(), &g, &d).unwrap();
        assert!((front_position(&s, &g, 0.5).unwrap() - 40.0).abs() < 1e-3);
        assert!(s.u[0] < 1e-8);
        assert!(s.u.windows(2).all(|p| p[1] > p[0]));
        assert!(init_from_wave(&w, 10.0, &g, &d).is_err());
    }

    #[test]
    fn front_of_a_shifted_profile() {
        let (_, w) = setup();
        let g = Grid1D::new(-30.0, 30.0, 1201).unwrap();
        let s = SimState {
            t: 0.0,
            u: g.nodes().iter().map(|&x| w.phi(x - 5.0)).collect(),
            step_count: 0,
        };
        assert!((front_position(&s, &g, 0.5).unwrap() - 5.0).abs() < 1e-3);
        let zero = SimState {
            t: 0.0,
            u: vec![0.0; g.n],
            step_count: 0,
        };
        assert_eq!(front_position(&zero, &g, 0.5), Err(SimError::NoCrossing(0.5)));
    }

    #[test]
    fn constant_one_is_a_fixed_point_away_from_the_left_boundary() {
        let (nl, _) = setup();
        let g = Grid1D::new(-10.0, 10.0, 201).unwrap();
        let d = DriftTerm::gaussian_bump(0.5, 2.0, None, None).unwrap();
        for scheme in [Scheme::Upwind, Scheme::Weighted] {
            let mut s = SimState {
                t: 0.0,
                u: vec![1.0; g.n],
                step_count: 0,
            };
            s.u[0] = 0.0;
            let mut st = Stepper::new(&g, &d, &nl, 0.05, scheme).unwrap();
            st.step(&mut s).unwrap();
            // The Dirichlet zero is felt only through geometrically small terms.
            for i in g.n / 2..g.n {
                assert!((s.u[i] - 1.0).abs() < 1e-12, "{scheme:?} {i} {}", s.u[i]);
            }
        }
    }

    #[test]
    fn heat_step_keeps_values_between_boundaries() {
        let nl = Nonlinearity::new(Reaction::Zero, 0.5);
        let g = Grid1D::new(-20.0, 20.0, 401).unwrap();
        let d = DriftTerm::zero(1.0).unwrap();
        let mut s = SimState {
            t: 0.0,
            u: g.nodes().iter().map(|&x| (-x * x).exp()).collect(),
            step_count: 0,
        };
        s.u[g.n - 1] = 1.0;
        let peak = 1.0;
        let mut st = Stepper::new(&g, &d, &nl, 0.1, Scheme::Upwind).unwrap();
        for _ in 0..20 {
            st.step(&mut s).unwrap();
        }
        let interior_max = s.u[..g.n / 2 + 10].iter().copied().fold(0.0, f64::max);
        assert!(interior_max < peak);
        assert!(s.u.iter().all(|&v| v >= 0.0 && v <= 1.0));
    }

    #[test]
    fn stability_bound_is_enforced() {
        let (nl, _) = setup();
        let g = Grid1D::new(-10.0, 10.0, 201).unwrap();
        let d = DriftTerm::mollified_indicator(5.0, 0.5, 0.05).unwrap();
        assert!(matches!(
            Stepper::new(&g, &d, &nl, 0.5, Scheme::Upwind),
            Err(SimError::StabilityViolation { .. })
        ));
        assert!(Stepper::new(&g, &d, &nl, 0.5, Scheme::Weighted).is_ok());
        assert!(Stepper::new(&g, &d, &nl, 1.0, Scheme::Weighted).is_err());
    }

    #[test]
    fn left_tail_of_a_wave() {
        let (_, w) = setup();
        let g = Grid1D::new(-60.0, 40.0, 2001).unwrap();
        let t = -20.0 / w.c();
        let s = SimState {
            t,
            u: g.nodes().iter().map(|&x| w.phi(x + w.c() * t)).collect(),
            step_count: 0,
        };
        let eps = 1e-8;
        let zeta = left_tail_check(&s, &g, 1.0, eps).unwrap();
        let expected = w.position_of(eps).unwrap() - w.c() * t;
        assert!((zeta - expected).abs() <= g.dx() + 1e-9, "{zeta} vs {expected}");
        let ones = SimState {
            t: 0.0,
            u: vec![1.0; g.n],
            step_count: 0,
        };
        assert_eq!(left_tail_check(&ones, &g, 1.0, eps), None);
    }
}

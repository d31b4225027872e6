//! A full run: stepping, sampling the front, monitors and the final report.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::appendix::{appendix_bounds, AppendixParams};
use super::classify::{classify, fit_beta, Classification, ClassifyWindows, FrontSample};
use super::envelope::Envelopes;
use super::lyapunov::{lyapunov, max_cutoff_speed, LyapunovValue};
use super::{front_position, init_from_wave, left_tail_check, Grid1D, Scheme, SimError, SimState, Stepper};
use crate::drift::DriftTerm;
use crate::nonlinearity::Nonlinearity;
use crate::supersolution::StationarySupersolution;
use crate::wave::{EnvelopeConstants, WaveProfile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonitorToggles {
    pub lyapunov: bool,
    pub envelopes: bool,
    pub decay: bool,
    pub appendix: Option<AppendixParams>,
}

impl Default for MonitorToggles {
    fn default() -> Self {
        Self {
            lyapunov: true,
            envelopes: true,
            decay: true,
            appendix: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub grid: Grid1D,
    pub scheme: Scheme,
    pub dt: f64,
    /// Start time; when absent the run starts with the front at
    /// `front_start`, i.e. `t0 = -front_start/c`.
    pub t0: Option<f64>,
    pub front_start: f64,
    /// Length of the run; it ends at `t0 + duration`.
    #[serde(alias = "T_end")]
    pub duration: f64,
    pub monitor_every: f64,
    /// Absolute times at which the field is kept.
    pub checkpoints: Vec<f64>,
    pub monitors: MonitorToggles,
    /// Lyapunov cutoff speed; defaults to 0.9 of the admissible maximum.
    pub cutoff_speed: Option<f64>,
    /// Slack allowed on the envelope and appendix sandwiches.
    pub tol_env: f64,
    pub windows: ClassifyWindows,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            grid: Grid1D::default(),
            scheme: Scheme::Weighted,
            dt: 0.0025,
            t0: None,
            front_start: 40.0,
            duration: 150.0,
            monitor_every: 1.0,
            checkpoints: Vec::new(),
            monitors: MonitorToggles::default(),
            cutoff_speed: None,
            tol_env: 1e-4,
            windows: ClassifyWindows::default(),
        }
    }
}

/// Monitors recorded at one sampling time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSample {
    pub t: f64,
    pub l: Option<f64>,
    pub q: Option<f64>,
    pub q_floor: Option<f64>,
    /// `min_x (u - u⁻)`.
    pub lower_margin: Option<f64>,
    /// `min_x (u⁺ - u)`.
    pub upper_margin: Option<f64>,
    /// Smallest constant in the moving-frame decay bounds.
    pub decay_constant: Option<f64>,
    pub appendix_lower_margin: Option<f64>,
    pub appendix_upper_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    pub t: f64,
    pub x: f64,
    pub bound: String,
    pub magnitude: f64,
}

/// Machine-readable outcome of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub classification: Classification,
    pub beta_shift: Option<f64>,
    pub c: f64,
    pub measured_speed: f64,
    pub front_variation: f64,
    pub beta_variation: f64,
    pub sup_left_of_stall: f64,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub dx: f64,
    pub steps: u64,
    pub scheme: Scheme,
    /// Largest excursion of `u` outside `[0, 1]`.
    pub max_principle_excess: f64,
    /// Smallest `u(t+dt, x) - u(t, x)` over the run.
    pub monotonicity_min: f64,
    pub envelopes: Envelopes,
    /// Times from which the envelopes are monitored.
    pub t_minus: Option<f64>,
    pub t_plus: Option<f64>,
    pub envelope_violations: Vec<EnvelopeViolation>,
    pub appendix_violations: usize,
    pub cutoff_speed: f64,
    /// `ζ` with `sup_{x ≤ ζ} u ≤ θ/2` at the end of the run.
    pub final_left_tail: Option<f64>,
    pub front_trace: Vec<FrontSample>,
    pub lyapunov_trace: Vec<LyapunovValue>,
}

pub struct RunOutput {
    pub report: RunReport,
    pub monitors: Vec<MonitorSample>,
    pub checkpoints: Vec<SimState>,
    pub final_state: SimState,
}

impl RunOutput {
    pub fn write_front_trace_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# columns: t,front,beta_fit")?;
        for p in &self.report.front_trace {
            writeln!(out, "{:.6},{:.10},{:.10}", p.t, p.front, p.beta_fit)?;
        }
        Ok(())
    }

    pub fn write_monitors_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "# columns: t,L,Q,Q_floor,lower_margin,upper_margin,decay_constant,appendix_lower_margin,appendix_upper_margin"
        )?;
        let f = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |v| format!("{v:.10e}"));
        for m in &self.monitors {
            writeln!(
                out,
                "{:.6},{},{},{},{},{},{},{},{}",
                m.t,
                f(m.l),
                f(m.q),
                f(m.q_floor),
                f(m.lower_margin),
                f(m.upper_margin),
                f(m.decay_constant),
                f(m.appendix_lower_margin),
                f(m.appendix_upper_margin)
            )?;
        }
        Ok(())
    }
}

/// Writes a field as `x,u` rows.
pub fn write_field_csv<W: Write>(s: &SimState, grid: &Grid1D, mut out: W) -> io::Result<()> {
    writeln!(out, "# columns: x,u")?;
    writeln!(out, "# t = {:.6}", s.t)?;
    for (i, v) in s.u.iter().enumerate() {
        writeln!(out, "{:.10},{:.12e}", grid.x(i), v)?;
    }
    Ok(())
}

/// `max_x (u - w̃_∞)` and where it is attained.
pub fn barrier_excess(s: &SimState, grid: &Grid1D, barrier: &StationarySupersolution) -> (f64, f64) {
    let mut worst = (f64::NEG_INFINITY, grid.x_min);
    for (i, &u) in s.u.iter().enumerate() {
        let x = grid.x(i);
        let e = u - barrier.eval(x);
        if e > worst.0 {
            worst = (e, x);
        }
    }
    worst
}

/// Smallest `C` with `|1-u|, |u_z| ≤ C(e^{(c/2-σ)z} + e^{-ωt})` for `z > 0`
/// and `|u|, |u_z| ≤ C(e^{(c/2+σ)z} + e^{-ωt})` for `z < 0`, `z = x + ct`.
fn decay_constant(s: &SimState, grid: &Grid1D, wave: &WaveProfile) -> f64 {
    let c = wave.c();
    let d = wave.decay();
    let time_term = (-d.omega * s.t).exp();
    let dx = grid.dx();
    let mut worst = 0.0f64;
    for i in 1..s.u.len() - 1 {
        let z = grid.x(i) + c * s.t;
        let uz = (s.u[i + 1] - s.u[i - 1]) / (2.0 * dx);
        let (value, rate) = if z > 0.0 {
            ((1.0 - s.u[i]).abs(), 0.5 * c - d.sigma)
        } else {
            (s.u[i].abs(), 0.5 * c + d.sigma)
        };
        let bound = (rate * z).exp() + time_term;
        worst = worst.max(value.max(uz.abs()) / bound);
    }
    worst
}

/// Tries to anchor at every monitor time from `earliest` on until the
/// resulting envelope is admissible.
struct Anchoring<E> {
    earliest: f64,
    envelope: Option<E>,
    done: bool,
}

impl<E> Anchoring<E> {
    fn new(earliest: f64) -> Self {
        Self {
            earliest,
            envelope: None,
            done: false,
        }
    }

    fn offer(&mut self, t: f64, make: impl FnOnce() -> Option<E>, admissible: impl Fn(&E) -> bool) {
        if self.done || t < self.earliest {
            return;
        }
        if let Some(e) = make() {
            self.done = admissible(&e);
            self.envelope = Some(e);
        }
    }

    /// The envelope to monitor against: only admissible ones count.
    fn active(&self) -> Option<&E> {
        if self.done {
            self.envelope.as_ref()
        } else {
            None
        }
    }
}

/// Runs the simulation and gathers every monitor.
pub fn run(
    nl: &Nonlinearity,
    drift: &DriftTerm,
    wave: &WaveProfile,
    options: &RunOptions,
) -> Result<RunOutput, SimError> {
    if !(options.dt > 0.0 && options.duration > 0.0) {
        return Err(SimError::BadTime {
            dt: options.dt,
            duration: options.duration,
        });
    }
    let grid = &options.grid;
    let c = wave.c();
    let t0 = options.t0.unwrap_or(-options.front_start / c);
    let mut state = init_from_wave(wave, t0, grid, drift)?;
    let steps = (options.duration / options.dt).ceil().max(1.0) as u64;
    let dt = options.duration / steps as f64;
    let mut stepper = Stepper::new(grid, drift, nl, dt, options.scheme)?;
    let stride = ((options.monitor_every / dt).round() as u64).max(1);
    let cutoff_speed = options
        .cutoff_speed
        .unwrap_or_else(|| 0.9 * max_cutoff_speed(c, wave.decay().omega));
    let env_consts = if options.monitors.envelopes {
        EnvelopeConstants::compute(nl, wave).ok()
    } else {
        None
    };
    let (mut lower_anchor, mut upper_anchor) = match &env_consts {
        Some(k) => (
            Anchoring::new(Envelopes::earliest_lower_anchor(wave, drift, k)),
            Anchoring::new(Envelopes::earliest_upper_anchor(wave, drift, k)),
        ),
        None => (Anchoring::new(f64::INFINITY), Anchoring::new(f64::INFINITY)),
    };

    let mut front_trace = Vec::new();
    let mut lyapunov_trace = Vec::new();
    let mut monitors = Vec::new();
    let mut violations = Vec::new();
    let mut appendix_violations = 0usize;
    let mut checkpoints = Vec::new();
    let mut pending: Vec<f64> = options.checkpoints.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let mut excess = 0.0f64;
    let mut monotonicity_min = f64::INFINITY;
    let mut previous = state.u.clone();

    for step in 0..=steps {
        if step > 0 {
            previous.copy_from_slice(&state.u);
            stepper.step(&mut state)?;
            for (&new, &old) in state.u.iter().zip(&previous) {
                monotonicity_min = monotonicity_min.min(new - old);
                excess = excess.max(-new).max(new - 1.0);
            }
        }
        while pending.last().is_some_and(|&tc| state.t >= tc - 0.5 * dt) {
            pending.pop();
            checkpoints.push(state.clone());
        }
        if step % stride != 0 && step != steps {
            continue;
        }
        let mut sample = MonitorSample {
            t: state.t,
            l: None,
            q: None,
            q_floor: None,
            lower_margin: None,
            upper_margin: None,
            decay_constant: None,
            appendix_lower_margin: None,
            appendix_upper_margin: None,
        };
        let mut beta = 0.0;
        if let Ok(front) = front_position(&state, grid, 0.5) {
            let (b, misfit) = fit_beta(&state, grid, wave, front, options.windows.beta_range);
            beta = b;
            front_trace.push(FrontSample {
                t: state.t,
                front,
                beta_fit: b,
                misfit,
            });
        }
        if options.monitors.lyapunov {
            if let Ok(Some(v)) = lyapunov(&state, grid, wave, nl, cutoff_speed, beta) {
                sample.l = Some(v.l);
                sample.q = Some(v.q);
                sample.q_floor = Some(v.q_floor);
                lyapunov_trace.push(v);
            }
        }
        if options.monitors.decay && state.t > 0.0 {
            sample.decay_constant = Some(decay_constant(&state, grid, wave));
        }
        if let Some(k) = &env_consts {
            lower_anchor.offer(
                state.t,
                || Envelopes::anchor_lower(&state, grid, wave, drift, k),
                |e| e.admissible,
            );
            upper_anchor.offer(
                state.t,
                || Envelopes::anchor_upper(&state, grid, wave, drift, k),
                |e| e.admissible,
            );
            let margin = |eval: &dyn Fn(f64) -> f64, sign: f64| {
                let mut worst = (f64::INFINITY, 0.0);
                for (i, &u) in state.u.iter().enumerate() {
                    let x = grid.x(i);
                    let m = sign * (u - eval(x));
                    if m < worst.0 {
                        worst = (m, x);
                    }
                }
                worst
            };
            if let Some(e) = lower_anchor.active() {
                let lo = margin(&|x| e.eval(wave, state.t, x), 1.0);
                sample.lower_margin = Some(lo.0);
                if lo.0 < -options.tol_env {
                    violations.push(EnvelopeViolation {
                        t: state.t,
                        x: lo.1,
                        bound: "lower".to_string(),
                        magnitude: -lo.0,
                    });
                }
            }
            if let Some(e) = upper_anchor.active() {
                let hi = margin(&|x| e.eval(wave, state.t, x), -1.0);
                sample.upper_margin = Some(hi.0);
                if hi.0 < -options.tol_env {
                    violations.push(EnvelopeViolation {
                        t: state.t,
                        x: hi.1,
                        bound: "upper".to_string(),
                        magnitude: -hi.0,
                    });
                }
            }
        }
        if let Some(p) = options.monitors.appendix {
            if state.t <= p.horizon {
                let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
                let mut defined = true;
                for (i, &u) in state.u.iter().enumerate() {
                    match appendix_bounds(state.t, grid.x(i), wave, &p) {
                        Some((wp, wm)) => {
                            lo = lo.min(u - wm);
                            hi = hi.min(wp - u);
                        }
                        None => {
                            defined = false;
                            break;
                        }
                    }
                }
                if defined {
                    sample.appendix_lower_margin = Some(lo);
                    sample.appendix_upper_margin = Some(hi);
                    if lo < -options.tol_env || hi < -options.tol_env {
                        appendix_violations += 1;
                    }
                }
            }
        }
        monitors.push(sample);
    }

    let decision = classify(&front_trace, &state, grid, wave, nl.theta(), &options.windows);
    let envelopes = Envelopes {
        lower: lower_anchor.active().copied(),
        upper: upper_anchor.active().copied(),
    };
    let report = RunReport {
        classification: decision.classification,
        beta_shift: decision.beta_shift,
        c,
        measured_speed: decision.measured_speed,
        front_variation: decision.front_variation,
        beta_variation: decision.beta_variation,
        sup_left_of_stall: decision.sup_left_of_stall,
        t0,
        t_end: state.t,
        dt,
        dx: grid.dx(),
        steps,
        scheme: options.scheme,
        max_principle_excess: excess,
        monotonicity_min: if monotonicity_min.is_finite() { monotonicity_min } else { 0.0 },
        t_minus: envelopes.lower.map(|e| e.t_start),
        t_plus: envelopes.upper.map(|e| e.t_start),
        envelopes,
        envelope_violations: violations,
        appendix_violations,
        cutoff_speed,
        final_left_tail: left_tail_check(&state, grid, drift.x0(), nl.theta() / 2.0),
        front_trace,
        lyapunov_trace,
    };
    Ok(RunOutput {
        report,
        monitors,
        checkpoints,
        final_state: state,
    })
}

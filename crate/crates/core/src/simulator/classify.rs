//! Front traces, shift fits and the Blocked / Propagating decision.

use serde::{Deserialize, Serialize};

use super::{Grid1D, SimState};
use crate::numerics::optimize::golden_section;
use crate::wave::WaveProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Blocked,
    Propagating,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub t: f64,
    pub front: f64,
    /// `argmin_s ‖u(t,·) - φ(· + ct + s)‖_∞`.
    pub beta_fit: f64,
    /// The misfit at `beta_fit`.
    pub misfit: f64,
}

/// Thresholds of the decision rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyWindows {
    /// Fraction of the run, counted from the end, used for the decision.
    pub trailing_fraction: f64,
    /// Allowed relative deviation of the front speed from `c`.
    pub speed_tolerance: f64,
    /// Distance left of the stalled front beyond which `u < θ/2` must hold.
    pub stall_clearance: f64,
    /// Half-width of the search interval for the shift.
    pub beta_range: f64,
}

impl Default for ClassifyWindows {
    fn default() -> Self {
        Self {
            trailing_fraction: 0.5,
            speed_tolerance: 0.05,
            stall_clearance: 10.0,
            beta_range: 20.0,
        }
    }
}

/// Best shift `s` in `[-range, range]` aligning `u` with `φ(x + ct + s)`.
///
/// The misfit is unimodal only near the true shift, so the golden-section
/// search runs on a window of a few wave widths around the shift implied by
/// the front position, clipped to the allowed range.
pub fn fit_beta(s: &SimState, grid: &Grid1D, wave: &WaveProfile, front: f64, range: f64) -> (f64, f64) {
    let c = wave.c();
    let misfit = |shift: f64| {
        let mut worst = 0.0f64;
        let base = c * s.t + shift;
        for (i, &v) in s.u.iter().enumerate() {
            worst = worst.max((v - wave.phi(grid.x(i) + base)).abs());
        }
        worst
    };
    let seed = (-(front + c * s.t)).clamp(-range, range);
    let lo = (seed - 3.0).max(-range);
    let hi = (seed + 3.0).min(range);
    golden_section(misfit, lo, hi, 1e-6, 200)
}

fn linear_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    sxy / sxx
}

fn spread(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    hi - lo
}

/// Outcome of [`classify`] with the statistics that decided it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub classification: Classification,
    pub beta_shift: Option<f64>,
    pub measured_speed: f64,
    pub front_variation: f64,
    pub beta_variation: f64,
    pub sup_left_of_stall: f64,
}

/// Blocked if the trailing front moves by less than `dx` and `u < θ/2`
/// well left of it; Propagating if the trailing speed is `c` within the
/// tolerance and the fitted shift varies by less than `dx`.
pub fn classify(
    trace: &[FrontSample],
    last: &SimState,
    grid: &Grid1D,
    wave: &WaveProfile,
    theta: f64,
    windows: &ClassifyWindows,
) -> Decision {
    let dx = grid.dx();
    let stall = trace.last().map(|p| p.front).unwrap_or(f64::NAN);
    let sup_left_of_stall = last
        .u
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.x(*i) <= stall - windows.stall_clearance)
        .fold(0.0f64, |m, (_, &v)| m.max(v));
    let mut decision = Decision {
        classification: Classification::Undetermined,
        beta_shift: None,
        measured_speed: f64::NAN,
        front_variation: f64::NAN,
        beta_variation: f64::NAN,
        sup_left_of_stall,
    };
    if trace.len() < 3 {
        return decision;
    }
    let (t_first, t_last) = (trace[0].t, trace[trace.len() - 1].t);
    let cut = t_last - windows.trailing_fraction * (t_last - t_first);
    let tail: Vec<&FrontSample> = trace.iter().filter(|p| p.t >= cut).collect();
    if tail.len() < 3 {
        return decision;
    }
    let ts: Vec<f64> = tail.iter().map(|p| p.t).collect();
    let fs: Vec<f64> = tail.iter().map(|p| p.front).collect();
    decision.measured_speed = -linear_slope(&ts, &fs);
    decision.front_variation = spread(fs.iter().copied());
    decision.beta_variation = spread(tail.iter().map(|p| p.beta_fit));

    if decision.front_variation < dx && sup_left_of_stall < theta / 2.0 {
        decision.classification = Classification::Blocked;
    } else if (decision.measured_speed - wave.c()).abs() <= windows.speed_tolerance * wave.c()
        && decision.beta_variation < dx
    {
        decision.classification = Classification::Propagating;
        decision.beta_shift = Some(tail[tail.len() - 1].beta_fit);
    }
    decision
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::make_cubic;
    use crate::wave::{solve_wave, WaveOptions};

    #[test]
    fn shift_of_an_exact_translate() {
        let nl = make_cubic(0.25).unwrap();
        let w = solve_wave(&nl, &WaveOptions::default()).unwrap();
        let g = Grid1D::new(-60.0, 60.0, 2401).unwrap();
        let (t, beta) = (-30.0, 1.7);
        let s = SimState {
            t,
            u: g.nodes().iter().map(|&x| w.phi(x + w.c() * t + beta)).collect(),
            step_count: 0,
        };
        let front = super::super::front_position(&s, &g, 0.5).unwrap();
        let (fit, misfit) = fit_beta(&s, &g, &w, front, 20.0);
        assert!((fit - beta).abs() < 1e-5, "{fit}");
        assert!(misfit < 1e-6);
    }

    #[test]
    fn synthetic_traces() {
        let nl = make_cubic(0.25).unwrap();
        let w = solve_wave(&nl, &WaveOptions::default()).unwrap();
        let g = Grid1D::new(-50.0, 50.0, 1001).unwrap();
        let zeros = SimState {
            t: 0.0,
            u: vec![0.0; g.n],
            step_count: 0,
        };
        let moving: Vec<FrontSample> = (0..100)
            .map(|i| {
                let t = i as f64;
                FrontSample {
                    t,
                    front: 20.0 - w.c() * t,
                    beta_fit: 0.3,
                    misfit: 0.0,
                }
            })
            .collect();
        let d = classify(&moving, &zeros, &g, &w, 0.25, &ClassifyWindows::default());
        assert_eq!(d.classification, Classification::Propagating);
        assert_eq!(d.beta_shift, Some(0.3));

        let stalled: Vec<FrontSample> = (0..100)
            .map(|i| FrontSample {
                t: i as f64,
                front: 1.0 + 5.0 * (-(i as f64)).exp(),
                beta_fit: -(i as f64),
                misfit: 0.5,
            })
            .collect();
        let d = classify(&stalled, &zeros, &g, &w, 0.25, &ClassifyWindows::default());
        assert_eq!(d.classification, Classification::Blocked);
    }
}

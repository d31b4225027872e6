//! Newton solver for `-w'' + k w' = f(w)` on `(R, a)` and the continuation
//! `R → -∞`.

use serde::{Deserialize, Serialize};

use super::grid::{clustered_grid, GridOptions};
use super::{functional_j_difference, h1_psi_distance, StationarySupersolution, SupersolutionError, WeightedFunction};
use crate::drift::DriftTerm;
use crate::fv::WeightedOperator;
use crate::nonlinearity::Nonlinearity;
use crate::numerics::tridiag::solve_in_place;
use crate::parallel::map_parallel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BvpOptions {
    /// Target for `sup |-w'' + k w' - f(w)|` over the interior nodes.
    pub tol: f64,
    pub max_iter: usize,
    pub grid: GridOptions,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 50,
            grid: GridOptions::default(),
        }
    }
}

/// A converged `w_R` with its diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BvpSolution {
    pub w: WeightedFunction,
    pub residual: f64,
    pub iterations: usize,
    /// `‖w - w₀‖_{H¹((R,a),ψdx)}`.
    pub h1_psi_distance: f64,
    pub delta: f64,
    /// `J(w) - J(w₀)` on `(R, a)`.
    pub energy_gap: f64,
    /// Whether `-tol ≤ w ≤ 1 + tol` holds on the grid.
    pub in_unit_interval: bool,
}

struct NewtonOutcome {
    w: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Scaled residual `(r_i / m_i)` at the interior nodes, zero at the ends.
fn residual(op: &WeightedOperator, nl: &Nonlinearity, w: &[f64], out: &mut [f64]) {
    let n = w.len();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for i in 1..n - 1 {
        out[i] = -op.apply(w, i) - nl.f(w[i]);
    }
}

/// `∫ r² dx` over the dual cells; Newton directions descend on it.
fn merit(x: &[f64], r: &[f64]) -> f64 {
    let n = x.len();
    (1..n - 1).map(|i| r[i] * r[i] * 0.5 * (x[i + 1] - x[i - 1])).sum()
}

fn sup_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn newton(op: &WeightedOperator, nl: &Nonlinearity, mut w: Vec<f64>, tol: f64, max_iter: usize) -> NewtonOutcome {
    let n = w.len();
    let x = op.nodes();
    let face = op.face();
    let mass = op.mass();
    let mut r = vec![0.0; n];
    residual(op, nl, &w, &mut r);
    let mut phi = merit(x, &r);
    let m = n - 2;
    let (mut lower, mut diag, mut upper) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut rhs = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let mut trial = w.clone();
    let mut r_trial = vec![0.0; n];
    for iter in 0..max_iter {
        let res = sup_norm(&r);
        if res <= tol {
            return NewtonOutcome {
                w,
                residual: res,
                iterations: iter,
                converged: true,
            };
        }
        // Unknowns are the interior nodes; the rows are scaled by 1/m_i.
        for j in 0..m {
            let i = j + 1;
            lower[j] = -face[i - 1] / mass[i];
            upper[j] = -face[i] / mass[i];
            diag[j] = (face[i - 1] + face[i]) / mass[i] - nl.f_prime(w[i]);
            rhs[j] = -r[i];
        }
        if !solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch) {
            break;
        }
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-10 {
            for j in 0..m {
                trial[j + 1] = w[j + 1] + step * rhs[j];
            }
            residual(op, nl, &trial, &mut r_trial);
            let phi_trial = merit(x, &r_trial);
            if phi_trial.is_finite() && phi_trial <= (1.0 - 1e-4 * step) * phi {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        std::mem::swap(&mut w, &mut trial);
        std::mem::swap(&mut r, &mut r_trial);
        phi = merit(x, &r);
    }
    let res = sup_norm(&r);
    NewtonOutcome {
        converged: res <= tol,
        w,
        residual: res,
        iterations: max_iter,
    }
}

/// Solves for `w_R` from the initial guess `w₀`.
///
/// When Newton fails from `w₀`, a second attempt starts from a ramp that
/// reaches 1 a few units right of `R`; if that converges the far-away
/// solution is reported as [`SupersolutionError::MinimizerEscaped`].
pub fn solve_w_r(
    d: &DriftTerm,
    nl: &Nonlinearity,
    r: f64,
    a: f64,
    delta: f64,
    options: &BvpOptions,
) -> Result<BvpSolution, SupersolutionError> {
    let x0 = d.x0();
    if !(r < -x0 - 1.0) || !(a > 0.0) {
        return Err(SupersolutionError::BadDomain { r, x0, a });
    }
    let x = clustered_grid(r, x0, a, &options.grid);
    let op = WeightedOperator::new(&x, d);
    let w0 = WeightedFunction::reference(&x);

    let mut outcome = newton(&op, nl, w0.w.clone(), options.tol, options.max_iter);
    if !outcome.converged {
        let ramp: Vec<f64> = x.iter().map(|&v| ((v - r) / 5.0).min(1.0)).collect();
        let retry = newton(&op, nl, ramp, options.tol, options.max_iter);
        if !retry.converged {
            return Err(SupersolutionError::NonConvergence {
                residual: outcome.residual,
                iterations: outcome.iterations,
                last: Box::new(WeightedFunction::new(x, outcome.w)),
            });
        }
        outcome = retry;
    }

    let w = WeightedFunction::new(x, outcome.w);
    let distance = h1_psi_distance(&w, &w0, d, r, a);
    let energy_gap = functional_j_difference(&w, &w0, d, nl, r, a);
    let slack = options.tol.max(1e-12);
    let in_unit_interval = w.w.iter().all(|&v| v >= -slack && v <= 1.0 + slack);
    let solution = BvpSolution {
        w,
        residual: outcome.residual,
        iterations: outcome.iterations,
        h1_psi_distance: distance,
        delta,
        energy_gap,
        in_unit_interval,
    };
    if distance > delta {
        return Err(SupersolutionError::MinimizerEscaped {
            distance,
            delta,
            solution: Box::new(solution),
        });
    }
    Ok(solution)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationOptions {
    /// First (closest) left endpoint.
    pub r_start: f64,
    /// Number of endpoints `r_start · 2^j`.
    pub levels: usize,
    /// Bound for `sup_{x ≤ R/2} w` and for the difference of successive
    /// solutions.
    pub tol: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            r_start: -30.0,
            levels: 4,
            tol: 1e-8,
        }
    }
}

/// One endpoint of the continuation ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderStep {
    pub r: f64,
    pub residual: f64,
    pub iterations: usize,
    pub h1_psi_distance: f64,
    pub energy_gap: f64,
    /// `sup_{x ≤ R/2} w`.
    pub sup_left: f64,
    /// Largest difference to the previous solution on its grid.
    pub difference_to_previous: Option<f64>,
}

/// Least-squares fit of `ln w = ln A + rate·x` over `[0.75 R, 0.5 R]`.
fn fit_tail(w: &WeightedFunction) -> Option<(f64, f64)> {
    let r = w.r();
    let pts: Vec<(f64, f64)> = w
        .x
        .iter()
        .zip(&w.w)
        .filter(|(&x, &v)| x >= 0.75 * r && x <= 0.5 * r && v > 0.0)
        .map(|(&x, &v)| (x, v.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let rate = sxy / sxx;
    Some((rate, (my - rate * mx).exp()))
}

fn sup_left(w: &WeightedFunction) -> f64 {
    let cut = 0.5 * w.r();
    w.x.iter().zip(&w.w).filter(|(&x, _)| x <= cut).fold(0.0f64, |m, (_, &v)| m.max(v.abs()))
}

/// Solves on `R = r_start·2^j` (concurrently), checks that the tails vanish
/// and that successive solutions agree, and packages the last one.
pub fn continue_to_minus_infinity(
    d: &DriftTerm,
    nl: &Nonlinearity,
    a: f64,
    delta: f64,
    bvp: &BvpOptions,
    options: &ContinuationOptions,
) -> Result<StationarySupersolution, SupersolutionError> {
    let rs: Vec<f64> = (0..options.levels.max(2)).map(|j| options.r_start * 2f64.powi(j as i32)).collect();
    let results = map_parallel(&rs, |&r| solve_w_r(d, nl, r, a, delta, bvp));

    let mut solutions = Vec::with_capacity(rs.len());
    for (r, res) in rs.iter().zip(results) {
        match res {
            Ok(s) => solutions.push(s),
            Err(SupersolutionError::MinimizerEscaped { solution, .. }) => {
                let left = sup_left(&solution.w);
                if left > options.tol {
                    return Err(SupersolutionError::TailNotDecaying {
                        r: *r,
                        x_max: 0.5 * r,
                        sup_left: left,
                    });
                }
                solutions.push(*solution);
            }
            Err(e) => return Err(e),
        }
    }

    let mut ladder = Vec::with_capacity(solutions.len());
    for (j, s) in solutions.iter().enumerate() {
        let difference_to_previous = (j > 0).then(|| {
            let prev = &solutions[j - 1].w;
            prev.x.iter().zip(&prev.w).fold(0.0f64, |m, (&x, &v)| m.max((s.w.eval(x) - v).abs()))
        });
        ladder.push(LadderStep {
            r: s.w.r(),
            residual: s.residual,
            iterations: s.iterations,
            h1_psi_distance: s.h1_psi_distance,
            energy_gap: s.energy_gap,
            sup_left: sup_left(&s.w),
            difference_to_previous,
        });
    }

    let last = ladder.last().unwrap();
    if last.sup_left > options.tol {
        return Err(SupersolutionError::TailNotDecaying {
            r: last.r,
            x_max: 0.5 * last.r,
            sup_left: last.sup_left,
        });
    }
    let diff = last.difference_to_previous.unwrap_or(f64::INFINITY);
    if diff >= options.tol {
        return Err(SupersolutionError::ContinuationStalled {
            r: last.r,
            difference: diff,
        });
    }
    let final_solution = solutions.pop().unwrap();
    if final_solution.h1_psi_distance > delta {
        return Err(SupersolutionError::MinimizerEscaped {
            distance: final_solution.h1_psi_distance,
            delta,
            solution: Box::new(final_solution),
        });
    }
    let (tail_rate, tail_amplitude) = fit_tail(&final_solution.w).unwrap_or((0.0, 0.0));
    Ok(StationarySupersolution {
        h1_psi_distance: final_solution.h1_psi_distance,
        delta_used: delta,
        tail_rate,
        tail_amplitude,
        ladder,
        w: final_solution.w,
    })
}

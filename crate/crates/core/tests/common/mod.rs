//! Helpers shared by the integration tests and the acceptance target.
#![allow(dead_code)]

use frontlab_core::drift::DriftTerm;
use frontlab_core::simulator::{Grid1D, Scheme, SimState, Stepper};
use frontlab_core::{make_cubic, Nonlinearity, Reaction};

pub fn cubic() -> Nonlinearity {
    make_cubic(0.25).unwrap()
}

/// `f ≡ 0`: isolates the transport part of the scheme.
pub fn no_reaction() -> Nonlinearity {
    Nonlinearity::new(Reaction::Zero, 0.5)
}

/// Least-squares slope of `log e` against `log h`.
pub fn log_slope(h: &[f64], e: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn evolve(grid: &Grid1D, drift: &DriftTerm, nl: &Nonlinearity, dt: f64, scheme: Scheme, u0: impl Fn(f64) -> f64, t0: f64, t1: f64) -> SimState {
    let mut s = SimState {
        t: t0,
        u: grid.nodes().iter().map(|&x| u0(x)).collect(),
        step_count: 0,
    };
    s.u[0] = 0.0;
    s.u[grid.n - 1] = 1.0;
    let steps = ((t1 - t0) / dt).round() as usize;
    let dt = (t1 - t0) / steps as f64;
    let mut stepper = Stepper::new(grid, drift, nl, dt, scheme).unwrap();
    for _ in 0..steps {
        stepper.step(&mut s).unwrap();
    }
    s
}

/// `½(1 + erf(x/(2√t)))` solves the heat equation.
pub fn heat_step(t: f64, x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / (2.0 * t.sqrt())))
}

/// Sup-norm errors against the erf heat solution on `[-10, 10]`, `t ∈ [1, 2]`,
/// with `dt = dx²/2`. Returns `(dx, error)` per refinement.
pub fn diffusion_errors(scheme: Scheme, levels: &[usize]) -> Vec<(f64, f64)> {
    let nl = no_reaction();
    let drift = DriftTerm::zero(1.0).unwrap();
    levels
        .iter()
        .map(|&n| {
            let grid = Grid1D::new(-10.0, 10.0, n).unwrap();
            let dx = grid.dx();
            let s = evolve(&grid, &drift, &nl, 0.5 * dx * dx, scheme, |x| heat_step(1.0, x), 1.0, 2.0);
            let err = (0..grid.n)
                .map(|i| (s.u[i] - heat_step(2.0, grid.x(i))).abs())
                .fold(0.0, f64::max);
            (dx, err)
        })
        .collect()
}

/// Sup-norm distance of the upwind solution from a run with sixteen times
/// finer `dx` and `dt`, for a smooth drift of support `[-10, 0]`. Each coarse
/// grid is a subgrid of the reference one.
pub fn upwind_errors(cells: &[usize]) -> Vec<(f64, f64)> {
    let nl = no_reaction();
    let drift = DriftTerm::gaussian_bump(1.0, 10.0, None, None).unwrap();
    let courant = 0.25;
    let u0 = |x: f64| heat_step(1.0, x + 5.0);
    let run = |n_cells: usize| {
        let grid = Grid1D::new(-20.0, 10.0, n_cells + 1).unwrap();
        let dt = courant * grid.dx() / drift.k_sup();
        (grid, evolve(&grid, &drift, &nl, dt, Scheme::Upwind, u0, 0.0, 4.0))
    };
    let finest = *cells.iter().max().unwrap() * 16;
    let (_, reference) = run(finest);
    cells
        .iter()
        .map(|&m| {
            let (grid, s) = run(m);
            let stride = finest / m;
            let err = (0..grid.n)
                .map(|i| (s.u[i] - reference.u[i * stride]).abs())
                .fold(0.0, f64::max);
            (grid.dx(), err)
        })
        .collect()
}

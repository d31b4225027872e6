//! Stationary supersolutions of the drift problem.
//!
//! The barrier is the minimizer `w_R` of
//! `J(w) = ∫ (½ w'² + F(w)) ψ` over `(R, a)` with `w(R) = 0`, `w(a) = 1`,
//! close to the reference `w₀ = (x/a) χ_[0,a]`. It is computed through its
//! Euler–Lagrange equation `-w'' + k w' = f(w)`, continued to `R → -∞`,
//! extended by 1 beyond `a`, and checked a posteriori.
//!
//! Grid functions are read as the interpolant solving `(ψ w')' = 0` inside
//! every cell. Gradient integrals are therefore exact cell sums
//! `(Δw)² / ∫ψ⁻¹`, the form that makes the energy consistent with the
//! finite-volume equations; the remaining terms use the trapezoid rule with
//! exact cell weights `∫ψ`. With `k ≡ 0` this is the ordinary trapezoid
//! rule with midpoint differences.

mod bvp;
mod grid;
mod verify;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::drift::DriftTerm;
use crate::nonlinearity::Nonlinearity;

pub use bvp::{continue_to_minus_infinity, solve_w_r, BvpOptions, BvpSolution, ContinuationOptions, LadderStep};
pub use grid::{clustered_grid, GridOptions};
pub use verify::{verify_supersolution, VerificationReport};

#[derive(Debug, Clone, thiserror::Error)]
pub enum SupersolutionError {
    #[error("domain needs R < -x0 - 1 and a > 0 (R = {r}, x0 = {x0}, a = {a})")]
    BadDomain { r: f64, x0: f64, a: f64 },
    #[error("Newton stalled after {iterations} iterations with residual {residual:e}")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        last: Box<WeightedFunction>,
    },
    #[error("minimizer left the delta ball: distance {distance:e} > delta {delta:e}")]
    MinimizerEscaped {
        distance: f64,
        delta: f64,
        solution: Box<BvpSolution>,
    },
    #[error("solution does not vanish on the left: sup over x <= {x_max} is {sup_left:e} at R = {r}")]
    TailNotDecaying { r: f64, x_max: f64, sup_left: f64 },
    #[error("successive solutions still differ by {difference:e} at R = {r}")]
    ContinuationStalled { r: f64, difference: f64 },
}

/// A grid function on `[R, a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedFunction {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl WeightedFunction {
    pub fn new(x: Vec<f64>, w: Vec<f64>) -> Self {
        assert_eq!(x.len(), w.len(), "grid and values differ in length");
        assert!(x.len() >= 2, "need at least two nodes");
        Self { x, w }
    }

    /// `w₀(x) = (x/a) χ_[0,a]` on the given grid, `a` being its last node.
    pub fn reference(x: &[f64]) -> Self {
        let a = *x.last().expect("empty grid");
        let w = x.iter().map(|&v| if v <= 0.0 { 0.0 } else { (v / a).min(1.0) }).collect();
        Self::new(x.to_vec(), w)
    }

    pub fn r(&self) -> f64 {
        self.x[0]
    }

    pub fn a(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Piecewise-linear interpolation, constant beyond the end nodes.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.w[0];
        }
        if x >= self.x[n - 1] {
            return self.w[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= x) - 1;
        let t = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
        self.w[i] + t * (self.w[i + 1] - self.w[i])
    }

    pub fn map(&self, g: impl Fn(f64, f64) -> f64) -> Self {
        let w = self.x.iter().zip(&self.w).map(|(&x, &w)| g(x, w)).collect();
        Self::new(self.x.clone(), w)
    }

    /// Nodes and values restricted to `[lo, hi]`, with interpolated end
    /// points when `lo`/`hi` fall between nodes.
    fn restrict(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let lo = lo.max(self.x[0]);
        let hi = hi.min(self.a());
        let mut xs = vec![lo];
        let mut ws = vec![self.eval(lo)];
        let tol = 1e-14 * (1.0 + lo.abs().max(hi.abs()));
        for (&x, &w) in self.x.iter().zip(&self.w) {
            if x > lo + tol && x < hi - tol {
                xs.push(x);
                ws.push(w);
            }
        }
        if hi > lo {
            xs.push(hi);
            ws.push(self.eval(hi));
        }
        (xs, ws)
    }
}

/// Per-cell sums `Σ (Δg)²/∫ψ⁻¹` and `Σ ½(h_l + h_r) ∫ψ` over `[lo, hi]`.
fn cell_sums(
    x: &[f64],
    d: &DriftTerm,
    grad: impl Fn(usize) -> f64,
    value: impl Fn(usize) -> f64,
) -> (f64, f64) {
    let mut g = 0.0;
    let mut v = 0.0;
    for i in 0..x.len().saturating_sub(1) {
        g += grad(i) / d.integral_inv_psi(x[i], x[i + 1]);
        v += 0.5 * (value(i) + value(i + 1)) * d.integral_psi(x[i], x[i + 1]);
    }
    (g, v)
}

/// `J_(lo,hi)(w) = ∫ (½ w'² + F(w)) ψ` with `F(t) = ∫_t^1 f`.
pub fn functional_j(w: &WeightedFunction, d: &DriftTerm, nl: &Nonlinearity, lo: f64, hi: f64) -> f64 {
    let (x, v) = w.restrict(lo, hi);
    let (g, p) = cell_sums(
        &x,
        d,
        |i| (v[i + 1] - v[i]).powi(2),
        |i| nl.potential_closed_form(v[i]),
    );
    0.5 * g + p
}

/// `J(w) - J(v)` formed pointwise, free of the cancellation between the two
/// large `F(0)` contributions from the left of the drift.
pub fn functional_j_difference(
    w: &WeightedFunction,
    v: &WeightedFunction,
    d: &DriftTerm,
    nl: &Nonlinearity,
    lo: f64,
    hi: f64,
) -> f64 {
    let (x, a) = w.restrict(lo, hi);
    let b: Vec<f64> = x.iter().map(|&s| v.eval(s)).collect();
    let (g, p) = cell_sums(
        &x,
        d,
        |i| {
            let da = a[i + 1] - a[i];
            let db = b[i + 1] - b[i];
            (da - db) * (da + db)
        },
        |i| nl.primitive(b[i]) - nl.primitive(a[i]),
    );
    0.5 * g + p
}

/// `(∫ (w'² + w²) ψ)^{1/2}` over `[lo, hi]`.
pub fn h1_psi_norm(w: &WeightedFunction, d: &DriftTerm, lo: f64, hi: f64) -> f64 {
    let (x, v) = w.restrict(lo, hi);
    let (g, p) = cell_sums(&x, d, |i| (v[i + 1] - v[i]).powi(2), |i| v[i] * v[i]);
    (g + p).sqrt()
}

/// `‖w - v‖_{H¹ψ}` over `[lo, hi]`, with `v` sampled on the grid of `w`.
pub fn h1_psi_distance(w: &WeightedFunction, v: &WeightedFunction, d: &DriftTerm, lo: f64, hi: f64) -> f64 {
    h1_psi_norm(&w.map(|x, u| u - v.eval(x)), d, lo, hi)
}

/// The limit barrier `w̃_∞`: the solved profile on `[R, a]`, the fitted
/// exponential tail left of `R` and the constant 1 right of `a`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StationarySupersolution {
    pub w: WeightedFunction,
    pub delta_used: f64,
    pub h1_psi_distance: f64,
    /// Fitted `ln w ≈ ln A + rate·x` over the leftmost decade.
    pub tail_rate: f64,
    pub tail_amplitude: f64,
    pub ladder: Vec<LadderStep>,
}

impl StationarySupersolution {
    pub fn r_final(&self) -> f64 {
        self.w.r()
    }

    pub fn a(&self) -> f64 {
        self.w.a()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x >= self.a() {
            1.0
        } else if x <= self.r_final() {
            self.tail_amplitude * (self.tail_rate * x).exp()
        } else {
            self.w.eval(x)
        }
    }

    /// `x,w,residual`; the residual is undefined at the two boundary nodes.
    pub fn write_csv<W: Write>(&self, d: &DriftTerm, nl: &Nonlinearity, mut out: W) -> io::Result<()> {
        let residual = verify::pointwise_residual(&self.w, d, nl);
        writeln!(out, "# columns: x,w,residual")?;
        for i in 0..self.w.len() {
            writeln!(out, "{:.12e},{:.12e},{:.6e}", self.w.x[i], self.w.w[i], residual[i])?;
        }
        Ok(())
    }
}

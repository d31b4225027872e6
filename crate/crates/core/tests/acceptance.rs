//! One pass/fail line per acceptance criterion, with its measured values.
//! Exits non-zero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use approx::relative_eq;
use common::{diffusion_errors, log_slope, upwind_errors};
use frontlab_core::drift::{blocking_criterion, DriftTerm, Verdict, TRACE_CONSTANT};
use frontlab_core::simulator::{barrier_excess, run, Classification, RunOptions, RunOutput, Scheme};
use frontlab_core::supersolution::{
    continue_to_minus_infinity, functional_j_difference, h1_psi_norm, solve_w_r, verify_supersolution, BvpOptions,
    ContinuationOptions,
};
use frontlab_core::wave::{solve_wave, WaveOptions, WaveProfile};
use frontlab_core::{make_cubic, BlockingConstants, Nonlinearity};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn timed(n: usize, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let passed = o.passed && elapsed < limit;
    println!(
        "criterion {n}: {} {} [{:.2} s, limit {} s]",
        if passed { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    passed
}

fn criterion_oracle() -> Outcome {
    let nl = make_cubic(0.25).unwrap();
    let c = BlockingConstants::compute(&nl).unwrap();
    let mut worst_conc = 0.0f64;
    for k in [1.0, 5.0, 10.0, 20.0, 25.0] {
        for eps in [1e-4, 0.01, 0.5, 1.0] {
            let d = DriftTerm::sharp_indicator(k, eps).unwrap();
            let exact = eps / k * k.exp_m1();
            worst_conc = worst_conc.max(((d.concentration_integral() - exact) / exact).abs());
        }
    }
    // Small eps keeps √concentration under the trace constant, leaving (2 + 14)² e^{-K}.
    let mut worst_small = 0.0f64;
    let mut worst_one = 0.0f64;
    let mut all_within = worst_conc < 1e-6;
    for k in [8.0, 10.0, 15.0, 20.0] {
        let eps = 1e-6;
        let d = DriftTerm::mollified_indicator(k, eps, eps / 100.0).unwrap();
        let rhs = blocking_criterion(&c, &d, TRACE_CONSTANT).rhs;
        let closed = 256.0 * (-k).exp();
        worst_small = worst_small.max(((rhs - closed) / closed).abs());
        all_within &= relative_eq!(rhs, closed, max_relative = 1e-2);

        let d = DriftTerm::sharp_indicator(k, 1.0).unwrap();
        let rhs = blocking_criterion(&c, &d, TRACE_CONSTANT).rhs;
        let closed = (2.0 * (-k / 2.0).exp() + (-(-k).exp_m1() / k).sqrt()).powi(2);
        worst_one = worst_one.max(((rhs - closed) / closed).abs());
        all_within &= relative_eq!(rhs, closed, max_relative = 1e-6);
    }
    check(
        all_within,
        format!(
            "concentration rel err {worst_conc:.1e} (< 1e-6); 256e^-K rel err {worst_small:.1e} (< 1e-2); eps = 1 form rel err {worst_one:.1e} (< 1e-6)"
        ),
    )
}

fn wave_solver() -> Outcome {
    let nl = make_cubic(0.25).unwrap();
    let w = solve_wave(&nl, &WaveOptions::default()).unwrap();
    let c_err = (w.c() - 2f64.sqrt() / 4.0).abs();
    // The cubic's profile is a logistic with φ(0) = 1/2 already pinned.
    let mut sup = 0.0f64;
    let mut z = -30.0;
    while z <= 30.0 {
        sup = sup.max((w.phi(z) - 1.0 / (1.0 + (-z / 2f64.sqrt()).exp())).abs());
        z += 0.01;
    }
    check(c_err < 1e-4 && sup < 1e-3, format!("|c - √2/4| = {c_err:.1e} (< 1e-4); profile sup err {sup:.1e} (< 1e-3)"))
}

struct Runs {
    nl: Nonlinearity,
    wave: WaveProfile,
}

impl Runs {
    fn new() -> Self {
        let nl = make_cubic(0.25).unwrap();
        let wave = solve_wave(&nl, &WaveOptions::default()).unwrap();
        Self { nl, wave }
    }

    fn run(&self, drift: &DriftTerm, duration: f64) -> RunOutput {
        let o = RunOptions {
            duration,
            ..RunOptions::default()
        };
        run(&self.nl, drift, &self.wave, &o).unwrap()
    }
}

fn undisturbed(runs: &Runs) -> (Outcome, RunOutput) {
    let out = runs.run(&DriftTerm::zero(1.0).unwrap(), 150.0);
    let r = &out.report;
    let speed_err = (r.measured_speed - r.c).abs() / r.c;
    let beta = r.beta_shift.unwrap_or(f64::NAN);
    let passed = r.classification == Classification::Propagating && speed_err < 0.01 && beta.abs() <= 2.0 * r.dx;
    let detail = format!(
        "{:?}, speed rel err {speed_err:.1e} (< 1e-2), |beta| = {:.2e} (<= 2dx = {:.2e})",
        r.classification,
        beta.abs(),
        2.0 * r.dx
    );
    (check(passed, detail), out)
}

fn certified_blocking(runs: &Runs) -> (Outcome, RunOutput) {
    let c = BlockingConstants::compute(&runs.nl).unwrap();
    let (k, eps) = (20.0f64, 1e-4);
    let drift = DriftTerm::mollified_indicator(k, eps, eps / 100.0).unwrap();
    let crit = blocking_criterion(&c, &drift, TRACE_CONSTANT);
    let chosen = 256.0 * (-k).exp() < c.c_f / 2.0 && eps <= 0.05;
    let sup = continue_to_minus_infinity(
        &drift,
        &runs.nl,
        c.a_opt,
        crit.delta,
        &BvpOptions::default(),
        &ContinuationOptions::default(),
    );
    let out = runs.run(&drift, 300.0);
    let r = &out.report;
    let (verified, excess) = match &sup {
        Ok(s) => {
            let v = verify_supersolution(s, &drift, &runs.nl, 1e-6);
            let grid = RunOptions::default().grid;
            (v.passed, barrier_excess(&out.final_state, &grid, s).0)
        }
        Err(_) => (false, f64::NAN),
    };
    let passed = chosen
        && crit.verdict == Verdict::BlockingCertified
        && r.classification == Classification::Blocked
        && verified
        && excess <= 1e-3;
    let detail = format!(
        "K = {k}, eps = {eps}: 256e^-K < C(f)/2 {chosen}, {:?}, {:?}, supersolution verified {verified}, max(u - w) = {excess:.1e} (<= 1e-3)",
        crit.verdict, r.classification
    );
    (check(passed, detail), out)
}

fn small_drift(runs: &Runs) -> (Outcome, RunOutput) {
    let out = runs.run(&DriftTerm::gaussian_bump(0.05, 1.0, None, None).unwrap(), 300.0);
    let r = &out.report;
    let beta = r.beta_shift.unwrap_or(f64::NAN);
    let grid = RunOptions::default().grid;
    let s = &out.final_state;
    let c = runs.wave.c();
    let distance = (0..grid.n)
        .map(|i| (s.u[i] - runs.wave.phi(grid.x(i) + c * s.t + beta)).abs())
        .fold(0.0, f64::max);
    let passed = r.classification == Classification::Propagating && r.beta_variation < r.dx && distance < 1e-2;
    let detail = format!(
        "{:?}, beta = {beta:.4}, trailing beta variation {:.1e} (< dx = {:.1e}), final distance {distance:.1e} (< 1e-2)",
        r.classification, r.beta_variation, r.dx
    );
    (check(passed, detail), out)
}

fn envelopes(bump: &RunOutput) -> Outcome {
    let r = &bump.report;
    let passed = r.t_minus.is_some() && r.t_plus.is_some() && r.envelope_violations.is_empty();
    check(
        passed,
        format!(
            "T- = {:?}, T+ = {:?}, violations beyond tol_env: {}",
            r.t_minus,
            r.t_plus,
            r.envelope_violations.len()
        ),
    )
}

/// `min_t (running min of Q)/Q_floor` and `max_t |L|`.
fn lyapunov_summary(out: &RunOutput) -> (f64, f64) {
    let mut running = f64::INFINITY;
    let mut ratio = f64::INFINITY;
    let mut l_max = 0.0f64;
    for v in &out.report.lyapunov_trace {
        running = running.min(v.q);
        ratio = ratio.min(running / v.q_floor);
        l_max = l_max.max(v.l.abs());
    }
    (ratio, l_max)
}

const L_BOUND: f64 = 1.0;

fn lyapunov(undisturbed: &RunOutput, bump: &RunOutput) -> Outcome {
    let (r3, l3) = lyapunov_summary(undisturbed);
    let (r5, l5) = lyapunov_summary(bump);
    let passed = r3 < 10.0 && r5 < 10.0 && l3 <= L_BOUND && l5 <= L_BOUND;
    check(
        passed,
        format!("min Q/floor {r3:.2} and {r5:.2} (< 10); max |L| {l3:.3} and {l5:.3} (<= {L_BOUND})"),
    )
}

fn invariants(outs: &[&RunOutput]) -> Outcome {
    let excess = outs.iter().map(|o| o.report.max_principle_excess).fold(0.0, f64::max);
    let mono = outs.iter().map(|o| o.report.monotonicity_min).fold(f64::INFINITY, f64::min);
    let slope = |errors: Vec<(f64, f64)>| {
        let (h, e): (Vec<f64>, Vec<f64>) = errors.into_iter().unzip();
        log_slope(&h, &e)
    };
    let dw = slope(diffusion_errors(Scheme::Weighted, &[101, 201, 401]));
    let du = slope(diffusion_errors(Scheme::Upwind, &[101, 201, 401]));
    let up = slope(upwind_errors(&[150, 300, 600]));

    let nl = make_cubic(0.25).unwrap();
    let c = BlockingConstants::compute(&nl).unwrap();
    let drift = DriftTerm::mollified_indicator(20.0, 1e-4, 1e-6).unwrap();
    let delta = blocking_criterion(&c, &drift, TRACE_CONSTANT).delta;
    let r = -30.0;
    let energy = match solve_w_r(&drift, &nl, r, c.a_opt, delta, &BvpOptions::default()) {
        Ok(s) => {
            let norm = h1_psi_norm(&s.w, &drift, r, 0.0);
            let gain = functional_j_difference(&s.w, &s.w.map(|_, _| 0.0), &drift, &nl, r, 0.0);
            norm <= delta && gain >= c.alpha * norm * norm - 1e-14
        }
        Err(_) => false,
    };
    let passed = excess <= 1e-8
        && mono >= -1e-7
        && (dw - 2.0).abs() < 0.1
        && (du - 2.0).abs() < 0.1
        && (up - 1.0).abs() < 0.1
        && energy;
    check(
        passed,
        format!(
            "max principle excess {excess:.1e} (<= 1e-8), monotonicity min {mono:.1e} (>= -1e-7), diffusion slopes {dw:.3}/{du:.3} (2 ± 0.1), upwind slope {up:.3} (1 ± 0.1), energy inequality at w_R {energy}"
        ),
    )
}

fn main() {
    let suite = Instant::now();
    let mut all = true;
    all &= timed(1, Duration::from_secs(1), criterion_oracle);
    all &= timed(2, Duration::from_secs(5), wave_solver);

    let runs = Runs::new();
    let mut undisturbed_out = None;
    all &= timed(3, Duration::from_secs(120), || {
        let (o, out) = undisturbed(&runs);
        undisturbed_out = Some(out);
        o
    });
    let mut blocked_out = None;
    all &= timed(4, Duration::from_secs(600), || {
        let (o, out) = certified_blocking(&runs);
        blocked_out = Some(out);
        o
    });
    let mut bump_out = None;
    all &= timed(5, Duration::from_secs(120), || {
        let (o, out) = small_drift(&runs);
        bump_out = Some(out);
        o
    });
    let (u3, u4, u5) = (undisturbed_out.unwrap(), blocked_out.unwrap(), bump_out.unwrap());
    all &= timed(6, Duration::from_secs(1), || envelopes(&u5));
    all &= timed(7, Duration::from_secs(1), || lyapunov(&u3, &u5));
    all &= timed(8, Duration::from_secs(900), || invariants(&[&u3, &u4, &u5]));
    println!(
        "acceptance: {} [{:.1} s]",
        if all { "all criteria pass" } else { "some criteria fail" },
        suite.elapsed().as_secs_f64()
    );
    if !all {
        std::process::exit(1);
    }
}

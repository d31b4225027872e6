//! Adaptive Dormand–Prince 5(4) integrator for small autonomous systems.

/// Step-size control settings.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_init: 1e-3,
            h_max: 0.1,
            max_steps: 1_000_000,
        }
    }
}

/// Returned by the per-step observer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// One accepted point of a trajectory: time, state and state derivative.
#[derive(Clone, Copy, Debug)]
pub struct OdePoint<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

/// Why an integration ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OdeEnd {
    /// The observer asked to stop.
    Stopped,
    /// `t_end` was reached.
    Finished,
    /// The step size underflowed or the step budget ran out.
    Failed,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = rhs(y)` from `t0` towards `t_end`, calling `observe` on
/// every accepted point (including the initial one). Returns the recorded
/// trajectory and the reason the integration ended.
pub fn integrate<const N: usize, F, O>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: OdeOptions,
    mut observe: O,
) -> (Vec<OdePoint<N>>, OdeEnd)
where
    F: Fn(&[f64; N]) -> [f64; N],
    O: FnMut(&OdePoint<N>) -> Control,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(&y);
    let first = OdePoint { t, y, dy: k1 };
    let mut out = vec![first];
    if observe(&first) == Control::Stop {
        return (out, OdeEnd::Stopped);
    }
    let mut h = opts.h_init.min(opts.h_max).min((t_end - t0).abs());
    for _ in 0..opts.max_steps {
        if (t_end - t) * dir <= 0.0 {
            return (out, OdeEnd::Finished);
        }
        h = h.min((t_end - t).abs());
        if h < 1e-14 * (1.0 + t.abs()) {
            return (out, OdeEnd::Failed);
        }
        let hs = h * dir;
        let k2 = rhs(&axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(&axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(&axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(&axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(&axpy(
            &y,
            hs,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(&y_new);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t += hs;
            y = y_new;
            k1 = k7;
            let p = OdePoint { t, y, dy: k1 };
            out.push(p);
            if observe(&p) == Control::Stop {
                return (out, OdeEnd::Stopped);
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(opts.h_max);
    }
    (out, OdeEnd::Failed)
}

/// Cubic Hermite interpolation on `[t0, t1]` from values and slopes.
pub fn hermite(t0: f64, y0: f64, d0: f64, t1: f64, y1: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

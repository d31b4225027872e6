//! Natural cubic spline through tabulated samples.

use crate::numerics::tridiag;

/// A natural cubic spline: twice continuously differentiable, piecewise cubic,
/// with zero second derivative at both ends.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
    /// Running integral from `xs[0]` to each knot.
    cumulative: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SplineError {
    #[error("spline needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("abscissae must be strictly increasing (violated at index {0})")]
    NotIncreasing(usize),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, SplineError> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(SplineError::TooFewSamples(n.min(ys.len())));
        }
        for i in 0..n {
            if !xs[i].is_finite() || !ys[i].is_finite() {
                return Err(SplineError::NonFinite(i));
            }
            if i > 0 && xs[i] <= xs[i - 1] {
                return Err(SplineError::NotIncreasing(i));
            }
        }
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            lower[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        let mut scratch = vec![0.0; n];
        tridiag::solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);
        let m = rhs;
        let mut spline = Self {
            xs,
            ys,
            m,
            cumulative: vec![0.0; n],
        };
        for i in 1..n {
            let v = spline.cumulative[i - 1] + spline.segment_integral(i - 1, spline.xs[i]);
            spline.cumulative[i] = v;
        }
        Ok(spline)
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value, first and second derivative at `x`. Outside the knot range the
    /// end segment is extrapolated.
    pub fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_all(x).0
    }

    /// Integral of the segment-`i` cubic from `xs[i]` to `x`.
    fn segment_integral(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let b = (x - self.xs[i]) / h;
        let a = 1.0 - b;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        // Antiderivative in b, evaluated between 0 and b.
        let lin = h * (y0 * (1.0 - a * a) / 2.0 + y1 * b * b / 2.0);
        let cub0 = h * h * h / 6.0 * m0 * ((-(a.powi(4)) / 4.0 + a * a / 2.0) - 0.25);
        let cub1 = h * h * h / 6.0 * m1 * (b.powi(4) / 4.0 - b * b / 2.0);
        lin + cub0 + cub1
    }

    /// Integral from the first knot to `x`.
    pub fn integral_from_start(&self, x: f64) -> f64 {
        let i = self.segment(x);
        self.cumulative[i] + self.segment_integral(i, x)
    }

    /// Largest |s''| on the knot range (attained at a knot: s'' is piecewise linear).
    pub fn max_abs_second(&self) -> f64 {
        self.m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_samples_and_linear_data() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let s = CubicSpline::new(xs.clone(), ys).unwrap();
        for x in [0.0, 0.13, 0.5, 0.999] {
            let (v, d, dd) = s.eval_all(x);
            assert!((v - (2.0 * x - 1.0)).abs() < 1e-13);
            assert!((d - 2.0).abs() < 1e-12);
            assert!(dd.abs() < 1e-12);
        }
        assert!((s.integral_from_start(1.0) - 0.0).abs() < 1e-13);
        assert!((s.integral_from_start(0.35) - (0.35f64 * 0.35 - 0.35)).abs() < 1e-13);
    }

    #[test]
    fn integral_matches_quadrature() {
        let xs: Vec<f64> = (0..41).map(|i| i as f64 / 40.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let s = CubicSpline::new(xs, ys).unwrap();
        let q = crate::numerics::quadrature::adaptive_simpson(|x| s.eval(x), 0.0, 0.77, 1e-13, 0.0);
        assert!((s.integral_from_start(0.77) - q).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(
            CubicSpline::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap_err(),
            SplineError::TooFewSamples(2)
        );
        assert_eq!(
            CubicSpline::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).unwrap_err(),
            SplineError::NotIncreasing(2)
        );
    }
}

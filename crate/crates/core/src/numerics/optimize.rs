//! One-dimensional minimization and root bracketing.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Returns `(argmin, min)`. The function is assumed unimodal on the bracket;
/// outside that assumption the result is a local minimum.
pub fn golden_section<F>(f: F, mut lo: f64, mut hi: f64, x_tol: f64, max_iter: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if (hi - lo).abs() <= x_tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scans `samples` for the smallest value and refines with golden section on
/// the neighbouring bracket. `samples` must be sorted ascending.
///
/// Returns `None` when the minimum sits on either end of the sample set, i.e.
/// the minimum is not bracketed.
pub fn scan_then_golden<F>(f: F, samples: &[f64], x_tol: f64) -> Option<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let values: Vec<f64> = samples.iter().map(|&x| f(x)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    if best == 0 || best + 1 == samples.len() {
        return None;
    }
    let (x, v) = golden_section(&f, samples[best - 1], samples[best + 1], x_tol, 200);
    if v <= values[best] {
        Some((x, v))
    } else {
        Some((samples[best], values[best]))
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= x_tol {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Logarithmically spaced samples on `[lo, hi]`, both positive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Uniform samples on `[lo, hi]` including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_section(|x| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-10, 500);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn unbracketed_minimum_rejected() {
        let xs = linspace(0.0, 1.0, 11);
        assert!(scan_then_golden(|x| x, &xs, 1e-9).is_none());
        assert!(scan_then_golden(|x| (x - 0.42).abs(), &xs, 1e-9).is_some());
    }

    #[test]
    fn bisect_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-14).is_none());
    }
}

//! Nonuniform grids on `[R, a]` clustered around the drift support.

use serde::{Deserialize, Serialize};

/// Shape of the clustered grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridOptions {
    /// Uniform cells across `[-x0, 0]`.
    pub support_cells: usize,
    /// Largest cell away from the support.
    pub h_max: f64,
    /// Ratio between neighbouring cells while they grow.
    pub growth: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            support_cells: 64,
            h_max: 0.02,
            growth: 1.1,
        }
    }
}

/// Offsets `0 < d_1 < … < d_n = length` whose steps start at `h0`, grow
/// geometrically and saturate at `h_max`.
fn graded_offsets(length: f64, h0: f64, h_max: f64, growth: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut pos = 0.0;
    let mut h = h0.min(h_max);
    while pos + h < length {
        pos += h;
        out.push(pos);
        h = (h * growth).min(h_max);
    }
    // Merge a sliver with its neighbour instead of creating a tiny cell.
    if let Some(&last) = out.last() {
        let prev = if out.len() >= 2 { out[out.len() - 2] } else { 0.0 };
        if length - last < 0.3 * (last - prev) {
            out.pop();
        }
    }
    out.push(length);
    out
}

/// Grid on `[r, a]` with exact nodes at `r`, `-x0`, `0` and `a`.
pub fn clustered_grid(r: f64, x0: f64, a: f64, options: &GridOptions) -> Vec<f64> {
    assert!(r < -x0 && x0 > 0.0 && a > 0.0, "grid needs r < -x0 < 0 < a");
    let n_s = options.support_cells.max(2);
    let h_s = x0 / n_s as f64;
    let left = graded_offsets(-x0 - r, h_s, options.h_max, options.growth);
    let right = graded_offsets(a, h_s, options.h_max, options.growth);
    let mut x = Vec::with_capacity(left.len() + n_s + right.len() + 1);
    x.push(r);
    for d in left.iter().rev().skip(1) {
        x.push(-x0 - d);
    }
    for j in 0..n_s {
        x.push(-x0 + j as f64 * h_s);
    }
    x.push(0.0);
    x.extend(right.iter().copied());
    // The last right offset is a itself.
    if let Some(last) = x.last_mut() {
        *last = a;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_the_special_points_and_is_increasing() {
        let opts = GridOptions::default();
        let x = clustered_grid(-30.0, 1e-3, 3.1, &opts);
        assert_eq!(x[0], -30.0);
        assert_eq!(*x.last().unwrap(), 3.1);
        assert!(x.contains(&0.0));
        assert!(x.iter().any(|&v| (v + 1e-3).abs() < 1e-18));
        for p in x.windows(2) {
            assert!(p[1] > p[0]);
            assert!(p[1] - p[0] <= opts.h_max * (1.0 + 0.3) + 1e-12);
        }
    }

    #[test]
    fn neighbouring_cells_grow_gently() {
        let opts = GridOptions::default();
        let x = clustered_grid(-10.0, 0.5, 2.0, &opts);
        let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
        for p in h.windows(2) {
            let ratio = p[1] / p[0];
            assert!(ratio < 1.5 && ratio > 1.0 / 1.5, "ratio {ratio}");
        }
    }
}

//! Gauss–Legendre rules and composite quadrature on panels.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; m];
    let mut w = alloc::vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (p, d) = if m == 1 {
                (z, 1.0)
            } else {
                (p1, m as f64 * (z * p1 - p0) / (z * z - 1.0))
            };
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m == 1 {
        x[0] = 0.0;
        w[0] = 2.0;
    }
    (x, w)
}

/// Composite rule with `order` Gauss points on each panel `[e_i, e_{i+1}]`.
pub fn composite(edges: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let mut xs = Vec::with_capacity(edges.len().saturating_sub(1) * order);
    let mut ws = Vec::with_capacity(xs.capacity());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(mid + half * x);
            ws.push(half * w);
        }
    }
    (xs, ws)
}

/// Panel edges: geometric grading from `lo` to `knee`, then uniform to `hi`.
pub fn graded_edges(lo: f64, knee: f64, hi: f64, geometric: usize, uniform_width: f64) -> Vec<f64> {
    let mut e = Vec::new();
    if geometric > 0 && knee > lo && lo > 0.0 {
        let ratio = (knee / lo).ln() / geometric as f64;
        for i in 0..geometric {
            e.push(lo * (ratio * i as f64).exp());
        }
    } else {
        e.push(lo);
    }
    let start = if knee > lo { knee } else { lo };
    let panels = ((hi - start) / uniform_width).ceil().max(1.0) as usize;
    for i in 0..=panels {
        e.push(start + (hi - start) * i as f64 / panels as f64);
    }
    e.dedup_by(|a, b| (*a - *b).abs() < 1e-300);
    e
}

/// Uniform panel edges covering `[a, b]` with width at most `width`.
pub fn uniform_edges(a: f64, b: f64, width: f64) -> Vec<f64> {
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        for deg in 0..20 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((s - want).abs() < 1e-13, "degree {deg}");
        }
    }

    #[test]
    fn graded_handles_endpoint_singularity() {
        let e = graded_edges(1e-12, 1.0, 3.0, 40, 0.5);
        let (x, w) = composite(&e, 12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powf(-0.5)).sum();
        let want = 2.0 * 3f64.sqrt() - 2.0 * 1e-6;
        assert!((s - want).abs() < 1e-10, "{s} vs {want}");
    }
}

//! Log-log trend fits.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Least-squares line `y = intercept + slope x` with the slope's standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = b - intercept - slope * a;
                r * r
            })
            .sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit { slope, intercept, stderr, points: n })
}

/// Fit of `ln y` against `ln x`; nonpositive entries are dropped.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    linear_fit(&lx, &ly)
}

/// Indices of the longest chain `s, 2s, 4s, …` (relative tolerance 1e-9) in `scales`.
pub fn dyadic_chain(scales: &[f64]) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for (i, &s0) in scales.iter().enumerate() {
        let mut chain = alloc::vec![i];
        let mut cur = s0;
        loop {
            let next = cur * 2.0;
            match scales.iter().position(|&s| (s - next).abs() <= 1e-9 * next) {
                Some(j) => {
                    chain.push(j);
                    cur = next;
                }
                None => break,
            }
        }
        if chain.len() > best.len() {
            best = chain;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x: Vec<f64> = (1..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.5)).collect();
        let f = loglog_fit(&x, &y).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12);
        assert!(f.stderr < 1e-10);
    }

    #[test]
    fn finds_dyadic_chain() {
        let s = [3.0, 8.0, 16.0, 5.0, 32.0, 64.0, 10.0];
        let c = dyadic_chain(&s);
        assert_eq!(c, alloc::vec![1, 2, 4, 5]);
    }
}

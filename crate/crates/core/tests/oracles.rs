//! Cross-checks against independent formulas: integral representations,
//! closed-form spectra, naive transforms.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use num_complex::Complex64;
use specmult_core::estimate::{distribution, weak_quasinorm};
use specmult_core::fft::{fft, ifft};
use specmult_core::linalg::{solve, symmetric_eigen};
use specmult_core::models::SpectralModel;
use specmult_core::quad::{composite, gauss_legendre, uniform_edges};
use specmult_core::specfun::{bessel_i, bessel_j, bessel_k, hermite_all};

fn integrate(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = composite(&uniform_edges(a, b, (b - a) / panels as f64), 16);
    x.iter().zip(&w).map(|(x, w)| f(*x) * w).sum()
}

#[test]
fn bessel_j_matches_bessel_integral() {
    for n in 0..6 {
        for x in [0.5, 3.0, 7.5, 20.0, 40.0] {
            let want = integrate(0.0, PI, 64, |t| (n as f64 * t - x * t.sin()).cos()) / PI;
            let got = bessel_j(n as f64, x).unwrap();
            assert!((got - want).abs() < 1e-12, "J_{n}({x}) = {got}, integral {want}");
        }
    }
}

#[test]
fn bessel_i_matches_integral() {
    for n in 0..4 {
        for x in [0.2, 1.0, 5.0, 15.0] {
            let want = integrate(0.0, PI, 64, |t| (x * t.cos()).exp() * (n as f64 * t).cos()) / PI;
            assert_relative_eq!(bessel_i(n as f64, x).unwrap(), want, max_relative = 1e-12);
        }
    }
}

#[test]
fn bessel_k_matches_integral() {
    for nu in [0.0, 0.3, 1.0, 2.5] {
        for x in [0.1, 1.0, 4.0, 12.0] {
            // K_ν(x) = ∫_0^∞ e^{-x cosh t} cosh(νt) dt; the integrand is negligible past t = 12
            let want = integrate(0.0, 12.0, 240, |t| (-x * t.cosh()).exp() * (nu * t).cosh());
            assert_relative_eq!(bessel_k(nu, x).unwrap(), want, max_relative = 1e-11);
        }
    }
}

#[test]
fn hermite_functions_match_polynomials() {
    // physicists' H_n by the three-term recurrence, normalized by (2^n n! √π)^{-1/2}
    for x in [-3.0f64, -1.2, 0.0, 0.8, 2.6] {
        let got = hermite_all(20, x).unwrap();
        let (mut prev, mut cur) = (0.0, 1.0);
        let mut norm = PI.sqrt();
        for (n, g) in got.iter().enumerate() {
            if n > 0 {
                norm *= 2.0 * n as f64;
            }
            let want = cur * (-x * x / 2.0).exp() / norm.sqrt();
            assert!((g - want).abs() < 1e-12 * want.abs().max(1.0), "h_{n}({x})");
            let next = 2.0 * x * cur - 2.0 * n as f64 * prev;
            prev = cur;
            cur = next;
        }
    }
}

#[test]
fn fft_matches_naive_dft() {
    let n = 64;
    let x: Vec<Complex64> = (0..n).map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 0.11).cos())).collect();
    let mut buf = x.clone();
    fft(&mut buf).unwrap();
    for (k, got) in buf.iter().enumerate() {
        let want: Complex64 =
            x.iter().enumerate().map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64)).sum();
        assert!((got - want).norm() < 1e-12);
    }
    ifft(&mut buf).unwrap();
    for (a, b) in buf.iter().zip(&x) {
        assert!((a - b).norm() < 1e-14);
    }
    assert!(fft(&mut vec![Complex64::new(0.0, 0.0); 12]).is_err());
}

#[test]
fn gauss_legendre_is_exact_to_degree_2m_minus_1() {
    for m in [1, 4, 9, 16] {
        let (x, w) = gauss_legendre(m);
        for d in 0..2 * m {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| x.powi(d as i32) * w).sum();
            let want = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            assert!((got - want).abs() < 1e-13, "m={m} d={d}");
        }
    }
}

#[test]
fn second_difference_spectrum() {
    let n = 12;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = 2.0;
        if i + 1 < n {
            a[i * n + i + 1] = -1.0;
            a[(i + 1) * n + i] = -1.0;
        }
    }
    let (vals, _) = symmetric_eigen(&a, n).unwrap();
    for (k, v) in vals.iter().enumerate() {
        let want = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
        assert!((v - want).abs() < 1e-12);
    }
    let b: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let x = solve(&a, &b).unwrap();
    for i in 0..n {
        let row: f64 = (0..n).map(|j| a[i * n + j] * x[j]).sum();
        assert!((row - b[i]).abs() < 1e-10);
    }
}

#[test]
fn catalog_spectra() {
    let c = SpectralModel::circle(256, 8).unwrap();
    assert_eq!(&c.eigenvalues[..5], &[0.0, 1.0, 1.0, 4.0, 4.0]);
    let i = SpectralModel::interval_dirichlet(256, 8).unwrap();
    assert_eq!(&i.eigenvalues[..3], &[1.0, 4.0, 9.0]);
    let h = SpectralModel::hermite_oscillator(1, 256, 6).unwrap();
    assert_eq!(h.eigenvalues, vec![1.0, 3.0, 5.0, 7.0, 9.0, 11.0]);
    let h2 = SpectralModel::hermite_oscillator(2, 96, 6).unwrap();
    assert_eq!(h2.eigenvalues, vec![2.0, 4.0, 4.0, 6.0, 6.0, 6.0]);
}

#[test]
fn circle_basis_is_orthonormal() {
    let m = SpectralModel::circle(512, 32).unwrap();
    let idx: Vec<usize> = (0..m.len()).collect();
    assert!(m.gram_defect(&idx) < 1e-12);
}

#[test]
fn weak_quasinorm_by_scanning_levels() {
    let g = [3.0, -1.0, 0.5, 2.0, -2.5, 0.0];
    let w = [0.5, 1.0, 2.0, 0.25, 1.0, 3.0];
    for p in [1.0, 1.5, 2.0] {
        // the sup is approached from just below each level |g_i|
        let brute = g
            .iter()
            .map(|v: &f64| {
                let a = v.abs() * (1.0 - 1e-15);
                a * distribution(&g, &w, a).powf(1.0 / p)
            })
            .fold(0.0, f64::max);
        assert_relative_eq!(weak_quasinorm(&g, &w, p), brute, max_relative = 1e-12);
    }
}

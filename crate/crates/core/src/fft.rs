//! Iterative radix-2 FFT on `Complex64` buffers.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        bail!(Domain, "FFT length {n} is not a power of two");
    }
    Ok(())
}

fn transform(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // twiddles computed directly to avoid drift on long transforms
        let tw: Vec<Complex64> = (0..half)
            .map(|k| Complex64::new((ang * k as f64).cos(), (ang * k as f64).sin()))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = buf[start + k];
                let v = buf[start + k + half] * tw[k];
                buf[start + k] = u + v;
                buf[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Forward transform `X_k = Σ_j x_j e^{-2πijk/n}`.
pub fn fft(buf: &mut [Complex64]) -> Result<()> {
    check_len(buf.len())?;
    transform(buf, -1.0);
    Ok(())
}

/// Inverse transform including the `1/n` factor.
pub fn ifft(buf: &mut [Complex64]) -> Result<()> {
    check_len(buf.len())?;
    transform(buf, 1.0);
    let s = 1.0 / buf.len() as f64;
    for z in buf.iter_mut() {
        *z *= s;
    }
    Ok(())
}

/// Two-dimensional forward transform of a row-major `side × side` array.
pub fn fft2(buf: &mut [Complex64], side: usize) -> Result<()> {
    fft2_dir(buf, side, -1.0)
}

/// Two-dimensional inverse transform including `1/side²`.
pub fn ifft2(buf: &mut [Complex64], side: usize) -> Result<()> {
    fft2_dir(buf, side, 1.0)?;
    let s = 1.0 / (side * side) as f64;
    for z in buf.iter_mut() {
        *z *= s;
    }
    Ok(())
}

fn fft2_dir(buf: &mut [Complex64], side: usize, sign: f64) -> Result<()> {
    check_len(side)?;
    if buf.len() != side * side {
        bail!(Domain, "buffer of {} is not {side}x{side}", buf.len());
    }
    for row in buf.chunks_mut(side) {
        transform(row, sign);
    }
    let mut col = alloc::vec![Complex64::new(0.0, 0.0); side];
    for c in 0..side {
        for r in 0..side {
            col[r] = buf[r * side + c];
        }
        transform(&mut col, sign);
        for r in 0..side {
            buf[r * side + c] = col[r];
        }
    }
    Ok(())
}

/// Linear convolution of two real sequences via zero-padded FFT.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(n, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(n, Complex64::new(0.0, 0.0));
    transform(&mut fa, -1.0);
    transform(&mut fb, -1.0);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    transform(&mut fa, 1.0);
    let s = 1.0 / n as f64;
    fa.truncate(out_len);
    fa.into_iter().map(|z| z.re * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn matches_naive_dft() {
        let n = 16;
        let x: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64 * 0.7).sin(), (j as f64 * 0.3).cos()))
            .collect();
        let mut y = x.clone();
        fft(&mut y).unwrap();
        for k in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let a = -2.0 * PI * (j * k) as f64 / n as f64;
                s += x[j] * Complex64::new(a.cos(), a.sin());
            }
            assert!((s - y[k]).norm() < 1e-12);
        }
        ifft(&mut y).unwrap();
        for j in 0..n {
            assert!((y[j] - x[j]).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_odd_lengths() {
        let mut v = vec![Complex64::new(0.0, 0.0); 12];
        assert!(fft(&mut v).is_err());
    }

    #[test]
    fn convolution_small() {
        let c = convolve(&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.5]);
        let want = [0.0, 1.0, 2.5, 4.0, 1.5];
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

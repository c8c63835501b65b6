//! Small dense and tridiagonal linear algebra.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL.
///
/// `diag` has length `n`, `off[i]` couples rows `i` and `i + 1` (length `n - 1`).
/// Returns ascending eigenvalues and, if requested, the eigenvectors as a
/// row-major `n × n` matrix whose column `j` belongs to eigenvalue `j`.
pub fn tridiagonal_eigen(
    diag: &[f64],
    off: &[f64],
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        bail!(Domain, "tridiagonal shape mismatch: {} and {}", n, off.len());
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                bail!(Convergence, "tridiagonal QL stalled at row {l}");
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let vecs = z.map(|z| {
        let mut out = vec![0.0; n * n];
        for (newc, &oldc) in order.iter().enumerate() {
            for k in 0..n {
                out[k * n + newc] = z[k * n + oldc];
            }
        }
        out
    });
    Ok((vals, vecs))
}

/// Cyclic Jacobi eigen-decomposition of a dense symmetric row-major matrix.
///
/// Returns ascending eigenvalues and eigenvectors (column `j` for value `j`).
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != n * n {
        bail!(Domain, "matrix of {} entries is not {n}x{n}", a.len());
    }
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| m[x * n + x].total_cmp(&m[y * n + y]));
            let vals = order.iter().map(|&i| m[i * n + i]).collect();
            let mut vecs = vec![0.0; n * n];
            for (c, &o) in order.iter().enumerate() {
                for k in 0..n {
                    vecs[k * n + c] = v[k * n + o];
                }
            }
            return Ok((vals, vecs));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    bail!(Convergence, "Jacobi sweeps exhausted for {n}x{n} matrix")
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n * n {
        bail!(Domain, "system shape mismatch");
    }
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap_or(col);
        if m[piv * n + col].abs() < 1e-300 {
            bail!(Domain, "singular system at column {col}");
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    m[r * n + k] -= f * m[col * n + k];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in col + 1..n {
            s -= m[col * n + k] * x[k];
        }
        x[col] = s / m[col * n + col];
    }
    Ok(x)
}

/// Product of a row-major `n × n` matrix with a vector.
pub fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_known_spectrum() {
        // -u'' with Dirichlet ends: eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 40;
        let d = vec![2.0; n];
        let o = vec![-1.0; n - 1];
        let (vals, vecs) = tridiagonal_eigen(&d, &o, true).unwrap();
        for k in 0..n {
            let want = 2.0 - 2.0 * (core::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((vals[k] - want).abs() < 1e-12);
        }
        let z = vecs.unwrap();
        for k in [0, 7, 39] {
            let mut res = 0.0f64;
            for i in 0..n {
                let mut av = 2.0 * z[i * n + k];
                if i > 0 {
                    av -= z[(i - 1) * n + k];
                }
                if i + 1 < n {
                    av -= z[(i + 1) * n + k];
                }
                res = res.max((av - vals[k] * z[i * n + k]).abs());
            }
            assert!(res < 1e-12);
        }
    }

    #[test]
    fn jacobi_and_solve() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0];
        let (vals, vecs) = symmetric_eigen(&a, 3).unwrap();
        for k in 0..3 {
            let v: Vec<f64> = (0..3).map(|i| vecs[i * 3 + k]).collect();
            let av = matvec(&a, &v);
            for i in 0..3 {
                assert!((av[i] - vals[k] * v[i]).abs() < 1e-12);
            }
        }
        let x = solve(&a, &[1.0, 2.0, 3.0]).unwrap();
        let r = matvec(&a, &x);
        assert!((r[0] - 1.0).abs() + (r[1] - 2.0).abs() + (r[2] - 3.0).abs() < 1e-12);
    }
}

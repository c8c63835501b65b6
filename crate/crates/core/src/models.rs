//! Operator models with exact or high-accuracy spectral data: Fourier models on
//! the interval, circle and 2-torus, the harmonic oscillator in one and two
//! dimensions, and the radial inverse-square model in continuum and Galerkin form.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::calculus::{LinearOperator, Repr};
use crate::error::{bail, Error, Result};
use crate::fft::{fft, ifft2};
use crate::linalg::tridiagonal_eigen;
use crate::quad::{composite, graded_edges};
use crate::space::MetricMeasureSpace;
use crate::specfun::{hermite_all, inverse_square_params, scattering_l, InverseSquareParams};

/// Largest number of eigenfunctions times grid points held as a dense table.
const MAX_TABLE: usize = 40_000_000;

/// Eigenfunction representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// `1/√(2π)`, then `cos(kx)/√π`, `sin(kx)/√π` for `k = 1..=k_max`.
    Circle { k_max: usize },
    /// `√(2/π) sin(kx)` for `k = 1..=k_max`.
    Interval { k_max: usize },
    /// Real Fourier modes `(k₁, k₂, is_sine)` with `|k| <= k_max`.
    Torus2 { k_max: usize, modes: Vec<(i64, i64, bool)> },
    /// Row-major table: function `m` occupies `values[m·n .. (m+1)·n]`.
    Table { values: Arc<Vec<f64>> },
    /// Products `h_{m₁}(x) h_{m₂}(y)` on a `side × side` grid from a 1D table.
    Tensor { side: usize, table: Arc<Vec<f64>>, pairs: Vec<(usize, usize)> },
}

/// Discrete self-adjoint model `L = Σ λ_k φ_k ⊗ φ_k` on a weighted grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub name: String,
    pub space: MetricMeasureSpace,
    /// Ascending eigenvalues of `L`, repeated by multiplicity.
    pub eigenvalues: Vec<f64>,
    pub basis: Basis,
    pub k_max: usize,
    pub convolutional: bool,
}

fn circle_eigenvalues(k_max: usize) -> Vec<f64> {
    let mut ev = vec![0.0];
    for k in 1..=k_max {
        let l = (k * k) as f64;
        ev.push(l);
        ev.push(l);
    }
    ev
}

fn torus_modes(k_max: usize) -> Vec<(i64, i64, bool)> {
    let k = k_max as i64;
    let mut modes = vec![(0, 0, false)];
    let mut half = Vec::new();
    for a in -k..=k {
        for b in -k..=k {
            if a * a + b * b > k * k || a * a + b * b == 0 {
                continue;
            }
            if a > 0 || (a == 0 && b > 0) {
                half.push((a, b));
            }
        }
    }
    half.sort_by_key(|&(a, b)| (a * a + b * b, a, b));
    for (a, b) in half {
        modes.push((a, b, false));
        modes.push((a, b, true));
    }
    modes
}

/// `g[m] = Σ_k c_k cos(2π k m / period)` for `m < period`.
fn cosine_series(coeffs: &[f64], period: usize) -> Vec<f64> {
    if period.is_power_of_two() && coeffs.len() <= period {
        let mut buf = vec![Complex64::new(0.0, 0.0); period];
        for (k, c) in coeffs.iter().enumerate() {
            buf[k] = Complex64::new(*c, 0.0);
        }
        // forward FFT conjugates the phase; real part is unaffected
        if fft(&mut buf).is_ok() {
            return buf.into_iter().map(|z| z.re).collect();
        }
    }
    (0..period)
        .map(|m| coeffs.iter().enumerate().map(|(k, c)| c * (2.0 * PI * (k * m) as f64 / period as f64).cos()).sum())
        .collect()
}

impl SpectralModel {
    /// Dirichlet Laplacian on `[0, π]`: `λ_k = k²`, `φ_k = √(2/π) sin(kx)`.
    pub fn interval_dirichlet(grid_size: usize, k_max: usize) -> Result<Self> {
        if grid_size == 0 || k_max == 0 {
            bail!(Domain, "interval model needs grid_size > 0 and K_max > 0 (got {grid_size}, {k_max})");
        }
        if 4 * k_max > grid_size {
            bail!(Resolution, "K_max={k_max} exceeds grid_size/4 = {} (aliasing)", grid_size / 4);
        }
        Ok(SpectralModel {
            name: format!("interval:{grid_size}:K={k_max}"),
            space: MetricMeasureSpace::interval(grid_size, 0.0, PI)?,
            eigenvalues: (1..=k_max).map(|k| (k * k) as f64).collect(),
            basis: Basis::Interval { k_max },
            k_max,
            convolutional: false,
        })
    }

    /// Laplacian on the circle of length `2π`.
    pub fn circle(grid_size: usize, k_max: usize) -> Result<Self> {
        if grid_size == 0 {
            bail!(Domain, "circle model needs grid_size > 0");
        }
        if 4 * k_max > grid_size {
            bail!(Resolution, "K_max={k_max} exceeds grid_size/4 = {} (aliasing)", grid_size / 4);
        }
        Ok(SpectralModel {
            name: format!("circle:{grid_size}:K={k_max}"),
            space: MetricMeasureSpace::circle(grid_size)?,
            eigenvalues: circle_eigenvalues(k_max),
            basis: Basis::Circle { k_max },
            k_max,
            convolutional: true,
        })
    }

    /// Laplacian on the flat torus `(ℝ/2πℤ)²` keeping `|k| <= K_max`.
    pub fn torus2(side: usize, k_max: usize) -> Result<Self> {
        if side == 0 {
            bail!(Domain, "torus model needs side > 0");
        }
        if 4 * k_max > side {
            bail!(Resolution, "K_max={k_max} exceeds side/4 = {} (aliasing)", side / 4);
        }
        let modes = torus_modes(k_max);
        Ok(SpectralModel {
            name: format!("torus2:{side}:K={k_max}"),
            space: MetricMeasureSpace::torus2(side)?,
            eigenvalues: modes.iter().map(|&(a, b, _)| (a * a + b * b) as f64).collect(),
            basis: Basis::Torus2 { k_max, modes },
            k_max,
            convolutional: true,
        })
    }

    /// `-Δ + |x|²` in dimension 1 or 2 on `grid` points per axis. `K_max` is
    /// the number of retained functions; in 2D it is rounded down to whole
    /// eigenvalue clusters.
    pub fn hermite_oscillator(dim: usize, grid: usize, k_max: usize) -> Result<Self> {
        if k_max == 0 || grid < 2 {
            bail!(Domain, "oscillator needs K_max >= 1 and at least two grid points");
        }
        let m_top = match dim {
            1 => k_max - 1,
            2 => {
                let mut q = 0;
                while (q + 2) * (q + 3) / 2 <= k_max {
                    q += 1;
                }
                q
            }
            _ => bail!(Domain, "oscillator dimension must be 1 or 2, got {dim}"),
        };
        let turning = (2.0 * m_top as f64 + 1.0).sqrt();
        let half = turning + 6.0;
        let h = 2.0 * half / grid as f64;
        let h_max = PI / (1.15 * turning.max(1.0) + 1.0);
        if h > h_max {
            bail!(
                Resolution,
                "grid of {grid} points per axis has spacing {h:.4} > {h_max:.4} needed to cover the allowed region |x| <= {turning:.3} of index {m_top}"
            );
        }
        let axis = MetricMeasureSpace::interval(grid, -half, half)?;
        let xs: Vec<f64> = axis.points.iter().map(|p| p[0]).collect();
        let mut table = vec![0.0; (m_top + 1) * grid];
        for (i, &x) in xs.iter().enumerate() {
            let hv = hermite_all(m_top, x)?;
            for (m, v) in hv.into_iter().enumerate() {
                table[m * grid + i] = v;
            }
        }
        let table = Arc::new(table);
        if dim == 1 {
            return Ok(SpectralModel {
                name: format!("hermite1:g={grid}:K={k_max}"),
                space: axis,
                eigenvalues: (0..=m_top).map(|m| 2.0 * m as f64 + 1.0).collect(),
                basis: Basis::Table { values: table },
                k_max,
                convolutional: false,
            });
        }
        let mut pairs = Vec::new();
        for q in 0..=m_top {
            for m1 in 0..=q {
                pairs.push((m1, q - m1));
            }
        }
        let mut space = MetricMeasureSpace::plane(grid, half)?;
        // midpoint nodes on each axis, matching the 1D table
        for (idx, p) in space.points.iter_mut().enumerate() {
            *p = [xs[idx / grid], xs[idx % grid]];
        }
        space.weights = vec![h * h; grid * grid];
        space.spacing = h;
        Ok(SpectralModel {
            name: format!("hermite2:g={grid}:K={k_max}"),
            space,
            eigenvalues: pairs.iter().map(|&(a, b)| 2.0 * (a + b) as f64 + 2.0).collect(),
            basis: Basis::Tensor { side: grid, table, pairs },
            k_max,
            convolutional: false,
        })
    }

    /// Model with an explicit orthonormal table (e.g. a Galerkin eigenbasis).
    pub fn from_table(name: impl Into<String>, space: MetricMeasureSpace, eigenvalues: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = space.len();
        if values.len() != eigenvalues.len() * n {
            bail!(Precondition, "table has {} values for {} functions on {n} points", values.len(), eigenvalues.len());
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            bail!(Precondition, "eigenvalues must be ascending");
        }
        Ok(SpectralModel {
            name: name.into(),
            space,
            k_max: eigenvalues.len(),
            eigenvalues,
            basis: Basis::Table { values: Arc::new(values) },
            convolutional: false,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dimension(&self) -> f64 {
        self.space.doubling_dim
    }

    /// Largest retained eigenvalue.
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `(eigenvalue, multiplicity)` in ascending order.
    pub fn clusters(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &l in &self.eigenvalues {
            match out.last_mut() {
                Some((v, m)) if *v == l => *m += 1,
                _ => out.push((l, 1)),
            }
        }
        out
    }

    /// Sampled eigenfunction `φ_idx`.
    pub fn eigenfunction(&self, idx: usize) -> Vec<f64> {
        let pts = &self.space.points;
        match &self.basis {
            Basis::Circle { .. } => {
                if idx == 0 {
                    vec![1.0 / (2.0 * PI).sqrt(); pts.len()]
                } else {
                    let k = ((idx + 1) / 2) as f64;
                    let c = 1.0 / PI.sqrt();
                    if idx % 2 == 1 {
                        pts.iter().map(|p| c * (k * p[0]).cos()).collect()
                    } else {
                        pts.iter().map(|p| c * (k * p[0]).sin()).collect()
                    }
                }
            }
            Basis::Interval { .. } => {
                let k = (idx + 1) as f64;
                let c = (2.0 / PI).sqrt();
                pts.iter().map(|p| c * (k * p[0]).sin()).collect()
            }
            Basis::Torus2 { modes, .. } => {
                let (a, b, sine) = modes[idx];
                if a == 0 && b == 0 {
                    return vec![1.0 / (2.0 * PI); pts.len()];
                }
                let c = 2f64.sqrt() / (2.0 * PI);
                pts.iter()
                    .map(|p| {
                        let t = a as f64 * p[0] + b as f64 * p[1];
                        c * if sine { t.sin() } else { t.cos() }
                    })
                    .collect()
            }
            Basis::Table { values } => {
                let n = pts.len();
                values[idx * n..(idx + 1) * n].to_vec()
            }
            Basis::Tensor { side, table, pairs } => {
                let (m1, m2) = pairs[idx];
                let s = *side;
                let mut out = vec![0.0; s * s];
                for i in 0..s {
                    for j in 0..s {
                        out[i * s + j] = table[m1 * s + i] * table[m2 * s + j];
                    }
                }
                out
            }
        }
    }

    /// `max |⟨φ_a, φ_b⟩_w - δ_ab|` over the given index set.
    pub fn gram_defect(&self, indices: &[usize]) -> f64 {
        let w = &self.space.weights;
        let fs: Vec<Vec<f64>> = indices.iter().map(|&i| self.eigenfunction(i)).collect();
        let mut worst = 0.0f64;
        for a in 0..fs.len() {
            for b in a..fs.len() {
                let g: f64 = fs[a].iter().zip(&fs[b]).zip(w).map(|((x, y), w)| x * y * w).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
        worst
    }

    /// Coefficients `⟨f, φ_k⟩_w`.
    pub fn analyze(&self, f: &[f64]) -> Vec<f64> {
        let w = &self.space.weights;
        (0..self.len())
            .map(|k| self.eigenfunction(k).iter().zip(f).zip(w).map(|((p, f), w)| p * f * w).sum())
            .collect()
    }

    /// `Σ_k c_k φ_k`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.space.len()];
        for (k, c) in coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.eigenfunction(k)) {
                *o += c * p;
            }
        }
        out
    }

    /// `x ↦ Σ_k |s(λ_k)|² φ_k(x)²`, the squared `L²` norm of each kernel column.
    pub fn spectral_function(&self, symbol: &dyn Fn(f64) -> f64) -> Vec<f64> {
        let n = self.space.len();
        match &self.basis {
            Basis::Circle { .. } | Basis::Torus2 { .. } => {
                let total: f64 = self.eigenvalues.iter().map(|&l| symbol(l).powi(2)).sum();
                let vol = self.space.total_mass();
                vec![total / vol; n]
            }
            Basis::Interval { .. } => {
                let mut out = vec![0.0; n];
                for (idx, &l) in self.eigenvalues.iter().enumerate() {
                    let s2 = symbol(l).powi(2);
                    if s2 == 0.0 {
                        continue;
                    }
                    let k = (idx + 1) as f64;
                    for (o, p) in out.iter_mut().zip(&self.space.points) {
                        *o += s2 * (2.0 / PI) * (k * p[0]).sin().powi(2);
                    }
                }
                out
            }
            Basis::Table { values } => {
                let mut out = vec![0.0; n];
                for (idx, &l) in self.eigenvalues.iter().enumerate() {
                    let s2 = symbol(l).powi(2);
                    if s2 == 0.0 {
                        continue;
                    }
                    for (o, v) in out.iter_mut().zip(&values[idx * n..(idx + 1) * n]) {
                        *o += s2 * v * v;
                    }
                }
                out
            }
            Basis::Tensor { side, table, pairs } => {
                let s = *side;
                let mut out = vec![0.0; s * s];
                for (&(m1, m2), &l) in pairs.iter().zip(&self.eigenvalues) {
                    let s2 = symbol(l).powi(2);
                    if s2 == 0.0 {
                        continue;
                    }
                    let a = &table[m1 * s..(m1 + 1) * s];
                    let b = &table[m2 * s..(m2 + 1) * s];
                    for i in 0..s {
                        let ai = s2 * a[i] * a[i];
                        if ai == 0.0 {
                            continue;
                        }
                        let row = &mut out[i * s..(i + 1) * s];
                        for (o, bj) in row.iter_mut().zip(b) {
                            *o += ai * bj * bj;
                        }
                    }
                }
                out
            }
        }
    }

    /// Operator `Σ_k s(λ_k) φ_k ⊗ φ_k` for a symbol `s` of the eigenvalue of `L`.
    pub fn operator(&self, symbol: &dyn Fn(f64) -> f64, label: impl Into<String>) -> Result<LinearOperator> {
        let n = self.space.len();
        let label = label.into();
        let mut distinct: Vec<(f64, f64)> = Vec::new();
        for c in self.clusters() {
            let v = symbol(c.0);
            if !v.is_finite() {
                bail!(Domain, "symbol `{label}` is not finite at eigenvalue {}", c.0);
            }
            distinct.push((c.0, v));
        }
        let s_of = |l: f64| -> f64 {
            let i = distinct.partition_point(|d| d.0 < l);
            distinct[i].1
        };
        let repr = match &self.basis {
            Basis::Circle { k_max } => {
                let mut c = vec![0.0; k_max + 1];
                c[0] = s_of(0.0) / (2.0 * PI);
                for k in 1..=*k_max {
                    c[k] = s_of((k * k) as f64) / PI;
                }
                Repr::Circulant(cosine_series(&c, n))
            }
            Basis::Interval { k_max } => {
                let mut c = vec![0.0; k_max + 1];
                for k in 1..=*k_max {
                    c[k] = s_of((k * k) as f64) / PI;
                }
                Repr::ToeplitzHankel(cosine_series(&c, 2 * n))
            }
            Basis::Torus2 { k_max, .. } => {
                let side = (n as f64).sqrt().round() as usize;
                let k = *k_max as i64;
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                for a in -k..=k {
                    for b in -k..=k {
                        let r2 = a * a + b * b;
                        if r2 > k * k {
                            continue;
                        }
                        let ia = a.rem_euclid(side as i64) as usize;
                        let ib = b.rem_euclid(side as i64) as usize;
                        buf[ia * side + ib] = Complex64::new(s_of(r2 as f64) / (4.0 * PI * PI), 0.0);
                    }
                }
                ifft2(&mut buf, side)?;
                let scale = (side * side) as f64;
                Repr::Circulant2 { side, profile: buf.into_iter().map(|z| z.re * scale).collect() }
            }
            Basis::Table { values } => Repr::LowRank {
                basis: values.clone(),
                coef: self.eigenvalues.iter().map(|&l| s_of(l)).collect(),
            },
            Basis::Tensor { .. } => {
                let m = self.len();
                if m * n > MAX_TABLE {
                    bail!(Resolution, "tensor model with {m} functions on {n} points is too large to materialize");
                }
                let mut values = Vec::with_capacity(m * n);
                for k in 0..m {
                    values.extend(self.eigenfunction(k));
                }
                Repr::LowRank { basis: Arc::new(values), coef: self.eigenvalues.iter().map(|&l| s_of(l)).collect() }
            }
        };
        Ok(LinearOperator::new(repr, self.space.weights.clone(), label))
    }
}

/// Quadrature and truncation parameters of the continuum radial model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrids {
    pub lambda_max: f64,
    pub r_max: f64,
    /// Gauss–Legendre order per panel.
    pub order: usize,
    pub lambda_panel: f64,
    pub x_panel: f64,
    /// Cells of the Galerkin companion.
    pub galerkin_cells: usize,
}

impl Default for RadialGrids {
    fn default() -> Self {
        RadialGrids { lambda_max: 12.0, r_max: 40.0, order: 16, lambda_panel: 0.25, x_panel: 0.25, galerkin_cells: 4096 }
    }
}

/// `Δₙ + c/r²` on `(0, ∞)` through its generalized eigenfunctions `ℓ(λx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumRadialModel {
    pub params: InverseSquareParams,
    pub grids: RadialGrids,
    pub lambda_nodes: Vec<f64>,
    /// Quadrature weights including `λ^{n-1}`.
    pub lambda_weights: Vec<f64>,
    pub x_nodes: Vec<f64>,
    /// Quadrature weights including `x^{n-1}`.
    pub x_weights: Vec<f64>,
    /// `ℓ(λ_i x_j)` row-major by `λ`.
    pub ell: Vec<f64>,
    pub c_star: f64,
}

impl ContinuumRadialModel {
    /// Uncalibrated model (`c_star = 1`).
    pub fn new(params: InverseSquareParams, grids: RadialGrids) -> Result<Self> {
        if !(grids.lambda_max > 0.0 && grids.r_max > 0.0 && grids.order >= 2) {
            bail!(Domain, "radial grids need positive extents and order >= 2");
        }
        let (lam, lw) = composite(&graded_edges(0.0, 0.0, grids.lambda_max, 0, grids.lambda_panel), grids.order);
        // geometric panels down to r_max·1e-9 keep the |ℓ|² x^{n-1} singular mass at threshold c
        let eps = grids.r_max * 1e-9;
        let (xs, xw) = composite(&graded_edges(eps, 1.0f64.min(grids.r_max / 2.0), grids.r_max, 32, grids.x_panel), grids.order);
        let n = params.n;
        let lambda_weights: Vec<f64> = lam.iter().zip(&lw).map(|(l, w)| w * l.powf(n - 1.0)).collect();
        let x_weights: Vec<f64> = xs.iter().zip(&xw).map(|(x, w)| w * x.powf(n - 1.0)).collect();
        let mut ell = Vec::with_capacity(lam.len() * xs.len());
        for &l in &lam {
            for &x in &xs {
                ell.push(scattering_l(&params, l * x)?);
            }
        }
        Ok(ContinuumRadialModel {
            params,
            grids,
            lambda_nodes: lam,
            lambda_weights,
            x_nodes: xs,
            x_weights,
            ell,
            c_star: 1.0,
        })
    }

    pub fn nx(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn nlambda(&self) -> usize {
        self.lambda_nodes.len()
    }

    /// Row `ℓ(λ_i ·)` on the `x` nodes.
    pub fn ell_row(&self, i: usize) -> &[f64] {
        let nx = self.nx();
        &self.ell[i * nx..(i + 1) * nx]
    }

    /// Weighted `L²(x^{n-1} dx)` norm on the `x` nodes.
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.x_weights).map(|(v, w)| v * v * w).sum::<f64>().sqrt()
    }
}

/// Finite-difference discretization of `∫ f'g' r^{n-1} + c ∫ f g r^{n-3}` on
/// `[ε, R]` with a Dirichlet condition at `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinRadial {
    pub params: InverseSquareParams,
    pub space: MetricMeasureSpace,
    /// Stiffness matrix (tridiagonal): diagonal and super-diagonal.
    pub stiff_diag: Vec<f64>,
    pub stiff_off: Vec<f64>,
    /// Lumped mass `∫_cell r^{n-1} dr`.
    pub mass: Vec<f64>,
}

impl GalerkinRadial {
    pub fn new(params: InverseSquareParams, cells: usize, r_max: f64) -> Result<Self> {
        if cells < 4 {
            bail!(Domain, "Galerkin model needs at least 4 cells");
        }
        let space = MetricMeasureSpace::half_line(params.n, cells, r_max)?;
        let n = params.n;
        let h = space.spacing;
        let eps = r_max / 16384.0;
        let mut diag = vec![0.0; cells];
        let mut off = vec![0.0; cells - 1];
        for i in 0..cells - 1 {
            let rf = eps + (i + 1) as f64 * h;
            let a = rf.powf(n - 1.0) / h;
            diag[i] += a;
            diag[i + 1] += a;
            off[i] = -a;
        }
        // ghost node: f vanishes at R, half a cell beyond the last centre
        diag[cells - 1] += r_max.powf(n - 1.0) * 2.0 / h;
        for i in 0..cells {
            let a = eps + i as f64 * h;
            let b = a + h;
            let pot = if (n - 2.0).abs() < 1e-14 { (b / a).ln() } else { (b.powf(n - 2.0) - a.powf(n - 2.0)) / (n - 2.0) };
            diag[i] += params.c * pot;
        }
        let mass = space.weights.clone();
        Ok(GalerkinRadial { params, space, stiff_diag: diag, stiff_off: off, mass })
    }

    fn symmetrized(&self) -> (Vec<f64>, Vec<f64>) {
        let d: Vec<f64> = self.stiff_diag.iter().zip(&self.mass).map(|(a, m)| a / m).collect();
        let o: Vec<f64> = (0..self.stiff_off.len())
            .map(|i| self.stiff_off[i] / (self.mass[i] * self.mass[i + 1]).sqrt())
            .collect();
        (d, o)
    }

    /// Ascending eigenvalues of `M^{-1} A`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (d, o) = self.symmetrized();
        Ok(tridiagonal_eigen(&d, &o, false)?.0)
    }

    /// `M^{-1} A f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let m = f.len();
        (0..m)
            .map(|i| {
                let mut s = self.stiff_diag[i] * f[i];
                if i > 0 {
                    s += self.stiff_off[i - 1] * f[i - 1];
                }
                if i + 1 < m {
                    s += self.stiff_off[i] * f[i + 1];
                }
                s / self.mass[i]
            })
            .collect()
    }

    /// Discrete spectral model built from the full eigenbasis.
    pub fn spectral_model(&self) -> Result<SpectralModel> {
        let cells = self.mass.len();
        if cells > 4096 {
            bail!(Resolution, "dense Galerkin eigenbasis capped at 4096 cells, got {cells}");
        }
        let (d, o) = self.symmetrized();
        let (ev, vecs) = tridiagonal_eigen(&d, &o, true)?;
        let vecs = vecs.ok_or_else(|| Error::Convergence("eigenvectors missing".to_string()))?;
        let mut values = vec![0.0; cells * cells];
        for k in 0..cells {
            for i in 0..cells {
                values[k * cells + i] = vecs[i * cells + k] / self.mass[i].sqrt();
            }
        }
        SpectralModel::from_table(
            format!("galerkin:n={}:c={}:{cells}", self.params.n, self.params.c),
            self.space.clone(),
            ev,
            values,
        )
    }
}

/// Calibrated continuum model plus its Galerkin companion.
pub fn radial_inverse_square(n: f64, c: f64, grids: RadialGrids) -> Result<(ContinuumRadialModel, GalerkinRadial)> {
    let params = inverse_square_params(n, c)?;
    let mut model = ContinuumRadialModel::new(params, grids)?;
    model.c_star = crate::calculus::calibrate_cstar(&model)?;
    let galerkin = GalerkinRadial::new(params, grids.galerkin_cells, grids.r_max)?;
    Ok((model, galerkin))
}

/// Parsed catalog address of a model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Interval { grid: usize, k_max: usize },
    Circle { grid: usize, k_max: usize },
    Torus2 { side: usize, k_max: usize },
    Hermite { dim: usize, grid: usize, k_max: usize },
    Radial { n: f64, c: f64, grids: RadialGrids },
}

/// Built model of either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltModel {
    Discrete(SpectralModel),
    Radial(ContinuumRadialModel, GalerkinRadial),
}

fn field<'a>(parts: &[&'a str], key: &str) -> Option<&'a str> {
    parts.iter().find_map(|p| p.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn parse_num<T: core::str::FromStr>(s: &str, what: &str, spec: &str) -> Result<T> {
    s.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad {what} `{s}` in model spec `{spec}`")))
}

impl ModelSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let rest = &parts[1..];
        let positional = || -> Result<usize> {
            let p = rest.first().ok_or_else(|| Error::Parse(format!("model spec `{spec}` needs a grid size")))?;
            parse_num(p, "grid size", spec)
        };
        let k_or = |default: usize| -> Result<usize> {
            field(rest, "K").map(|s| parse_num(s, "K", spec)).transpose().map(|k| k.unwrap_or(default))
        };
        Ok(match parts[0] {
            "interval" => {
                let grid = positional()?;
                ModelSpec::Interval { grid, k_max: k_or(grid / 4)? }
            }
            "circle" => {
                let grid = positional()?;
                ModelSpec::Circle { grid, k_max: k_or(grid / 4)? }
            }
            "torus2" => {
                let side = positional()?;
                ModelSpec::Torus2 { side, k_max: k_or(side / 4)? }
            }
            "hermite1" | "hermite2" => {
                let dim = if parts[0] == "hermite1" { 1 } else { 2 };
                let g = field(rest, "g").ok_or_else(|| Error::Parse(format!("model spec `{spec}` needs g=")))?;
                let k = field(rest, "K").ok_or_else(|| Error::Parse(format!("model spec `{spec}` needs K=")))?;
                ModelSpec::Hermite { dim, grid: parse_num(g, "g", spec)?, k_max: parse_num(k, "K", spec)? }
            }
            "radial" => {
                let n = field(rest, "n").ok_or_else(|| Error::Parse(format!("model spec `{spec}` needs n=")))?;
                let c = field(rest, "c").ok_or_else(|| Error::Parse(format!("model spec `{spec}` needs c=")))?;
                let mut grids = RadialGrids::default();
                if let Some(v) = field(rest, "lmax") {
                    grids.lambda_max = parse_num(v, "lmax", spec)?;
                }
                if let Some(v) = field(rest, "rmax") {
                    grids.r_max = parse_num(v, "rmax", spec)?;
                }
                if let Some(v) = field(rest, "cells") {
                    grids.galerkin_cells = parse_num(v, "cells", spec)?;
                }
                ModelSpec::Radial { n: parse_num(n, "n", spec)?, c: parse_num(c, "c", spec)?, grids }
            }
            other => bail!(Parse, "unknown model family `{other}` in `{spec}`"),
        })
    }

    pub fn build(&self) -> Result<BuiltModel> {
        Ok(match *self {
            ModelSpec::Interval { grid, k_max } => BuiltModel::Discrete(SpectralModel::interval_dirichlet(grid, k_max)?),
            ModelSpec::Circle { grid, k_max } => BuiltModel::Discrete(SpectralModel::circle(grid, k_max)?),
            ModelSpec::Torus2 { side, k_max } => BuiltModel::Discrete(SpectralModel::torus2(side, k_max)?),
            ModelSpec::Hermite { dim, grid, k_max } => BuiltModel::Discrete(SpectralModel::hermite_oscillator(dim, grid, k_max)?),
            ModelSpec::Radial { n, c, grids } => {
                let (m, g) = radial_inverse_square(n, c, grids)?;
                BuiltModel::Radial(m, g)
            }
        })
    }
}

/// Catalog constructors `(family, example address)` in a stable order.
pub const MODEL_FAMILIES: &[(&str, &str)] = &[
    ("interval", "interval:1024:K=256"),
    ("circle", "circle:1024:K=256"),
    ("torus2", "torus2:64:K=16"),
    ("hermite1", "hermite1:g=512:K=200"),
    ("hermite2", "hermite2:g=96:K=60"),
    ("radial", "radial:n=3:c=-0.125"),
];

/// Parses a space address such as `circle:1024` or `halfline:n=3:4096`.
pub fn parse_space_spec(spec: &str) -> Result<MetricMeasureSpace> {
    let parts: Vec<&str> = spec.split(':').collect();
    let rest = &parts[1..];
    let last_num = || -> Result<usize> {
        let p = rest
            .iter()
            .rev()
            .find(|p| !p.contains('='))
            .ok_or_else(|| Error::Parse(format!("space spec `{spec}` needs a point count")))?;
        parse_num(p, "point count", spec)
    };
    match parts[0] {
        "circle" => MetricMeasureSpace::circle(last_num()?),
        "interval" => MetricMeasureSpace::interval(last_num()?, 0.0, PI),
        "torus2" => MetricMeasureSpace::torus2(last_num()?),
        "halfline" => {
            let n = field(rest, "n").ok_or_else(|| Error::Parse(format!("space spec `{spec}` needs n=")))?;
            let r = field(rest, "rmax").map(|v| parse_num(v, "rmax", spec)).transpose()?.unwrap_or(40.0);
            MetricMeasureSpace::half_line(parse_num(n, "n", spec)?, last_num()?, r)
        }
        "plane" => {
            let half = field(rest, "half").map(|v| parse_num(v, "half", spec)).transpose()?.unwrap_or(10.0);
            MetricMeasureSpace::plane(last_num()?, half)
        }
        other => bail!(Parse, "unknown space family `{other}` in `{spec}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::KernelOp;

    #[test]
    fn interval_basics() {
        let m = SpectralModel::interval_dirichlet(1024, 64).unwrap();
        assert_eq!(m.eigenvalues[0], 1.0);
        let idx: Vec<usize> = (0..64).collect();
        assert!(m.gram_defect(&idx) < 1e-10);
        assert!(SpectralModel::interval_dirichlet(1024, 257).is_err());
        assert!(SpectralModel::interval_dirichlet(0, 0).is_err());
    }

    #[test]
    fn interval_heat_trace_two_routes() {
        let m = SpectralModel::interval_dirichlet(1024, 64).unwrap();
        let t = 0.1;
        let direct: f64 = m.eigenvalues.iter().map(|l| (-t * l).exp()).sum();
        let op = m.operator(&|l| (-t * l).exp(), "heat").unwrap();
        let w = op.weights().to_vec();
        let trace: f64 = (0..m.space.len()).map(|j| op.column(j)[j] * w[j]).sum();
        assert!((trace - direct).abs() < 1e-10, "{trace} vs {direct}");
    }

    #[test]
    fn circle_and_torus_gram() {
        let c = SpectralModel::circle(256, 16).unwrap();
        let idx: Vec<usize> = (0..c.len()).collect();
        assert!(c.gram_defect(&idx) < 1e-10);
        let t = SpectralModel::torus2(32, 6).unwrap();
        let idx: Vec<usize> = (0..t.len()).collect();
        assert!(t.gram_defect(&idx) < 1e-10);
    }

    #[test]
    fn hermite_clusters() {
        let h = SpectralModel::hermite_oscillator(1, 256, 20).unwrap();
        assert_eq!(h.eigenvalues[0], 1.0);
        assert_eq!(h.eigenvalues[1], 3.0);
        let h2 = SpectralModel::hermite_oscillator(2, 96, 60).unwrap();
        for (q, (l, m)) in h2.clusters().into_iter().enumerate() {
            assert_eq!(l, 2.0 * (q as f64 + 1.0));
            assert_eq!(m, q + 1);
        }
        assert!(SpectralModel::hermite_oscillator(1, 16, 400).is_err());
    }

    #[test]
    fn specs_parse() {
        assert_eq!(ModelSpec::parse("interval:1024:K=256").unwrap(), ModelSpec::Interval { grid: 1024, k_max: 256 });
        assert_eq!(
            ModelSpec::parse("hermite2:g=96:K=60").unwrap(),
            ModelSpec::Hermite { dim: 2, grid: 96, k_max: 60 }
        );
        assert!(matches!(ModelSpec::parse("radial:n=3:c=-0.125").unwrap(), ModelSpec::Radial { .. }));
        assert!(ModelSpec::parse("interval:0:K=0").unwrap().build().is_err());
        assert!(ModelSpec::parse("sphere:12").is_err());
        let s = parse_space_spec("halfline:n=3:4096").unwrap();
        assert_eq!(s.len(), 4096);
    }
}

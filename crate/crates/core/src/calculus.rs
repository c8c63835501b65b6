//! Functional calculus: kernel operators on weighted grids, `F(√L)` on discrete
//! models, propagators, Bochner–Riesz means, the transference identity, square
//! functions, and the continuum radial calculus through `ℓ(λx)`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::RangeInclusive;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Error, Result};
use crate::fft::{convolve, fft, fft2, ifft, ifft2};
use crate::models::{ContinuumRadialModel, GalerkinRadial, SpectralModel};
use crate::mult::{gaussian, MultiplierFn};
use crate::quad::{composite, uniform_edges};
use crate::specfun::{rgamma, scattering_k_scaled, scattering_l_modified_scaled};

/// Integral operator `Tf(x) = Σ_y K(x, y) f(y) w_y` on a weighted grid.
pub trait KernelOp {
    fn n(&self) -> usize;
    fn weights(&self) -> &[f64];
    /// `K(·, y_j)`.
    fn column(&self, j: usize) -> Vec<f64>;
    /// `K(x_i, ·)`.
    fn row(&self, i: usize) -> Vec<f64>;
    fn apply(&self, f: &[f64]) -> Vec<f64>;
    /// Adjoint for the weighted inner product: `Σ_x K(x, y) g(x) w_x`.
    fn apply_adjoint(&self, g: &[f64]) -> Vec<f64>;
    /// Columns that can be nonzero (all by default).
    fn active_columns(&self) -> Vec<usize> {
        (0..self.n()).collect()
    }
    /// `max_y (Σ_x |K(x, y)|^q w_x)^{1/q}`.
    fn max_column_norm(&self, q: f64) -> f64 {
        let w = self.weights();
        self.active_columns()
            .into_iter()
            .map(|j| crate::space::lp_norm(&self.column(j), w, q))
            .fold(0.0, f64::max)
    }
}

/// Storage of a kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    /// Row-major `n × n` matrix `K[i·n + j] = K(x_i, y_j)`.
    Dense(Vec<f64>),
    /// `K(x_i, y_j) = g[(i - j) mod n]`.
    Circulant(Vec<f64>),
    /// `K(x_i, y_j) = g[|i - j|] - g[i + j + 1]` (length `2n`).
    ToeplitzHankel(Vec<f64>),
    /// Two-dimensional circulant on a row-major `side × side` grid.
    Circulant2 { side: usize, profile: Vec<f64> },
    /// `K = Σ_m coef_m φ_m ⊗ φ_m`, `basis` row-major by `m`.
    LowRank { basis: Arc<Vec<f64>>, coef: Vec<f64> },
}

/// Kernel operator with metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    pub repr: Repr,
    pub weights: Vec<f64>,
    pub label: String,
    /// Declared radius of the kernel support, if any.
    pub support_radius: Option<f64>,
    spectrum: Option<Vec<Complex64>>,
}

impl LinearOperator {
    pub fn new(repr: Repr, weights: Vec<f64>, label: impl Into<String>) -> Self {
        let spectrum = match &repr {
            Repr::Circulant(g) if g.len().is_power_of_two() => {
                let mut buf: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft(&mut buf).ok().map(|_| buf)
            }
            Repr::Circulant2 { side, profile } if side.is_power_of_two() => {
                let mut buf: Vec<Complex64> = profile.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft2(&mut buf, *side).ok().map(|_| buf)
            }
            _ => None,
        };
        LinearOperator { repr, weights, label: label.into(), support_radius: None, spectrum }
    }

    /// Dense operator from a row-major kernel.
    pub fn dense(kernel: Vec<f64>, weights: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if kernel.len() != weights.len() * weights.len() {
            bail!(Precondition, "kernel of {} entries does not match {} weights", kernel.len(), weights.len());
        }
        Ok(LinearOperator::new(Repr::Dense(kernel), weights, label))
    }

    /// Single entry `K(x_i, y_j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let n = self.weights.len();
        match &self.repr {
            Repr::Dense(k) => k[i * n + j],
            Repr::Circulant(g) => g[(i + n - j) % n],
            Repr::ToeplitzHankel(g) => g[i.abs_diff(j)] - g[i + j + 1],
            Repr::Circulant2 { side, profile } => {
                let s = *side;
                let (a, b) = (i / s, i % s);
                let (c, d) = (j / s, j % s);
                profile[((a + s - c) % s) * s + (b + s - d) % s]
            }
            Repr::LowRank { basis, coef } => {
                coef.iter().enumerate().map(|(m, c)| c * basis[m * n + i] * basis[m * n + j]).sum()
            }
        }
    }

    /// Dense kernel matrix (row-major); capped at 4096 points.
    pub fn to_dense(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > 4096 {
            bail!(Resolution, "dense kernels are capped at 4096 points, got {n}");
        }
        let mut k = vec![0.0; n * n];
        for j in 0..n {
            for (i, v) in self.column(j).into_iter().enumerate() {
                k[i * n + j] = v;
            }
        }
        Ok(k)
    }

    /// `max |K(x, y)|`.
    pub fn max_abs_entry(&self) -> f64 {
        match &self.repr {
            Repr::Circulant(g) | Repr::Circulant2 { profile: g, .. } => g.iter().fold(0.0, |m, v| m.max(v.abs())),
            _ => (0..self.n()).map(|j| self.column(j).iter().fold(0.0, |m, v: &f64| m.max(v.abs()))).fold(0.0, f64::max),
        }
    }

    /// `max |K(x, y) - K(y, x)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            let c = self.column(j);
            let r = self.row(j);
            for i in 0..n {
                worst = worst.max((c[i] - r[i]).abs());
            }
        }
        worst
    }

    fn weighted(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.weights).map(|(a, b)| a * b).collect()
    }
}

impl KernelOp for LinearOperator {
    fn n(&self) -> usize {
        self.weights.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let n = self.n();
        match &self.repr {
            Repr::Dense(k) => (0..n).map(|i| k[i * n + j]).collect(),
            Repr::Circulant(g) => (0..n).map(|i| g[(i + n - j) % n]).collect(),
            Repr::ToeplitzHankel(g) => (0..n).map(|i| g[i.abs_diff(j)] - g[i + j + 1]).collect(),
            Repr::Circulant2 { .. } => (0..n).map(|i| self.entry(i, j)).collect(),
            Repr::LowRank { basis, coef } => {
                let mut out = vec![0.0; n];
                for (m, c) in coef.iter().enumerate() {
                    let a = c * basis[m * n + j];
                    if a == 0.0 {
                        continue;
                    }
                    for (o, b) in out.iter_mut().zip(&basis[m * n..(m + 1) * n]) {
                        *o += a * b;
                    }
                }
                out
            }
        }
    }

    fn row(&self, i: usize) -> Vec<f64> {
        let n = self.n();
        match &self.repr {
            Repr::Dense(k) => k[i * n..(i + 1) * n].to_vec(),
            _ => self.column(i),
        }
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n();
        let u = self.weighted(f);
        match &self.repr {
            Repr::Dense(k) => (0..n).map(|i| k[i * n..(i + 1) * n].iter().zip(&u).map(|(a, b)| a * b).sum()).collect(),
            Repr::Circulant(g) => match &self.spectrum {
                Some(spec) => {
                    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                    let _ = fft(&mut buf);
                    for (b, s) in buf.iter_mut().zip(spec) {
                        *b *= s;
                    }
                    let _ = ifft(&mut buf);
                    buf.into_iter().map(|z| z.re).collect()
                }
                None => (0..n).map(|i| (0..n).map(|j| g[(i + n - j) % n] * u[j]).sum()).collect(),
            },
            Repr::ToeplitzHankel(g) => {
                // Σ_j g[|i-j|] u_j from a linear convolution with the symmetric extension
                let sym: Vec<f64> = (0..2 * n - 1).map(|k| g[k.abs_diff(n - 1)]).collect();
                let t = convolve(&u, &sym);
                let rev: Vec<f64> = u.iter().rev().copied().collect();
                let h = convolve(&rev, g);
                (0..n).map(|i| t[i + n - 1] - h[i + n]).collect()
            }
            Repr::Circulant2 { side, .. } => match &self.spectrum {
                Some(spec) => {
                    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                    let _ = fft2(&mut buf, *side);
                    for (b, s) in buf.iter_mut().zip(spec) {
                        *b *= s;
                    }
                    let _ = ifft2(&mut buf, *side);
                    buf.into_iter().map(|z| z.re).collect()
                }
                None => (0..n).map(|i| (0..n).map(|j| self.entry(i, j) * u[j]).sum()).collect(),
            },
            Repr::LowRank { basis, coef } => {
                let mut out = vec![0.0; n];
                for (m, c) in coef.iter().enumerate() {
                    if *c == 0.0 {
                        continue;
                    }
                    let row = &basis[m * n..(m + 1) * n];
                    let a: f64 = row.iter().zip(&u).map(|(p, v)| p * v).sum::<f64>() * c;
                    for (o, p) in out.iter_mut().zip(row) {
                        *o += a * p;
                    }
                }
                out
            }
        }
    }

    fn apply_adjoint(&self, g: &[f64]) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(k) => {
                let n = self.n();
                let u = self.weighted(g);
                (0..n).map(|j| (0..n).map(|i| k[i * n + j] * u[i]).sum()).collect()
            }
            _ => self.apply(g),
        }
    }

    fn max_column_norm(&self, q: f64) -> f64 {
        match &self.repr {
            Repr::Circulant(_) | Repr::Circulant2 { .. } => crate::space::lp_norm(&self.column(0), &self.weights, q),
            _ => {
                let w = &self.weights;
                (0..self.n()).map(|j| crate::space::lp_norm(&self.column(j), w, q)).fold(0.0, f64::max)
            }
        }
    }
}

/// `T P_B`: the operator composed with multiplication by `χ_B`.
pub struct Restricted<'a> {
    pub op: &'a dyn KernelOp,
    pub mask: Vec<bool>,
}

impl<'a> Restricted<'a> {
    pub fn new(op: &'a dyn KernelOp, mask: Vec<bool>) -> Self {
        Restricted { op, mask }
    }

    fn masked(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.mask).map(|(v, m)| if *m { *v } else { 0.0 }).collect()
    }
}

impl KernelOp for Restricted<'_> {
    fn n(&self) -> usize {
        self.op.n()
    }

    fn weights(&self) -> &[f64] {
        self.op.weights()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        if self.mask[j] {
            self.op.column(j)
        } else {
            vec![0.0; self.n()]
        }
    }

    fn row(&self, i: usize) -> Vec<f64> {
        self.masked(&self.op.row(i))
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.op.apply(&self.masked(f))
    }

    fn apply_adjoint(&self, g: &[f64]) -> Vec<f64> {
        self.masked(&self.op.apply_adjoint(g))
    }

    fn active_columns(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.mask[j]).collect()
    }
}

/// Operator with a complex kernel `K_re + i K_im`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOperator {
    pub re: LinearOperator,
    pub im: LinearOperator,
}

impl ComplexOperator {
    /// `max_{x,y} |K(x, y)|`, i.e. `‖T‖_{1→∞}`.
    pub fn max_abs_entry(&self) -> f64 {
        match (&self.re.repr, &self.im.repr) {
            (Repr::Circulant(a), Repr::Circulant(b))
            | (Repr::Circulant2 { profile: a, .. }, Repr::Circulant2 { profile: b, .. }) => {
                a.iter().zip(b).fold(0.0, |m, (x, y)| m.max(x.hypot(*y)))
            }
            _ => (0..self.re.n())
                .map(|j| {
                    let a = self.re.column(j);
                    let b = self.im.column(j);
                    a.iter().zip(&b).fold(0.0, |m, (x, y)| m.max(x.hypot(*y)))
                })
                .fold(0.0, f64::max),
        }
    }

    /// Applies to a complex function given as `(re, im)` parts.
    pub fn apply(&self, f_re: &[f64], f_im: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = (self.re.apply(f_re), self.im.apply(f_im));
        let (c, d) = (self.re.apply(f_im), self.im.apply(f_re));
        (a.iter().zip(&b).map(|(x, y)| x - y).collect(), c.iter().zip(&d).map(|(x, y)| x + y).collect())
    }
}

fn sqrt_pos(l: f64) -> f64 {
    l.max(0.0).sqrt()
}

/// `F(√L)` for a multiplier in the `√L` variable.
pub fn apply_multiplier_sqrt(model: &SpectralModel, f: &MultiplierFn) -> Result<LinearOperator> {
    let top = sqrt_pos(model.lambda_max());
    if f.domain_max < top * (1.0 - 1e-12) {
        bail!(Domain, "multiplier `{}` is defined on [0, {}] but the spectrum reaches {top}", f.id, f.domain_max);
    }
    let mut op = model.operator(&|l| f.eval(sqrt_pos(l)), format!("{}(sqrt L)", f.id))?;
    op.support_radius = None;
    Ok(op)
}

/// `F(L)` for a multiplier in the `L` variable.
pub fn apply_multiplier(model: &SpectralModel, f: &MultiplierFn) -> Result<LinearOperator> {
    if f.domain_max < model.lambda_max() * (1.0 - 1e-12) {
        bail!(Domain, "multiplier `{}` is defined on [0, {}] but the spectrum reaches {}", f.id, f.domain_max, model.lambda_max());
    }
    model.operator(&|l| f.eval(l), format!("{}(L)", f.id))
}

/// `E_{√L}[a, b)`.
pub fn spectral_projector(model: &SpectralModel, a: f64, b: f64) -> Result<LinearOperator> {
    model.operator(&|l| if sqrt_pos(l) >= a && sqrt_pos(l) < b { 1.0 } else { 0.0 }, format!("E[{a},{b})"))
}

/// `E_L[a, b)`.
pub fn spectral_projector_l(model: &SpectralModel, a: f64, b: f64) -> Result<LinearOperator> {
    model.operator(&|l| if l >= a && l < b { 1.0 } else { 0.0 }, format!("E_L[{a},{b})"))
}

/// `cos(t√L)`.
pub fn wave(model: &SpectralModel, t: f64) -> Result<LinearOperator> {
    if !(t >= 0.0) {
        bail!(Domain, "wave time must be nonnegative, got {t}");
    }
    let mut op = model.operator(&|l| (t * sqrt_pos(l)).cos(), format!("cos({t} sqrt L)"))?;
    op.support_radius = Some(t);
    Ok(op)
}

/// `cos(t√L) e^{-L/a²}`: the wave propagator with a Gaussian frequency taper,
/// which keeps its kernel concentrated near `D_t` under spectral truncation.
pub fn wave_tapered(model: &SpectralModel, t: f64, a: f64) -> Result<LinearOperator> {
    if !(t >= 0.0) || !(a > 0.0) {
        bail!(Domain, "tapered wave needs t >= 0 and a > 0");
    }
    let mut op = model.operator(&|l| (t * sqrt_pos(l)).cos() * (-l / (a * a)).exp(), format!("cos({t} sqrt L)exp(-L/{a}^2)"))?;
    op.support_radius = Some(t);
    Ok(op)
}

/// `e^{-tL}` for real `t >= 0`.
pub fn heat_real(model: &SpectralModel, t: f64) -> Result<LinearOperator> {
    if !(t >= 0.0) {
        bail!(Domain, "heat time must be nonnegative, got {t}");
    }
    model.operator(&|l| (-t * l).exp(), format!("exp(-{t} L)"))
}

/// `e^{-zL}` for `Re z >= 0`.
pub fn heat(model: &SpectralModel, z: Complex64) -> Result<ComplexOperator> {
    if !(z.re >= 0.0) {
        bail!(Domain, "heat semigroup needs Re z >= 0, got {z}");
    }
    let re = model.operator(&|l| (-z * l).exp().re, format!("Re exp(-({z}) L)"))?;
    let im = model.operator(&|l| (-z * l).exp().im, format!("Im exp(-({z}) L)"))?;
    Ok(ComplexOperator { re, im })
}

/// `e^{isL}`.
pub fn schrodinger(model: &SpectralModel, s: f64) -> Result<ComplexOperator> {
    heat(model, Complex64::new(0.0, -s))
}

/// `(I + t√L)^{-N}`.
pub fn resolvent_power(model: &SpectralModel, t: f64, n: u32) -> Result<LinearOperator> {
    if !(t > 0.0) || n == 0 {
        bail!(Domain, "resolvent power needs t > 0 and N >= 1");
    }
    model.operator(&|l| (1.0 + t * sqrt_pos(l)).powi(-(n as i32)), format!("(I+{t} sqrt L)^-{n}"))
}

/// `(I + t²L)^{-N/2}` from `(1/Γ(N/2)) ∫ e^{-s} s^{N/2-1} e^{-s t² L} ds`
/// evaluated by composite Gauss–Legendre quadrature on `[0, 80]`.
pub fn resolvent_power_laplace(model: &SpectralModel, t: f64, n: u32) -> Result<LinearOperator> {
    if !(t > 0.0) || n == 0 {
        bail!(Domain, "resolvent power needs t > 0 and N >= 1");
    }
    let a = n as f64 / 2.0;
    let (s, w) = composite(&uniform_edges(0.0, 80.0, 0.5), 16);
    let c = rgamma(a);
    model.operator(
        &|l| {
            c * s.iter().zip(&w).map(|(s, w)| w * (-s).exp() * s.powf(a - 1.0) * (-s * t * t * l).exp()).sum::<f64>()
        },
        format!("laplace (I+{t}^2 L)^-{a}"),
    )
}

/// `sup_λ (1 + t²λ²)^{N/2} (1 + tλ)^{-N}` over the retained spectrum.
pub fn resolvent_symbol_ratio(model: &SpectralModel, t: f64, n: u32) -> f64 {
    model
        .eigenvalues
        .iter()
        .map(|&l| {
            let r = sqrt_pos(l);
            (1.0 + t * t * l).powf(n as f64 / 2.0) * (1.0 + t * r).powi(-(n as i32))
        })
        .fold(0.0, f64::max)
}

/// `S_R^δ(L) = (I - L/R²)^δ_+`.
pub fn bochner_riesz(model: &SpectralModel, r: f64, delta: f64) -> Result<LinearOperator> {
    let (lvar, _) = crate::mult::bochner_riesz_fn(r, delta)?;
    model.operator(&|l| lvar.eval(l), lvar.id.clone())
}

/// Outcome of the two-route transference comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferenceReport {
    /// `max |K_direct - K_quad| / max |K_direct|`.
    pub discrepancy: f64,
    /// `(1/2π) ∫_{|ξ|>T} |Ĝ(ξ)| dξ` relative to `sup |h|` on the spectrum.
    pub tail_estimate: f64,
    /// `‖G‖₁`.
    pub g_l1: f64,
    pub nodes: usize,
}

/// `Ĝ(ξ) = ∫ G(λ) e^{-iξλ} dλ` on `ξ_j = ξ_0 + j·dξ` by the trapezoid rule.
fn fourier_samples(g_nodes: &[f64], g_vals: &[f64], dl: f64, xi0: f64, dxi: f64, count: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    for (&l, &g) in g_nodes.iter().zip(g_vals) {
        if g == 0.0 {
            continue;
        }
        let mut ph = Complex64::from_polar(g * dl, -xi0 * l);
        let rot = Complex64::from_polar(1.0, -dxi * l);
        for (j, o) in out.iter_mut().enumerate() {
            if j % 256 == 0 {
                ph = Complex64::from_polar(g * dl, -(xi0 + j as f64 * dxi) * l);
            }
            *o += ph;
            ph *= rot;
        }
    }
    out
}

/// Compares `h(L)` with `(1/2π) ∫_{-T}^{T} Ĝ(ξ) e^{-(1-iξ)L/R²} dξ`, where
/// `G(λ') = h(R²λ') e^{λ'}` and the `ξ` integral is the composite midpoint rule
/// with step `quadrature_step`. Here `h` is the symbol in the `L` variable, so
/// `F(√λ) = h(λ)` with `F` supported in `[0, R]`.
pub fn transference_check(
    model: &SpectralModel,
    h: &MultiplierFn,
    r: f64,
    xi_truncation: f64,
    quadrature_step: f64,
    tolerance: f64,
) -> Result<TransferenceReport> {
    if !(r > 0.0 && xi_truncation > 0.0 && quadrature_step > 0.0) {
        bail!(Domain, "transference needs R, T and step positive");
    }
    let r2 = r * r;
    if !(h.support_radius <= r2 * (1.0 + 1e-12)) {
        bail!(Precondition, "`{}` must vanish outside [-R², R²] = [-{r2}, {r2}]", h.id);
    }
    // G on its support in the rescaled variable
    let lo = -h.support_radius / r2;
    let hi = h.support_radius / r2;
    let m = 4096;
    let dl = (hi - lo) / m as f64;
    let g_nodes: Vec<f64> = (0..=m).map(|i| lo + i as f64 * dl).collect();
    let g_vals: Vec<f64> = g_nodes.iter().map(|&l| h.eval(r2 * l) * l.exp()).collect();
    let g_l1 = g_vals.iter().map(|v| v.abs()).sum::<f64>() * dl;
    let count = (2.0 * xi_truncation / quadrature_step).round() as usize;
    let xi0 = -xi_truncation + 0.5 * quadrature_step;
    let ghat = fourier_samples(&g_nodes, &g_vals, dl, xi0, quadrature_step, count);

    let clusters = model.clusters();
    let h_sup = clusters.iter().map(|c| h.eval(c.0).abs()).fold(0.0, f64::max);
    // measured tail beyond T on [T, 4T] (coarser step)
    let tail_step = 4.0 * quadrature_step;
    let tail_count = (3.0 * xi_truncation / tail_step).round() as usize;
    let tail_pos = fourier_samples(&g_nodes, &g_vals, dl, xi_truncation + 0.5 * tail_step, tail_step, tail_count);
    let tail_abs: Vec<f64> = tail_pos.iter().map(|z| z.norm()).collect();
    // |Ĝ(-ξ)| = |Ĝ(ξ)| for real G
    let tail_estimate = 2.0 * tail_abs.iter().sum::<f64>() * tail_step / (2.0 * PI) / h_sup.max(f64::MIN_POSITIVE);
    if tail_estimate > tolerance {
        let mut acc = 0.0;
        let mut suggestion = None;
        for (j, a) in tail_abs.iter().enumerate().rev() {
            acc += 2.0 * a * tail_step / (2.0 * PI) / h_sup.max(f64::MIN_POSITIVE);
            if acc > tolerance {
                suggestion = Some(xi_truncation + (j as f64 + 1.0) * tail_step);
                break;
            }
        }
        return Err(Error::Resolution(match suggestion {
            Some(t) if t < 4.0 * xi_truncation => {
                format!("xi-truncation {xi_truncation} leaves tail {tail_estimate:.3e} > {tolerance:.1e}; try T >= {t:.1}")
            }
            _ => format!(
                "xi-truncation {xi_truncation} leaves tail {tail_estimate:.3e} > {tolerance:.1e}; try T > {:.1}",
                4.0 * xi_truncation
            ),
        }));
    }

    let quad: Vec<(f64, Complex64)> = clusters
        .iter()
        .map(|&(l, _)| {
            let lp = l / r2;
            let mut acc = Complex64::new(0.0, 0.0);
            let base = (-lp).exp();
            let rot = Complex64::from_polar(1.0, quadrature_step * lp);
            let mut ph = Complex64::from_polar(base, xi0 * lp);
            for (j, g) in ghat.iter().enumerate() {
                if j % 256 == 0 {
                    ph = Complex64::from_polar(base, (xi0 + j as f64 * quadrature_step) * lp);
                }
                acc += g * ph;
                ph *= rot;
            }
            (l, acc * (quadrature_step / (2.0 * PI)))
        })
        .collect();
    let lookup = |l: f64| -> Complex64 {
        let i = quad.partition_point(|q| q.0 < l);
        quad[i].1
    };
    let direct = model.operator(&|l| h.eval(l), "direct")?;
    let diff = ComplexOperator {
        re: model.operator(&|l| h.eval(l) - lookup(l).re, "diff-re")?,
        im: model.operator(&|l| -lookup(l).im, "diff-im")?,
    };
    let scale = direct.max_abs_entry();
    if !(scale > 0.0) {
        bail!(Precondition, "`{}` vanishes on the retained spectrum", h.id);
    }
    Ok(TransferenceReport { discrepancy: diff.max_abs_entry() / scale, tail_estimate, g_l1, nodes: count })
}

/// Truncated square function `(Σ_{j∈J} |ψ(2^j√L) f|²)^{1/2}` with its tail.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareFunction {
    pub values: Vec<f64>,
    /// `sup_λ Σ_{j∉J} |ψ(2^j λ)|²` over the retained spectrum (`|j| <= 64`).
    pub tail: f64,
    /// `sup_λ Σ_{j∈J} |ψ(2^j λ)|²`.
    pub symbol_sup: f64,
}

pub fn quadratic_functional(
    model: &SpectralModel,
    psi: &MultiplierFn,
    f: &[f64],
    j_range: RangeInclusive<i32>,
) -> Result<SquareFunction> {
    if psi.eval(0.0) != 0.0 {
        bail!(Precondition, "square function needs psi(0) = 0, got {}", psi.eval(0.0));
    }
    let mut acc = vec![0.0; f.len()];
    for j in j_range.clone() {
        let s = 2f64.powi(j);
        let op = model.operator(&|l| psi.eval(s * sqrt_pos(l)), "psi_j")?;
        for (a, v) in acc.iter_mut().zip(op.apply(f)) {
            *a += v * v;
        }
    }
    let mut tail = 0.0f64;
    let mut symbol_sup = 0.0f64;
    for (l, _) in model.clusters() {
        let r = sqrt_pos(l);
        let (mut inside, mut outside) = (0.0, 0.0);
        for j in -64..=64 {
            let v = psi.eval(2f64.powi(j) * r).powi(2);
            if j_range.contains(&j) {
                inside += v;
            } else {
                outside += v;
            }
        }
        tail = tail.max(outside);
        symbol_sup = symbol_sup.max(inside);
    }
    Ok(SquareFunction { values: acc.into_iter().map(f64::sqrt).collect(), tail, symbol_sup })
}

/// Both sides of `‖Σ_k Q_k(√L) f_k‖₂² <= C Σ_k ‖f_k‖₂²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma45Outcome {
    pub lhs: f64,
    pub rhs: f64,
    /// `sup_λ Σ_k |Q_k(λ)|²` over the retained spectrum.
    pub c: f64,
}

pub fn lemma45_check(model: &SpectralModel, family: &[MultiplierFn], fs: &[Vec<f64>]) -> Result<Lemma45Outcome> {
    if family.len() != fs.len() || family.is_empty() {
        bail!(Precondition, "need one function per multiplier ({} vs {})", family.len(), fs.len());
    }
    let c = model
        .clusters()
        .iter()
        .map(|&(l, _)| family.iter().map(|q| q.eval(sqrt_pos(l)).powi(2)).sum::<f64>())
        .fold(0.0, f64::max);
    let mut sum = vec![0.0; model.space.len()];
    let mut rhs = 0.0;
    for (q, f) in family.iter().zip(fs) {
        let op = apply_multiplier_sqrt(model, q)?;
        for (s, v) in sum.iter_mut().zip(op.apply(f)) {
            *s += v;
        }
        rhs += model.space.lp_norm(f, 2.0).powi(2);
    }
    Ok(Lemma45Outcome { lhs: model.space.lp_norm(&sum, 2.0).powi(2), rhs: c * rhs, c })
}

/// `f̃(λ_i) = Σ_j ℓ(λ_i x_j) f(x_j) w_j`.
pub fn hankel_transform(cm: &ContinuumRadialModel, f: &[f64]) -> Vec<f64> {
    let fw: Vec<f64> = f.iter().zip(&cm.x_weights).map(|(a, b)| a * b).collect();
    (0..cm.nlambda()).map(|i| cm.ell_row(i).iter().zip(&fw).map(|(a, b)| a * b).sum()).collect()
}

/// `c_* Σ_i g(λ_i) ℓ(λ_i x) w_i` on the `x` nodes.
pub fn hankel_synthesize(cm: &ContinuumRadialModel, g: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cm.nx()];
    for (i, (gi, wi)) in g.iter().zip(&cm.lambda_weights).enumerate() {
        let a = cm.c_star * gi * wi;
        if a == 0.0 {
            continue;
        }
        for (o, l) in out.iter_mut().zip(cm.ell_row(i)) {
            *o += a * l;
        }
    }
    out
}

/// `F(√L) f = c_* ∫ F(λ) ℓ(λx) (∫ ℓ(λy) f(y) y^{n-1} dy) λ^{n-1} dλ`.
pub fn hankel_apply(cm: &ContinuumRadialModel, f_mult: &MultiplierFn, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != cm.nx() {
        bail!(Precondition, "function has {} samples for {} radial nodes", f.len(), cm.nx());
    }
    if !(f_mult.support_radius <= cm.grids.lambda_max * (1.0 + 1e-12)) {
        bail!(
            Precondition,
            "`{}` must be supported in [0, {}] (support radius {})",
            f_mult.id,
            cm.grids.lambda_max,
            f_mult.support_radius
        );
    }
    let t = hankel_transform(cm, f);
    let g: Vec<f64> = t.iter().zip(&cm.lambda_nodes).map(|(v, &l)| v * f_mult.eval(l)).collect();
    Ok(hankel_synthesize(cm, &g))
}

/// `(∫|∫F ℓ(λx) λ^{n-1} dλ|² x^{n-1} dx, ∫|F|² λ^{n-1} dλ)` without `c_*`.
pub fn plancherel_sides(cm: &ContinuumRadialModel, f: &MultiplierFn) -> (f64, f64) {
    let mut u = vec![0.0; cm.nx()];
    let mut rhs = 0.0;
    for i in 0..cm.nlambda() {
        let v = f.eval(cm.lambda_nodes[i]);
        rhs += v * v * cm.lambda_weights[i];
        let a = v * cm.lambda_weights[i];
        if a == 0.0 {
            continue;
        }
        for (o, l) in u.iter_mut().zip(cm.ell_row(i)) {
            *o += a * l;
        }
    }
    (u.iter().zip(&cm.x_weights).map(|(v, w)| v * v * w).sum(), rhs)
}

/// Gaussian used to fix `c_*`.
pub fn reference_gaussian(cm: &ContinuumRadialModel) -> MultiplierFn {
    let lm = cm.grids.lambda_max;
    gaussian(lm / 3.0, lm / 20.0)
}

/// Five Gaussian bumps away from both ends of the `λ` grid.
pub fn plancherel_family(cm: &ContinuumRadialModel) -> Vec<MultiplierFn> {
    let lm = cm.grids.lambda_max;
    [(0.2, 0.033), (0.28, 0.04), (0.35, 0.05), (0.42, 0.06), (0.5, 0.067)]
        .iter()
        .map(|&(c, w)| gaussian(c * lm, w * lm))
        .collect()
}

/// `c_* = RHS / LHS` on the reference Gaussian.
pub fn calibrate_cstar(cm: &ContinuumRadialModel) -> Result<f64> {
    let (lhs, rhs) = plancherel_sides(cm, &reference_gaussian(cm));
    if !(lhs > 0.0) {
        bail!(Resolution, "Plancherel left side vanished on the reference Gaussian");
    }
    Ok(rhs / lhs)
}

/// Maximum relative defect `|c_* LHS - RHS| / RHS` over a family.
pub fn hankel_plancherel_check(cm: &ContinuumRadialModel, family: &[MultiplierFn]) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in family {
        let (lhs, rhs) = plancherel_sides(cm, f);
        worst = worst.max((cm.c_star * lhs - rhs).abs() / rhs);
    }
    if worst > 1e-4 {
        bail!(Resolution, "Plancherel defect {worst:.3e} exceeds 1e-4 after calibration; refine the radial grids");
    }
    Ok(worst)
}

/// `R(λ)(x, y) = ν λ^{n-2} k(λ max(x,y)) ℓ_I(λ min(x,y))` with modified kernels.
pub fn resolvent_kernel_radial(cm: &ContinuumRadialModel, lambda: f64, x: f64, y: f64, nu: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        bail!(Domain, "resolvent needs lambda > 0, got {lambda}");
    }
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let k = scattering_k_scaled(&cm.params, lambda * hi)?;
    let l = scattering_l_modified_scaled(&cm.params, lambda * lo)?;
    Ok(nu * lambda.powf(cm.params.n - 2.0) * k * l * (lambda * (lo - hi)).exp())
}

/// Outcome of the resolvent residual check against the Galerkin model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventResidual {
    /// Least-squares fit of the constant `ν`.
    pub nu: f64,
    /// `‖(L_h + λ²) R f - f‖₂ / ‖f‖₂`.
    pub residual: f64,
}

/// Applies `R(λ)` on the Galerkin cells, fits `ν`, and measures the residual.
pub fn resolvent_residual(cm: &ContinuumRadialModel, g: &GalerkinRadial, lambda: f64, f: &[f64]) -> Result<ResolventResidual> {
    let xs: Vec<f64> = g.space.points.iter().map(|p| p[0]).collect();
    let m = xs.len();
    if f.len() != m {
        bail!(Precondition, "function has {} samples for {m} cells", f.len());
    }
    let mut u = vec![0.0; m];
    for j in 0..m {
        let a = f[j] * g.mass[j];
        if a == 0.0 {
            continue;
        }
        for i in 0..m {
            u[i] += resolvent_kernel_radial(cm, lambda, xs[i], xs[j], 1.0)? * a;
        }
    }
    let lu = g.apply(&u);
    let r: Vec<f64> = lu.iter().zip(&u).map(|(a, b)| a + lambda * lambda * b).collect();
    let w = &g.mass;
    let rr: f64 = r.iter().zip(w).map(|(a, w)| a * a * w).sum();
    let rf: f64 = r.iter().zip(f).zip(w).map(|((a, b), w)| a * b * w).sum();
    let ff: f64 = f.iter().zip(w).map(|(a, w)| a * a * w).sum();
    if !(rr > 0.0 && ff > 0.0) {
        bail!(Precondition, "resolvent residual needs a nonzero interior function");
    }
    let nu = rf / rr;
    let res: f64 = r.iter().zip(f).zip(w).map(|((a, b), w)| (nu * a - b).powi(2) * w).sum();
    Ok(ResolventResidual { nu, residual: (res / ff).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mult::{bump, indicator};

    #[test]
    fn projector_idempotent_on_circle() {
        let m = SpectralModel::circle(256, 32).unwrap();
        let e = spectral_projector(&m, 3.0, 4.0).unwrap();
        let f: Vec<f64> = (0..256).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let once = e.apply(&f);
        let twice = e.apply(&once);
        let d = once.iter().zip(&twice).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 1e-10);
        // kernel (1/π) cos(3(x - y))
        assert!((e.entry(0, 0) - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn toeplitz_hankel_fast_apply_matches_dense() {
        let m = SpectralModel::interval_dirichlet(128, 32).unwrap();
        let op = heat_real(&m, 0.01).unwrap();
        let f: Vec<f64> = (0..128).map(|i| (i as f64 * 0.37).sin() + 0.1).collect();
        let fast = op.apply(&f);
        let k = op.to_dense().unwrap();
        let d = LinearOperator::dense(k, op.weights.clone(), "d").unwrap().apply(&f);
        let e = fast.iter().zip(&d).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(e < 1e-10, "{e}");
    }

    #[test]
    fn heat_domain_and_wave_identity() {
        let m = SpectralModel::circle(64, 8).unwrap();
        assert!(heat(&m, Complex64::new(-0.1, 0.0)).is_err());
        let w = wave(&m, 0.0).unwrap();
        let p = spectral_projector(&m, 0.0, 100.0).unwrap();
        for j in 0..64 {
            for (a, b) in w.column(j).iter().zip(p.column(j)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn square_function_rejects_nonzero_origin() {
        let m = SpectralModel::circle(64, 8).unwrap();
        let f = vec![1.0; 64];
        assert!(quadratic_functional(&m, &bump(-1.0, 1.0).unwrap(), &f, 0..=2).is_err());
        assert!(quadratic_functional(&m, &indicator(1.0, 2.0).unwrap(), &f, 0..=2).is_ok());
    }
}

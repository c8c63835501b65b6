//! Multiplier functions: sampled even functions, dilations, Fourier analysis,
//! Sobolev / cell-sup / Besov-type norms, dyadic cutoffs, the moment-corrected
//! mollifier, Bochner–Riesz symbols, and the `Φ`-based decompositions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::fmt::Write as _;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Error, Result};
use crate::fft::{fft, ifft};
use crate::linalg::solve;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of one variable with support metadata.
#[derive(Clone)]
pub struct MultiplierFn {
    f: RealFn,
    pub id: String,
    /// `F ≡ 0` outside `[-R, R]` (for non-even functions: outside `(-∞, R]`); `∞` if unknown.
    pub support_radius: f64,
    pub even: bool,
    /// Largest argument at which the function is defined (sampled data).
    pub domain_max: f64,
}

impl fmt::Debug for MultiplierFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierFn")
            .field("id", &self.id)
            .field("support_radius", &self.support_radius)
            .field("even", &self.even)
            .finish()
    }
}

impl MultiplierFn {
    pub fn new(id: impl Into<String>, support_radius: f64, even: bool, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        MultiplierFn { f: Arc::new(f), id: id.into(), support_radius, even, domain_max: f64::INFINITY }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// Piecewise-linear interpolant of `(x, y)` samples on `[0, x_max]`, extended evenly.
    pub fn from_samples(id: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            bail!(Parse, "sampled multiplier needs at least two (x, y) pairs");
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            bail!(Parse, "sample abscissae must be strictly increasing");
        }
        if xs[0] < 0.0 {
            bail!(Parse, "sample abscissae must be nonnegative");
        }
        let xmax = *xs.last().unwrap_or(&0.0);
        let last_nonzero = xs.iter().zip(&ys).rev().find(|(_, y)| **y != 0.0).map(|(x, _)| *x);
        let support = match last_nonzero {
            Some(x) if x < xmax => x,
            Some(_) => f64::INFINITY,
            None => 0.0,
        };
        let (xs, ys) = (Arc::new(xs), Arc::new(ys));
        let mut m = MultiplierFn::new(id, support, true, move |t| {
            let t = t.abs();
            if t < xs[0] || t > xs[xs.len() - 1] {
                return 0.0;
            }
            let i = xs.partition_point(|&v| v <= t).clamp(1, xs.len() - 1);
            let (x0, x1) = (xs[i - 1], xs[i]);
            ys[i - 1] + (ys[i] - ys[i - 1]) * (t - x0) / (x1 - x0)
        });
        m.domain_max = xmax;
        Ok(m)
    }

    /// `(δ_R F)(x) = F(R x)`.
    pub fn scale(&self, r: f64) -> MultiplierFn {
        let f = self.f.clone();
        MultiplierFn {
            f: Arc::new(move |x| f(r * x)),
            id: format!("{}@scale={r}", self.id),
            support_radius: self.support_radius / r,
            even: self.even,
            domain_max: self.domain_max / r,
        }
    }

    /// Pointwise product.
    pub fn product(&self, other: &MultiplierFn) -> MultiplierFn {
        let (f, g) = (self.f.clone(), other.f.clone());
        MultiplierFn {
            f: Arc::new(move |x| f(x) * g(x)),
            id: format!("{}*{}", self.id, other.id),
            support_radius: self.support_radius.min(other.support_radius),
            even: self.even && other.even,
            domain_max: self.domain_max.min(other.domain_max),
        }
    }

    /// Composition with `λ ↦ λ²`, turning a function of `L` into one of `√L`.
    pub fn of_square(&self) -> MultiplierFn {
        let f = self.f.clone();
        MultiplierFn {
            f: Arc::new(move |x| f(x * x)),
            id: format!("{}(λ²)", self.id),
            support_radius: if self.support_radius.is_finite() { self.support_radius.max(0.0).sqrt() } else { f64::INFINITY },
            even: true,
            domain_max: self.domain_max.sqrt(),
        }
    }

    /// Samples on the symmetric grid `λ_j = -Λ + j·2Λ/N`, `j < N`.
    pub fn sample(&self, lambda_max: f64, points: usize) -> SampledFn {
        let step = 2.0 * lambda_max / points as f64;
        SampledFn {
            samples: (0..points).map(|j| self.eval(-lambda_max + j as f64 * step)).collect(),
            step,
            support_radius: self.support_radius,
            even: self.even,
        }
    }
}

/// Values of an (ideally even) function on a uniform symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    pub samples: Vec<f64>,
    pub step: f64,
    pub support_radius: f64,
    pub even: bool,
}

impl SampledFn {
    pub fn lambda_max(&self) -> f64 {
        self.step * self.samples.len() as f64 / 2.0
    }

    pub fn grid(&self) -> Vec<f64> {
        let l = self.lambda_max();
        (0..self.samples.len()).map(|j| -l + j as f64 * self.step).collect()
    }

    /// Two-column text `λ F(λ)`, one sample per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, y) in self.grid().iter().zip(&self.samples) {
            let _ = writeln!(out, "{x} {y}");
        }
        out
    }

    /// `max |F(λ) - F(-λ)|` over the grid.
    pub fn evenness_defect(&self) -> f64 {
        let n = self.samples.len();
        let c = n / 2;
        (1..c).fold(0.0f64, |m, k| m.max((self.samples[c + k] - self.samples[c - k]).abs()))
    }

    /// Riemann-sum `L^q` norm.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        (self.samples.iter().map(|v| v.abs().powf(q)).sum::<f64>() * self.step).powf(1.0 / q)
    }

    /// Fourier transform `F̂(t_k)`, `t_k = 2πk/(N·step)` in FFT order.
    pub fn fourier(&self) -> Result<(Vec<f64>, Vec<Complex64>)> {
        let n = self.samples.len();
        let mut buf: Vec<Complex64> = self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft(&mut buf)?;
        let dt = 2.0 * PI / (n as f64 * self.step);
        let t: Vec<f64> = (0..n).map(|k| freq_index(k, n) as f64 * dt).collect();
        for (k, z) in buf.iter_mut().enumerate() {
            let sign = if freq_index(k, n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            *z *= self.step * sign;
        }
        Ok((t, buf))
    }

    /// Inverse of [`SampledFn::fourier`] returning real parts.
    pub fn from_fourier(spec: &[Complex64], step: f64) -> Result<Vec<f64>> {
        let n = spec.len();
        let mut buf: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let sign = if freq_index(k, n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                *z * (sign / step)
            })
            .collect();
        ifft(&mut buf)?;
        Ok(buf.into_iter().map(|z| z.re).collect())
    }
}

fn freq_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// `s(x) = e^{-1/x}` for `x > 0`, else 0.
fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth even plateau: 1 on `[-1/2, 1/2]`, 0 outside `(-1, 1)`.
pub fn plateau(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 0.5 {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    let u = glue(1.0 - a);
    let v = glue(a - 0.5);
    u / (u + v)
}

/// Standard bump `exp(-1/(1-u²))` on `(-1, 1)`.
pub fn bump_profile(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// The dyadic cutoffs and the mollifier family.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CutoffFamily;

impl CutoffFamily {
    /// `η(ξ) = ψ̃(ξ) - ψ̃(2ξ)`, supported in `1/4 <= |ξ| <= 1`.
    pub fn eta(&self, xi: f64) -> f64 {
        plateau(xi) - plateau(2.0 * xi)
    }

    /// `η₀ = 1 - Σ_{ℓ>0} η(2^{-ℓ}·) = ψ̃`.
    pub fn eta0(&self, xi: f64) -> f64 {
        plateau(xi)
    }

    /// Dyadic piece `η_ℓ(t)`: `η₀` for `ℓ = 0`, `η(2^{-ℓ} t)` otherwise.
    pub fn eta_level(&self, level: u32, t: f64) -> f64 {
        if level == 0 {
            self.eta0(t)
        } else {
            self.eta(t / 2f64.powi(level as i32))
        }
    }

    /// `ψ`: 1 on `(-2, 2)`, supported in `(-4, 4)`.
    pub fn psi(&self, lambda: f64) -> f64 {
        plateau(lambda / 4.0)
    }

    /// `φ(λ) = ψ(λ/2) - ψ(λ)`, supported in `2 <= |λ| <= 8`.
    pub fn phi_tail(&self, lambda: f64) -> f64 {
        self.psi(lambda / 2.0) - self.psi(lambda)
    }

    /// Mollifier with vanishing moments up to order `⌊β⌋ + 2`.
    pub fn xi(&self, beta: f64) -> Result<Mollifier> {
        Mollifier::new(beta)
    }
}

/// `ξ = b·P`: even bump times an even polynomial fixing the moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    pub beta: f64,
    /// Coefficients of `P(x) = Σ_j a_j x^{2j}`.
    pub coeffs: Vec<f64>,
    /// Trapezoid nodes and `ξ` values on `(-1, 1)` used for convolutions.
    nodes: Vec<f64>,
    values: Vec<f64>,
    node_step: f64,
}

const MOLLIFIER_NODES: usize = 2048;

impl Mollifier {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || beta > 12.0 {
            bail!(Domain, "mollifier order beta={beta} outside [0, 12]");
        }
        let order = beta.floor() as usize + 2;
        let m = order / 2;
        let h = 2.0 / MOLLIFIER_NODES as f64;
        let nodes: Vec<f64> = (1..MOLLIFIER_NODES).map(|i| -1.0 + i as f64 * h).collect();
        let b: Vec<f64> = nodes.iter().map(|&x| bump_profile(x)).collect();
        let moment = |k: usize| -> f64 { nodes.iter().zip(&b).map(|(x, w)| w * x.powi(k as i32)).sum::<f64>() * h };
        let mut a = vec![0.0; (m + 1) * (m + 1)];
        let mut rhs = vec![0.0; m + 1];
        for i in 0..=m {
            for j in 0..=m {
                a[i * (m + 1) + j] = moment(2 * i + 2 * j);
            }
        }
        rhs[0] = 1.0;
        let coeffs = solve(&a, &rhs)?;
        let residual = (0..=m)
            .map(|i| {
                let s: f64 = (0..=m).map(|j| a[i * (m + 1) + j] * coeffs[j]).sum();
                (s - rhs[i]).abs()
            })
            .fold(0.0f64, f64::max);
        if residual > 1e-9 {
            bail!(Resolution, "moment system residual {residual:.2e} for beta={beta}");
        }
        let values = nodes
            .iter()
            .zip(&b)
            .map(|(&x, &bx)| bx * coeffs.iter().enumerate().map(|(j, c)| c * x.powi(2 * j as i32)).sum::<f64>())
            .collect();
        Ok(Mollifier { beta, coeffs, nodes, values, node_step: h })
    }

    pub fn eval(&self, x: f64) -> f64 {
        bump_profile(x) * self.coeffs.iter().enumerate().map(|(j, c)| c * x.powi(2 * j as i32)).sum::<f64>()
    }

    /// `ξ_N(x) = N ξ(N x)`.
    pub fn eval_scaled(&self, n: f64, x: f64) -> f64 {
        n * self.eval(n * x)
    }

    /// `ξ̂^{(k)}(0) = ∫ (-ix)^k ξ(x) dx` in absolute value.
    pub fn derivative_at_zero(&self, k: usize) -> f64 {
        (self.nodes.iter().zip(&self.values).map(|(x, v)| v * x.powi(k as i32)).sum::<f64>() * self.node_step).abs()
    }

    /// Number of derivative conditions imposed at 0.
    pub fn moment_order(&self) -> usize {
        self.beta.floor() as usize + 2
    }

    /// `(ξ_N ∗ H)(x) = ∫ ξ(u) H(x - u/N) du`.
    pub fn convolve(&self, h: &MultiplierFn, n: f64, x: f64) -> f64 {
        self.nodes.iter().zip(&self.values).map(|(u, v)| v * h.eval(x - u / n)).sum::<f64>() * self.node_step
    }
}

/// `‖F‖_{N,q} = ((1/2N) Σ_{ℓ=1-N}^{N} sup_{[(ℓ-1)/N, ℓ/N]} |F|^q)^{1/q}`.
///
/// Cell suprema are taken over the closed cells on 65 equispaced points.
pub fn nq_norm(f: &MultiplierFn, n: usize, q: f64) -> Result<f64> {
    if n == 0 {
        bail!(Domain, "N must be at least 1");
    }
    if f.support_radius > 1.0 + 1e-12 {
        bail!(Precondition, "‖·‖_(N,q) needs supp F ⊆ [-1, 1]; support radius is {}", f.support_radius);
    }
    Ok(nq_norm_unchecked(&|x| f.eval(x), n, q))
}

fn nq_norm_unchecked(f: &dyn Fn(f64) -> f64, n: usize, q: f64) -> f64 {
    const PER_CELL: usize = 64;
    let nf = n as f64;
    let mut acc = 0.0f64;
    for l in (1 - n as i64)..=(n as i64) {
        let a = (l - 1) as f64 / nf;
        let mut sup = 0.0f64;
        for i in 0..=PER_CELL {
            sup = sup.max(f(a + i as f64 / (PER_CELL as f64 * nf)).abs());
        }
        if q.is_infinite() {
            acc = acc.max(sup);
        } else {
            acc += sup.powf(q);
        }
    }
    if q.is_infinite() {
        acc
    } else {
        (acc / (2.0 * nf)).powf(1.0 / q)
    }
}

/// Threshold above which a Sobolev symbol is considered beyond the grid's trust region.
const SOBOLEV_SYMBOL_LIMIT: f64 = 1e10;

/// `‖(I - d²/dx²)^{β/2} F‖_q` on the grid `[-Λ, Λ)` with `points` samples.
pub fn sobolev_norm_on(f: &MultiplierFn, beta: f64, q: f64, lambda_max: f64, points: usize) -> Result<f64> {
    let s = f.sample(lambda_max, points);
    sobolev_norm_sampled(&s, beta, q)
}

/// Sobolev norm with a default grid: `Λ = 4·max(1, support)` and up to `2^15`
/// samples, fewer when the symbol would exceed `1e8` at the Nyquist frequency.
pub fn sobolev_norm(f: &MultiplierFn, beta: f64, q: f64) -> Result<f64> {
    let lm = if f.support_radius.is_finite() { 4.0 * f.support_radius.max(1.0) } else { 32.0 };
    let mut points = 1usize << 15;
    if beta > 0.0 {
        while points > 1024 && (1.0 + (PI * points as f64 / (2.0 * lm)).powi(2)).powf(beta / 2.0) > 1e8 {
            points /= 2;
        }
    }
    sobolev_norm_on(f, beta, q, lm, points)
}

pub fn sobolev_norm_sampled(s: &SampledFn, beta: f64, q: f64) -> Result<f64> {
    if beta == 0.0 {
        return Ok(s.lq_norm(q));
    }
    let (t, mut spec) = s.fourier()?;
    let nyq = PI / s.step;
    let top = (1.0 + nyq * nyq).powf(beta / 2.0);
    if top > SOBOLEV_SYMBOL_LIMIT {
        bail!(Resolution, "symbol (1+ξ²)^(β/2) reaches {top:.2e} at the Nyquist frequency; grid too fine for beta={beta}");
    }
    for (z, t) in spec.iter_mut().zip(&t) {
        *z *= (1.0 + t * t).powf(beta / 2.0);
    }
    let v = SampledFn::from_fourier(&spec, s.step)?;
    Ok(SampledFn { samples: v, ..s.clone() }.lq_norm(q))
}

/// Pieces `F^{(ℓ)}` of the dyadic Fourier decomposition on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition {
    pub pieces: Vec<SampledFn>,
}

impl DyadicDecomposition {
    /// `Σ_ℓ F^{(ℓ)}` on the grid.
    pub fn resum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.pieces[0].samples.len()];
        for p in &self.pieces {
            for (o, v) in out.iter_mut().zip(&p.samples) {
                *o += v;
            }
        }
        out
    }

    /// `Σ_ℓ 2^{ℓ s} ‖F^{(ℓ)}‖_q`.
    pub fn besov_sum(&self, s: f64, q: f64) -> f64 {
        self.pieces.iter().enumerate().map(|(l, p)| 2f64.powf(l as f64 * s) * p.lq_norm(q)).sum()
    }

    /// Largest `|F̂^{(ℓ)}(t)|` over `|t| > 2^ℓ`, relative to `max |F̂|`.
    pub fn side_lobe(&self, level: usize) -> Result<f64> {
        let (t, spec) = self.pieces[level].fourier()?;
        let max = spec.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
        let lim = 2f64.powi(level as i32) * (1.0 + 1e-12);
        Ok(t.iter().zip(&spec).filter(|(t, _)| t.abs() > lim).fold(0.0f64, |m, (_, z)| m.max(z.norm())) / max)
    }
}

/// `F^{(ℓ)}(λ) = (1/2π) ∫ η_ℓ(t) F̂(t) cos(tλ) dt` for `ℓ = 0 …` up to Nyquist.
pub fn dyadic_decompose(f: &SampledFn, family: &CutoffFamily) -> Result<DyadicDecomposition> {
    if !f.even || f.evenness_defect() > 1e-12 {
        bail!(Precondition, "dyadic decomposition needs an even function (defect {:.2e})", f.evenness_defect());
    }
    let (t, spec) = f.fourier()?;
    let nyq = PI / f.step;
    let mut pieces = Vec::new();
    let mut level = 0u32;
    loop {
        let masked: Vec<Complex64> = spec.iter().zip(&t).map(|(z, &t)| *z * family.eta_level(level, t)).collect();
        let samples = SampledFn::from_fourier(&masked, f.step)?;
        pieces.push(SampledFn { samples, step: f.step, support_radius: f64::INFINITY, even: true });
        if 2f64.powi(level as i32) / 4.0 > nyq {
            break;
        }
        level += 1;
    }
    Ok(DyadicDecomposition { pieces })
}

/// Result of a mollifier defect measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierDefect {
    /// `‖H - ξ_N ∗ H‖_{N,q}` over the cells of `[-1, 1]`.
    pub defect: f64,
    /// `defect / (N^{-β} ‖H‖_{W^{β,q}})`.
    pub bound_ratio: f64,
}

pub fn mollifier_defect(h: &MultiplierFn, n: usize, beta: f64, q: f64, family: &CutoffFamily) -> Result<MollifierDefect> {
    let qinv = if q.is_infinite() { 0.0 } else { 1.0 / q };
    if !(beta > qinv) {
        bail!(Precondition, "mollifier estimate needs beta > 1/q (beta={beta}, q={q})");
    }
    if h.support_radius > 1.0 + 1e-12 {
        bail!(Precondition, "H must be supported in [-1, 1]; support radius is {}", h.support_radius);
    }
    let xi = family.xi(beta)?;
    let nf = n as f64;
    let diff = |x: f64| h.eval(x) - xi.convolve(h, nf, x);
    let defect = nq_norm_unchecked(&diff, n, q);
    let w = sobolev_norm(h, beta, q)?;
    Ok(MollifierDefect { defect, bound_ratio: defect / (nf.powf(-beta) * w) })
}

/// Bochner–Riesz symbols in the `L` and `√L` variables.
pub fn bochner_riesz_fn(r: f64, delta: f64) -> Result<(MultiplierFn, MultiplierFn)> {
    if !(r > 0.0) {
        bail!(Domain, "Bochner–Riesz radius must be positive, got {r}");
    }
    let r2 = r * r;
    let lvar = MultiplierFn::new(format!("br:R={r}:delta={delta}"), r2, false, move |l| {
        let u = 1.0 - l / r2;
        if l < 0.0 || u < 0.0 || (delta == 0.0 && u == 0.0 && l > r2) {
            0.0
        } else if delta == 0.0 {
            1.0
        } else if u == 0.0 {
            if delta > 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            u.powf(delta)
        }
    });
    let svar = MultiplierFn::new(format!("br_sqrt:R={r}:delta={delta}"), r, true, move |x| {
        let u = 1.0 - x * x / r2;
        if u < 0.0 {
            0.0
        } else if delta == 0.0 {
            1.0
        } else if u == 0.0 {
            if delta > 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            u.powf(delta)
        }
    });
    Ok((lvar, svar))
}

/// `Φ(λ) = 6λ^{-3}(λ - sin λ)`, Taylor branch for `|λ| < 1e-2`.
pub fn phi_fn(lambda: f64) -> f64 {
    let l = lambda;
    if l.abs() < 1e-2 {
        let l2 = l * l;
        1.0 - l2 / 20.0 + l2 * l2 / 840.0 - l2 * l2 * l2 / 60480.0
    } else {
        6.0 * (l - l.sin()) / (l * l * l)
    }
}

/// `Φ̂(t) = 3π (1 - |t|)²₊`.
pub fn phi_hat(t: f64) -> f64 {
    let u = (1.0 - t.abs()).max(0.0);
    3.0 * PI * u * u
}

pub fn phi_multiplier() -> MultiplierFn {
    MultiplierFn::new("phi", f64::INFINITY, true, phi_fn)
}

/// The pair `n_k`, `η_k` with `S = η_k n_k + S n_k`.
#[derive(Debug, Clone)]
pub struct TaoPieces {
    pub n_k: MultiplierFn,
    pub eta_k: MultiplierFn,
    pub symbol: MultiplierFn,
    pub r: f64,
    pub k: i32,
    pub n_even: u32,
}

/// `n_k(λ) = Φ^{N/2}(2^k λ / (R N))`, `η_k = S (1 - n_k) / n_k` with `S = S_R^δ(λ²)`.
pub fn tao_decomposition(r: f64, delta: f64, n_even: u32, k: i32) -> Result<TaoPieces> {
    if n_even < 4 || n_even % 2 != 0 {
        bail!(Precondition, "N={n_even} must be even and at least 4 so that Φ^(N/2) is an integer power");
    }
    if k > 0 {
        bail!(Precondition, "only k <= 0 is constructed, got k={k}");
    }
    let (_, s) = bochner_riesz_fn(r, delta)?;
    let a = 2f64.powi(k) / (r * n_even as f64);
    let half = (n_even / 2) as i32;
    let n_k = MultiplierFn::new(format!("n_k:R={r}:N={n_even}:k={k}"), f64::INFINITY, true, move |l| phi_fn(a * l).powi(half));
    let (s2, nk2) = (s.clone(), n_k.clone());
    let eta_k = MultiplierFn::new(format!("eta_k:R={r}:delta={delta}:N={n_even}:k={k}"), r, true, move |l| {
        let sv = s2.eval(l);
        if sv == 0.0 {
            return 0.0;
        }
        let nv = nk2.eval(l);
        sv * (1.0 - nv) / nv
    });
    Ok(TaoPieces { n_k, eta_k, symbol: s, r, k, n_even })
}

impl TaoPieces {
    /// The support bound `2^k / R` for `n̂_k`.
    pub fn support_bound(&self) -> f64 {
        2f64.powi(self.k) / self.r
    }

    /// `max |S - (η_k n_k + S n_k)|` over a grid.
    pub fn splitting_residual(&self, grid: &[f64]) -> f64 {
        grid.iter()
            .map(|&l| {
                let s = self.symbol.eval(l);
                let nk = self.n_k.eval(l);
                (s - (self.eta_k.eval(l) * nk + s * nk)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `n̂_k(t) = 2∫_0^∞ n_k(λ) cos(tλ) dλ` by the trapezoid rule.
    pub fn n_hat(&self, t: f64) -> f64 {
        let a = 2f64.powi(self.k) / (self.r * self.n_even as f64);
        let u_max = 400.0;
        let du = 0.02;
        let steps = (u_max / du) as usize;
        let half = (self.n_even / 2) as i32;
        let mut s = 0.5 * 1.0;
        for i in 1..=steps {
            let u = i as f64 * du;
            s += phi_fn(u).powi(half) * (t * u / a).cos();
        }
        2.0 * s * du / a
    }

    /// Largest `t` on a grid up to `2 × bound` with `|n̂_k(t)| > tol·|n̂_k(0)|`.
    pub fn measured_support_radius(&self, tol: f64) -> f64 {
        let bound = self.support_bound();
        let base = self.n_hat(0.0).abs();
        let m = 2000;
        let mut last = 0.0;
        for i in 0..=m {
            let t = 2.0 * bound * i as f64 / m as f64;
            if self.n_hat(t).abs() > tol * base {
                last = t;
            }
        }
        last
    }

    /// `sup_λ |n_k(λ)| (1 + 2^k|λ|/R)^N` on a grid.
    pub fn envelope_constant(&self, grid: &[f64]) -> f64 {
        let c = 2f64.powi(self.k) / self.r;
        grid.iter()
            .map(|&l| self.n_k.eval(l).abs() * (1.0 + c * l.abs()).powi(self.n_even as i32))
            .fold(0.0, f64::max)
    }
}

/// `sup_λ Σ_{k=k_min}^{0} |η_k(λ)|²` over a grid.
pub fn tao_eta_square_sum(r: f64, delta: f64, n_even: u32, k_min: i32, grid: &[f64]) -> Result<f64> {
    let pieces: Vec<TaoPieces> = (k_min..=0).map(|k| tao_decomposition(r, delta, n_even, k)).collect::<Result<_>>()?;
    Ok(grid
        .iter()
        .map(|&l| pieces.iter().map(|p| p.eta_k.eval(l).powi(2)).sum::<f64>())
        .fold(0.0, f64::max))
}

/// `G_k(λ) = Φ(λ - k)`.
pub fn gk_fn(k: u32) -> Result<MultiplierFn> {
    if k < 1 {
        bail!(Domain, "G_k needs k >= 1");
    }
    let kf = k as f64;
    Ok(MultiplierFn::new(format!("gk:k={k}"), f64::INFINITY, false, move |l| phi_fn(l - kf)))
}

/// `Ĝ_k(ξ) = 3π (1 - |ξ|)²₊ e^{-ikξ}`.
pub fn gk_hat(k: u32, xi: f64) -> Complex64 {
    Complex64::from_polar(phi_hat(xi), -(k as f64) * xi)
}

/// Explicit form `6(λ-k)^{-2} - 6 sin(λ-k)/(λ-k)³`.
pub fn gk_explicit(k: u32, lambda: f64) -> f64 {
    let u = lambda - k as f64;
    6.0 / (u * u) - 6.0 * u.sin() / (u * u * u)
}

/// `min_{[k, k+1)} G_k(λ) e^{-λ/(2k)}` on a fine grid.
pub fn gk_lower_constant(k: u32) -> f64 {
    let kf = k as f64;
    (0..=4000)
        .map(|i| {
            let l = kf + i as f64 / 4001.0;
            phi_fn(l - kf) * (-l / (2.0 * kf)).exp()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Max deviation between the FFT of sampled `G_k` and `Ĝ_k` on `|ξ| <= xi_max`.
///
/// The slowly decaying part `6/(1+(λ-k)²)` is removed before sampling and its
/// transform `6π e^{-|ξ|} e^{-ikξ}` added back.
pub fn gk_fft_error(k: u32, xi_max: f64) -> Result<f64> {
    let kf = k as f64;
    let n = 1usize << 16;
    let step = 0.05;
    let half = n as f64 * step / 2.0;
    // centre the window on λ = k so the residual is symmetric about its peak
    let resid = MultiplierFn::new("gk-resid", f64::INFINITY, false, move |u| phi_fn(u) - 6.0 / (1.0 + u * u));
    let s = resid.sample(half, n);
    let (t, spec) = s.fourier()?;
    let mut err = 0.0f64;
    for (t, z) in t.iter().zip(&spec) {
        if t.abs() > xi_max {
            continue;
        }
        // shift by k: transform of f(λ - k) is e^{-ikt} f̂(t)
        let lor = 6.0 * PI * (-t.abs()).exp();
        let got = Complex64::from_polar(1.0, -kf * t) * (*z + lor);
        err = err.max((got - gk_hat(k, *t)).norm());
    }
    Ok(err)
}

/// `δ_q(p) = max{0, n|1/p - 1/2| - 1/q}`.
pub fn critical_exponent(p: f64, q: f64, n: f64) -> f64 {
    let ip = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let iq = if q.is_infinite() { 0.0 } else { 1.0 / q };
    (n * (ip - 0.5).abs() - iq).max(0.0)
}

/// Smooth bump supported on `[a, b]`.
pub fn bump(a: f64, b: f64) -> Result<MultiplierFn> {
    if !(b > a) {
        bail!(Domain, "bump needs b > a, got [{a}, {b}]");
    }
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    let even = a == -b;
    let support = if even { b } else { b.max(a.abs()) };
    Ok(MultiplierFn::new(format!("bump:a={a}:b={b}"), support, even, move |x| bump_profile((x - c) / h)))
}

/// `χ_{[a, b)}`.
pub fn indicator(a: f64, b: f64) -> Result<MultiplierFn> {
    if !(b > a) {
        bail!(Domain, "indicator needs b > a, got [{a}, {b})");
    }
    Ok(MultiplierFn::new(format!("indicator:a={a}:b={b}"), b.max(a.abs()), a == -b, move |x| {
        if x >= a && x < b {
            1.0
        } else {
            0.0
        }
    }))
}

/// `exp(-((λ - c)/w)²)`.
pub fn gaussian(center: f64, width: f64) -> MultiplierFn {
    MultiplierFn::new(format!("gauss:c={center}:w={width}"), f64::INFINITY, center == 0.0, move |x| {
        let u = (x - center) / width;
        (-u * u).exp()
    })
}

/// Even function whose Fourier transform is the bump `b(t/ρ)` on `[-ρ, ρ]`,
/// optionally raised to `power` (`b^power`). Evaluated by trapezoid quadrature
/// of `(ρ/π) ∫_0^1 b(u)^power cos(ρ u λ) du`.
pub fn fourier_bump(rho: f64, power: u32) -> Result<MultiplierFn> {
    if !(rho > 0.0) || power == 0 {
        bail!(Domain, "Fourier bump needs rho > 0 and power >= 1");
    }
    const M: usize = 20_000;
    let du = 1.0 / M as f64;
    let table: Arc<Vec<f64>> = Arc::new((1..M).map(|i| bump_profile(i as f64 * du).powi(power as i32)).collect());
    let b0 = bump_profile(0.0).powi(power as i32);
    Ok(MultiplierFn::new(format!("fbump:rho={rho}:pow={power}"), f64::INFINITY, true, move |l| {
        let w = rho * l * du;
        // cos((i) w) by rotation keeps the loop cheap
        let (c1, s1) = (w.cos(), w.sin());
        let (mut c, mut s) = (c1, s1);
        let mut acc = 0.5 * b0;
        for (i, v) in table.iter().enumerate() {
            acc += v * c;
            if i % 64 == 63 {
                let a = (i + 2) as f64 * w;
                c = a.cos();
                s = a.sin();
            } else {
                let nc = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = nc;
            }
        }
        acc * du * rho / PI
    }))
}

/// Parsed multiplier specification string.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierSpec {
    BochnerRiesz { r: f64, delta: f64 },
    Bump { a: f64, b: f64 },
    Indicator { a: f64, b: f64 },
    Gaussian { center: f64, width: f64 },
    Phi,
    Gk { k: u32 },
    FourierBump { rho: f64, power: u32 },
    Custom { file: String },
}

fn kv<'a>(parts: &[&'a str], key: &str) -> Result<&'a str> {
    parts
        .iter()
        .find_map(|p| p.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Parse(format!("missing `{key}=` in multiplier spec")))
}

fn num(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}` for {what}")))
}

impl MultiplierSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let rest = &parts[1..];
        Ok(match parts[0] {
            "br" => MultiplierSpec::BochnerRiesz { r: num(kv(rest, "R")?, "R")?, delta: num(kv(rest, "delta")?, "delta")? },
            "bump" => MultiplierSpec::Bump { a: num(kv(rest, "a")?, "a")?, b: num(kv(rest, "b")?, "b")? },
            "indicator" => MultiplierSpec::Indicator { a: num(kv(rest, "a")?, "a")?, b: num(kv(rest, "b")?, "b")? },
            "gauss" => MultiplierSpec::Gaussian { center: num(kv(rest, "c")?, "c")?, width: num(kv(rest, "w")?, "w")? },
            "phi" => MultiplierSpec::Phi,
            "gk" => {
                let k = num(kv(rest, "k")?, "k")?;
                if k < 1.0 || k.fract() != 0.0 {
                    bail!(Parse, "gk needs a positive integer k, got {k}");
                }
                MultiplierSpec::Gk { k: k as u32 }
            }
            "fbump" => {
                let power = rest.iter().find_map(|p| p.strip_prefix("pow=")).map(|s| num(s, "pow")).transpose()?.unwrap_or(1.0);
                MultiplierSpec::FourierBump { rho: num(kv(rest, "rho")?, "rho")?, power: power as u32 }
            }
            "custom" => MultiplierSpec::Custom { file: kv(rest, "file")?.to_string() },
            other => bail!(Parse, "unknown multiplier family `{other}`"),
        })
    }

    /// Builds the function; custom files must be loaded by the caller.
    pub fn build(&self) -> Result<MultiplierFn> {
        match *self {
            MultiplierSpec::BochnerRiesz { r, delta } => Ok(bochner_riesz_fn(r, delta)?.1),
            MultiplierSpec::Bump { a, b } => bump(a, b),
            MultiplierSpec::Indicator { a, b } => indicator(a, b),
            MultiplierSpec::Gaussian { center, width } => Ok(gaussian(center, width)),
            MultiplierSpec::Phi => Ok(phi_multiplier()),
            MultiplierSpec::Gk { k } => gk_fn(k),
            MultiplierSpec::FourierBump { rho, power } => fourier_bump(rho, power),
            MultiplierSpec::Custom { ref file } => {
                Err(Error::Precondition(format!("custom multiplier `{file}` must be loaded from its sample file")))
            }
        }
    }
}

/// Registry entries `(family, template)` in a stable order.
pub const MULTIPLIER_FAMILIES: &[(&str, &str)] = &[
    ("br", "br:R=64:delta=0.5"),
    ("bump", "bump:a=0:b=1"),
    ("indicator", "indicator:a=k:b=k+1"),
    ("gauss", "gauss:c=4:w=0.6"),
    ("phi", "phi"),
    ("gk", "gk:k=5"),
    ("fbump", "fbump:rho=0.2:pow=1"),
    ("custom", "custom:file=samples.txt"),
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scale_identity_and_support() {
        let f = bump(0.0, 2.0).unwrap();
        let g = f.scale(1.0);
        for x in [0.1, 0.7, 1.9] {
            assert_eq!(f.eval(x), g.eval(x));
        }
        assert_eq!(f.scale(2.0).support_radius, 1.0);
    }

    #[test]
    fn nq_examples() {
        let chi = indicator(-1.0, 1.0 + 1e-15).unwrap();
        let mut chi = chi;
        chi.support_radius = 1.0;
        for n in [1, 3, 8] {
            for q in [1.0, 2.0, f64::INFINITY] {
                assert_relative_eq!(nq_norm(&chi, n, q).unwrap(), 1.0, max_relative = 1e-12);
            }
        }
        let abs = MultiplierFn::new("abs", 1.0, true, |x: f64| if x.abs() <= 1.0 { x.abs() } else { 0.0 });
        assert_relative_eq!(nq_norm(&abs, 2, 1.0).unwrap(), 0.75, max_relative = 1e-12);
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi_fn(0.0), 1.0);
        assert_relative_eq!(phi_hat(0.5), 3.0 * PI / 4.0, max_relative = 1e-15);
        // Taylor branch meets the closed form
        let a = phi_fn(0.0099999);
        let b = 6.0 * (0.0100001 - 0.0100001f64.sin()) / 0.0100001f64.powi(3);
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn critical_exponent_examples() {
        assert_eq!(critical_exponent(2.0, 2.0, 3.0), 0.0);
        assert_relative_eq!(critical_exponent(1.0, 2.0, 3.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(critical_exponent(1.2, 2.0, 2.0), 1.0 / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn bochner_riesz_edges() {
        let (l, s) = bochner_riesz_fn(3.0, 0.0).unwrap();
        assert_eq!(l.eval(0.0), 1.0);
        assert_eq!(l.eval(9.0), 1.0);
        assert_eq!(l.eval(9.0001), 0.0);
        assert_eq!(s.eval(2.9), 1.0);
        let (l, _) = bochner_riesz_fn(2.0, 0.7).unwrap();
        assert_eq!(l.eval(0.0), 1.0);
    }

    #[test]
    fn tao_trivial_point() {
        let t = tao_decomposition(1.0, 0.5, 8, 0).unwrap();
        assert_eq!(t.n_k.eval(0.0), 1.0);
        assert_eq!(t.eta_k.eval(0.0), 0.0);
        assert!(tao_decomposition(1.0, 0.5, 7, 0).is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!(MultiplierSpec::parse("br:R=64:delta=0.5").unwrap(), MultiplierSpec::BochnerRiesz { r: 64.0, delta: 0.5 });
        assert_eq!(MultiplierSpec::parse("bump:a=0:b=1").unwrap(), MultiplierSpec::Bump { a: 0.0, b: 1.0 });
        assert!(MultiplierSpec::parse("wobble:x=1").is_err());
    }
}

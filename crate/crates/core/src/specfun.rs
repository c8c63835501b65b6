//! Bessel functions of real order, normalized Hermite functions, and the
//! generalized eigenfunction kernels of the inverse-square radial operator
//! `-d²/dr² - (n-1)/r d/dr + c/r²` on `(0, ∞)` with measure `r^{n-1} dr`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Error, Result};

const MAX_ORDER: f64 = 60.0;
const MAX_ARG: f64 = 1e4;
const SERIES_LIMIT: f64 = 2.0;

/// `1/Γ(z)`, zero at the poles.
pub fn rgamma(z: f64) -> f64 {
    if z <= 0.0 && z == z.floor() {
        return 0.0;
    }
    if z > 170.0 {
        return (-libm::lgamma(z)).exp();
    }
    1.0 / libm::tgamma(z)
}

/// `sin(πν)` with the argument reduced first.
fn sin_pi(nu: f64) -> f64 {
    let r = nu.round();
    let s = (PI * (nu - r)).sin();
    if (r as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

fn check_order_arg(nu: f64, x: f64) -> Result<()> {
    if !(0.0..=MAX_ORDER).contains(&nu) || !nu.is_finite() {
        bail!(Domain, "Bessel order {nu} outside [0, {MAX_ORDER}]");
    }
    if !(x > 0.0 && x <= MAX_ARG) {
        bail!(Domain, "Bessel argument {x} outside (0, {MAX_ARG}]");
    }
    Ok(())
}

/// Branch evaluators, exposed so the crossover windows can be cross-checked.
pub mod branches {
    use super::*;

    /// Ascending series `Σ (-1)^k (x/2)^{2k+ν} / (k! Γ(k+ν+1))`.
    pub fn j_series(nu: f64, x: f64) -> f64 {
        let h = x / 2.0;
        let lead = if nu == 0.0 {
            1.0
        } else {
            (nu * h.ln() - libm::lgamma(nu + 1.0)).exp()
        };
        let mut t = 1.0;
        let mut s = 1.0;
        let mut k = 1.0;
        loop {
            t *= -h * h / (k * (k + nu));
            s += t;
            if t.abs() < 1e-17 * s.abs().max(1e-300) && k > h {
                break;
            }
            k += 1.0;
            if k > 500.0 {
                break;
            }
        }
        lead * s
    }

    /// Hankel asymptotic expansion; `None` when its smallest term exceeds `1e-16`.
    pub fn j_hankel(nu: f64, x: f64) -> Option<f64> {
        let mu = 4.0 * nu * nu;
        let (mut p, mut q) = (1.0, 0.0);
        let mut t = 1.0f64;
        let mut k = 1usize;
        loop {
            let kf = k as f64;
            let odd = (2.0 * kf - 1.0) * (2.0 * kf - 1.0);
            let next = t * (mu - odd) / (8.0 * kf * x);
            if next.abs() > t.abs() && k > 1 {
                return None;
            }
            t = next;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += sign * t;
            } else {
                q += sign * t;
            }
            if t.abs() < 1e-16 {
                break;
            }
            k += 1;
            if k > 200 {
                return None;
            }
        }
        let chi = x - (nu / 2.0 + 0.25) * PI;
        Some((2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()))
    }

    /// Steed's method: CF1 for `J'/J`, CF2 for `p + iq`, downward recurrence.
    /// Valid for `x >= 2`.
    pub fn j_steed(nu: f64, x: f64) -> Result<f64> {
        const EPS: f64 = 1e-16;
        const FPMIN: f64 = 1e-300;
        let nl = ((nu - x + 1.5).floor()).max(0.0) as usize;
        let xmu = nu - nl as f64;
        let xmu2 = xmu * xmu;
        let xi = 1.0 / x;
        let xi2 = 2.0 * xi;
        let w = xi2 / PI;
        let mut isign = 1.0;
        let mut h = (nu * xi).max(FPMIN);
        let mut b = xi2 * nu;
        let mut d = 0.0;
        let mut c = h;
        let mut converged = false;
        for _ in 0..200_000 {
            b += xi2;
            d = b - d;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b - 1.0 / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = c * d;
            h *= del;
            if d < 0.0 {
                isign = -isign;
            }
            if (del - 1.0).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            bail!(Convergence, "Bessel CF1 at nu={nu}, x={x}");
        }
        let mut rjl = isign * 1e-30;
        let mut rjpl = h * rjl;
        let rjl1 = rjl;
        let mut fact = nu * xi;
        for _ in 0..nl {
            let rjtemp = fact * rjl + rjpl;
            fact -= xi;
            rjpl = fact * rjtemp - rjl;
            rjl = rjtemp;
        }
        if rjl == 0.0 {
            rjl = EPS;
        }
        let f = rjpl / rjl;
        // CF2
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut ok = false;
        for i in 2..100_000 {
            a += (2 * (i - 1)) as f64;
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            bail!(Convergence, "Bessel CF2 at nu={nu}, x={x}");
        }
        let gam = (p - f) / q;
        let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
        Ok(rjl1 * (rjmu / rjl))
    }

    /// `I_ν(x)` series for any real non-pole order (negative orders allowed).
    pub fn i_series(nu: f64, x: f64) -> f64 {
        let h = x / 2.0;
        let mut t = h.powf(nu) * rgamma(nu + 1.0);
        let mut s = t;
        let mut k = 1.0;
        loop {
            t *= h * h / (k * (k + nu));
            s += t;
            if t.abs() < 1e-17 * s.abs() && k > h {
                break;
            }
            k += 1.0;
            if k > 2000.0 {
                break;
            }
        }
        s
    }

    /// Temme's series for `K_μ`, `K_{μ+1}` with `|μ| <= 1/2`, `x <= 2`.
    pub fn k_temme(mu: f64, x: f64) -> (f64, f64) {
        const EPS: f64 = 1e-16;
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = gamma_pieces(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..10_000 {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu * mu);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        (sum, sum1 * 2.0 / x)
    }

    /// Steed CF2 for `e^x K_μ`, `e^x K_{μ+1}` with `|μ| <= 1/2`, `x >= 2`.
    pub fn k_steed_scaled(mu: f64, x: f64) -> Result<(f64, f64)> {
        const EPS: f64 = 1e-16;
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu * mu;
        let mut c = a1;
        let mut q = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut ok = false;
        for i in 2..100_000 {
            a -= (2 * (i - 1)) as f64;
            c = -a * c / i as f64;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            bail!(Convergence, "K CF2 at mu={mu}, x={x}");
        }
        h *= a1;
        let kmu = (PI / (2.0 * x)).sqrt() / s;
        let k1 = kmu * (mu + x + 0.5 - h) / x;
        Ok((kmu, k1))
    }
}

// Taylor coefficients of 1/Γ(z) = Σ c_k z^k.
const RGAMMA_TAYLOR: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// `(gam1, gam2, 1/Γ(1+μ), 1/Γ(1-μ))` for Temme's series, `|μ| <= 1/2`.
pub fn gamma_pieces(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+μ) = Σ_k c_k μ^{k-1}; split into even and odd parts in μ.
    let mut even = 0.0; // Σ_{k odd} c_k μ^{k-1}
    let mut odd_over_mu = 0.0; // Σ_{k even} c_k μ^{k-2}
    let mut pw = 1.0;
    for (idx, c) in RGAMMA_TAYLOR.iter().enumerate() {
        let k = idx + 1;
        if k % 2 == 1 {
            even += c * pw;
        } else {
            odd_over_mu += c * pw;
            pw *= mu * mu;
        }
    }
    let gampl = even + mu * odd_over_mu;
    let gammi = even - mu * odd_over_mu;
    (-odd_over_mu, even, gampl, gammi)
}

/// Bessel function of the first kind `J_ν(x)`, `0 <= ν <= 60`, `0 < x <= 1e4`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_order_arg(nu, x)?;
    if x <= SERIES_LIMIT || x * x < 4.0 * (nu + 1.0) {
        return Ok(branches::j_series(nu, x));
    }
    if x >= 25.0 {
        if let Some(v) = branches::j_hankel(nu, x) {
            return Ok(v);
        }
    }
    branches::j_steed(nu, x)
}

/// Modified Bessel function `I_ν(x)`, `0 <= ν <= 60`, `0 <= x <= 700`.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    if x == 0.0 && (0.0..=MAX_ORDER).contains(&nu) {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if x > 700.0 {
        bail!(Domain, "I_nu({x}) overflows; use bessel_i_scaled");
    }
    Ok(bessel_i_scaled(nu, x)? * x.exp())
}

/// `e^{-x} I_ν(x)`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    check_order_arg(nu, x)?;
    if x <= 700.0 {
        let h = x / 2.0;
        let mut t = 1.0;
        let mut s = 1.0;
        let mut k = 1.0;
        loop {
            t *= h * h / (k * (k + nu));
            s += t;
            if t < 1e-17 * s && k > h {
                break;
            }
            k += 1.0;
        }
        let lead = if nu == 0.0 { 0.0 } else { nu * h.ln() - libm::lgamma(nu + 1.0) };
        return Ok((lead - x).exp() * s);
    }
    // large-argument expansion with alternating signs removed
    let mu = 4.0 * nu * nu;
    let mut t = 1.0f64;
    let mut s = 1.0;
    for k in 1..400 {
        let kf = k as f64;
        let next = -t * (mu - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (8.0 * kf * x);
        if next.abs() > t.abs() && k > 1 {
            bail!(Domain, "I_nu asymptotic does not converge at nu={nu}, x={x}");
        }
        t = next;
        s += t;
        if t.abs() < 1e-16 * s.abs() {
            return Ok(s / (2.0 * PI * x).sqrt());
        }
    }
    bail!(Domain, "I_nu asymptotic does not converge at nu={nu}, x={x}")
}

/// Modified Bessel function of the second kind `K_ν(x)`.
///
/// Non-integer orders with `x <= 2` use `K_ν = (π/2)(I_{-ν} - I_ν)/sin(νπ)`;
/// orders within 0.05 of an integer switch to Temme's series, and `x > 2`
/// uses Steed's continued fraction followed by upward recurrence.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let nu = nu.abs();
    check_order_arg(nu, x)?;
    let v = if x > 2.0 { bessel_k_scaled(nu, x)? * (-x).exp() } else { k_small(nu, x) };
    if !v.is_finite() {
        bail!(Domain, "K_nu({x}) overflows at order {nu}");
    }
    Ok(v)
}

/// `e^{x} K_ν(x)`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    let nu = nu.abs();
    check_order_arg(nu, x)?;
    if x <= 2.0 {
        return Ok(k_small(nu, x) * x.exp());
    }
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut km, mut k1) = branches::k_steed_scaled(mu, x)?;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * 2.0 / x * k1 + km;
        km = k1;
        k1 = next;
    }
    Ok(km)
}

fn k_small(nu: f64, x: f64) -> f64 {
    let dist = (nu - nu.round()).abs();
    if dist >= 0.05 {
        let diff = branches::i_series(-nu, x) - branches::i_series(nu, x);
        return FRAC_PI_2 * diff / sin_pi(nu);
    }
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut km, mut k1) = branches::k_temme(mu, x);
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * 2.0 / x * k1 + km;
        km = k1;
        k1 = next;
    }
    km
}

/// Positive zeros `j_{ν,1} < j_{ν,2} < …` of `J_ν`.
pub fn bessel_j_zeros(nu: f64, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let step = 0.05;
    let mut a = step.max(nu * 0.5);
    let mut fa = bessel_j(nu, a)?;
    while out.len() < count {
        let b = a + step;
        let fb = bessel_j(nu, b)?;
        if fa == 0.0 {
            out.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = bessel_j(nu, mid)?;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * hi {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    Ok(out)
}

/// Parameters of `Δₙ + c/r²` and the exponents derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseSquareParams {
    pub n: f64,
    pub c: f64,
    /// Largest root of `(n'/2 - 1)² = (n/2 - 1)² + c`.
    pub nprime: f64,
    pub sigma: f64,
    /// `n/σ`, infinite when `σ = 0`.
    pub p_star: f64,
}

impl InverseSquareParams {
    /// Bessel order `n'/2 - 1` of the kernels.
    pub fn order(&self) -> f64 {
        self.nprime / 2.0 - 1.0
    }

    /// Conjugate exponent of `p_star`.
    pub fn p_star_conjugate(&self) -> f64 {
        if self.p_star.is_infinite() {
            1.0
        } else {
            self.p_star / (self.p_star - 1.0)
        }
    }
}

pub fn inverse_square_params(n: f64, c: f64) -> Result<InverseSquareParams> {
    if !(n > 2.0) || !n.is_finite() {
        bail!(Domain, "dimension n={n} must exceed 2");
    }
    let hardy = (n - 2.0) * (n - 2.0) / 4.0;
    if !(c >= -hardy) || !c.is_finite() {
        return Err(Error::Precondition(alloc::format!(
            "c={c} violates the Hardy inequality ∫|∇f|² >= ((n-2)²/4)∫|f|²/|x|², which needs c >= {}",
            -hardy
        )));
    }
    let root = (hardy + c).sqrt();
    let nprime = 2.0 + 2.0 * root;
    let sigma = ((n - 2.0) / 2.0 - root).max(0.0);
    let p_star = if sigma == 0.0 { f64::INFINITY } else { n / sigma };
    Ok(InverseSquareParams { n, c, nprime, sigma, p_star })
}

/// Generalized eigenfunction kernel `ℓ(x) = x^{1-n/2} J_{n'/2-1}(x)`.
pub fn scattering_l(params: &InverseSquareParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        bail!(Domain, "scattering kernel needs x > 0, got {x}");
    }
    Ok(x.powf(1.0 - params.n / 2.0) * bessel_j(params.order(), x)?)
}

/// Growing modified kernel `x^{1-n/2} I_{n'/2-1}(x)` scaled by `e^{-x}`.
pub fn scattering_l_modified_scaled(params: &InverseSquareParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        bail!(Domain, "modified kernel needs x > 0, got {x}");
    }
    Ok(x.powf(1.0 - params.n / 2.0) * bessel_i_scaled(params.order(), x)?)
}

/// Decaying kernel `k(x) = x^{1-n/2} K_{n'/2-1}(x)` scaled by `e^{x}`.
pub fn scattering_k_scaled(params: &InverseSquareParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        bail!(Domain, "decaying kernel needs x > 0, got {x}");
    }
    Ok(x.powf(1.0 - params.n / 2.0) * bessel_k_scaled(params.order(), x)?)
}

/// Constants of the two-regime bound on `|ℓ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllBounds {
    /// `sup_{λ <= 1} |ℓ(λ)| λ^{-(n'-n)/2}` over the sample.
    pub c_small: f64,
    /// `sup_{λ >= 1} |ℓ(λ)| λ^{-(1-n)/2}` over the sample.
    pub c_large: f64,
}

/// Evaluates the bound constants on a geometric grid over `[lo, hi]`.
pub fn ell_bounds(params: &InverseSquareParams, lo: f64, hi: f64, samples: usize) -> Result<EllBounds> {
    let mut b = EllBounds { c_small: 0.0, c_large: 0.0 };
    let e_small = (params.nprime - params.n) / 2.0;
    let e_large = (1.0 - params.n) / 2.0;
    let r = (hi / lo).ln();
    for i in 0..samples {
        let x = lo * (r * i as f64 / (samples - 1) as f64).exp();
        let v = scattering_l(params, x)?.abs();
        if x <= 1.0 {
            b.c_small = b.c_small.max(v / x.powf(e_small));
        }
        if x >= 1.0 {
            b.c_large = b.c_large.max(v / x.powf(e_large));
        }
    }
    Ok(b)
}

/// Envelope samples of `|ℓ|` on `[lo, hi]`: the maximum over consecutive windows
/// of length `π`, returned as `(argmax, max)` pairs.
pub fn ell_envelope(params: &InverseSquareParams, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut a = lo;
    while a + PI <= hi {
        let mut best = (a, 0.0f64);
        let m = 64;
        for i in 0..=m {
            let x = a + PI * i as f64 / m as f64;
            let v = scattering_l(params, x)?.abs();
            if v > best.1 {
                best = (x, v);
            }
        }
        // refine the interior maximum with golden-section search
        let (mut l, mut r) = ((best.0 - PI / m as f64).max(a), (best.0 + PI / m as f64).min(a + PI));
        let g = 0.618_033_988_749_894_8;
        for _ in 0..60 {
            let x1 = r - g * (r - l);
            let x2 = l + g * (r - l);
            if scattering_l(params, x1)?.abs() > scattering_l(params, x2)?.abs() {
                r = x2;
            } else {
                l = x1;
            }
        }
        let xm = 0.5 * (l + r);
        out.push((xm, scattering_l(params, xm)?.abs().max(best.1)));
        a += PI;
    }
    Ok(out)
}

const HERMITE_MAX_INDEX: usize = 4000;
const HERMITE_MAX_ARG: f64 = 200.0;

/// Values `h_0(x), …, h_{m_max}(x)` of the L²-normalized Hermite functions.
///
/// The recurrence runs on rescaled values with a separate log-scale so that
/// the Gaussian factor never underflows mid-recurrence.
pub fn hermite_all(m_max: usize, x: f64) -> Result<Vec<f64>> {
    if m_max > HERMITE_MAX_INDEX {
        bail!(Domain, "Hermite index {m_max} exceeds {HERMITE_MAX_INDEX}");
    }
    if !(x.abs() <= HERMITE_MAX_ARG) {
        bail!(Domain, "Hermite argument {x} outside [-{HERMITE_MAX_ARG}, {HERMITE_MAX_ARG}]");
    }
    let mut out = Vec::with_capacity(m_max + 1);
    let mut log_scale = -x * x / 2.0;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    out.push(scaled(cur, log_scale));
    for m in 0..m_max {
        let mf = m as f64;
        let next = x * (2.0 / (mf + 1.0)).sqrt() * cur - (mf / (mf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 150.0 * core::f64::consts::LN_10;
        }
        out.push(scaled(cur, log_scale));
    }
    Ok(out)
}

fn scaled(v: f64, log_scale: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * (v.abs().ln() + log_scale).exp()
    }
}

/// Single normalized Hermite function `h_m(x)`.
pub fn hermite_fn(m: usize, x: f64) -> Result<f64> {
    Ok(hermite_all(m, x)?[m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn j_half_closed_form() {
        let want = (2.0 / PI).sqrt() * 1f64.sin();
        assert_relative_eq!(bessel_j(0.5, 1.0).unwrap(), want, max_relative = 1e-13);
        assert_relative_eq!(want, 0.671_396_707_141_803_1, max_relative = 1e-14);
        for &x in &[0.3, 5.0, 11.9, 12.1, 17.5, 30.0, 400.0, 9000.0] {
            let want = (2.0 / (PI * x)).sqrt() * x.sin();
            let got = bessel_j(0.5, x).unwrap();
            assert!((got - want).abs() < 1e-12 * (2.0 / (PI * x)).sqrt(), "x={x} got={got:e} want={want:e}");
        }
    }

    #[test]
    fn j_zero_at_origin_limit() {
        assert_relative_eq!(bessel_j(0.0, 1e-300).unwrap(), 1.0);
    }

    #[test]
    fn k_half_closed_form() {
        for &x in &[0.1, 1.0, 2.0, 3.0, 40.0] {
            let want = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert_relative_eq!(bessel_k(0.5, x).unwrap(), want, max_relative = 1e-13);
        }
    }

    #[test]
    fn i_zero_at_origin() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn gamma_pieces_match_tgamma() {
        for &mu in &[-0.5, -0.31, 0.2, 0.45] {
            let (g1, g2, gp, gm) = gamma_pieces(mu);
            let rp = 1.0 / libm::tgamma(1.0 + mu);
            let rm = 1.0 / libm::tgamma(1.0 - mu);
            assert_relative_eq!(gp, rp, max_relative = 1e-14);
            assert_relative_eq!(gm, rm, max_relative = 1e-14);
            assert_relative_eq!(g1, (rm - rp) / (2.0 * mu), max_relative = 1e-12);
            assert_relative_eq!(g2, (rm + rp) / 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn params_examples() {
        let p = inverse_square_params(3.0, 0.0).unwrap();
        assert_relative_eq!(p.nprime, 3.0);
        assert_eq!(p.sigma, 0.0);
        assert!(p.p_star.is_infinite());
        let p = inverse_square_params(4.0, -1.0).unwrap();
        assert_relative_eq!(p.nprime, 2.0);
        assert_relative_eq!(p.sigma, 1.0);
        assert_relative_eq!(p.p_star, 4.0);
        let p = inverse_square_params(4.0, -0.75).unwrap();
        assert_relative_eq!(p.nprime, 3.0);
        assert_relative_eq!(p.p_star, 8.0);
        assert!(inverse_square_params(4.0, -1.0 - 1e-9).is_err());
        let e = inverse_square_params(3.0, -1.0).unwrap_err();
        assert!(matches!(e, Error::Precondition(ref m) if m.contains("Hardy")));
    }

    #[test]
    fn hermite_ground_state() {
        assert_relative_eq!(hermite_fn(0, 0.0).unwrap(), PI.powf(-0.25), max_relative = 1e-15);
        assert!(hermite_fn(4001, 0.0).is_err());
        assert!(hermite_fn(3, 250.0).is_err());
    }
}

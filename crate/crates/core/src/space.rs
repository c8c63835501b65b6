//! Finite metric measure spaces: quadrature grids with a metric, atomic
//! measure, ball volumes, separated nets, and the dyadic Calderón–Zygmund
//! decomposition on one-dimensional grids.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::Write as _;
#[allow(unused_imports)]
use num_traits::Float;

use crate::calculus::{KernelOp, Restricted};
use crate::error::{bail, Error, Result};
use crate::estimate::norm_p_to_q_bracket;
use crate::stats::linear_fit;

/// Chart and metric of a catalog space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Interval { a: f64, b: f64 },
    Circle { circumference: f64 },
    /// `(0, R]` with measure `r^{n-1} dr`.
    HalfLineWeighted { n: f64 },
    /// Periodic square of side `side`.
    Torus2 { side: f64 },
    /// Euclidean plane chart (square grid).
    Plane,
}

impl Geometry {
    pub fn tag(&self) -> String {
        match self {
            Geometry::Interval { .. } => "interval".into(),
            Geometry::Circle { .. } => "circle".into(),
            Geometry::HalfLineWeighted { n } => format!("half_line_weighted({n})"),
            Geometry::Torus2 { .. } => "torus2".into(),
            Geometry::Plane => "plane".into(),
        }
    }
}

/// Finite quadrature representation of `(X, d, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMeasureSpace {
    /// Point coordinates; one-dimensional spaces leave the second slot at 0.
    pub points: Vec<[f64; 2]>,
    /// Cell masses `w_x > 0`.
    pub weights: Vec<f64>,
    pub geometry: Geometry,
    pub doubling_dim: f64,
    /// Nominal grid spacing in metric units.
    pub spacing: f64,
}

/// Open ball `B(x, r) = {y : d(x, y) < r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            bail!(Domain, "ball radius must be positive, got {radius}");
        }
        Ok(Ball { center, radius })
    }

    /// The concentric ball `λB`.
    pub fn dilate(&self, lambda: f64) -> Ball {
        Ball { center: self.center, radius: self.radius * lambda }
    }
}

fn periodic(d: f64, period: f64) -> f64 {
    let d = d.abs() % period;
    d.min(period - d)
}

impl MetricMeasureSpace {
    /// Midpoint grid on `[a, b]`.
    pub fn interval(points: usize, a: f64, b: f64) -> Result<Self> {
        if points == 0 || !(b > a) {
            bail!(Domain, "interval needs points > 0 and b > a (got {points}, [{a}, {b}])");
        }
        let h = (b - a) / points as f64;
        Ok(MetricMeasureSpace {
            points: (0..points).map(|i| [a + (i as f64 + 0.5) * h, 0.0]).collect(),
            weights: vec![h; points],
            geometry: Geometry::Interval { a, b },
            doubling_dim: 1.0,
            spacing: h,
        })
    }

    /// Uniform grid on the circle of circumference `2π`.
    pub fn circle(points: usize) -> Result<Self> {
        if points == 0 {
            bail!(Domain, "circle needs at least one point");
        }
        let h = 2.0 * PI / points as f64;
        Ok(MetricMeasureSpace {
            points: (0..points).map(|i| [i as f64 * h, 0.0]).collect(),
            weights: vec![h; points],
            geometry: Geometry::Circle { circumference: 2.0 * PI },
            doubling_dim: 1.0,
            spacing: h,
        })
    }

    /// Cell-centred grid on `[ε, r_max]`, `ε = r_max / 2^14`, with exact cell
    /// masses `∫ r^{n-1} dr`.
    pub fn half_line(n: f64, points: usize, r_max: f64) -> Result<Self> {
        if points == 0 || !(r_max > 0.0) || !(n > 0.0) {
            bail!(Domain, "half line needs points > 0, r_max > 0, n > 0");
        }
        let eps = r_max / 16384.0;
        let h = (r_max - eps) / points as f64;
        let mut pts = Vec::with_capacity(points);
        let mut w = Vec::with_capacity(points);
        for i in 0..points {
            let a = eps + i as f64 * h;
            let b = a + h;
            pts.push([a + 0.5 * h, 0.0]);
            w.push((b.powf(n) - a.powf(n)) / n);
        }
        Ok(MetricMeasureSpace {
            points: pts,
            weights: w,
            geometry: Geometry::HalfLineWeighted { n },
            doubling_dim: n,
            spacing: h,
        })
    }

    /// Uniform `side × side` grid on the flat torus `(ℝ/2πℤ)²`, row-major.
    pub fn torus2(side: usize) -> Result<Self> {
        if side == 0 {
            bail!(Domain, "torus needs at least one point per axis");
        }
        let h = 2.0 * PI / side as f64;
        let mut pts = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                pts.push([i as f64 * h, j as f64 * h]);
            }
        }
        Ok(MetricMeasureSpace {
            points: pts,
            weights: vec![h * h; side * side],
            geometry: Geometry::Torus2 { side: 2.0 * PI },
            doubling_dim: 2.0,
            spacing: h,
        })
    }

    /// Uniform `side × side` grid on `[-half, half]²` (node-centred), row-major.
    pub fn plane(side: usize, half: f64) -> Result<Self> {
        if side < 2 || !(half > 0.0) {
            bail!(Domain, "plane grid needs side >= 2 and half-width > 0");
        }
        let h = 2.0 * half / (side - 1) as f64;
        let mut pts = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                pts.push([-half + i as f64 * h, -half + j as f64 * h]);
            }
        }
        Ok(MetricMeasureSpace {
            points: pts,
            weights: vec![h * h; side * side],
            geometry: Geometry::Plane,
            doubling_dim: 2.0,
            spacing: h,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `d(x_i, x_j)`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (p, q) = (self.points[i], self.points[j]);
        match self.geometry {
            Geometry::Interval { .. } | Geometry::HalfLineWeighted { .. } => (p[0] - q[0]).abs(),
            Geometry::Circle { circumference } => periodic(p[0] - q[0], circumference),
            Geometry::Torus2 { side } => {
                let a = periodic(p[0] - q[0], side);
                let b = periodic(p[1] - q[1], side);
                (a * a + b * b).sqrt()
            }
            Geometry::Plane => {
                let a = p[0] - q[0];
                let b = p[1] - q[1];
                (a * a + b * b).sqrt()
            }
        }
    }

    /// Membership mask of a ball.
    pub fn ball_mask(&self, ball: &Ball) -> Vec<bool> {
        (0..self.len()).map(|j| self.distance(ball.center, j) < ball.radius).collect()
    }

    /// Weighted `L^p` norm (`p = ∞` allowed).
    pub fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        lp_norm(f, &self.weights, p)
    }

    /// Structured text form:
    ///
    /// ```text
    /// geometry <kind> [parameters]
    /// doubling_dim <n>
    /// spacing <h>
    /// points <count>
    /// <x> <y> <weight>      (count lines)
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let geo = match self.geometry {
            Geometry::Interval { a, b } => format!("interval {a} {b}"),
            Geometry::Circle { circumference } => format!("circle {circumference}"),
            Geometry::HalfLineWeighted { n } => format!("halfline {n}"),
            Geometry::Torus2 { side } => format!("torus2 {side}"),
            Geometry::Plane => "plane".into(),
        };
        let _ = writeln!(out, "geometry {geo}");
        let _ = writeln!(out, "doubling_dim {}", self.doubling_dim);
        let _ = writeln!(out, "spacing {}", self.spacing);
        let _ = writeln!(out, "points {}", self.len());
        for (p, w) in self.points.iter().zip(&self.weights) {
            let _ = writeln!(out, "{} {} {}", p[0], p[1], w);
        }
        out
    }

    /// Reads the [`to_text`](Self::to_text) form from the front of `lines`,
    /// leaving the iterator after the last point.
    pub fn read_text<'a>(lines: &mut impl Iterator<Item = &'a str>) -> Result<Self> {
        fn field<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
            lines
                .next()
                .and_then(|l| l.strip_prefix(key))
                .map(str::trim)
                .ok_or_else(|| Error::Parse(format!("space text: expected `{key}`")))
        }
        fn num(s: Option<&str>, what: &str) -> Result<f64> {
            s.and_then(|w| w.parse().ok()).ok_or_else(|| Error::Parse(format!("space text: bad {what}")))
        }
        let mut geo = field(lines, "geometry")?.split_whitespace();
        let geometry = match geo.next() {
            Some("interval") => Geometry::Interval { a: num(geo.next(), "a")?, b: num(geo.next(), "b")? },
            Some("circle") => Geometry::Circle { circumference: num(geo.next(), "circumference")? },
            Some("halfline") => Geometry::HalfLineWeighted { n: num(geo.next(), "n")? },
            Some("torus2") => Geometry::Torus2 { side: num(geo.next(), "side")? },
            Some("plane") => Geometry::Plane,
            other => bail!(Parse, "space text: unknown geometry {other:?}"),
        };
        let doubling_dim = num(Some(field(lines, "doubling_dim")?), "doubling_dim")?;
        let spacing = num(Some(field(lines, "spacing")?), "spacing")?;
        let count = num(Some(field(lines, "points")?), "point count")? as usize;
        let mut points = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for _ in 0..count {
            let mut it = lines.next().unwrap_or("").split_whitespace();
            let (x, y, w) = (num(it.next(), "x")?, num(it.next(), "y")?, num(it.next(), "weight")?);
            if !(w > 0.0) {
                bail!(Parse, "space text: nonpositive weight {w}");
            }
            points.push([x, y]);
            weights.push(w);
        }
        Ok(MetricMeasureSpace { points, weights, geometry, doubling_dim, spacing })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_text(&mut text.lines())
    }
}

/// Weighted `L^p` norm of a sampled function.
pub fn lp_norm(f: &[f64], w: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let s: f64 = f.iter().zip(w).map(|(v, w)| v.abs().powf(p) * w).sum();
    s.powf(1.0 / p)
}

/// `V(x, r) = μ(B(x, r))`.
pub fn volume(space: &MetricMeasureSpace, ball: &Ball) -> f64 {
    (0..space.len())
        .filter(|&j| space.distance(ball.center, j) < ball.radius)
        .map(|j| space.weights[j])
        .sum()
}

/// Result of a doubling scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingReport {
    /// Least `C` with `V(x, λr) <= C λ^n V(x, r)` on the samples, `n = doubling_dim`.
    pub c_est: f64,
    /// Regression exponent of `log(V(x, λr)/V(x, r))` against `log λ`.
    pub n_est: f64,
    pub samples: usize,
}

pub fn doubling_report(
    space: &MetricMeasureSpace,
    centers: &[usize],
    radius_grid: &[f64],
    lambda_grid: &[f64],
) -> Result<DoublingReport> {
    if centers.is_empty() || radius_grid.is_empty() || lambda_grid.is_empty() {
        bail!(Precondition, "doubling scan needs nonempty centre, radius and lambda grids");
    }
    if lambda_grid.iter().any(|&l| l < 1.0) {
        bail!(Precondition, "dilation factors must be >= 1");
    }
    let mut c_est = 0.0f64;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &x in centers {
        for &r in radius_grid {
            let v0 = volume(space, &Ball::new(x, r)?);
            if v0 <= 0.0 {
                bail!(Resolution, "ball B({x}, {r}) contains no grid point");
            }
            for &l in lambda_grid {
                let v1 = volume(space, &Ball::new(x, l * r)?);
                c_est = c_est.max(v1 / (l.powf(space.doubling_dim) * v0));
                if l > 1.0 {
                    xs.push(l.ln());
                    ys.push((v1 / v0).ln());
                }
            }
        }
    }
    let n_est = linear_fit(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN);
    Ok(DoublingReport { c_est, n_est, samples: xs.len() })
}

/// Maximal `ρ/10`-separated set with its cell partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub centers: Vec<usize>,
    pub rho: f64,
    /// `cells[x]` is the index (into `centers`) of the cell containing point `x`.
    pub cells: Vec<usize>,
    /// `sup_i #{j : d(x_i, x_j) <= 2ρ}`.
    pub overlap_k: usize,
}

pub fn build_net(space: &MetricMeasureSpace, rho: f64) -> Result<Net> {
    if !(rho > 2.0 * space.spacing) {
        bail!(Resolution, "net scale {rho} must exceed twice the grid spacing {}", space.spacing);
    }
    let sep = rho / 10.0;
    let mut centers: Vec<usize> = Vec::new();
    for x in 0..space.len() {
        if centers.iter().all(|&c| space.distance(c, x) > sep) {
            centers.push(x);
        }
    }
    let mut cells = vec![usize::MAX; space.len()];
    for x in 0..space.len() {
        for (i, &c) in centers.iter().enumerate() {
            if space.distance(c, x) <= sep {
                cells[x] = i;
                break;
            }
        }
        if cells[x] == usize::MAX {
            bail!(Convergence, "point {x} not covered by the greedy net");
        }
    }
    let overlap_k = centers
        .iter()
        .map(|&a| centers.iter().filter(|&&b| space.distance(a, b) <= 2.0 * rho).count())
        .max()
        .unwrap_or(0);
    Ok(Net { centers, rho, cells, overlap_k })
}

/// Relative Hilbert–Schmidt mass of a kernel outside `D_r = {d(x, y) <= r}`.
pub fn off_support_mass(op: &dyn KernelOp, space: &MetricMeasureSpace, r: f64) -> f64 {
    let w = op.weights();
    let (mut out, mut total) = (0.0, 0.0);
    for y in 0..op.n() {
        let col = op.column(y);
        for (x, k) in col.iter().enumerate() {
            let m = k * k * w[x] * w[y];
            total += m;
            if space.distance(x, y) > r {
                out += m;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        out / total
    }
}

/// Measured constant of the patchwork inequality
/// `‖T‖_{p→p} <= C sup_x V(x,ρ)^{1/p-1/s} ‖T P_{B(x,ρ)}‖_{p→s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchworkRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Off-support tolerance used by [`patchwork_ratio`].
pub const PATCHWORK_SUPPORT_TOL: f64 = 1e-6;

pub fn patchwork_ratio(
    op: &dyn KernelOp,
    space: &MetricMeasureSpace,
    rho: f64,
    p: f64,
    s: f64,
) -> Result<PatchworkRatio> {
    if op.n() != space.len() {
        bail!(Precondition, "operator size {} differs from space size {}", op.n(), space.len());
    }
    let exact = [(1.0, 2.0), (1.0, f64::INFINITY), (2.0, 2.0)];
    if !(p >= 1.0 && s >= p) {
        bail!(Precondition, "patchwork needs 1 <= p <= s, got p={p}, s={s}");
    }
    let leak = off_support_mass(op, space, rho);
    if leak > PATCHWORK_SUPPORT_TOL {
        return Err(Error::Precondition(format!(
            "kernel not supported in D_rho: relative mass {leak:.3e} outside distance {rho}"
        )));
    }
    let lhs = norm_p_to_q_bracket(op, p, p)?.lower;
    let n = space.len();
    let stride = if exact.contains(&(p, s)) && p == 1.0 { 1 } else { (n / 64).max(1) };
    let mut rhs = 0.0f64;
    for x in (0..n).step_by(stride) {
        let ball = Ball::new(x, rho)?;
        let mask = space.ball_mask(&ball);
        let v = volume(space, &ball);
        let restricted = Restricted::new(op, mask);
        let nb = norm_p_to_q_bracket(&restricted, p, s)?.lower;
        let expo = 1.0 / p - if s.is_infinite() { 0.0 } else { 1.0 / s };
        rhs = rhs.max(v.powf(expo) * nb);
    }
    if !(rhs > 0.0) {
        bail!(Resolution, "patchwork right side vanished");
    }
    Ok(PatchworkRatio { lhs, rhs, ratio: lhs / rhs })
}

/// One bad part `b_j` of a Calderón–Zygmund decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct BadPart {
    /// First grid index of the stopping interval.
    pub start: usize,
    /// Values of `b_j` on the stopping interval (zero elsewhere).
    pub values: Vec<f64>,
    pub ball: Ball,
    /// Dyadic exponent: `ball.radius = 2^scale · spacing`.
    pub scale: i32,
}

/// `f = g + Σ_j b_j` at height `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct CZDecomposition {
    pub good: Vec<f64>,
    pub bad_parts: Vec<BadPart>,
    pub height: f64,
    pub exponent: f64,
}

/// Measured constants of properties (i)–(iv).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzCheck {
    /// `max |f - g - Σ b_j|`.
    pub reconstruction_error: f64,
    /// `‖g‖_∞ / α`.
    pub good_sup_ratio: f64,
    /// `‖g‖_p / ‖f‖_p`.
    pub good_lp_ratio: f64,
    /// Every `b_j` vanishes outside `B_j`.
    pub supports_ok: bool,
    /// `max_x #{j : x ∈ 4B_j}`.
    pub overlap_k: usize,
    /// `max_j ∫|b_j|^p / (α^p μ(B_j))`.
    pub bad_mass_ratio: f64,
    /// `Σ μ(B_j) / (α^{-p} ‖f‖_p^p)`.
    pub ball_sum_ratio: f64,
}

impl CzCheck {
    /// Properties (i)–(iv) with the constants `‖g‖_∞ <= 2^{1/p} α`,
    /// `‖g‖_p <= ‖f‖_p`, `∫|b_j|^p <= 2^{p+1} α^p μ(B_j)`.
    pub fn holds(&self, p: f64, ball_constant: f64) -> bool {
        self.reconstruction_error < 1e-12
            && self.good_sup_ratio <= 2f64.powf(1.0 / p) * (1.0 + 1e-12)
            && self.good_lp_ratio <= 1.0 + 1e-12
            && self.supports_ok
            && self.overlap_k >= 1
            && self.bad_mass_ratio <= 2f64.powf(p + 1.0) * (1.0 + 1e-12)
            && self.ball_sum_ratio <= ball_constant
    }
}

/// Dyadic stopping-interval decomposition of `|f|^p` at height `α^p`.
pub fn cz_decompose(space: &MetricMeasureSpace, f: &[f64], alpha: f64, p: f64) -> Result<CZDecomposition> {
    match space.geometry {
        Geometry::Interval { .. } | Geometry::Circle { .. } => {}
        g => bail!(Precondition, "CZ decomposition needs interval or circle geometry, got {}", g.tag()),
    }
    let n = space.len();
    if f.len() != n {
        bail!(Precondition, "function has {} samples for {n} points", f.len());
    }
    if !n.is_power_of_two() {
        bail!(Precondition, "dyadic construction needs a power-of-two grid, got {n}");
    }
    if !(1.0..2.0).contains(&p) {
        bail!(Precondition, "exponent p={p} outside [1, 2)");
    }
    let fp = space.lp_norm(f, p);
    let threshold = fp / space.total_mass().powf(1.0 / p);
    if !(alpha > threshold) {
        return Err(Error::Admissibility { what: format!("height alpha={alpha}"), threshold });
    }
    let ap = alpha.powf(p);
    let mut good = f.to_vec();
    let mut bad_parts = Vec::new();
    let mut stack = vec![(0usize, n)];
    while let Some((start, len)) = stack.pop() {
        if len == 1 {
            continue;
        }
        let half = len / 2;
        for child in [start + half, start] {
            let idx = child..child + half;
            let mass: f64 = idx.clone().map(|i| space.weights[i]).sum();
            let avg = idx.clone().map(|i| f[i].abs().powf(p) * space.weights[i]).sum::<f64>() / mass;
            if avg > ap {
                let mean = idx.clone().map(|i| f[i] * space.weights[i]).sum::<f64>() / mass;
                let values: Vec<f64> = idx.clone().map(|i| f[i] - mean).collect();
                for i in idx {
                    good[i] = mean;
                }
                let center = child + half / 2;
                let scale = half.trailing_zeros() as i32;
                bad_parts.push(BadPart {
                    start: child,
                    values,
                    ball: Ball { center, radius: space.spacing * (1u64 << scale) as f64 },
                    scale,
                });
            } else {
                stack.push((child, half));
            }
        }
    }
    bad_parts.sort_by_key(|b| b.start);
    Ok(CZDecomposition { good, bad_parts, height: alpha, exponent: p })
}

impl CZDecomposition {
    /// Measures properties (i)–(iv) against the original function.
    pub fn check(&self, space: &MetricMeasureSpace, f: &[f64]) -> CzCheck {
        let n = space.len();
        let p = self.exponent;
        let mut recon = self.good.clone();
        let mut supports_ok = true;
        let mut cover = vec![0usize; n];
        let mut bad_mass_ratio = 0.0f64;
        let mut ball_sum = 0.0;
        for b in &self.bad_parts {
            for (k, v) in b.values.iter().enumerate() {
                let i = b.start + k;
                recon[i] += v;
                if *v != 0.0 && space.distance(b.ball.center, i) >= b.ball.radius {
                    supports_ok = false;
                }
            }
            let vb = volume(space, &b.ball);
            ball_sum += vb;
            let mass: f64 =
                b.values.iter().enumerate().map(|(k, v)| v.abs().powf(p) * space.weights[b.start + k]).sum();
            bad_mass_ratio = bad_mass_ratio.max(mass / (self.height.powf(p) * vb));
            let big = b.ball.dilate(4.0);
            for (x, c) in cover.iter_mut().enumerate() {
                if space.distance(big.center, x) < big.radius {
                    *c += 1;
                }
            }
        }
        let reconstruction_error = recon.iter().zip(f).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let fp = space.lp_norm(f, p);
        CzCheck {
            reconstruction_error,
            good_sup_ratio: space.lp_norm(&self.good, f64::INFINITY) / self.height,
            good_lp_ratio: if fp > 0.0 { space.lp_norm(&self.good, p) / fp } else { 0.0 },
            supports_ok,
            overlap_k: cover.into_iter().max().unwrap_or(0).max(1),
            bad_mass_ratio,
            ball_sum_ratio: if fp > 0.0 { ball_sum / (self.height.powf(-p) * fp.powf(p)) } else { 0.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn text_roundtrip() {
        for s in [MetricMeasureSpace::half_line(3.0, 64, 10.0).unwrap(), MetricMeasureSpace::torus2(8).unwrap()] {
            assert_eq!(MetricMeasureSpace::from_text(&s.to_text()).unwrap(), s);
        }
        assert!(MetricMeasureSpace::from_text("geometry sphere\n").is_err());
    }

    #[test]
    fn whole_circle_ball() {
        let s = MetricMeasureSpace::circle(1024).unwrap();
        let v = volume(&s, &Ball::new(0, 2.0 * PI).unwrap());
        assert!((v - 2.0 * PI).abs() <= s.spacing);
    }

    #[test]
    fn interval_ball_length() {
        let s = MetricMeasureSpace::interval(1024, 0.0, PI).unwrap();
        let v = volume(&s, &Ball::new(512, PI / 4.0).unwrap());
        assert!((v - PI / 2.0).abs() <= 2.0 * s.spacing);
    }

    #[test]
    fn weighted_half_line_ball() {
        let s = MetricMeasureSpace::half_line(3.0, 4096, 1.0).unwrap();
        for r in [0.1, 0.5, 0.9] {
            let v = volume(&s, &Ball::new(0, r).unwrap());
            // cells with centre in the ball; error at most one boundary cell
            assert!((v - r * r * r / 3.0).abs() <= r * r * s.spacing * 1.5, "r={r}");
        }
    }

    #[test]
    fn net_single_center_on_interval() {
        let s = MetricMeasureSpace::interval(256, 0.0, PI).unwrap();
        let net = build_net(&s, PI * 10.0).unwrap();
        assert_eq!(net.centers.len(), 1);
        assert_eq!(net.overlap_k, 1);
    }

    #[test]
    fn constant_function_has_no_bad_parts() {
        let s = MetricMeasureSpace::circle(256).unwrap();
        let f = vec![0.7; 256];
        let cz = cz_decompose(&s, &f, 1.0, 1.0).unwrap();
        assert!(cz.bad_parts.is_empty());
        assert_eq!(cz.good, f);
    }

    #[test]
    fn admissibility_threshold_reported() {
        let s = MetricMeasureSpace::circle(256).unwrap();
        let f = vec![2.0; 256];
        match cz_decompose(&s, &f, 1.5, 1.0) {
            Err(Error::Admissibility { threshold, .. }) => assert_relative_eq!(threshold, 2.0, max_relative = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }
}

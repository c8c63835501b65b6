//! Operator norms on weighted grids and scanners for the localized
//! restriction, cluster, Gaussian-bound, weak-type and dispersive conditions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{apply_multiplier_sqrt, heat, KernelOp, LinearOperator, Restricted};
use crate::error::{bail, Error, Result};
use crate::linalg::symmetric_eigen;
use crate::models::{ContinuumRadialModel, SpectralModel};
use crate::mult::{nq_norm, MultiplierFn};
use crate::quad::{composite, graded_edges};
use crate::space::{lp_norm, volume, Ball, MetricMeasureSpace};
use crate::specfun::scattering_l;
use crate::stats::{dyadic_chain, loglog_fit, LineFit};
use num_complex::Complex64;

const ASCENT_ITERATIONS: usize = 200;
const ASCENT_SEEDS: u64 = 8;
/// Bracket widths above this fraction are flagged.
pub const BRACKET_FLAG: f64 = 0.25;

fn conj(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// `‖T‖_{1→q} = max_y ‖K(·, y)‖_{L^q(w)}`.
pub fn norm_1_to_q(op: &dyn KernelOp, q: f64) -> f64 {
    op.max_column_norm(q)
}

/// `‖T‖_{p→∞} = max_x ‖K(x, ·)‖_{L^{p'}(w)}`.
pub fn norm_p_to_inf(op: &dyn KernelOp, p: f64) -> f64 {
    let w = op.weights();
    let pc = conj(p);
    (0..op.n()).map(|i| lp_norm(&op.row(i), w, pc)).fold(0.0, f64::max)
}

/// Largest singular value of `T` on `L²(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoNorm {
    pub value: f64,
    pub dense: bool,
    pub converged: bool,
}

const DENSE_SVD_LIMIT: usize = 192;

/// `‖T‖_{2→2}`: dense decomposition for small grids, power iteration on
/// `T*T` otherwise.
pub fn norm_2_to_2(op: &dyn KernelOp) -> TwoNorm {
    let n = op.n();
    if n <= DENSE_SVD_LIMIT {
        if let Some(v) = norm_2_to_2_dense(op) {
            return TwoNorm { value: v, dense: true, converged: true };
        }
    }
    let (value, converged) = norm_2_to_2_power(op, 1000, 1e-13);
    TwoNorm { value, dense: false, converged }
}

/// Dense route: eigenvalues of `(W^{1/2} K W^{1/2})ᵀ (W^{1/2} K W^{1/2})`.
pub fn norm_2_to_2_dense(op: &dyn KernelOp) -> Option<f64> {
    let n = op.n();
    let w: Vec<f64> = op.weights().iter().map(|v| v.sqrt()).collect();
    let mut b = vec![0.0; n * n];
    for j in 0..n {
        for (i, v) in op.column(j).into_iter().enumerate() {
            b[i * n + j] = w[i] * v * w[j];
        }
    }
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| b[k * n + i] * b[k * n + j]).sum();
            g[i * n + j] = s;
            g[j * n + i] = s;
        }
    }
    let (ev, _) = symmetric_eigen(&g, n).ok()?;
    Some(ev.into_iter().fold(0.0f64, f64::max).max(0.0).sqrt())
}

/// Power iteration on `T*T` from a fixed pseudo-random start.
pub fn norm_2_to_2_power(op: &dyn KernelOp, max_iter: usize, tol: f64) -> (f64, bool) {
    let w = op.weights().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2222);
    let active = op.active_columns();
    let mut f = vec![0.0; op.n()];
    for &j in &active {
        f[j] = rng.gen_range(-1.0..1.0);
    }
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let nf = lp_norm(&f, &w, 2.0);
        if nf == 0.0 {
            return (0.0, true);
        }
        for v in f.iter_mut() {
            *v /= nf;
        }
        let tf = op.apply(&f);
        let sigma = lp_norm(&tf, &w, 2.0);
        if (sigma - prev).abs() <= tol * sigma.max(f64::MIN_POSITIVE) {
            return (sigma, true);
        }
        prev = sigma;
        f = op.apply_adjoint(&tf);
    }
    (prev, false)
}

/// How a bracket endpoint was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    ExactColumn,
    ExactRow,
    ExactSvd,
    PowerIteration,
    DualityAscent,
    Interpolation,
}

impl NormMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            NormMethod::ExactColumn => "exact-column",
            NormMethod::ExactRow => "exact-row",
            NormMethod::ExactSvd => "exact-svd",
            NormMethod::PowerIteration => "power-iteration",
            NormMethod::DualityAscent => "duality-ascent",
            NormMethod::Interpolation => "interpolation",
        }
    }
}

/// Certified interval for `‖T‖_{p→q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorNormBracket {
    pub lower: f64,
    pub upper: f64,
    pub methods: Vec<NormMethod>,
    pub p: f64,
    pub q: f64,
    /// Duality ascent met its tolerance (always true for exact cases).
    pub converged: bool,
}

impl OperatorNormBracket {
    /// `(upper - lower) / upper`.
    pub fn relative_width(&self) -> f64 {
        if self.upper > 0.0 {
            (self.upper - self.lower) / self.upper
        } else {
            0.0
        }
    }

    fn exact(v: f64, m: NormMethod, p: f64, q: f64) -> Self {
        OperatorNormBracket { lower: v, upper: v, methods: vec![m], p, q, converged: true }
    }
}

/// Exact endpoint norms for the interpolation step, computed in one pass.
struct Endpoints {
    /// `(1/q, ‖T‖_{1→q})`.
    right: Vec<(f64, f64)>,
    /// `(1/p, ‖T‖_{p→∞})`.
    bottom: Vec<(f64, f64)>,
    two: f64,
}

fn endpoints(op: &dyn KernelOp, ys: &[f64], xs: &[f64]) -> Endpoints {
    let w = op.weights();
    let n = op.n();
    let mut right = vec![0.0f64; ys.len()];
    let mut bottom = vec![0.0f64; xs.len()];
    let active = op.active_columns();
    let mut is_active = vec![false; n];
    for &j in &active {
        is_active[j] = true;
    }
    for j in 0..n {
        if is_active[j] {
            let col = op.column(j);
            for (r, &y) in right.iter_mut().zip(ys) {
                *r = r.max(lp_norm(&col, w, if y == 0.0 { f64::INFINITY } else { 1.0 / y }));
            }
        }
        let row = op.row(j);
        for (b, &x) in bottom.iter_mut().zip(xs) {
            // ‖T‖_{p→∞} with 1/p = x uses the L^{p'} norm of rows, 1/p' = 1 - x
            let pc = if x == 1.0 { f64::INFINITY } else { 1.0 / (1.0 - x) };
            *b = b.max(lp_norm(&row, w, pc));
        }
    }
    Endpoints {
        right: ys.iter().copied().zip(right).collect(),
        bottom: xs.iter().copied().zip(bottom).collect(),
        two: norm_2_to_2(op).value,
    }
}

/// Riesz–Thorin upper bound at `(x, y) = (1/p, 1/q)`, `x >= y`.
fn interpolation_upper(op: &dyn KernelOp, x: f64, y: f64) -> f64 {
    const GRID: usize = 8;
    // candidate segments A = (1, a) to B = (b, 0) through P
    let mut ys = Vec::new();
    let mut xs = Vec::new();
    let mut segs = Vec::new();
    if y > 0.0 {
        for i in 0..=GRID {
            let a = y + (1.0 - y) * i as f64 / GRID as f64;
            let theta = 1.0 - y / a;
            if theta <= 0.0 {
                if (x - 1.0).abs() < 1e-15 {
                    segs.push((a, 1.0, 0.0));
                    ys.push(a);
                }
                continue;
            }
            let b = (x - (1.0 - theta)) / theta;
            if (0.0..=1.0).contains(&b) {
                segs.push((a, b, theta));
                ys.push(a);
                xs.push(b);
            }
        }
    }
    // ray from (1/2, 1/2) through P to the exact boundary
    let (dx, dy) = (x - 0.5, y - 0.5);
    let mut ray = None;
    if dx.abs() > 1e-15 || dy.abs() > 1e-15 {
        let t1 = if dx > 0.0 { 0.5 / dx } else { f64::INFINITY };
        let t0 = if dy < 0.0 { 0.5 / -dy } else { f64::INFINITY };
        let t = t1.min(t0);
        if t.is_finite() && t >= 1.0 {
            let e = (0.5 + t * dx, 0.5 + t * dy);
            if t1 <= t0 {
                ys.push(e.1);
            } else {
                xs.push(e.0);
            }
            ray = Some((e, 1.0 / t, t1 <= t0));
        }
    }
    let ep = endpoints(op, &ys, &xs);
    let right = |a: f64| ep.right.iter().find(|r| r.0 == a).map(|r| r.1).unwrap_or(f64::INFINITY);
    let bottom = |b: f64| ep.bottom.iter().find(|r| r.0 == b).map(|r| r.1).unwrap_or(f64::INFINITY);
    let mut best = f64::INFINITY;
    for (a, b, theta) in segs {
        let na = right(a);
        let v = if theta == 0.0 { na } else { na.powf(1.0 - theta) * bottom(b).powf(theta) };
        best = best.min(v);
    }
    if let Some((e, theta, on_right)) = ray {
        let ne = if on_right { right(e.1) } else { bottom(e.0) };
        best = best.min(ep.two.powf(1.0 - theta) * ne.powf(theta));
    }
    best
}

fn dual_map(u: &[f64], w: &[f64], r: f64) -> Vec<f64> {
    // J_r(u) = |u|^{r-1} sgn(u) / ‖u‖_r^{r-1}, an element of L^{r'} of unit norm
    let nr = lp_norm(u, w, r);
    if nr == 0.0 {
        return vec![0.0; u.len()];
    }
    u.iter().map(|v| v.signum() * (v.abs() / nr).powf(r - 1.0)).collect()
}

fn ascent(op: &dyn KernelOp, p: f64, q: f64, seed: &[f64]) -> (f64, bool) {
    let w = op.weights();
    let pc = conj(p);
    let mut f = seed.to_vec();
    let nf = lp_norm(&f, w, p);
    if nf == 0.0 {
        return (0.0, true);
    }
    for v in f.iter_mut() {
        *v /= nf;
    }
    let mut best = 0.0f64;
    for _ in 0..ASCENT_ITERATIONS {
        let tf = op.apply(&f);
        let val = lp_norm(&tf, w, q);
        let improved = val > best * (1.0 + 1e-10);
        best = best.max(val);
        if !improved && val > 0.0 {
            return (best, true);
        }
        let g = dual_map(&tf, w, q);
        let h = op.apply_adjoint(&g);
        let nh = lp_norm(&h, w, pc);
        if nh == 0.0 {
            return (best, true);
        }
        f = h.iter().map(|v| v.signum() * (v.abs() / nh).powf(pc - 1.0)).collect();
    }
    (best, false)
}

/// Lower bound by duality ascent and upper bound by interpolation between
/// exact endpoint norms; exact for `p = 1`, `q = ∞` and `p = q = 2`.
pub fn norm_p_to_q_bracket(op: &dyn KernelOp, p: f64, q: f64) -> Result<OperatorNormBracket> {
    if !(p >= 1.0 && q >= p) {
        bail!(Precondition, "bracket needs 1 <= p <= q, got p={p}, q={q}");
    }
    if p == 1.0 {
        return Ok(OperatorNormBracket::exact(norm_1_to_q(op, q), NormMethod::ExactColumn, p, q));
    }
    if q.is_infinite() {
        return Ok(OperatorNormBracket::exact(norm_p_to_inf(op, p), NormMethod::ExactRow, p, q));
    }
    if p == 2.0 && q == 2.0 {
        let t = norm_2_to_2(op);
        let m = if t.dense { NormMethod::ExactSvd } else { NormMethod::PowerIteration };
        let mut b = OperatorNormBracket::exact(t.value, m, p, q);
        b.converged = t.converged;
        return Ok(b);
    }
    let w = op.weights();
    let n = op.n();
    let active = op.active_columns();
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    // best point mass for this (p, q)
    let mut best_col = (0.0f64, None);
    for &j in &active {
        let v = lp_norm(&op.column(j), w, q) * w[j].powf(1.0 - 1.0 / p);
        if v > best_col.0 {
            best_col = (v, Some(j));
        }
    }
    if let Some(j) = best_col.1 {
        let mut s = vec![0.0; n];
        s[j] = 1.0;
        seeds.push(s);
    }
    let mut c = vec![0.0; n];
    for &j in &active {
        c[j] = 1.0;
    }
    seeds.push(c);
    for k in 0..ASCENT_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa5c3_0000 + k);
        let mut s = vec![0.0; n];
        for &j in &active {
            s[j] = rng.gen_range(-1.0..1.0);
        }
        seeds.push(s);
    }
    let mut lower = best_col.0;
    let mut converged = true;
    for s in &seeds {
        let (v, ok) = ascent(op, p, q, s);
        lower = lower.max(v);
        converged &= ok;
    }
    let upper = interpolation_upper(op, 1.0 / p, inv(q));
    if lower > upper * (1.0 + 1e-9) {
        return Err(Error::Convergence(format!(
            "bracket inverted for p={p}, q={q}: lower {lower:.12e} > upper {upper:.12e}"
        )));
    }
    Ok(OperatorNormBracket {
        lower,
        upper: upper.max(lower),
        methods: vec![NormMethod::DualityAscent, NormMethod::Interpolation],
        p,
        q,
        converged,
    })
}

/// One measured ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub ball_center: Option<usize>,
    pub r: Option<f64>,
    /// Scale variable of the trend (R, N, k, λ, t or s).
    pub scale: f64,
    pub f_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub bracket_width: f64,
    /// Auxiliary value (e.g. a second bound or a truncation tail).
    pub aux: Option<f64>,
    pub flagged: bool,
}

/// Parameter tuple of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScanParams {
    pub p: f64,
    pub s: Option<f64>,
    pub q: Option<f64>,
    pub kappa: Option<f64>,
}

/// Records of one condition with sup and trend.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition: String,
    pub model: String,
    pub params: ScanParams,
    pub records: Vec<Record>,
    pub sup_ratio: f64,
    pub trend: Option<LineFit>,
    pub skipped: usize,
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn new(condition: &str, model: &str, params: ScanParams) -> Self {
        ConditionReport {
            condition: condition.to_string(),
            model: model.to_string(),
            params,
            records: Vec::new(),
            sup_ratio: 0.0,
            trend: None,
            skipped: 0,
            notes: Vec::new(),
        }
    }

    fn push(&mut self, mut rec: Record) -> Result<()> {
        if !(rec.rhs > 0.0) {
            bail!(Precondition, "{} record at scale {} has nonpositive right side {}", self.condition, rec.scale, rec.rhs);
        }
        rec.flagged = rec.flagged || rec.bracket_width > BRACKET_FLAG;
        self.records.push(rec);
        Ok(())
    }

    /// Computes the sup and the log-log trend of the per-scale sup over the
    /// longest dyadic chain of unflagged scales (all unflagged scales when the
    /// chain is shorter than four).
    pub fn finish(mut self) -> Self {
        self.sup_ratio = self.records.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let mut scales: Vec<(f64, f64)> = Vec::new();
        for r in self.records.iter().filter(|r| !r.flagged && r.scale > 0.0) {
            match scales.iter_mut().find(|s| s.0 == r.scale) {
                Some(s) => s.1 = s.1.max(r.ratio),
                None => scales.push((r.scale, r.ratio)),
            }
        }
        scales.sort_by(|a, b| a.0.total_cmp(&b.0));
        let xs: Vec<f64> = scales.iter().map(|s| s.0).collect();
        let chain = dyadic_chain(&xs);
        let (cx, cy): (Vec<f64>, Vec<f64>) = if chain.len() >= 4 {
            chain.iter().map(|&i| scales[i]).unzip()
        } else {
            scales.iter().copied().unzip()
        };
        self.trend = loglog_fit(&cx, &cy);
        self
    }

    pub fn flagged(&self) -> usize {
        self.records.iter().filter(|r| r.flagged).count()
    }

    /// `|slope| < 0.1` with standard error below `0.05`.
    pub fn bounded(&self) -> bool {
        self.trend.map(|t| t.slope.abs() < 0.1 && t.stderr < 0.05).unwrap_or(false)
    }
}

/// `‖F(√L) P_B‖_{p→s}`: exact from the spectral function when `p = 1, s = 2`.
fn localized_norm(model: &SpectralModel, f: &MultiplierFn, ball: &Ball, p: f64, s: f64) -> Result<(f64, f64)> {
    let mask = model.space.ball_mask(ball);
    if p == 1.0 && s == 2.0 {
        let sf = model.spectral_function(&|l| f.eval(l.max(0.0).sqrt()));
        let v = sf.iter().zip(&mask).filter(|(_, m)| **m).map(|(v, _)| *v).fold(0.0, f64::max);
        return Ok((v.sqrt(), 0.0));
    }
    let op = apply_multiplier_sqrt(model, f)?;
    let r = Restricted::new(&op, mask);
    let b = norm_p_to_q_bracket(&r, p, s)?;
    Ok((b.lower, b.relative_width()))
}

/// `‖H‖_q` of an even profile over `[-1, 1]` by the midpoint rule.
fn profile_lq(h: &MultiplierFn, q: f64) -> f64 {
    let m = 20_000;
    let dx = 1.0 / m as f64;
    if q.is_infinite() {
        return (0..m).map(|i| h.eval((i as f64 + 0.5) * dx).abs()).fold(0.0, f64::max);
    }
    (2.0 * (0..m).map(|i| h.eval((i as f64 + 0.5) * dx).abs().powf(q)).sum::<f64>() * dx).powf(1.0 / q)
}

/// Localized restriction-type scan: `F = H(·/R)` with `H` supported in `[0, 1]`.
pub fn st_scan(
    model: &SpectralModel,
    p: f64,
    s: f64,
    q: f64,
    balls: &[Ball],
    r_grid: &[f64],
    family: &[MultiplierFn],
) -> Result<ConditionReport> {
    let n = model.dimension();
    let mut rep = ConditionReport::new("ST", &model.name, ScanParams { p, s: Some(s), q: Some(q), kappa: None });
    let expo = inv(s) - 1.0 / p;
    for h in family {
        if h.support_radius > 1.0 + 1e-12 {
            bail!(Precondition, "profile `{}` must be supported in [0, 1]", h.id);
        }
        let hq = profile_lq(h, q);
        for &big_r in r_grid {
            let f = h.scale(1.0 / big_r);
            for ball in balls {
                if ball.radius < 1.0 / big_r {
                    rep.skipped += 1;
                    continue;
                }
                let (lhs, width) = localized_norm(model, &f, ball, p, s)?;
                let v = volume(&model.space, ball);
                let rhs = v.powf(expo) * (big_r * ball.radius).powf(n * (1.0 / p - inv(s))) * hq;
                rep.push(Record {
                    ball_center: Some(ball.center),
                    r: Some(ball.radius),
                    scale: big_r,
                    f_id: h.id.clone(),
                    lhs,
                    rhs,
                    ratio: lhs / rhs,
                    bracket_width: width,
                    aux: None,
                    flagged: false,
                })?;
            }
        }
    }
    if rep.skipped > 0 {
        rep.notes.push(format!("{} records with r < 1/R skipped", rep.skipped));
    }
    Ok(rep.finish())
}

/// Cluster-type scan: `F = H(·/N)`, right side with `‖H‖_{N^κ, q}`.
pub fn sc_scan(
    model: &SpectralModel,
    p: f64,
    s: f64,
    q: f64,
    kappa: f64,
    n_grid: &[usize],
    balls: &[Ball],
    family: &[MultiplierFn],
) -> Result<ConditionReport> {
    let n = model.dimension();
    let mut rep = ConditionReport::new("SC", &model.name, ScanParams { p, s: Some(s), q: Some(q), kappa: Some(kappa) });
    let expo = inv(s) - 1.0 / p;
    for h in family {
        for &nn in n_grid {
            let nf = nn as f64;
            let cells = nf.powf(kappa).round().max(1.0) as usize;
            let hq = nq_norm(h, cells, q)?;
            let f = h.scale(1.0 / nf);
            for ball in balls {
                if ball.radius < 1.0 / nf {
                    rep.skipped += 1;
                    continue;
                }
                let (lhs, width) = localized_norm(model, &f, ball, p, s)?;
                let v = volume(&model.space, ball);
                let rhs = v.powf(expo) * (nf * ball.radius).powf(n * (1.0 / p - inv(s))) * hq;
                rep.push(Record {
                    ball_center: Some(ball.center),
                    r: Some(ball.radius),
                    scale: nf,
                    f_id: h.id.clone(),
                    lhs,
                    rhs,
                    ratio: lhs / rhs,
                    bracket_width: width,
                    aux: None,
                    flagged: false,
                })?;
            }
        }
    }
    if rep.skipped > 0 {
        rep.notes.push(format!("{} records with r < 1/N skipped", rep.skipped));
    }
    Ok(rep.finish())
}

/// Spectral window used by [`sogge_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterWindow {
    /// `E_{√L}[k, k+1)` measured `p → p'`.
    SqrtUnit,
    /// `E_L[k², k²+1)` measured `p → 2`.
    SquareUnit,
}

/// Unit spectral-window scan against `(1+k)^{n(1/p - 1/p̃)-1}`.
pub fn sogge_scan(model: &SpectralModel, p: f64, k_max: usize, window: ClusterWindow) -> Result<ConditionReport> {
    let n = model.dimension();
    let target = match window {
        ClusterWindow::SqrtUnit => conj(p),
        ClusterWindow::SquareUnit => 2.0,
    };
    let mut rep = ConditionReport::new("Sp", &model.name, ScanParams { p, s: Some(target), q: None, kappa: None });
    let top = model.lambda_max();
    let expo = n * (1.0 / p - inv(target)) - 1.0;
    for k in 1..=k_max {
        let kf = k as f64;
        let (a, b) = match window {
            ClusterWindow::SqrtUnit => (kf * kf, (kf + 1.0) * (kf + 1.0)),
            ClusterWindow::SquareUnit => (kf * kf, kf * kf + 1.0),
        };
        if b > top + 1e-9 && a <= top {
            rep.notes.push(format!("window {k} truncated by the retained spectrum; stopping"));
            break;
        }
        let in_window = |l: f64| l >= a && l < b;
        if !model.eigenvalues.iter().any(|&l| in_window(l)) {
            rep.skipped += 1;
            continue;
        }
        let chi = |l: f64| if in_window(l) { 1.0 } else { 0.0 };
        let (lhs, width) = if p == 1.0 {
            let sf = model.spectral_function(&chi);
            let m = sf.iter().fold(0.0f64, |m, v| m.max(*v));
            // projector: ‖E‖_{1→∞} = sup E(y, y) and ‖E‖_{1→2} = sup E(y, y)^{1/2}
            (if target.is_infinite() { m } else { m.sqrt() }, 0.0)
        } else {
            let op = model.operator(&chi, format!("E[{a},{b})"))?;
            let br = norm_p_to_q_bracket(&op, p, target)?;
            (br.lower, br.relative_width())
        };
        let rhs = (1.0 + kf).powf(expo);
        rep.push(Record {
            ball_center: None,
            r: None,
            scale: kf,
            f_id: format!("window:{}", if window == ClusterWindow::SqrtUnit { "sqrt" } else { "square" }),
            lhs,
            rhs,
            ratio: lhs / rhs,
            bracket_width: width,
            aux: None,
            flagged: false,
        })?;
    }
    if rep.skipped > 0 {
        rep.notes.push(format!("{} empty windows skipped", rep.skipped));
    }
    Ok(rep.finish())
}

/// Restriction scan on a discrete model with `dE ≈ E[λ, λ+dλ)/dλ`.
pub fn rp_scan_discrete(model: &SpectralModel, p: f64, lambda_grid: &[f64], dlambda: f64) -> Result<ConditionReport> {
    let n = model.dimension();
    let pc = conj(p);
    let mut rep = ConditionReport::new("Rp", &model.name, ScanParams { p, s: Some(pc), q: None, kappa: None });
    let roots: Vec<f64> = model.clusters().iter().map(|c| c.0.max(0.0).sqrt()).collect();
    let lmax = lambda_grid.iter().fold(0.0f64, |m, v| m.max(*v)) + dlambda;
    let gap = roots.windows(2).filter(|w| w[1] <= lmax).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if dlambda < gap {
        bail!(Resolution, "dλ={dlambda} is below the spectral gap {gap:.4} in the scanned range");
    }
    let expo = n * (1.0 / p - 1.0 / pc) - 1.0;
    for &lam in lambda_grid {
        let chi = |l: f64| {
            let r = l.max(0.0).sqrt();
            if r >= lam && r < lam + dlambda {
                1.0 / dlambda
            } else {
                0.0
            }
        };
        let op = model.operator(&chi, format!("dE({lam})"))?;
        let br = norm_p_to_q_bracket(&op, p, pc)?;
        let rhs = lam.powf(expo);
        rep.push(Record {
            ball_center: None,
            r: None,
            scale: lam,
            f_id: format!("dE:dl={dlambda}"),
            lhs: br.lower,
            rhs,
            ratio: br.lower / rhs,
            bracket_width: br.relative_width(),
            aux: None,
            flagged: false,
        })?;
    }
    Ok(rep.finish())
}

/// Restriction scan on the continuum radial model, using the rank-one kernel
/// `c_* λ^{n-1} ℓ(λx) ℓ(λy)` truncated to `x, y <= r_max`:
/// `‖dE(λ)‖_{p→p'} = c_* λ^{n-1-2n/p'} (∫_0^{λ r_max} |ℓ(z)|^{p'} z^{n-1} dz)^{2/p'}`.
pub fn rp_scan_continuum(cm: &ContinuumRadialModel, p: f64, lambda_grid: &[f64], r_max: f64) -> Result<ConditionReport> {
    let params = cm.params;
    let n = params.n;
    let pc = conj(p);
    let mut rep = ConditionReport::new(
        "Rp",
        &format!("radial:n={}:c={}", params.n, params.c),
        ScanParams { p, s: Some(pc), q: None, kappa: None },
    );
    let mut grid: Vec<f64> = lambda_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    if grid.first().map(|&l| l <= 0.0).unwrap_or(true) {
        bail!(Domain, "λ grid must be nonempty and positive");
    }
    let expo = n * (1.0 / p - 1.0 / pc) - 1.0;
    // running integral / supremum of |ℓ| over [0, Z]
    let mut z_done = 0.0;
    let mut acc = 0.0;
    let mut sup = 0.0f64;
    for &lam in &grid {
        let z = lam * r_max;
        if z > z_done {
            let lo = if z_done == 0.0 { 1e-9 } else { z_done };
            let knee = if z_done == 0.0 { 1.0f64.min(z) } else { lo };
            let edges = graded_edges(lo, knee, z, if z_done == 0.0 { 24 } else { 0 }, 0.5);
            let (nodes, weights) = composite(&edges, 8);
            for (x, w) in nodes.iter().zip(&weights) {
                let v = scattering_l(&params, *x)?.abs();
                if pc.is_infinite() {
                    sup = sup.max(v);
                } else {
                    acc += w * v.powf(pc) * x.powf(n - 1.0);
                }
            }
            if pc.is_infinite() && z_done == 0.0 {
                // ℓ near 0 behaves like z^{(n'-n)/2}; include the first node's limit
                sup = sup.max(scattering_l(&params, 1e-9)?.abs());
            }
            z_done = z;
        }
        let lhs = if pc.is_infinite() {
            cm.c_star * lam.powf(n - 1.0) * sup * sup
        } else {
            cm.c_star * lam.powf(n - 1.0 - 2.0 * n / pc) * acc.powf(2.0 / pc)
        };
        let rhs = lam.powf(expo);
        rep.push(Record {
            ball_center: None,
            r: Some(r_max),
            scale: lam,
            f_id: "dE:rank-one".to_string(),
            lhs,
            rhs,
            ratio: lhs / rhs,
            bracket_width: 0.0,
            aux: None,
            flagged: false,
        })?;
    }
    Ok(rep.finish())
}

/// Reports of the Gaussian-bound equivalence cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct GeReport {
    pub g: ConditionReport,
    pub e: ConditionReport,
    pub st: ConditionReport,
    /// All three bounded, or none of them.
    pub consistent: bool,
}

pub fn ge_scan(model: &SpectralModel, p: f64, big_n: u32, balls: &[Ball], t_grid: &[f64]) -> Result<GeReport> {
    let n = model.dimension();
    let crit = n * (1.0 / p - 0.5);
    if !(big_n as f64 > crit) {
        bail!(Precondition, "N={big_n} must exceed n(1/p - 1/2) = {crit}");
    }
    let params = ScanParams { p, s: Some(2.0), q: None, kappa: None };
    let mut g = ConditionReport::new("G", &model.name, params);
    let mut e = ConditionReport::new("E", &model.name, params);
    let mut st = ConditionReport::new("ST", &model.name, ScanParams { q: Some(f64::INFINITY), ..params });
    let expo = 0.5 - 1.0 / p;
    for &t in t_grid {
        let heat_f = MultiplierFn::new(format!("heat:t={t}"), f64::INFINITY, true, move |x| (-t * t * x * x).exp());
        let res_f = MultiplierFn::new(format!("resolvent:t={t}:N={big_n}"), f64::INFINITY, true, move |x| {
            (1.0 + t * x.abs()).powi(-(big_n as i32))
        });
        let big_r = 1.0 / t;
        let proj = MultiplierFn::new(format!("chi:R={big_r}"), big_r, true, move |x| if x.abs() <= big_r { 1.0 } else { 0.0 });
        for ball in balls {
            if ball.radius < t {
                g.skipped += 1;
                e.skipped += 1;
                st.skipped += 1;
                continue;
            }
            let v = volume(&model.space, ball);
            let rhs = v.powf(expo) * (ball.radius / t).powf(crit);
            for (rep, f) in [(&mut g, &heat_f), (&mut e, &res_f), (&mut st, &proj)] {
                let (lhs, width) = localized_norm(model, f, ball, p, 2.0)?;
                rep.push(Record {
                    ball_center: Some(ball.center),
                    r: Some(ball.radius),
                    scale: 1.0 / t,
                    f_id: f.id.clone(),
                    lhs,
                    rhs,
                    ratio: lhs / rhs,
                    bracket_width: width,
                    aux: None,
                    flagged: false,
                })?;
            }
        }
    }
    let (g, e, st) = (g.finish(), e.finish(), st.finish());
    let flags = [g.bounded(), e.bounded(), st.bounded()];
    let consistent = flags.iter().all(|&b| b) || flags.iter().all(|&b| !b);
    Ok(GeReport { g, e, st, consistent })
}

/// `sup_α α μ{|g| > α}^{1/p}`, computed exactly by sorting.
pub fn weak_quasinorm(g: &[f64], w: &[f64], p: f64) -> f64 {
    let mut idx: Vec<usize> = (0..g.len()).collect();
    idx.sort_by(|&a, &b| g[b].abs().total_cmp(&g[a].abs()));
    let mut mass = 0.0;
    let mut best = 0.0f64;
    for &i in &idx {
        mass += w[i];
        best = best.max(g[i].abs() * mass.powf(1.0 / p));
    }
    best
}

/// `μ{|g| > α}`.
pub fn distribution(g: &[f64], w: &[f64], alpha: f64) -> f64 {
    g.iter().zip(w).filter(|(v, _)| v.abs() > alpha).map(|(_, w)| *w).sum()
}

/// One weak-type measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakEntry {
    pub r: f64,
    pub f_id: String,
    /// `(α, α μ{|S f| > α}^{1/p} / ‖f‖_p)` on the requested grid.
    pub alpha_values: Vec<(f64, f64)>,
    /// Exact sup over all `α`.
    pub sup: f64,
}

/// Weak-type table of `S_R^δ(L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakTypeReport {
    pub model: String,
    pub delta: f64,
    pub p: f64,
    pub entries: Vec<WeakEntry>,
    /// `(f_id, sup over R)`.
    pub per_f_sup: Vec<(String, f64)>,
    /// `(R, sup over f)`.
    pub per_r_sup: Vec<(f64, f64)>,
    pub overall_sup: f64,
    /// `max_R / min_R` of the per-R sup.
    pub uniformity_ratio: f64,
    pub notes: Vec<String>,
}

pub fn weak_type_scan(
    model: &SpectralModel,
    p: f64,
    q_for_delta: f64,
    r_grid: &[f64],
    family: &[(String, Vec<f64>)],
    alpha_grid: &[f64],
    delta_shift: f64,
) -> Result<WeakTypeReport> {
    let delta = crate::mult::critical_exponent(p, q_for_delta, model.dimension()) + delta_shift;
    let w = &model.space.weights;
    let mut entries = Vec::new();
    let mut notes = Vec::new();
    for &big_r in r_grid {
        if big_r * big_r > model.lambda_max() {
            notes.push(format!("R={big_r} exceeds the retained spectrum; S_R is truncated"));
        }
        let op = crate::calculus::bochner_riesz(model, big_r, delta)?;
        for (id, f) in family {
            let fp = lp_norm(f, w, p);
            if !(fp > 0.0) {
                bail!(Precondition, "test function `{id}` vanishes");
            }
            let g = op.apply(f);
            let sup = weak_quasinorm(&g, w, p) / fp;
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut grid: Vec<f64> = alpha_grid.iter().map(|a| a * gmax).collect();
            if grid.is_empty() || grid.iter().all(|&a| a >= gmax) {
                grid = (1..=16).map(|i| gmax * 2f64.powi(-i)).collect();
                notes.push(format!("α grid extended for R={big_r}, f={id}"));
            }
            let alpha_values =
                grid.iter().map(|&a| (a, a * distribution(&g, w, a).powf(1.0 / p) / fp)).collect();
            entries.push(WeakEntry { r: big_r, f_id: id.clone(), alpha_values, sup });
        }
    }
    let mut per_f_sup: Vec<(String, f64)> = Vec::new();
    let mut per_r_sup: Vec<(f64, f64)> = Vec::new();
    for e in &entries {
        match per_f_sup.iter_mut().find(|x| x.0 == e.f_id) {
            Some(x) => x.1 = x.1.max(e.sup),
            None => per_f_sup.push((e.f_id.clone(), e.sup)),
        }
        match per_r_sup.iter_mut().find(|x| x.0 == e.r) {
            Some(x) => x.1 = x.1.max(e.sup),
            None => per_r_sup.push((e.r, e.sup)),
        }
    }
    let overall_sup = entries.iter().map(|e| e.sup).fold(0.0, f64::max);
    let hi = per_r_sup.iter().map(|x| x.1).fold(0.0, f64::max);
    let lo = per_r_sup.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    Ok(WeakTypeReport {
        model: model.name.clone(),
        delta,
        p,
        entries,
        per_f_sup,
        per_r_sup,
        overall_sup,
        uniformity_ratio: hi / lo,
        notes,
    })
}

/// Default test functions: 5 spikes, 3 multi-scale spike sums, 3 smooth bumps.
pub fn default_f_family(space: &MetricMeasureSpace, seed: u64) -> Vec<(String, Vec<f64>)> {
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..5 {
        let j = rng.gen_range(0..n);
        let mut f = vec![0.0; n];
        f[j] = 1.0 / space.weights[j];
        out.push((format!("spike{i}"), f));
    }
    for i in 0..3 {
        let mut f = vec![0.0; n];
        for level in 0..4 {
            let c = rng.gen_range(0..n);
            let r = space.spacing * 2f64.powi(2 * level);
            let amp = 2f64.powi(-level);
            for (x, v) in f.iter_mut().enumerate() {
                if space.distance(c, x) < r {
                    *v += amp / r.powf(space.doubling_dim);
                }
            }
        }
        out.push((format!("multiscale{i}"), f));
    }
    for i in 0..3 {
        let c = rng.gen_range(0..n);
        let r = space.spacing * 2f64.powi(3 + 2 * i);
        let f = (0..n)
            .map(|x| {
                let d = space.distance(c, x) / r;
                if d < 1.0 {
                    (-1.0 / (1.0 - d * d)).exp()
                } else {
                    0.0
                }
            })
            .collect();
        out.push((format!("bump{i}"), f));
    }
    out
}

/// Direct `‖F(√L)‖_{p→p}` against `N^{κn(1/p-1/s)+ε} ‖δ_N F‖_{N^κ,q}`; the
/// auxiliary value is the finite-measure bound `μ(X)^{1/p-1/2} ‖F(√L)‖_{p→2}`
/// (upper bracket), which the direct norm never exceeds.
pub fn ab_check(
    model: &SpectralModel,
    p: f64,
    s: f64,
    q: f64,
    kappa: f64,
    n_grid: &[usize],
    eps: f64,
    family: &[MultiplierFn],
) -> Result<ConditionReport> {
    if !(p >= 1.0 && p <= 2.0) {
        bail!(Precondition, "ab_check needs 1 <= p <= 2");
    }
    let n = model.dimension();
    let mu = model.space.total_mass();
    let mut rep = ConditionReport::new("ABp", &model.name, ScanParams { p, s: Some(s), q: Some(q), kappa: Some(kappa) });
    for h in family {
        for &nn in n_grid {
            let nf = nn as f64;
            let cells = nf.powf(kappa).round().max(1.0) as usize;
            let hq = nq_norm(h, cells, q)?;
            let f = h.scale(1.0 / nf);
            let op = apply_multiplier_sqrt(model, &f)?;
            let direct = norm_p_to_q_bracket(&op, p, p)?;
            let to2 = norm_p_to_q_bracket(&op, p, 2.0)?;
            let holder = mu.powf(1.0 / p - 0.5) * to2.upper;
            let rhs = nf.powf(kappa * n * (1.0 / p - inv(s)) + eps) * hq;
            rep.push(Record {
                ball_center: None,
                r: None,
                scale: nf,
                f_id: h.id.clone(),
                lhs: direct.lower,
                rhs,
                ratio: direct.lower / rhs,
                bracket_width: direct.relative_width(),
                aux: Some(holder),
                flagged: direct.lower > holder * (1.0 + 1e-9),
            })?;
        }
    }
    Ok(rep.finish())
}

/// `‖e^{-(ε+is)L}‖_{1→∞} |s|^{n/2}`; the auxiliary value is the measured
/// truncation tail `Σ_{λ > λ_max} e^{-ελ}` bound relative to the value.
pub fn dispersive_scan(model: &SpectralModel, s_grid: &[f64], eps: f64) -> Result<ConditionReport> {
    let n = model.dimension();
    let mut rep = ConditionReport::new("dispersive", &model.name, ScanParams { p: 1.0, s: Some(f64::INFINITY), q: None, kappa: None });
    let lmax = model.lambda_max();
    for &s in s_grid {
        if !(s > 0.0) {
            bail!(Domain, "dispersive times must be positive");
        }
        let op = heat(model, Complex64::new(eps, -s))?;
        let lhs = op.max_abs_entry();
        let rhs = s.powf(-n / 2.0);
        // Weyl-type tail: (area/4π) ∫_{λ_max}^∞ e^{-ελ} dλ per unit volume (n = 2),
        // or (1/π) ∫_{√λ_max}^∞ e^{-ε k²} dk (n = 1)
        let tail = if n >= 2.0 {
            (-eps * lmax).exp() / (4.0 * PI * eps)
        } else {
            (-eps * lmax).exp() / (2.0 * PI * eps * lmax.sqrt().max(1.0))
        };
        rep.push(Record {
            ball_center: None,
            r: None,
            scale: s,
            f_id: format!("exp(-({eps}+is)L)"),
            lhs,
            rhs,
            ratio: lhs / rhs,
            bracket_width: 0.0,
            aux: Some(tail / lhs),
            flagged: tail / lhs > 0.01,
        })?;
    }
    Ok(rep.finish())
}

/// `‖T‖_{1→2}` of a restricted operator (helper for callers with a ball).
pub fn restricted_norm(op: &LinearOperator, space: &MetricMeasureSpace, ball: &Ball, p: f64, q: f64) -> Result<OperatorNormBracket> {
    let r = Restricted::new(op, space.ball_mask(ball));
    norm_p_to_q_bracket(&r, p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize, w: Vec<f64>) -> LinearOperator {
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            k[i * n + i] = 1.0 / w[i];
        }
        LinearOperator::dense(k, w, "id").unwrap()
    }

    #[test]
    fn identity_one_to_two() {
        let w = vec![0.5, 0.25, 2.0, 1.0];
        let id = identity(4, w.clone());
        let want = w.iter().map(|w| w.powf(-0.5)).fold(0.0, f64::max);
        assert!((norm_1_to_q(&id, 2.0) - want).abs() < 1e-14);
    }

    #[test]
    fn zero_operator() {
        let op = LinearOperator::dense(vec![0.0; 9], vec![1.0; 3], "0").unwrap();
        assert_eq!(norm_1_to_q(&op, 2.0), 0.0);
        let b = norm_p_to_q_bracket(&op, 1.5, 3.0).unwrap();
        assert_eq!(b.lower, 0.0);
    }

    #[test]
    fn weak_quasinorm_exact() {
        let g = [3.0, 1.0, 2.0];
        let w = [1.0, 1.0, 1.0];
        // candidates 3·1, 2·2, 1·3
        assert_eq!(weak_quasinorm(&g, &w, 1.0), 4.0);
    }

    #[test]
    fn bracket_on_diagonal() {
        let w = vec![0.1, 0.3, 0.2, 0.4];
        let d = [2.0, -1.0, 0.5, 1.5];
        let mut k = vec![0.0; 16];
        for i in 0..4 {
            k[i * 4 + i] = d[i] / w[i];
        }
        let op = LinearOperator::dense(k, w.clone(), "diag").unwrap();
        let (p, q) = (1.5, 3.0);
        let b = norm_p_to_q_bracket(&op, p, q).unwrap();
        // point masses: ‖T δ_j/w_j^{1/p}‖_q = |d_j| w_j^{1/q - 1/p}
        let brute = (0..4).map(|j| d[j].abs() * w[j].powf(1.0 / q - 1.0 / p)).fold(0.0, f64::max);
        assert!((b.lower - brute).abs() < 1e-10 * brute);
        assert!(b.relative_width() < 0.05, "{b:?}");
    }
}

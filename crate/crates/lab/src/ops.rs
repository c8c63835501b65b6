//! Scenario operations: each turns a config into condition reports.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specmult_core::calculus::{
    apply_multiplier_sqrt, lemma45_check, plancherel_family, plancherel_sides, transference_check,
};
use specmult_core::estimate::{
    ab_check, default_f_family, dispersive_scan, ge_scan, rp_scan_continuum, rp_scan_discrete, sc_scan, sogge_scan,
    st_scan, weak_type_scan, ClusterWindow, ConditionReport, Record, ScanParams, WeakTypeReport,
};
use specmult_core::models::{BuiltModel, ContinuumRadialModel, ModelSpec, SpectralModel};
use specmult_core::mult::{
    fourier_bump, gk_explicit, gk_fft_error, gk_fn, gk_lower_constant, mollifier_defect, plateau, sobolev_norm,
    tao_decomposition, tao_eta_square_sum, CutoffFamily, MultiplierFn, MultiplierSpec,
};
use specmult_core::space::{cz_decompose, off_support_mass, Ball};

use crate::cache;
use crate::config::{Grid, ScenarioConfig};
use crate::error::LabError;

/// Run-wide settings from the command line.
#[derive(Debug, Clone, Copy)]
pub struct RunContext {
    pub seed: u64,
    pub tolerance_scale: f64,
}

/// A report and how its auxiliary column is to be read.
#[derive(Debug, Clone)]
pub struct Section {
    pub report: ConditionReport,
    /// The auxiliary value is a defect (written to the `defect` column).
    pub aux_is_defect: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub sections: Vec<Section>,
    pub weak: Vec<WeakTypeReport>,
    /// Scenario-level facts for the JSON report, in insertion order.
    pub summary: Vec<(String, String)>,
    /// Seconds spent building the model.
    pub build_seconds: f64,
    /// Seconds spent on each section, parallel to `sections`.
    pub section_seconds: Vec<f64>,
    pub(crate) mark: Option<Instant>,
}

impl RunOutput {
    fn push(&mut self, report: ConditionReport, aux_is_defect: bool) {
        let now = Instant::now();
        self.section_seconds.push(self.mark.map(|m| (now - m).as_secs_f64()).unwrap_or(0.0));
        self.mark = Some(now);
        self.sections.push(Section { report, aux_is_defect });
    }

    pub fn flagged(&self) -> usize {
        self.sections.iter().map(|s| s.report.flagged()).sum()
    }
}

/// Operation registry: `(name, description)` in a stable order.
pub const OPERATIONS: &[(&str, &str)] = &[
    ("st", "localized restriction-type condition scan"),
    ("sc", "localized cluster-type condition scan"),
    ("sogge", "unit spectral window scan"),
    ("rp", "spectral measure restriction scan"),
    ("ge", "Gaussian / resolvent / restriction equivalence cycle"),
    ("weak-type", "weak-type quasinorm of Bochner-Riesz means"),
    ("ab", "global multiplier bound with the finite-measure cross-check"),
    ("dispersive", "damped Schrodinger group sup-norm decay"),
    ("fs", "finite speed: off-diagonal kernel mass"),
    ("plancherel", "Hankel-Plancherel defect on the radial model"),
    ("transference", "two-route comparison of the heat-semigroup representation"),
    ("tao", "dyadic splitting of Bochner-Riesz symbols"),
    ("gk", "G_k Fourier pair and lower bound"),
    ("mollifier", "mollifier defect decay"),
    ("cz", "Calderon-Zygmund decomposition properties"),
    ("lemma45", "almost-orthogonality of sums of spectral multipliers"),
];

/// Condition tags produced by the scans, with the operation producing each.
pub const CONDITIONS: &[(&str, &str)] = &[
    ("ST", "st"),
    ("SC", "sc"),
    ("Sp", "sogge"),
    ("Rp", "rp"),
    ("G", "ge"),
    ("E", "ge"),
    ("ABp", "ab"),
    ("weak-type", "weak-type"),
    ("dispersive", "dispersive"),
    ("FS", "fs"),
];

fn unknown(kind: &'static str, key: &str) -> LabError {
    LabError::Unknown { kind, key: key.to_string() }
}

fn grid(g: &Option<Grid>, key: &str, default: &[f64]) -> Result<Vec<f64>, LabError> {
    match g {
        Some(g) => g.values(key),
        None => Ok(default.to_vec()),
    }
}

fn int_grid(g: &Option<Grid>, key: &str, default: &[f64]) -> Result<Vec<usize>, LabError> {
    grid(g, key, default)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(LabError::Config(format!("`{key}` must hold nonnegative integers, got {v}")))
            }
        })
        .collect()
}

/// Parses a multiplier spec. `cut:<spec>` multiplies by the plateau cutoff
/// (support `[-1, 1]`); `custom:file=…` reads `x y` sample lines.
pub fn multiplier(spec: &str, base: &Path) -> Result<MultiplierFn, LabError> {
    if let Some(inner) = spec.strip_prefix("cut:") {
        let f = multiplier(inner, base)?;
        return Ok(MultiplierFn::new(spec, 1.0, f.even, move |x| f.eval(x) * plateau(x)));
    }
    let parsed = MultiplierSpec::parse(spec).map_err(|_| unknown("multiplier", spec))?;
    if let MultiplierSpec::Custom { file } = &parsed {
        let path = base.join(file);
        let text = std::fs::read_to_string(&path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y))) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ => return Err(LabError::Config(format!("{}:{}: expected `x y`", path.display(), i + 1))),
            }
        }
        return MultiplierFn::from_samples(spec, xs, ys).map_err(LabError::core(format!("multiplier `{spec}`")));
    }
    parsed.build().map_err(LabError::core(format!("multiplier `{spec}`")))
}

fn family(cfg: &ScenarioConfig, base: &Path, default: &[&str]) -> Result<Vec<MultiplierFn>, LabError> {
    if cfg.params.family.is_empty() {
        default.iter().map(|s| multiplier(s, base)).collect()
    } else {
        cfg.params.family.iter().map(|s| multiplier(s, base)).collect()
    }
}

/// Builds a model, going through the cache directory for discrete models.
pub fn build_model(spec: &str) -> Result<BuiltModel, LabError> {
    let parsed = ModelSpec::parse(spec).map_err(|_| unknown("model", spec))?;
    if let Some(m) = cache::load(spec)? {
        return Ok(BuiltModel::Discrete(m));
    }
    let built = parsed.build().map_err(LabError::core(format!("model `{spec}`")))?;
    if let BuiltModel::Discrete(m) = &built {
        cache::store(spec, m)?;
    }
    Ok(built)
}

fn discrete<'a>(built: &'a Option<BuiltModel>, op: &str) -> Result<&'a SpectralModel, LabError> {
    match built {
        Some(BuiltModel::Discrete(m)) => Ok(m),
        _ => Err(LabError::Config(format!("operation `{op}` needs a discrete model"))),
    }
}

fn radial<'a>(built: &'a Option<BuiltModel>, op: &str) -> Result<&'a ContinuumRadialModel, LabError> {
    match built {
        Some(BuiltModel::Radial(cm, _)) => Ok(cm),
        _ => Err(LabError::Config(format!("operation `{op}` needs a radial model"))),
    }
}

fn balls(model: &SpectralModel, cfg: &ScenarioConfig) -> Result<Vec<Ball>, LabError> {
    let n = model.space.len();
    let centers = cfg.params.centers.unwrap_or(4).clamp(1, n);
    let span = model.space.spacing * n as f64;
    let default: Vec<f64> = (0..6).map(|j| span / 64.0 * 2f64.powi(j)).collect();
    let radii = grid(&cfg.params.radii, "radii", &default)?;
    let mut out = Vec::new();
    for i in 0..centers {
        let c = (i * n + n / 2) / centers;
        for &r in &radii {
            out.push(Ball::new(c.min(n - 1), r).map_err(LabError::core("ball grid"))?);
        }
    }
    Ok(out)
}

fn record(scale: f64, f_id: impl Into<String>, lhs: f64, rhs: f64, aux: Option<f64>, flagged: bool) -> Record {
    Record {
        ball_center: None,
        r: None,
        scale,
        f_id: f_id.into(),
        lhs,
        rhs,
        ratio: lhs / rhs,
        bracket_width: 0.0,
        aux,
        flagged,
    }
}

fn report(condition: &str, model: &str, params: ScanParams, records: Vec<Record>) -> ConditionReport {
    let sup = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let mut rep = ConditionReport {
        condition: condition.to_string(),
        model: model.to_string(),
        params,
        records,
        sup_ratio: sup,
        trend: None,
        skipped: 0,
        notes: Vec::new(),
    };
    let (x, y): (Vec<f64>, Vec<f64>) = crate::report::per_scale_sup(&rep).into_iter().unzip();
    rep.trend = specmult_core::stats::loglog_fit(&x, &y);
    rep
}

fn tag(mut r: ConditionReport, model: &str) -> ConditionReport {
    r.model = model.to_string();
    r
}

/// Runs the configured operation. `base` resolves relative file references.
pub fn execute(cfg: &ScenarioConfig, ctx: &RunContext, base: &Path) -> Result<RunOutput, LabError> {
    let op = cfg.scenario.operation.as_str();
    if !OPERATIONS.iter().any(|(name, _)| *name == op) {
        return Err(unknown("operation", op));
    }
    let spec = cfg.scenario.model.as_str();
    let pr = &cfg.params;
    let ps = pr.p.as_ref().map(|p| p.values()).unwrap_or_else(|| vec![1.0]);
    let tol = |key: &str, default: f64| cfg.tolerance(key, default, ctx.tolerance_scale);
    let mut out = RunOutput::default();
    let start = Instant::now();
    // symbol-only operations take `model = "none"`
    let built = if spec == "none" { None } else { Some(build_model(spec)?) };
    out.build_seconds = start.elapsed().as_secs_f64();
    out.mark = Some(Instant::now());
    let core = |what: &str| LabError::core(format!("{op} on `{spec}`: {what}"));
    match op {
        "st" | "sc" => {
            let m = discrete(&built, op)?;
            let fam = family(cfg, base, &["cut:gauss:c=0:w=0.5", "bump:a=-1:b=1"])?;
            let s = pr.s.unwrap_or(2.0);
            let balls = balls(m, cfg)?;
            for &p in &ps {
                for q in pr.q.as_ref().map(|q| q.values()).unwrap_or_else(|| vec![f64::INFINITY]) {
                    let rep = if op == "st" {
                        let rs = grid(&pr.big_r, "R", &[4.0, 8.0, 16.0, 32.0])?;
                        st_scan(m, p, s, q, &balls, &rs, &fam).map_err(core("scan"))?
                    } else {
                        let ns = int_grid(&pr.big_n, "N", &[4.0, 8.0, 16.0])?;
                        sc_scan(m, p, s, q, pr.kappa.unwrap_or(1.0), &ns, &balls, &fam).map_err(core("scan"))?
                    };
                    out.push(tag(rep, spec), false);
                }
            }
        }
        "sogge" => {
            let m = discrete(&built, op)?;
            let window = match pr.window.as_deref().unwrap_or("sqrt") {
                "sqrt" => ClusterWindow::SqrtUnit,
                "square" => ClusterWindow::SquareUnit,
                other => return Err(unknown("window", other)),
            };
            for &p in &ps {
                let rep = sogge_scan(m, p, pr.k_max.unwrap_or(32), window).map_err(core("scan"))?;
                out.push(tag(rep, spec), false);
            }
        }
        "rp" => {
            let lams = grid(&pr.lambda, "lambda", &[0.5, 1.0, 2.0, 4.0, 8.0])?;
            for &p in &ps {
                let rep = match &built {
                    Some(BuiltModel::Radial(cm, _)) => rp_scan_continuum(cm, p, &lams, pr.r_max.unwrap_or(200.0)),
                    _ => rp_scan_discrete(discrete(&built, op)?, p, &lams, pr.dlambda.unwrap_or(1.0)),
                }
                .map_err(core("scan"))?;
                out.push(tag(rep, spec), false);
            }
        }
        "ge" => {
            let m = discrete(&built, op)?;
            let balls = balls(m, cfg)?;
            let ts = grid(&pr.t, "t", &[0.05, 0.1, 0.2, 0.4])?;
            for &p in &ps {
                let order = pr.order.unwrap_or((m.dimension() * (1.0 / p - 0.5)).floor() as u32 + 1);
                let g = ge_scan(m, p, order, &balls, &ts).map_err(core("scan"))?;
                out.summary.push((format!("consistent(p={p})"), g.consistent.to_string()));
                for r in [g.g, g.e, g.st] {
                    out.push(tag(r, spec), false);
                }
            }
        }
        "weak-type" => {
            let m = discrete(&built, op)?;
            let rs = grid(&pr.big_r, "R", &[8.0, 16.0, 32.0, 64.0])?;
            let alphas = grid(&pr.alpha, "alpha", &(0..24).map(|i| 2f64.powi(-i)).collect::<Vec<_>>())?;
            let fam = default_f_family(&m.space, ctx.seed);
            for &p in &ps {
                for q in pr.q.as_ref().map(|q| q.values()).unwrap_or_else(|| vec![f64::INFINITY]) {
                    let w = weak_type_scan(m, p, q, &rs, &fam, &alphas, pr.delta_shift.unwrap_or(0.0)).map_err(core("scan"))?;
                    let records = w
                        .entries
                        .iter()
                        .map(|e| record(e.r, e.f_id.clone(), e.sup, 1.0, None, !e.sup.is_finite()))
                        .collect();
                    out.summary.push((format!("uniformity_ratio(p={p},q={q})"), w.uniformity_ratio.to_string()));
                    let params = ScanParams { p, s: None, q: Some(q), kappa: None };
                    out.push(report("weak-type", spec, params, records), false);
                    out.weak.push(w);
                }
            }
        }
        "ab" => {
            let m = discrete(&built, op)?;
            let fam = family(cfg, base, &["bump:a=-1:b=1"])?;
            let ns = int_grid(&pr.big_n, "N", &[2.0, 4.0, 8.0, 16.0])?;
            for &p in &ps {
                let q = pr.q.as_ref().map(|q| q.values()[0]).unwrap_or(f64::INFINITY);
                let rep = ab_check(m, p, pr.s.unwrap_or(2.0), q, pr.kappa.unwrap_or(1.0), &ns, pr.eps.unwrap_or(0.0), &fam)
                    .map_err(core("scan"))?;
                out.push(tag(rep, spec), false);
            }
        }
        "dispersive" => {
            let m = discrete(&built, op)?;
            let times = grid(&pr.times, "times", &[0.05, 0.1, 0.2, 0.4])?;
            let rep = dispersive_scan(m, &times, pr.eps.unwrap_or(0.05)).map_err(core("scan"))?;
            out.push(tag(rep, spec), true);
        }
        "fs" => {
            let m = discrete(&built, op)?;
            let rhos = grid(&pr.rho, "rho", &[0.1, 0.15, 0.2])?;
            let limit = tol("off_support", 1e-6);
            let mut records = Vec::new();
            for (i, &rho) in rhos.iter().enumerate() {
                let f = fourier_bump(rho, 1 + i as u32).map_err(core("multiplier"))?;
                let k = apply_multiplier_sqrt(m, &f).map_err(core("operator"))?;
                let mass = off_support_mass(&k, &m.space, rho);
                records.push(record(rho, f.id.clone(), mass, 1.0, Some(mass), mass > limit));
            }
            let mut rep = report("FS", spec, ScanParams { p: 2.0, s: Some(2.0), q: None, kappa: None }, records);
            rep.trend = None;
            out.push(rep, true);
        }
        "plancherel" => {
            let cm = radial(&built, op)?;
            let fam = if pr.family.is_empty() { plancherel_family(cm) } else { family(cfg, base, &[])? };
            let limit = tol("defect", 1e-5);
            let records = fam
                .iter()
                .map(|f| {
                    let (lhs, rhs) = plancherel_sides(cm, f);
                    let d = (cm.c_star * lhs - rhs).abs() / rhs;
                    record(1.0, f.id.clone(), cm.c_star * lhs, rhs, Some(d), d > limit)
                })
                .collect();
            out.summary.push(("c_star".into(), cm.c_star.to_string()));
            let mut rep = report("plancherel", spec, ScanParams { p: 2.0, s: Some(2.0), q: None, kappa: None }, records);
            rep.trend = None;
            out.push(rep, true);
        }
        "transference" => {
            let m = discrete(&built, op)?;
            let r = grid(&pr.big_r, "R", &[8.0])?[0];
            let r2 = r * r;
            let default = [format!("bump:a=-{r2}:b={r2}")];
            let fam = if pr.family.is_empty() {
                default.iter().map(|s| multiplier(s, base)).collect::<Result<Vec<_>, _>>()?
            } else {
                family(cfg, base, &[])?
            };
            let steps = grid(&pr.steps, "steps", &[0.1, 0.05])?;
            let limit = tol("discrepancy", 1e-4);
            let mut records = Vec::new();
            for h in &fam {
                for &st in &steps {
                    let t = transference_check(m, h, r, pr.truncation.unwrap_or(3000.0), st, tol("tail", 1e-6))
                        .map_err(core(&h.id))?;
                    records.push(record(st, h.id.clone(), t.discrepancy, 1.0, Some(t.tail_estimate), t.discrepancy > limit));
                }
            }
            out.push(report("transference", spec, ScanParams::default(), records), false);
        }
        "tao" => {
            let r = grid(&pr.big_r, "R", &[16.0])?[0];
            let delta = pr.delta.unwrap_or(0.5);
            let order = pr.order.unwrap_or(4);
            let ks: Vec<i32> = grid(&pr.k, "k", &[0.0, -4.0, -8.0, -12.0, -16.0, -20.0])?.into_iter().map(|k| k as i32).collect();
            let lgrid: Vec<f64> = (0..4000).map(|i| r * i as f64 / 4000.0).collect();
            let mut records = Vec::new();
            for &k in &ks {
                let t = tao_decomposition(r, delta, order, k).map_err(core("pieces"))?;
                let measured = t.measured_support_radius(1e-9);
                let res = t.splitting_residual(&lgrid);
                let flagged = measured > t.support_bound() * (1.0 + 1e-6) || res > tol("splitting", 1e-10);
                records.push(record(2f64.powi(k), format!("n_k:k={k}"), measured, t.support_bound(), Some(res), flagged));
            }
            let kmin = ks.iter().copied().min().unwrap_or(0);
            let c = tao_eta_square_sum(r, delta, order, kmin, &lgrid).map_err(core("eta sum"))?;
            out.summary.push(("eta_square_sum".into(), c.to_string()));
            let mut rep = report("tao", "symbol", ScanParams { p: 1.0, s: None, q: None, kappa: None }, records);
            rep.trend = None;
            out.push(rep, true);
        }
        "gk" => {
            let ks = int_grid(&pr.k, "k", &[1.0, 5.0, 20.0])?;
            let limit = tol("fft", 1e-6);
            let mut records = Vec::new();
            for k in ks {
                let k = k as u32;
                let err = gk_fft_error(k, 1.5).map_err(core("fft"))?;
                let g = gk_fn(k).map_err(core("G_k"))?;
                let kf = k as f64;
                let resid = (0..2000)
                    .map(|i| kf - 20.0 + 40.0 * i as f64 / 1999.0)
                    .filter(|l| (l - kf).abs() >= 0.5)
                    .map(|l| (g.eval(l) - gk_explicit(k, l)).abs())
                    .fold(0.0, f64::max);
                let c = gk_lower_constant(k);
                out.summary.push((format!("lower_constant(k={k})"), c.to_string()));
                records.push(record(kf, g.id.clone(), err, 1.0, Some(resid), err > limit || resid > 1e-10 || !(c > 0.0)));
            }
            let mut rep = report("gk", "symbol", ScanParams::default(), records);
            rep.trend = None;
            out.push(rep, true);
        }
        "mollifier" => {
            let fam = family(cfg, base, &["cut:gauss:c=0:w=0.4"])?;
            let ns = int_grid(&pr.big_n, "N", &[8.0, 16.0, 32.0, 64.0])?;
            for beta in grid(&pr.beta, "beta", &[1.0, 1.5, 2.5])? {
                for q in pr.q.as_ref().map(|q| q.values()).unwrap_or_else(|| vec![2.0, f64::INFINITY]) {
                    let mut records = Vec::new();
                    for h in &fam {
                        let w = sobolev_norm(h, beta, q).map_err(core("Sobolev norm"))?;
                        for &n in &ns {
                            let d = mollifier_defect(h, n, beta, q, &CutoffFamily).map_err(core("defect"))?;
                            records.push(record(n as f64, h.id.clone(), d.defect, (n as f64).powf(-beta) * w, None, false));
                        }
                    }
                    let params = ScanParams { p: beta, s: None, q: Some(q), kappa: None };
                    out.push(report("mollifier", "symbol", params, records), false);
                }
            }
        }
        "cz" => {
            let m = discrete(&built, op)?;
            let instances = pr.instances.unwrap_or(50);
            let p = ps[0];
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let n = m.space.len();
            let mut records = Vec::new();
            for i in 0..instances {
                let mut f: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect();
                for _ in 0..8 {
                    let c = rng.gen_range(0..n);
                    let w = rng.gen_range(1..24.min(n));
                    let a = rng.gen_range(-20.0..20.0);
                    for v in &mut f[c.saturating_sub(w)..(c + w).min(n)] {
                        *v += a;
                    }
                }
                let alpha = 4.0 * m.space.lp_norm(&f, p) / m.space.total_mass().powf(1.0 / p);
                let d = cz_decompose(&m.space, &f, alpha, p).map_err(core("decomposition"))?;
                let chk = d.check(&m.space, &f);
                let rhs = alpha.powf(-p) * m.space.lp_norm(&f, p).powf(p);
                let lhs = chk.ball_sum_ratio * rhs;
                records.push(record(1.0, format!("random{i}"), lhs, rhs, Some(chk.reconstruction_error), !chk.holds(p, f64::INFINITY)));
            }
            let mut rep = report("cz", spec, ScanParams { p, s: None, q: None, kappa: None }, records);
            rep.trend = None;
            out.push(rep, true);
        }
        "lemma45" => {
            let m = discrete(&built, op)?;
            let instances = pr.instances.unwrap_or(50);
            let qs: Vec<MultiplierFn> = (0..6u32)
                .map(|k| MultiplierFn::new(format!("eta:level={k}"), 2f64.powi(k as i32), true, move |l| CutoffFamily.eta_level(k, l)))
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut records = Vec::new();
            for i in 0..instances {
                let fs: Vec<Vec<f64>> = (0..qs.len()).map(|_| (0..m.space.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
                let o = lemma45_check(m, &qs, &fs).map_err(core("check"))?;
                records.push(record(1.0, format!("random{i}"), o.lhs, o.rhs, Some(o.c), o.lhs > o.rhs * (1.0 + 1e-10)));
            }
            let mut rep = report("lemma45", spec, ScanParams { p: 2.0, s: Some(2.0), q: None, kappa: None }, records);
            rep.trend = None;
            out.push(rep, false);
        }
        _ => unreachable!("operation list checked above"),
    }
    Ok(out)
}

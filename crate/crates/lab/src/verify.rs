//! Self-check suites behind `specmult verify`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specmult_core::calculus::{
    apply_multiplier_sqrt, hankel_plancherel_check, lemma45_check, plancherel_family, KernelOp, LinearOperator,
};
use specmult_core::error::Result;
use specmult_core::estimate::{norm_1_to_q, norm_2_to_2_dense, norm_2_to_2_power, norm_p_to_inf, norm_p_to_q_bracket};
use specmult_core::models::{radial_inverse_square, RadialGrids, SpectralModel};
use specmult_core::mult::{
    bump_profile, fourier_bump, gk_explicit, gk_fft_error, gk_fn, gk_lower_constant, mollifier_defect, tao_decomposition,
    CutoffFamily, MultiplierFn,
};
use specmult_core::space::{build_net, cz_decompose, off_support_mass, MetricMeasureSpace};
use specmult_core::specfun::{bessel_i, bessel_j, bessel_j_zeros, bessel_k, hermite_all};
use specmult_core::stats::loglog_fit;

use crate::error::LabError;

pub const SUITES: &[&str] = &["lemmas", "norms", "specfun", "all"];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<(bool, String)>;

fn run(name: &'static str, f: fn() -> Outcome) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Runs `suite`; unknown names are an error.
pub fn suite(name: &str) -> std::result::Result<Vec<Check>, LabError> {
    let list: Vec<(&'static str, fn() -> Outcome)> = match name {
        "lemmas" => LEMMAS.to_vec(),
        "norms" => NORMS.to_vec(),
        "specfun" => SPECFUN.to_vec(),
        "all" => SPECFUN.iter().chain(NORMS).chain(LEMMAS).copied().collect(),
        other => return Err(LabError::Unknown { kind: "verify suite", key: other.to_string() }),
    };
    Ok(list.into_iter().map(|(n, f)| run(n, f)).collect())
}

const SPECFUN: &[(&str, fn() -> Outcome)] = &[
    ("bessel golden values", bessel_golden),
    ("bessel half-integer closed form", bessel_half_integer),
    ("bessel zeros", bessel_zeros),
    ("hermite closed forms", hermite_closed_forms),
    ("hermite orthonormality", hermite_orthonormality),
];

const NORMS: &[(&str, fn() -> Outcome)] = &[
    ("1->q norm by point masses", one_to_q_brute),
    ("p->inf norm by extremal functions", p_to_inf_brute),
    ("2->2 dense vs power iteration", two_two_agreement),
    ("bracket encloses diagonal norms", diagonal_brackets),
    ("bracket ordering on random kernels", random_brackets),
];

const LEMMAS: &[(&str, fn() -> Outcome)] = &[
    ("finite speed localization", localization),
    ("net covering and overlap", net_bounds),
    ("mollifier defect decay", mollifier_decay),
    ("dyadic splitting pieces", splitting_pieces),
    ("almost orthogonality", almost_orthogonality),
    ("G_k Fourier pair", gk_pair),
    ("Hankel-Plancherel", plancherel),
    ("Calderon-Zygmund properties", cz_properties),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn bessel_golden() -> Outcome {
    type F = fn(f64, f64) -> Result<f64>;
    let table: [(&str, F, f64, f64, f64); 10] = [
        ("J", bessel_j, 0.0, 1.0, 0.765_197_686_557_966_6),
        ("J", bessel_j, 0.0, 10.0, -0.245_935_764_451_348_3),
        ("J", bessel_j, 1.0, 10.0, 0.043_472_746_168_861_44),
        ("J", bessel_j, 1.0, 2.5, 0.497_094_102_464_274_1),
        ("J", bessel_j, 0.0, 100.0, 0.019_985_850_304_223_12),
        ("I", bessel_i, 0.0, 1.0, 1.266_065_877_752_008_2),
        ("I", bessel_i, 1.0, 1.0, 0.565_159_103_992_485_1),
        ("K", bessel_k, 0.0, 1.0, 0.421_024_438_240_708_3),
        ("K", bessel_k, 1.0, 2.0, 0.139_865_881_816_522_4),
        ("K", bessel_k, 0.0, 0.1, 2.427_069_024_702_016_6),
    ];
    let mut worst = 0.0f64;
    let mut at = String::new();
    for (kind, f, nu, x, want) in table {
        let e = rel(f(nu, x)?, want);
        if e > worst {
            worst = e;
            at = format!("{kind}_{nu}({x})");
        }
    }
    Ok((worst < 1e-11, format!("max relative error {worst:.1e} at {at}")))
}

fn bessel_half_integer() -> Outcome {
    let mut worst = 0.0f64;
    for x in [0.3, 1.7, 3.7, 11.9, 50.0, 500.0] {
        let j = (2.0 / (PI * x)).sqrt() * x.sin();
        let j15 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
        worst = worst.max((bessel_j(0.5, x)? - j).abs()).max((bessel_j(1.5, x)? - j15).abs());
    }
    Ok((worst < 1e-12, format!("max absolute error {worst:.1e}")))
}

fn bessel_zeros() -> Outcome {
    let z0 = bessel_j_zeros(0.0, 3)?;
    let z1 = bessel_j_zeros(1.0, 2)?;
    let want0 = [2.404_825_557_695_773, 5.520_078_110_286_311, 8.653_727_912_911_013];
    let want1 = [3.831_705_970_207_512_5, 7.015_586_669_815_619];
    let worst = z0.iter().zip(&want0).chain(z1.iter().zip(&want1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((worst < 1e-10, format!("max zero error {worst:.1e}")))
}

fn hermite_closed_forms() -> Outcome {
    let c = PI.powf(-0.25);
    let mut worst = 0.0f64;
    for x in [-2.5f64, -0.7, 0.0, 0.4, 1.5, 3.0] {
        let g = (-x * x / 2.0).exp();
        let h = hermite_all(4, x)?;
        let want = [
            c * g,
            c * g * 2.0 * x / 2f64.sqrt(),
            c * g * (4.0 * x * x - 2.0) / 8f64.sqrt(),
            c * g * (8.0 * x.powi(3) - 12.0 * x) / 48f64.sqrt(),
            c * g * (16.0 * x.powi(4) - 48.0 * x * x + 12.0) / 384f64.sqrt(),
        ];
        worst = h.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    // h_{2m}(0) = (-1)^m π^{-1/4} Π_{k<=m} √((2k-1)/2k)
    let m = 200;
    let at0 = hermite_all(2 * m, 0.0)?[2 * m];
    let want = (1..=m).fold(c, |acc, k| -acc * ((2 * k - 1) as f64 / (2 * k) as f64).sqrt());
    let high = rel(at0, want);
    Ok((worst < 1e-13 && high < 1e-12, format!("low orders {worst:.1e}, h_400(0) relative {high:.1e}")))
}

fn hermite_orthonormality() -> Outcome {
    let (n, half) = (4096, 40.0);
    let h = 2.0 * half / n as f64;
    let m_max = 60;
    let table: Vec<Vec<f64>> = (0..n).map(|i| hermite_all(m_max, -half + (i as f64 + 0.5) * h)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for a in (0..=m_max).step_by(7) {
        for b in (a..=m_max).step_by(5) {
            let g: f64 = table.iter().map(|row| row[a] * row[b]).sum::<f64>() * h;
            worst = worst.max((g - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok((worst < 1e-10, format!("max Gram defect {worst:.1e} up to m={m_max}")))
}

fn random_kernel(rng: &mut ChaCha8Rng, n: usize) -> LinearOperator {
    let k: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
    LinearOperator::dense(k, w, "random").expect("square kernel")
}

fn one_to_q_brute() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for q in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
        let op = random_kernel(&mut rng, 8);
        let w = op.weights().to_vec();
        // point masses δ_y / w_y are the extreme points of the L^1 unit ball
        let brute = (0..8)
            .map(|y| {
                let mut f = vec![0.0; 8];
                f[y] = 1.0 / w[y];
                specmult_core::space::lp_norm(&op.apply(&f), &w, q)
            })
            .fold(0.0, f64::max);
        worst = worst.max(rel(norm_1_to_q(&op, q), brute));
    }
    Ok((worst < 1e-12, format!("max relative error {worst:.1e}")))
}

fn p_to_inf_brute() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for p in [1.0, 1.5, 2.0, 4.0] {
        let op = random_kernel(&mut rng, 8);
        let w = op.weights().to_vec();
        let mut brute = 0.0f64;
        for x in 0..8 {
            let row = op.row(x);
            // Hölder extremal f = sgn K |K|^{p'-1}; p = 1 uses the best point mass
            let f: Vec<f64> = if p == 1.0 {
                let y = (0..8).max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs())).unwrap_or(0);
                (0..8).map(|j| if j == y { row[y].signum() / w[y] } else { 0.0 }).collect()
            } else {
                let pc = p / (p - 1.0);
                row.iter().map(|k| k.signum() * k.abs().powf(pc - 1.0)).collect()
            };
            let val = op.apply(&f)[x].abs() / specmult_core::space::lp_norm(&f, &w, p);
            brute = brute.max(val);
        }
        worst = worst.max(rel(norm_p_to_inf(&op, p), brute));
    }
    Ok((worst < 1e-12, format!("max relative error {worst:.1e}")))
}

fn two_two_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for n in [16, 48, 96] {
        let op = random_kernel(&mut rng, n);
        let dense = norm_2_to_2_dense(&op).unwrap_or(f64::NAN);
        let (power, _) = norm_2_to_2_power(&op, 20_000, 1e-14);
        worst = worst.max(rel(power, dense));
    }
    Ok((worst < 1e-6, format!("max relative gap {worst:.1e}")))
}

fn diagonal_brackets() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let n = 24;
    let m: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.5)).collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = m[i] / w[i];
    }
    let op = LinearOperator::dense(k, w.clone(), "diagonal")?;
    let mut ok = true;
    let mut widest = 0.0f64;
    for (p, q) in [(1.5, 1.5), (1.2, 3.0), (4.0 / 3.0, 4.0), (2.0, 2.0), (1.0, 2.0), (2.0, f64::INFINITY)] {
        // ‖m f‖_q / ‖f‖_p is maximized by a point mass on an atomic measure when p <= q
        let exact = (0..n).map(|x| m[x].abs() * w[x].powf(1.0 / q - 1.0 / p)).fold(0.0, f64::max);
        let b = norm_p_to_q_bracket(&op, p, q)?;
        ok &= b.lower <= exact * (1.0 + 1e-9) && exact <= b.upper * (1.0 + 1e-9);
        widest = widest.max(b.relative_width());
    }
    Ok((ok, format!("all enclosing: {ok}; widest relative bracket {widest:.2e}")))
}

fn random_brackets() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut ok = true;
    let mut widest = 0.0f64;
    for i in 0..20 {
        let op = random_kernel(&mut rng, 16);
        let (p, q) = [(1.3, 1.3), (1.5, 4.0), (1.2, 2.0), (1.8, 6.0)][i % 4];
        let b = norm_p_to_q_bracket(&op, p, q)?;
        ok &= b.lower > 0.0 && b.lower <= b.upper * (1.0 + 1e-9);
        widest = widest.max(b.relative_width());
    }
    Ok((ok, format!("lower <= upper on 20 kernels: {ok}; widest {widest:.2e}")))
}

fn localization() -> Outcome {
    let model = SpectralModel::circle(4096, 1024)?;
    let mut worst = 0.0f64;
    for (i, rho) in [0.1, 0.15, 0.2].into_iter().enumerate() {
        let f = fourier_bump(rho, 1 + i as u32)?;
        let op = apply_multiplier_sqrt(&model, &f)?;
        worst = worst.max(off_support_mass(&op, &model.space, rho));
    }
    Ok((worst < 1e-6, format!("max off-support mass {worst:.2e}")))
}

fn net_bounds() -> Outcome {
    let mut ok = true;
    let mut overlaps = Vec::new();
    for space in [MetricMeasureSpace::circle(1024)?, MetricMeasureSpace::interval(1024, 0.0, PI)?] {
        for rho in [0.05, 0.2, 0.8] {
            let net = build_net(&space, rho)?;
            let sep = rho / 10.0;
            let separated = net.centers.iter().enumerate().all(|(i, &a)| net.centers[i + 1..].iter().all(|&b| space.distance(a, b) > sep));
            let inside = (0..space.len()).all(|x| space.distance(net.centers[net.cells[x]], x) <= sep);
            // at most 4ρ / (ρ/10) + 1 separated centers fit in a one-dimensional 2ρ-ball
            ok &= separated && inside && net.overlap_k <= 41;
            overlaps.push(net.overlap_k);
        }
    }
    Ok((ok, format!("overlap counts {overlaps:?} (bound 41)")))
}

fn mollifier_decay() -> Outcome {
    let h = MultiplierFn::new("bump-cos", 1.0, true, |x| if x.abs() < 1.0 { bump_profile(x) * (3.0 * x).cos() } else { 0.0 });
    let ns: Vec<usize> = (3..=8).map(|j| 1usize << j).collect();
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for beta in [1.0, 1.5] {
        for q in [2.0, f64::INFINITY] {
            let d: Vec<f64> = ns.iter().map(|&n| mollifier_defect(&h, n, beta, q, &CutoffFamily).map(|m| m.defect)).collect::<Result<_>>()?;
            let slope = loglog_fit(&x, &d).map(|f| f.slope).unwrap_or(f64::NAN);
            ok &= slope <= -beta + 0.1;
            detail.push(format!("beta={beta} q={q}: {slope:.2}"));
        }
    }
    Ok((ok, detail.join("; ")))
}

fn splitting_pieces() -> Outcome {
    let (r, delta, n_even) = (16.0, 0.5, 4);
    let grid: Vec<f64> = (0..4000).map(|i| r * i as f64 / 4000.0).collect();
    let mut ok = true;
    let mut residual = 0.0f64;
    for k in [0, -4, -8, -12] {
        let t = tao_decomposition(r, delta, n_even, k)?;
        ok &= t.measured_support_radius(1e-9) <= t.support_bound() * (1.0 + 1e-6);
        residual = residual.max(t.splitting_residual(&grid));
    }
    Ok((ok && residual < 1e-10, format!("supports within bound: {ok}; residual {residual:.1e}")))
}

fn almost_orthogonality() -> Outcome {
    let model = SpectralModel::circle(256, 64)?;
    let qs: Vec<MultiplierFn> = (0..6u32)
        .map(|k| MultiplierFn::new(format!("eta{k}"), 2f64.powi(k as i32), true, move |l| CutoffFamily.eta_level(k, l)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let fs: Vec<Vec<f64>> = (0..qs.len()).map(|_| (0..model.space.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let o = lemma45_check(&model, &qs, &fs)?;
        worst = worst.max((o.lhs - o.rhs) / o.rhs);
    }
    Ok((worst <= 1e-10, format!("max (lhs - rhs)/rhs = {worst:.2e}")))
}

fn gk_pair() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [1u32, 5, 20] {
        let err = gk_fft_error(k, 1.5)?;
        let g = gk_fn(k)?;
        let kf = k as f64;
        let resid = (0..2000)
            .map(|i| kf - 20.0 + 40.0 * i as f64 / 1999.0)
            .filter(|l| (l - kf).abs() >= 0.5)
            .map(|l| (g.eval(l) - gk_explicit(k, l)).abs())
            .fold(0.0, f64::max);
        let c = gk_lower_constant(k);
        ok &= err < 1e-6 && resid < 1e-10 && c > 0.0;
        detail.push(format!("k={k}: fft {err:.1e}, c={c:.4}"));
    }
    Ok((ok, detail.join("; ")))
}

fn plancherel() -> Outcome {
    let mut worst = 0.0f64;
    for (n, c) in [(3.0, 0.0), (3.0, -0.1)] {
        let (cm, _) = radial_inverse_square(n, c, RadialGrids::default())?;
        worst = worst.max(hankel_plancherel_check(&cm, &plancherel_family(&cm))?);
    }
    Ok((worst < 1e-5, format!("max defect {worst:.2e}")))
}

fn cz_properties() -> Outcome {
    let space = MetricMeasureSpace::circle(1024)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut ok = true;
    let mut worst_rec = 0.0f64;
    let mut c_max = 0.0f64;
    for _ in 0..20 {
        let n = space.len();
        let mut f: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect();
        for _ in 0..8 {
            let c = rng.gen_range(0..n);
            let w = rng.gen_range(1..24);
            let a = rng.gen_range(-20.0..20.0);
            for v in &mut f[c.saturating_sub(w)..(c + w).min(n)] {
                *v += a;
            }
        }
        let alpha = 4.0 * space.lp_norm(&f, 1.0) / space.total_mass();
        let d = cz_decompose(&space, &f, alpha, 1.0)?;
        let chk = d.check(&space, &f);
        ok &= chk.holds(1.0, f64::INFINITY);
        worst_rec = worst_rec.max(chk.reconstruction_error);
        c_max = c_max.max(chk.ball_sum_ratio);
    }
    Ok((ok && worst_rec < 1e-12, format!("properties hold: {ok}; reconstruction {worst_rec:.1e}; max C {c_max:.3}")))
}

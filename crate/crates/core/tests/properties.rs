use proptest::prelude::*;
use specmult_core::calculus::{KernelOp, LinearOperator};
use specmult_core::estimate::{distribution, norm_1_to_q, norm_p_to_inf, norm_p_to_q_bracket, weak_quasinorm};
use specmult_core::mult::{bump, MultiplierFn};
use specmult_core::space::{build_net, cz_decompose, lp_norm, MetricMeasureSpace};

fn kernel(n: usize) -> impl Strategy<Value = LinearOperator> {
    (prop::collection::vec(-1.0f64..1.0, n * n), prop::collection::vec(0.1f64..2.0, n))
        .prop_map(|(k, w)| LinearOperator::dense(k, w, "random").unwrap())
}

fn exponent_pair() -> impl Strategy<Value = (f64, f64)> {
    (1.0f64..4.0, 0.0f64..1.0).prop_map(|(p, t)| {
        let q = if t > 0.9 { f64::INFINITY } else { p + t * 4.0 };
        (p, q)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_lower_never_exceeds_upper(op in kernel(6), (p, q) in exponent_pair()) {
        let b = norm_p_to_q_bracket(&op, p, q).unwrap();
        prop_assert!(b.lower > 0.0);
        prop_assert!(b.lower <= b.upper * (1.0 + 1e-9), "{} > {}", b.lower, b.upper);
    }

    #[test]
    fn one_to_q_is_max_over_point_masses(op in kernel(8), q in prop_oneof![Just(1.0), 1.0f64..6.0, Just(f64::INFINITY)]) {
        let w = op.weights().to_vec();
        let brute = (0..8)
            .map(|y| {
                let mut f = vec![0.0; 8];
                f[y] = 1.0 / w[y];
                lp_norm(&op.apply(&f), &w, q)
            })
            .fold(0.0, f64::max);
        let got = norm_1_to_q(&op, q);
        prop_assert!((got - brute).abs() <= 1e-12 * brute.max(1.0));
    }

    #[test]
    fn p_to_inf_dominates_test_functions(op in kernel(8), p in 1.0f64..5.0, f in prop::collection::vec(-1.0f64..1.0, 8)) {
        let w = op.weights().to_vec();
        let nf = lp_norm(&f, &w, p);
        prop_assume!(nf > 1e-6);
        let tf = op.apply(&f);
        prop_assert!(lp_norm(&tf, &w, f64::INFINITY) <= norm_p_to_inf(&op, p) * nf * (1.0 + 1e-12));
    }

    #[test]
    fn bracket_dominates_test_functions(op in kernel(6), (p, q) in exponent_pair(), f in prop::collection::vec(-1.0f64..1.0, 6)) {
        let w = op.weights().to_vec();
        let nf = lp_norm(&f, &w, p);
        prop_assume!(nf > 1e-6);
        let ratio = lp_norm(&op.apply(&f), &w, q) / nf;
        let b = norm_p_to_q_bracket(&op, p, q).unwrap();
        prop_assert!(ratio <= b.upper * (1.0 + 1e-9));
    }

    #[test]
    fn weak_quasinorm_below_strong_norm(g in prop::collection::vec(-5.0f64..5.0, 1..40), p in 1.0f64..3.0) {
        let w: Vec<f64> = (0..g.len()).map(|i| 0.1 + (i % 5) as f64 * 0.3).collect();
        prop_assert!(weak_quasinorm(&g, &w, p) <= lp_norm(&g, &w, p) * (1.0 + 1e-12));
    }

    #[test]
    fn distribution_is_nonincreasing(g in prop::collection::vec(-5.0f64..5.0, 1..40), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let w = vec![0.5; g.len()];
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(distribution(&g, &w, hi) <= distribution(&g, &w, lo));
    }

    #[test]
    fn cz_reconstructs_and_bounds(seed in prop::collection::vec(-1.0f64..1.0, 256), spikes in prop::collection::vec((0usize..256, 1usize..12, -30.0f64..30.0), 1..6)) {
        let space = MetricMeasureSpace::circle(256).unwrap();
        let mut f = seed;
        for (c, w, a) in spikes {
            for j in c.saturating_sub(w)..(c + w).min(256) {
                f[j] += a;
            }
        }
        let alpha = 4.0 * space.lp_norm(&f, 1.0) / space.total_mass();
        let d = cz_decompose(&space, &f, alpha, 1.0).unwrap();
        let chk = d.check(&space, &f);
        prop_assert!(chk.reconstruction_error < 1e-10);
        prop_assert!(chk.holds(1.0, f64::INFINITY));
    }

    #[test]
    fn nets_cover_and_separate(rho in 0.05f64..1.5) {
        let space = MetricMeasureSpace::circle(512).unwrap();
        let net = build_net(&space, rho).unwrap();
        prop_assert!(net.cells.iter().enumerate().all(|(x, &c)| space.distance(net.centers[c], x) <= rho / 10.0));
        prop_assert!(net.overlap_k <= 41);
    }

    #[test]
    fn scaling_a_multiplier(a in -2.0f64..0.0, len in 0.5f64..3.0, r in 0.2f64..5.0, x in -6.0f64..6.0) {
        let f = bump(a, a + len).unwrap();
        let g: MultiplierFn = f.scale(r);
        prop_assert!((g.eval(x) - f.eval(r * x)).abs() < 1e-14);
    }
}

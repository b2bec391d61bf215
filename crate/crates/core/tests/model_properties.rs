use coulombgas::dynamics::{drift, gaussian_configuration};
use coulombgas::model::*;
use coulombgas::rng::stream;
use proptest::prelude::*;

fn configs(count: usize, seed: u64) -> Vec<Configuration> {
    let mut rng = stream(seed, 0);
    (0..count).map(|k| gaussian_configuration(2 + k % 15, 1e-6, &mut rng).unwrap()).collect()
}

fn arb_config(max_n: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..=max_n)
        .prop_filter_map("coincident points", |xy| Configuration::from_xy(&xy).ok().filter(|c| c.min_gap() > 1e-4))
}

/// Literal `sum_i |v_i|^2 - sum_{i != j} 1/|x_i - x_j|^2` with its scale.
fn literal_interaction_sum(cfg: &Configuration) -> (f64, f64) {
    let v = interaction_vectors(cfg).unwrap();
    let first: f64 = v.iter().map(|vi| vi.norm_sq()).sum();
    let pts = cfg.points();
    let mut second = 0.0;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i != j {
                second += 1.0 / (pts[i] - pts[j]).norm_sq();
            }
        }
    }
    (first - second, first.abs() + second.abs())
}

#[test]
fn drift_matches_scaled_gradient_on_random_configurations() {
    for (k, cfg) in configs(1000, 1).iter().enumerate() {
        let p = ModelParams::new(cfg.len(), 0.5 + k as f64 % 7.0, 3.0).unwrap();
        let b = drift(cfg, &p).unwrap();
        let g = grad_h(cfg).unwrap().scaled(-p.alpha);
        let scale = g.components.iter().map(|c| c.norm()).fold(1.0, f64::max);
        assert!(b.max_abs_diff(&g) <= 1e-12 * scale, "config {k}");
    }
}

#[test]
fn grad_norm_closed_form_on_random_configurations() {
    for cfg in configs(1000, 2) {
        let direct = grad_h(&cfg).unwrap().norm_sq();
        let closed = grad_norm_sq(&cfg).unwrap();
        assert!((direct - closed).abs() <= 1e-10 * direct.max(closed));
    }
}

#[test]
fn interaction_sum_matches_literal_form() {
    for cfg in configs(500, 3) {
        let (lit, scale) = literal_interaction_sum(&cfg);
        let s = interaction_sum(&cfg).unwrap();
        assert!((s - lit).abs() <= 1e-12 * scale, "s={s} lit={lit}");
    }
}

#[test]
fn halving_the_minimal_gap_increases_interaction_energy() {
    let cfg = Configuration::from_xy(&[(0.0, 0.0), (0.4, 0.0), (-1.0, 0.7), (0.3, -1.2)]).unwrap();
    let mut pts = cfg.points().to_vec();
    pts[1].x = 0.2;
    let closer = Configuration::new(pts).unwrap();
    assert!(closer.min_gap() < cfg.min_gap());
    assert!(energy_w(&closer).unwrap() > energy_w(&cfg).unwrap());
}

#[test]
fn generator_of_h_v_is_second_order_in_the_step() {
    // H_V is quadratic, so central differences are exact and only roundoff remains
    let p = ModelParams::ginibre(5).unwrap();
    for cfg in configs(50, 4).iter().filter(|c| c.len() == 5) {
        let hv = |c: &Configuration| Ok(energy_v(c));
        let exact = generator_h_v(cfg, &p).unwrap();
        for h in [1e-3, 1e-4] {
            let fd = apply_generator(&hv, cfg, &p, h).unwrap();
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(4.0 * p.alpha / p.beta));
        }
    }
}

#[test]
fn generator_of_h_w_converges_at_second_order() {
    let p = ModelParams::ginibre(3).unwrap();
    let cfg = Configuration::from_xy(&[(0.0, 0.0), (0.1, 0.02), (-0.5, 0.6)]).unwrap();
    let hw = |c: &Configuration| energy_w(c);
    let exact = generator_h_w(&cfg, &p).unwrap();
    let e1 = (apply_generator(&hw, &cfg, &p, 1e-3).unwrap() - exact).abs();
    let e2 = (apply_generator(&hw, &cfg, &p, 1e-4).unwrap() - exact).abs();
    let order = (e1 / e2).log10();
    assert!(order >= 1.9, "observed order {order} (errors {e1:e}, {e2:e})");
}

#[test]
fn hessian_trace_and_determinant() {
    for cfg in configs(200, 5) {
        for &z in cfg.points() {
            let h = hessian_w(z).unwrap();
            let r4 = z.norm_sq().powi(2);
            let scale = 4.0 / z.norm_sq();
            assert!((h[0][0] + h[1][1]).abs() <= 1e-12 * scale);
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            assert!((det + 4.0 / r4).abs() <= 1e-10 * 4.0 / r4);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inequalities_hold(cfg in arb_config(10)) {
        prop_assert!(interaction_sum(&cfg).unwrap() >= -1e-12);
        prop_assert!(energy(&cfg).unwrap() >= energy_lower_bound(&cfg));
        prop_assert!(energy(&cfg).unwrap() >= 0.0);
        prop_assert!(grad_norm_sq(&cfg).unwrap() >= grad_coercivity_bound(&cfg).unwrap() - 1e-10);
    }

    #[test]
    fn generator_identities(cfg in arb_config(10), alpha in 0.1f64..20.0, beta in 0.1f64..300.0) {
        let p = ModelParams::new(cfg.len(), alpha, beta).unwrap();
        let total = generator_h(&cfg, &p).unwrap();
        let parts = generator_h_v(&cfg, &p).unwrap() + generator_h_w(&cfg, &p).unwrap();
        prop_assert!((total - parts).abs() <= 1e-10 * total.abs().max(parts.abs()).max(1e-300));
        prop_assert!(total <= generator_h_upper_bound(&p) * (1.0 + 1e-12));
        let nf = cfg.len() as f64;
        let theta = nf / p.beta + (nf - 1.0) / (2.0 * nf);
        let rate = 4.0 * p.alpha / nf;
        let lv = generator_h_v(&cfg, &p).unwrap();
        prop_assert!((lv + rate * (energy_v(&cfg) - theta)).abs() <= 1e-10 * lv.abs().max(rate * theta));
    }

    #[test]
    fn interaction_energy_is_translation_and_rotation_invariant(cfg in arb_config(8), dx in -2.0f64..2.0, dy in -2.0f64..2.0, t in 0.0f64..6.3) {
        let (c, s) = (t.cos(), t.sin());
        let moved: Vec<Point2> = cfg.points().iter().map(|p| Point2::new(c * p.x - s * p.y + dx, s * p.x + c * p.y + dy)).collect();
        let moved = Configuration::new(moved).unwrap();
        let (a, b) = (energy_w(&cfg).unwrap(), energy_w(&moved).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(interaction_sum(&moved).unwrap() >= -1e-12);
    }

    #[test]
    fn collinear_interaction_sum_vanishes(ts in prop::collection::vec(-3.0f64..3.0, 2..12), t in 0.0f64..6.3, ox in -1.0f64..1.0) {
        let dir = Point2::new(t.cos(), t.sin());
        let pts: Vec<Point2> = ts.iter().map(|&s| Point2::new(ox, 0.5) + dir * s).collect();
        if let Ok(cfg) = Configuration::new(pts) {
            prop_assume!(cfg.min_gap() > 1e-3);
            prop_assert!(interaction_sum(&cfg).unwrap().abs() <= 1e-9);
        }
    }
}

use logsp::functionals::Evaluator;
use logsp::{discretize, Field, Grid, Params, ProfileSpec};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(128, 24.0).unwrap()
}

fn energy_of(ev: &Evaluator, u: &Field, params: &Params) -> f64 {
    ev.energy(u, params).unwrap().energy
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dilation_scaling_laws(sigma in 0.8f64..1.4, t in 0.7f64..1.5, p in 2.5f64..6.0, c in 0.5f64..2.0) {
        let g = grid();
        let ev = Evaluator::new(&g);
        let u = discretize(&ProfileSpec::gaussian(sigma, c), &g).unwrap();
        let ut = u.dilate(t).unwrap();
        let a_ratio = ev.kinetic(&ut).unwrap() / ev.kinetic(&u).unwrap();
        let c_ratio = ev.pnorm(&ut, p).unwrap() / ev.pnorm(&u, p).unwrap();
        prop_assert!((a_ratio / (t * t) - 1.0).abs() < 2e-3);
        prop_assert!((c_ratio / t.powf(p - 2.0) - 1.0).abs() < 2e-3);
        let dv = ev.v_total(&ut).unwrap() - ev.v_total(&u).unwrap();
        prop_assert!((dv + c * c * t.ln()).abs() < 2e-3);
    }

    #[test]
    fn amplitude_homogeneity(seed in 0u64..1000, s in 0.3f64..3.0, p in 2.1f64..7.0) {
        let g = grid();
        let ev = Evaluator::new(&g);
        let u = discretize(&ProfileSpec::random_smooth(seed, 1.0, 1.0), &g).unwrap();
        let su = u.scale(s).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * (1.0 + y.abs());
        prop_assert!(close(ev.kinetic(&su).unwrap(), s * s * ev.kinetic(&u).unwrap()));
        prop_assert!(close(ev.pnorm(&su, p).unwrap(), s.powf(p) * ev.pnorm(&u, p).unwrap()));
        prop_assert!(close(ev.v_total(&su).unwrap(), s.powi(4) * ev.v_total(&u).unwrap()));
    }

    #[test]
    fn v_splits_into_nonnegative_parts(seed in 0u64..1000, cutoff in 0.5f64..2.0) {
        let g = grid();
        let ev = Evaluator::new(&g);
        let u = discretize(&ProfileSpec::random_smooth(seed, cutoff, 1.3), &g).unwrap();
        let (v, v1, v2) = ev.interaction(&u).unwrap();
        prop_assert!(v1 >= 0.0 && v2 >= 0.0);
        prop_assert!((v - (v1 - v2)).abs() < 1e-10 * (1.0 + v.abs()));
    }

    #[test]
    fn energy_is_translation_invariant(seed in 0u64..1000, di in -6isize..6, dj in -6isize..6) {
        let g = grid();
        let ev = Evaluator::new(&g);
        let params = Params::new(1.0, 1.0, 3.0, 1.0).unwrap();
        let u = discretize(&ProfileSpec::random_smooth(seed, 1.0, 1.0), &g).unwrap();
        let f0 = energy_of(&ev, &u, &params);
        let f1 = energy_of(&ev, &u.roll(di, dj), &params);
        prop_assert!((f0 - f1).abs() < 1e-9 * (1.0 + f0.abs()));
    }

    #[test]
    fn gradient_matches_directional_derivative(seed in 0u64..1000, p in 2.2f64..6.0, gamma in -2.0f64..2.0, a in -2.0f64..2.0) {
        let g = grid();
        let ev = Evaluator::new(&g);
        let params = Params::new(gamma, a, p, 1.0).unwrap();
        let u = discretize(&ProfileSpec::random_smooth(seed, 1.0, 1.0), &g).unwrap();
        let phi = discretize(&ProfileSpec::random_smooth(seed + 1, 1.0, 1.0), &g).unwrap();
        let exact = ev.grad_energy(&u, &params).unwrap().inner(&phi).unwrap();
        let f = |s: f64| {
            let w: Vec<f64> = u.values().iter().zip(phi.values()).map(|(x, d)| x + s * d).collect();
            energy_of(&ev, &Field::new(g, w).unwrap(), &params)
        };
        let h = 1e-3;
        let fd = (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h);
        prop_assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "fd {} exact {}", fd, exact);
    }
}

#[test]
fn far_field_of_log_potential() {
    let g = Grid::new(256, 48.0).unwrap();
    let ev = Evaluator::new(&g);
    let c = 1.7;
    let u = discretize(&ProfileSpec::gaussian(1.0, c), &g).unwrap();
    let w = ev.log_potential(&u).unwrap();
    // For a radial density, w(x) = c log|x| exactly outside the support; the
    // Gaussian tail contributes below 1e-12 beyond r = 10.
    for (i, j) in [(5usize, 128usize), (128, 10), (20, 20), (240, 200)] {
        let (x, y) = (g.coord(i), g.coord(j));
        let r = x.hypot(y);
        if r > 10.0 {
            assert!((w.at(i, j) - c * r.ln()).abs() < 1e-6, "r = {r}: {} vs {}", w.at(i, j), c * r.ln());
        }
    }
}

#[test]
fn lagrange_multiplier_and_residual_vanish_on_exact_critical_points() {
    // With a = 0 and gamma = 0 the energy is A/2, and no nonzero field is critical:
    // the residual of a Gaussian must be far from zero.
    let g = grid();
    let ev = Evaluator::new(&g);
    let u = discretize(&ProfileSpec::gaussian(1.0, 1.0), &g).unwrap();
    let params = Params::new(0.0, 0.0, 3.0, 1.0).unwrap();
    let lambda = ev.lagrange_multiplier(&u, &params).unwrap();
    assert!((lambda + ev.kinetic(&u).unwrap()).abs() < 1e-12);
    assert!(ev.el_residual(&u, &params, lambda).unwrap() > 0.1);
}

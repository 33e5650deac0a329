use logsp::constants;
use logsp::fiber::{project_to_lambda, scalars, FiberScalars};
use logsp::functionals::{pohozaev_q, q_scale};
use logsp::{discretize, Branch, Evaluator, Grid, Params, ProfileSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn defocusing_negative_gamma_has_no_roots(
        gamma in -20.0f64..-1e-3, a in -20.0f64..=0.0, p in 2.05f64..9.0, c in 1e-3f64..20.0,
        big_a in 1e-3f64..1e3, big_c in 1e-3f64..1e3, v in -50.0f64..50.0,
    ) {
        let sc = FiberScalars::new(big_a, big_c, v, Params::new(gamma, a, p, c).unwrap()).unwrap();
        prop_assert!(sc.critical_points().unwrap().is_empty());
        for k in 0..=120 {
            let t = 10f64.powf(-6.0 + 0.1 * k as f64);
            prop_assert!(sc.phi(t).unwrap() > 0.0);
        }
    }

    #[test]
    fn roots_bracket_t_star_with_branch_signs(
        positive in any::<bool>(), p_hi in 4.2f64..8.0, p_lo in 2.2f64..3.8,
        a in 0.1f64..10.0, c in 0.1f64..5.0, big_a in 0.1f64..50.0, big_c in 0.1f64..50.0,
    ) {
        let (gamma, p) = if positive { (1.0, p_hi) } else { (-1.0, p_lo) };
        let sc = FiberScalars::new(big_a, big_c, 0.3, Params::new(gamma, a, p, c).unwrap()).unwrap();
        let pts = sc.critical_points().unwrap();
        let t_star = sc.t_star().unwrap();
        for bp in &pts {
            let terms = bp.s * bp.s * big_a + a * bp.s.powf(p - 2.0) * big_c + sc.scale();
            prop_assert!(sc.phi(bp.s).unwrap().abs() < 1e-9 * terms);
            prop_assert!(bp.gpp.abs() > 1e-10 * big_a);
            prop_assert_eq!(bp.gpp > 0.0, bp.branch == Branch::Plus);
        }
        if pts.len() == 2 {
            prop_assert!(pts[0].s < t_star && t_star < pts[1].s);
        }
        // Two roots exactly when the fiber extremum at t* has the opposite sign of φ near 0.
        let in_v = sc.phi(t_star).unwrap() * gamma > 0.0;
        prop_assert_eq!(pts.len() == 2, in_v);
    }

    #[test]
    fn derivatives_are_consistent(
        gamma in -3.0f64..3.0, a in -3.0f64..3.0, p in 2.1f64..7.0, t in 0.05f64..20.0,
    ) {
        let sc = FiberScalars::new(1.3, 0.7, -0.2, Params::new(gamma, a, p, 1.1).unwrap()).unwrap();
        let h = 1e-5 * t;
        let fd = (sc.g(t + h).unwrap() - sc.g(t - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - sc.dg(t).unwrap()).abs() < 1e-6 * (1.0 + fd.abs()));
        prop_assert!((sc.dg(t).unwrap() * t - sc.phi(t).unwrap()).abs() < 1e-12 * (1.0 + sc.phi(t).unwrap().abs()));
    }

    /// Below c0 every profile satisfies the GN bound, which keeps the roots simple.
    #[test]
    fn no_degenerate_roots_below_c0(theta in 0.01f64..1.0, big_a in 0.1f64..20.0, frac in 0.05f64..0.95) {
        let p = 6.0;
        let kgn = constants::kgn_cached(p).unwrap().kgn;
        let c0 = constants::c0(p, 1.0, 1.0, kgn).unwrap();
        let c = frac * c0;
        let big_c = theta * kgn * big_a.powf(0.5 * p - 1.0) * c;
        let sc = FiberScalars::new(big_a, big_c, 0.0, Params::new(1.0, 1.0, p, c).unwrap()).unwrap();
        for bp in sc.critical_points().unwrap() {
            prop_assert!(bp.gpp.abs() > 1e-10 * big_a);
        }
        prop_assert!(sc.degenerate_point(1e-8).unwrap().is_none());
    }
}

#[test]
fn analytic_fiber_matches_materialized_dilation() {
    let grid = Grid::new(512, 32.0).unwrap();
    let ev = Evaluator::new(&grid);
    let params = Params::new(1.0, 1.0, 6.0, 1.0).unwrap();
    let u = discretize(&ProfileSpec::ring(1.5, 0.8, 1.0), &grid).unwrap();
    let sc = scalars(&ev, &u, &params).unwrap();
    for t in [0.6, 0.9, 1.4, 2.0] {
        let direct = ev.energy(&u.dilate(t).unwrap(), &params).unwrap().energy;
        let analytic = sc.g(t).unwrap();
        assert!(((direct - analytic) / analytic).abs() < 1e-3, "t = {t}: {direct} vs {analytic}");
    }
}

#[test]
fn projection_lands_on_the_pohozaev_set() {
    let grid = Grid::new(256, 24.0).unwrap();
    let ev = Evaluator::new(&grid);
    let params = Params::new(1.0, 1.0, 6.0, 1.0).unwrap();
    let u = discretize(&ProfileSpec::gaussian(1.0, 1.0), &grid).unwrap();
    for branch in [Branch::Plus, Branch::Minus] {
        let proj = project_to_lambda(&ev, &u, &params, branch).unwrap();
        assert_eq!(proj.point.branch, branch);
        let e = ev.energy(&proj.field, &params).unwrap();
        assert!(pohozaev_q(&e, &params).abs() < 1e-3 * q_scale(&e, &params));
        assert!((proj.field.mass() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn p4_is_excluded_from_t_star() {
    let sc = FiberScalars::new(1.0, 1.0, 0.0, Params::new(1.0, 1.0, 4.0, 1.0).unwrap()).unwrap();
    assert!(sc.t_star().is_err());
}

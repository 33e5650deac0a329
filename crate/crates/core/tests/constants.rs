use logsp::constants::{self, SharpConstants};
use logsp::regime::{regime_classify, RegimeTag};
use logsp::{discretize, Evaluator, Grid, Params, ProfileSpec};
use proptest::prelude::*;

fn classify(gamma: f64, a: f64, p: f64, c: f64) -> RegimeTag {
    let sharp = SharpConstants::estimate(p).unwrap();
    regime_classify(&Params::new(gamma, a, p, c).unwrap(), &sharp).unwrap().tag
}

#[test]
fn gn_constants_match_reference_shooting_values() {
    for (p, reference) in [(2.5, 0.602105), (3.0, 0.380981), (4.0, 0.170927), (6.0, 0.0472654)] {
        let est = constants::kgn_estimate(p).unwrap();
        assert!((est.kgn / reference - 1.0).abs() < 1e-5, "p = {p}: {}", est.kgn);
        assert!(est.gaussian < est.kgn);
        assert!(est.gaussian <= est.rayleigh && est.rayleigh <= est.kgn * (1.0 + constants::RAYLEIGH_TOLERANCE));
    }
}

#[test]
fn threshold_examples() {
    let kgn3 = constants::kgn_cached(3.0).unwrap().kgn;
    assert!((constants::k1(3.0, kgn3).unwrap() - 5.568049).abs() < 1e-5);
    assert!((constants::k2(3.0, kgn3).unwrap() - 7.874411).abs() < 1e-5);
    let kgn6 = constants::kgn_cached(6.0).unwrap().kgn;
    assert!((constants::c0(6.0, 1.0, 1.0, kgn6).unwrap() - 3.166).abs() < 1e-3);
    let kgn4 = constants::kgn_cached(4.0).unwrap().kgn;
    assert!((constants::mass_critical_bound(1.0, kgn4).unwrap() - 11.7009).abs() < 1e-3);
}

#[test]
fn classifier_examples() {
    assert_eq!(classify(1.0, 1.0, 3.0, 1.0), RegimeTag::GlobalMin);
    assert_eq!(classify(1.0, -1.0, 5.0, 1.0), RegimeTag::GlobalMin);
    assert_eq!(classify(-1.0, 0.01, 2.5, 1.0), RegimeTag::LambdaEmpty);
    assert_eq!(classify(-1.0, -1.0, 3.0, 1.0), RegimeTag::NoCriticalPoint);
    assert_eq!(classify(-1.0, 1.0, 5.0, 1.0), RegimeTag::OpenUnknown);
    assert_eq!(classify(0.0, 1.0, 3.0, 1.0), RegimeTag::OpenUnknown);

    let kgn4 = constants::kgn_cached(4.0).unwrap().kgn;
    let bound = 2.0 / kgn4;
    assert_eq!(classify(1.0, 1.0, 4.0, bound * (1.0 - 1e-12)), RegimeTag::GlobalMinMassCritical);
    assert_eq!(classify(1.0, 1.0, 4.0, bound), RegimeTag::OpenUnknown);

    let kgn6 = constants::kgn_cached(6.0).unwrap().kgn;
    let c0 = constants::c0(6.0, 1.0, 1.0, kgn6).unwrap();
    assert_eq!(classify(1.0, 1.0, 6.0, 0.5 * c0), RegimeTag::LocalMinPlusMountainPass);
    assert_eq!(classify(1.0, 1.0, 6.0, c0), RegimeTag::OpenUnknown);
}

#[test]
fn threshold_closures_are_exact() {
    let p = 3.0;
    let kgn = constants::kgn_cached(p).unwrap().kgn;
    let t1 = constants::k1(p, kgn).unwrap() * constants::threshold_factor(-2.0, p, 1.0);
    let t2 = constants::k2(p, kgn).unwrap() * constants::threshold_factor(-2.0, p, 1.0);
    assert_eq!(classify(-2.0, t1, p, 1.0), RegimeTag::MaxOnLambda);
    assert_eq!(classify(-2.0, t1.next_down(), p, 1.0), RegimeTag::LambdaEmpty);
    assert_eq!(classify(-2.0, t1.next_up(), p, 1.0), RegimeTag::TwoCriticalPointsOnLambda);
    assert_eq!(classify(-2.0, t2.next_down(), p, 1.0), RegimeTag::TwoCriticalPointsOnLambda);
    assert_eq!(classify(-2.0, t2, p, 1.0), RegimeTag::OpenUnknown);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn band_edges_solve_threshold_equation(p in 2.1f64..3.9, a in 0.1f64..50.0, gamma in -5.0f64..-0.1, kgn in 0.1f64..1.0) {
        prop_assume!((p - 3.0).abs() > 0.1);
        let (c1, c2) = constants::band_edges(p, a, gamma, kgn).unwrap();
        let t1 = constants::k1(p, kgn).unwrap() * constants::threshold_factor(gamma, p, c1);
        let t2 = constants::k2(p, kgn).unwrap() * constants::threshold_factor(gamma, p, c2);
        prop_assert!((t1 / a - 1.0).abs() < 1e-10);
        prop_assert!((t2 / a - 1.0).abs() < 1e-10);
        prop_assert_eq!(c2 < c1, p < 3.0);
    }

    /// The sharp constant bounds every profile.
    #[test]
    fn gn_inequality_holds(seed in 0u64..500, cutoff in 0.5f64..2.0, p in prop::sample::select(vec![2.5, 3.0, 4.0, 6.0])) {
        let grid = Grid::new(128, 24.0).unwrap();
        let ev = Evaluator::new(&grid);
        let u = discretize(&ProfileSpec::random_smooth(seed, cutoff, 1.0), &grid).unwrap();
        let kgn = constants::kgn_cached(p).unwrap().kgn;
        let bound = kgn * ev.kinetic(&u).unwrap().powf(0.5 * p - 1.0) * u.mass();
        prop_assert!(ev.pnorm(&u, p).unwrap() <= bound);
    }
}

#[test]
fn v2_constant_bounds_its_family() {
    let kv2 = constants::kv2_estimate().unwrap();
    let ratios = constants::kv2_ratios(&Grid::new(256, 40.0).unwrap()).unwrap();
    assert_eq!(ratios.len(), constants::kv2_family().len());
    assert!(ratios.iter().all(|&r| r > 0.0 && r <= kv2 * (1.0 + 1e-12)));
}

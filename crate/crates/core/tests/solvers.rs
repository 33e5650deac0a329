use logsp::solvers::*;
use logsp::{discretize, Branch, Grid, Params, ProfileSpec};

fn grid() -> Grid {
    Grid::new(128, 32.0).unwrap()
}

fn config() -> SolverConfig {
    SolverConfig { trace: true, max_iter: 4000, ..SolverConfig::default() }
}

fn ground() -> Params {
    Params::new(1.0, 0.0, 3.0, 1.0).unwrap()
}

#[test]
fn global_minimizer_converges_with_monotone_trace() {
    let r = global_minimize(&ground(), &grid(), &config(), &ProfileSpec::gaussian(1.0, 1.0)).unwrap();
    assert!(r.converged);
    assert!((r.field.mass() - 1.0).abs() < 1e-10);
    assert!(r.q_residual < 1e-3 && r.el_residual < 1e-3);
    for w in r.trace.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12, "energy rose at iter {}", w[1].iter);
    }
    if let Some(lb) = r.lower_bound {
        assert!(r.breakdown.energy >= lb);
    }
}

#[test]
fn solves_are_deterministic_per_seed() {
    let cfg = SolverConfig { perturbation: 0.2, seed: 7, ..config() };
    let init = ProfileSpec::gaussian(1.2, 1.0);
    let a = global_minimize(&ground(), &grid(), &cfg, &init).unwrap();
    let b = global_minimize(&ground(), &grid(), &cfg, &init).unwrap();
    assert_eq!(a.field.values(), b.field.values());
    assert_eq!(a.iters, b.iters);

    let other = SolverConfig { seed: 8, ..cfg };
    let c = global_minimize(&ground(), &grid(), &other, &init).unwrap();
    assert!((a.breakdown.energy - c.breakdown.energy).abs() < 1e-5);
}

#[test]
fn translated_start_reaches_translated_minimizer() {
    let g = grid();
    let params = ground();
    let u0 = discretize(&ProfileSpec::gaussian(1.0, 1.0), &g).unwrap();
    let a = solve_field(Method::GlobalMinimize, &params, &config(), &u0).unwrap();
    let b = solve_field(Method::GlobalMinimize, &params, &config(), &u0.roll(5, -3)).unwrap();
    assert!((a.breakdown.energy - b.breakdown.energy).abs() < 1e-8);
    let (dist, shift) = a.field.aligned_distance(&b.field).unwrap();
    assert!(dist < 1e-4 * a.field.mass().sqrt(), "distance {dist} at shift {shift:?}");
}

#[test]
fn methods_refuse_foreign_regimes() {
    let g = grid();
    let init = ProfileSpec::gaussian(1.0, 1.0);
    let err = lambda_maximize(&ground(), &g, &config(), &init, Branch::Minus).unwrap_err();
    assert!(matches!(err, SolveError::Regime { .. }), "{err}");

    let kgn = logsp::constants::kgn_cached(6.0).unwrap().kgn;
    let c0 = logsp::constants::c0(6.0, 1.0, 1.0, kgn).unwrap();
    let bistable = Params::new(1.0, 1.0, 6.0, 0.5 * c0).unwrap();
    let err = global_minimize(&bistable, &g, &config(), &init).unwrap_err();
    assert!(matches!(err, SolveError::Regime { .. }), "{err}");
    assert!(err.report().is_none());
}

#[test]
fn invalid_config_is_rejected_before_solving() {
    let cfg = SolverConfig { backtrack: 1.5, ..config() };
    let err = global_minimize(&ground(), &grid(), &cfg, &ProfileSpec::gaussian(1.0, 1.0)).unwrap_err();
    assert!(matches!(err, SolveError::Core(_)));
}

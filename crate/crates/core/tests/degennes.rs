use edge_spectra::degennes::{solve, DeGennes, HalfLineGrid, RobinParameter, Shape};
use proptest::prelude::*;

mod common;

use common::{shoot_ground, shoot_theta};

#[test]
fn neumann_minimum_matches_shooting() {
    let (xi_ref, theta_ref) = shoot_theta(0.0);
    assert!((theta_ref - 0.590_106_125).abs() < 1e-8, "oracle drifted: {theta_ref}");
    let ext = DeGennes::default().find_minimum(0.0, 1).unwrap();
    assert!((ext.theta - theta_ref).abs() < 1e-8, "{} vs {theta_ref}", ext.theta);
    assert!((ext.xi - xi_ref).abs() < 1e-5);
    assert!((ext.xi - theta_ref.sqrt()).abs() < 1e-6);
}

#[test]
fn robin_eigenvalue_matches_shooting() {
    let model = DeGennes::default();
    for (gamma, sigma, lo, hi) in [(-1.0, 0.5, -3.0, 2.0), (0.7, 1.2, -3.0, 2.5), (2.0, -0.5, 1.0, 4.5)] {
        let reference = shoot_ground(gamma, sigma, lo, hi);
        let mu = model.mu(RobinParameter::Robin(gamma), sigma, 1).unwrap();
        assert!((mu - reference).abs() < 1e-8, "gamma {gamma}: {mu} vs {reference}");
    }
}

#[test]
fn raw_scheme_is_second_order() {
    let gamma = RobinParameter::Robin(0.5);
    let mu = |n: usize| solve(gamma, 0.7, 1, &HalfLineGrid::new(20.0, n).unwrap()).unwrap()[0].mu;
    let (a, b, c) = (mu(1000), mu(2000), mu(4000));
    let order = ((a - b) / (b - c)).log2();
    assert!((1.8..=2.2).contains(&order), "order {order}");
}

#[test]
fn harmonic_levels_at_sigma_zero() {
    let model = DeGennes::default();
    let neumann = model.mus(RobinParameter::Robin(0.0), 0.0, 3).unwrap();
    let dirichlet = model.mus(RobinParameter::Dirichlet, 0.0, 3).unwrap();
    for (j, (n, d)) in neumann.iter().zip(&dirichlet).enumerate() {
        assert!((n - (4 * j + 1) as f64).abs() < 1e-8);
        assert!((d - (4 * j + 3) as f64).abs() < 1e-8);
    }
}

#[test]
fn curvature_coefficient_closed_form_at_minimum() {
    let model = DeGennes::default();
    for gamma in [-0.5, 0.0, 1.0] {
        let ext = model.find_minimum(gamma, 1).unwrap();
        assert!((ext.c - ext.c_closed_form()).abs() < 1e-6, "{ext:?}");
    }
}

#[test]
fn second_band_window_has_three_components() {
    let model = DeGennes::default();
    let ext = model.find_minimum(0.0, 2).unwrap();
    let a = ext.theta + 0.05;
    let w = model
        .window_decomposition(RobinParameter::Robin(0.0), a, 2.9)
        .unwrap();
    assert_eq!(w.n, 2);
    assert_eq!(w.curve_count, 2);
    assert_eq!(w.components.len(), 3);
    for c in &w.components {
        let g = RobinParameter::Robin(0.0);
        for s in [c.lo, c.hi] {
            let mu = model.mu(g, s, c.k).unwrap();
            assert!(mu > a - 1e-9 && mu < 2.9 + 1e-9);
        }
    }
}

#[test]
fn window_below_minimum_contains_it() {
    let model = DeGennes::default();
    let w = model
        .window_decomposition(RobinParameter::Robin(0.0), f64::NEG_INFINITY, 0.9)
        .unwrap();
    assert_eq!(w.components.len(), 1);
    assert_eq!(w.components[0].shape, Shape::ContainsMinimum);
    let xi = w.extrema[0].xi;
    assert!(w.components[0].contains(xi));

    let d = model
        .window_decomposition(RobinParameter::Dirichlet, 1.5, 2.5)
        .unwrap();
    assert_eq!(d.components.len(), 1);
    assert_eq!(d.components[0].shape, Shape::Decreasing);
    assert!(d.window_is_empty_for(2));
}

#[test]
fn window_on_threshold_is_rejected() {
    let model = DeGennes::default();
    let theta = model.find_minimum(0.0, 1).unwrap().theta;
    assert!(model
        .window_decomposition(RobinParameter::Robin(0.0), theta, 0.9)
        .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ground_state_increases_with_gamma(g1 in -2.0f64..2.0, dg in 0.05f64..1.0, sigma in -1.0f64..3.0) {
        let grid = HalfLineGrid::new(20.0, 2000).unwrap();
        let lo = solve(RobinParameter::Robin(g1), sigma, 2, &grid).unwrap();
        let hi = solve(RobinParameter::Robin(g1 + dg), sigma, 2, &grid).unwrap();
        let dir = solve(RobinParameter::Dirichlet, sigma, 2, &grid).unwrap();
        for j in 0..2 {
            prop_assert!(lo[j].mu < hi[j].mu);
            prop_assert!(hi[j].mu < dir[j].mu);
        }
        prop_assert!(lo[0].mu < lo[1].mu);
    }

    #[test]
    fn eigenfunctions_are_orthonormal(g in -2.0f64..2.0, sigma in -1.0f64..3.0) {
        let grid = HalfLineGrid::new(20.0, 2000).unwrap();
        let pairs = solve(RobinParameter::Robin(g), sigma, 3, &grid).unwrap();
        for p in &pairs {
            for q in &pairs {
                let ip: f64 = (0..p.u.len()).map(|i| {
                    let w = if i == 0 || i + 1 == p.u.len() { 0.5 } else { 1.0 };
                    w * grid.spacing() * p.u[i] * q.u[i]
                }).sum();
                let target = if p.n == q.n { 1.0 } else { 0.0 };
                prop_assert!((ip - target).abs() < 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn minimum_identity(gamma in -1.5f64..2.5) {
        let ext = DeGennes::default().find_minimum(gamma, 1).unwrap();
        prop_assert!(ext.identity_residual < 1e-6);
        prop_assert!(ext.xi > 0.0);
        prop_assert!(ext.theta < 1.0);
    }
}

use std::sync::OnceLock;

use edge_spectra::degennes::{DeGennes, RobinParameter};
use edge_spectra::effective::*;
use edge_spectra::geometry::DomainGeometry;
use edge_spectra::numerics::dense_sym_eigenvalues;
use num_complex::Complex64;

const NEUMANN: RobinParameter = RobinParameter::Robin(0.0);

fn disk() -> DomainGeometry {
    DomainGeometry::disk(1.0).unwrap()
}

fn ellipse() -> DomainGeometry {
    DomainGeometry::ellipse(2.0, 1.0, 1024).unwrap()
}

fn disk_model() -> &'static BoundaryModel {
    static M: OnceLock<BoundaryModel> = OnceLock::new();
    M.get_or_init(|| BoundaryModel::new(DeGennes::default(), NEUMANN, 0.7, 0.9, 0.8).unwrap())
}

fn ellipse_model() -> &'static BoundaryModel {
    static M: OnceLock<BoundaryModel> = OnceLock::new();
    M.get_or_init(|| {
        let cfg = SemiclassicalConfig::new(0.09, NEUMANN, 0.7, 0.9, ellipse()).unwrap();
        BoundaryModel::for_config(&cfg).unwrap()
    })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn flux_shift_relabels_levels() {
    let g = disk();
    let cfg = SemiclassicalConfig::new(0.03, NEUMANN, 0.7, 0.9, g.clone()).unwrap();
    let theta = cfg.flux_grid_params().theta;
    let shifted = cfg.with_theta(theta + std::f64::consts::PI / g.half_length);
    let a = leading_spectrum(disk_model(), &cfg).unwrap();
    let b = leading_spectrum(disk_model(), &shifted).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.entries.iter().zip(&b.entries) {
        assert_eq!(y.ell, x.ell - 1);
        assert!((x.lambda - y.lambda).abs() <= 1e-15 * x.lambda.abs());
    }
}

#[test]
fn rotating_the_arclength_origin() {
    let g = ellipse();
    let r = g.shifted(0.37 * g.perimeter());
    let cfg = SemiclassicalConfig::new(0.09, NEUMANN, 0.7, 0.9, g).unwrap();
    let rot = SemiclassicalConfig { geometry: r, ..cfg.clone() };
    let m = ellipse_model();
    assert_eq!(leading_spectrum(m, &cfg).unwrap(), leading_spectrum(m, &rot).unwrap());
    let x = pdo_spectrum(m, &cfg, 1).unwrap().values;
    let y = pdo_spectrum(m, &rot, 1).unwrap().values;
    assert_eq!(x.len(), y.len());
    for (p, q) in x.iter().zip(&y) {
        assert!((p - q).abs() < 1e-10, "{p} vs {q}");
    }
}

#[test]
fn midpoint_rule_matches_symmetrized_products() {
    // g(s) with a few complex Fourier modes, grid σ_i = 0.3 i − 1
    let n = 9;
    let sigmas: Vec<f64> = (0..n).map(|i| 0.3 * i as f64 - 1.0).collect();
    let g_hat = |j: i64| match j {
        0 => Complex64::new(0.7, 0.0),
        1 => Complex64::new(0.2, -0.1),
        -1 => Complex64::new(0.2, 0.1),
        3 => Complex64::new(-0.05, 0.3),
        -3 => Complex64::new(-0.05, -0.3),
        _ => Complex64::new(0.0, 0.0),
    };
    let gm = |i: usize, j: usize| g_hat(i as i64 - j as i64);
    let p = |i: usize| sigmas[i];
    // (G P² + 2 P G P + P² G)/4 and (G P³ + 3 P G P² + 3 P² G P + P³ G)/8
    let cases: [(fn(f64) -> f64, Box<dyn Fn(usize, usize) -> Complex64>); 2] = [
        (
            |s| s * s,
            Box::new(move |i, j| gm(i, j) * (p(j) * p(j) + 2.0 * p(i) * p(j) + p(i) * p(i)) / 4.0),
        ),
        (
            |s| s * s * s,
            Box::new(move |i, j| {
                gm(i, j)
                    * (p(j).powi(3) + 3.0 * p(i) * p(j).powi(2) + 3.0 * p(i).powi(2) * p(j) + p(i).powi(3))
                    / 8.0
            }),
        ),
    ];
    for (c, explicit) in cases {
        let (re, im) = weyl_matrix(&sigmas, -1.0, |_| 0.0, c, g_hat);
        for i in 0..n {
            for j in 0..n {
                let want = explicit(i, j);
                assert!((re[i * n + j] - want.re).abs() < 1e-14);
                assert!((im[i * n + j] - want.im).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn disk_matrix_is_diagonal() {
    let m = disk_model();
    for h in [0.08, 0.04, 0.02] {
        let cfg = SemiclassicalConfig::new(h, NEUMANN, 0.7, 0.9, disk()).unwrap();
        let spec = pdo_spectrum(m, &cfg, 1).unwrap();
        let lead = grid_levels(m, &cfg, &m.decomposition_for(0.7, 0.9).unwrap()).unwrap();
        let pm = pdo_matrix(m, &cfg, 1, &spec.ells).unwrap();
        assert!(!pm.complex);
        for (i, ell) in spec.ells.iter().enumerate() {
            if let Some(e) = lead.iter().find(|e| e.ell == *ell && e.k == 1) {
                assert!((pm.matrix.get(i, i) * h - e.lambda).abs() < 1e-13);
            }
        }
        let inside: Vec<f64> = spec.in_window(0.7, 0.9).iter().map(|v| v * h).collect();
        let lead = leading_spectrum(m, &cfg).unwrap().lambdas();
        assert_eq!(inside.len(), lead.len());
        for (x, y) in sorted(inside).iter().zip(&lead) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}

#[test]
fn bohr_sommerfeld_equals_grid_levels() {
    let m = ellipse_model();
    let cfg = SemiclassicalConfig::new(0.05, NEUMANN, 0.7, 0.9, ellipse()).unwrap();
    let lead = grid_levels(m, &cfg, &m.decomposition_for(0.7, 0.9).unwrap()).unwrap();
    for q in [1, 2] {
        let bs = bohr_sommerfeld(m, &cfg, 1, q).unwrap();
        assert!(!bs.levels.is_empty());
        for lv in &bs.levels {
            let e = lead.iter().find(|e| e.ell == lv.ell && e.k == 1).unwrap();
            assert!((lv.energy * cfg.h - e.lambda).abs() < 1e-14);
        }
    }
}

#[test]
fn action_correction_on_the_disk() {
    let m = disk_model();
    let g = disk();
    for s in [0.0, 0.4, 1.3] {
        let (_, c) = m.mu_c(1, s).unwrap();
        let k = m.action_correction(1, s, g.total_curvature()).unwrap();
        let dmu = m.dmu(1, s).unwrap();
        assert!((k * dmu - 2.0 * std::f64::consts::PI * c).abs() < 1e-10);
    }
}

#[test]
fn ellipse_matrix_symmetric() {
    let m = ellipse_model();
    let cfg = SemiclassicalConfig::new(0.05, NEUMANN, 0.7, 0.9, ellipse()).unwrap();
    let spec = pdo_spectrum(m, &cfg, 1).unwrap();
    let pm = pdo_matrix(m, &cfg, 1, &spec.ells).unwrap();
    assert!(pm.symmetry_residual() <= 1e-12);
    let direct = dense_sym_eigenvalues(&pm.matrix).unwrap();
    assert!(spec.edge_mass <= 1e-8);
    let expected = if pm.complex { direct.len() / 2 } else { direct.len() };
    assert_eq!(spec.values.len(), expected);
}

/// Each preimage component rounds its own grid count, so the leading count
/// sits within one per component of the Weyl count.
#[test]
fn leading_count_near_weyl() {
    for (m, g) in [(disk_model(), disk()), (ellipse_model(), ellipse())] {
        let comps = m.decomposition_for(0.7, 0.9).unwrap().components.len() as i64;
        for h in [0.08, 0.04, 0.02] {
            let cfg = SemiclassicalConfig::new(h, NEUMANN, 0.7, 0.9, g.clone()).unwrap();
            let n = leading_spectrum(m, &cfg).unwrap().len() as i64;
            let w = weyl_count(m, &cfg).unwrap();
            assert!((n - w.count).abs() <= comps, "h={h}: {n} vs {}", w.count);
        }
    }
}

#[test]
fn dirichlet_window_below_first_level_is_empty() {
    let dg = DeGennes::default();
    let m = BoundaryModel::new(dg, RobinParameter::Dirichlet, 0.5, 0.9, 0.5).unwrap();
    let cfg = SemiclassicalConfig::new(0.02, RobinParameter::Dirichlet, 0.5, 0.9, disk()).unwrap();
    assert!(leading_spectrum(&m, &cfg).unwrap().is_empty());
    assert_eq!(weyl_count(&m, &cfg).unwrap().count, 0);
}

#[test]
fn invalid_configs_rejected() {
    assert!(SemiclassicalConfig::new(0.0, NEUMANN, 0.7, 0.9, disk()).is_err());
    assert!(SemiclassicalConfig::new(0.5, NEUMANN, 0.7, 0.9, disk()).is_err());
    assert!(SemiclassicalConfig::new(0.05, NEUMANN, 0.9, 0.7, disk()).is_err());
}

use edge_spectra::degennes::{DeGennes, RobinParameter};
use edge_spectra::diskmode::*;

const NEUMANN: RobinParameter = RobinParameter::Robin(0.0);

#[test]
fn interior_states_sit_on_the_first_landau_level() {
    let h = 0.002;
    let disk = Disk::new(1.0, h, RobinParameter::Dirichlet);
    for m in 0..4 {
        let p = disk.problem(m).unwrap();
        let r = radial_eigs(&p, 0.0, 1.5 * h, true).unwrap();
        assert_eq!(r.values.len(), 1, "m = {m}");
        assert!((r.values[0] / h - 1.0).abs() < 1e-5);
        let loc = localization_profile(&p, &r.functions[0]);
        assert!(loc.fraction_within(10.0 * h.sqrt()) <= 0.5);
    }
}

#[test]
fn lowest_level_of_the_m0_sector_is_regular() {
    // f = e^{−r²/(4h)} solves the m = 0 problem with eigenvalue h up to an
    // exponentially small boundary correction.
    let h = 0.01;
    let p = Disk::new(1.0, h, RobinParameter::Dirichlet).problem(0).unwrap();
    let r = radial_eigs(&p, 0.0, 1.5 * h, true).unwrap();
    let f = &r.functions[0];
    let scale = f[0];
    for i in [0, 500, 2000, 4000] {
        let x = p.node(i);
        let want = (-x * x / (4.0 * h)).exp();
        assert!((f[i] / scale - want).abs() < 1e-4, "r = {x}");
    }
}

#[test]
fn window_states_are_edge_states() {
    let h = 0.05;
    let dg = DeGennes::default();
    let disk = Disk::new(1.0, h, NEUMANN);
    let spec = window_spectrum(&dg, &disk, 0.7, 0.9, 0.0).unwrap();
    assert!(spec.count() > 0);
    for e in spec.in_window() {
        let p = disk.problem(e.m).unwrap();
        let r = radial_eigs(&p, e.lambda.next_down(), e.lambda.next_up(), true).unwrap();
        let loc = localization_profile(&p, &r.functions[0]);
        assert!(loc.fraction_within(10.0 * h.sqrt()) >= 0.99);
        assert!(loc.fraction_within(3.0 * h.sqrt()) >= 0.9);
        assert!(loc.rate > 0.0);
    }
}

#[test]
fn mesh_doubling_moves_window_eigenvalues_little() {
    let h = 0.02;
    let disk = Disk::new(1.0, h, NEUMANN);
    for m in [14, 16, 23] {
        let d = refinement_check(&disk.problem(m).unwrap(), 0.7 * h, 0.9 * h).unwrap();
        assert!(d <= 1e-5 * h, "m = {m}: {d}");
    }
}

#[test]
fn sectors_ascend_and_are_nonnegative() {
    let h = 0.02;
    for g in [0.0, 0.5] {
        let p = Disk::new(1.0, h, RobinParameter::Robin(g)).problem(15).unwrap();
        let r = radial_eigs(&p, f64::NEG_INFINITY, 3.0 * h, false).unwrap();
        assert!(r.values[0] >= 0.0);
        assert!(r.values.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(r.indices[0], 1);
    }
}

#[test]
fn robin_parameter_changes_the_window_spectrum() {
    let dg = DeGennes::default();
    let a = window_spectrum(&dg, &Disk::new(1.0, 0.04, RobinParameter::Robin(0.0)), 0.7, 0.9, 0.0).unwrap();
    let b = window_spectrum(&dg, &Disk::new(1.0, 0.04, RobinParameter::Robin(0.5)), 0.7, 0.9, 0.0).unwrap();
    assert_ne!(a.lambdas(), b.lambdas());
}

#[test]
fn dirichlet_below_first_level_is_empty() {
    let dg = DeGennes::default();
    let s = window_spectrum(&dg, &Disk::new(1.0, 0.02, RobinParameter::Dirichlet), 0.5, 0.9, 0.0).unwrap();
    assert_eq!(s.count(), 0);
}

#[test]
fn sector_labels_follow_the_flux_grid() {
    // λ/h stays within O(ħ) of μ₁(σ(m)), and neighbouring sectors are one
    // grid step apart with σ decreasing in m
    let h = 0.02;
    let dg = DeGennes::default();
    let disk = Disk::new(1.0, h, NEUMANN);
    let spec = window_spectrum(&dg, &disk, 0.7, 0.9, 0.0).unwrap();
    let step = h.sqrt();
    for e in spec.in_window() {
        let p = disk.problem(e.m).unwrap();
        let mu = e.lambda / h;
        let at = dg.mu(NEUMANN, p.sigma(), 1).unwrap();
        assert!((at - mu).abs() < 0.1, "m = {}: {at} vs {mu}", e.m);
        let next = disk.problem(e.m + 1).unwrap();
        assert!((p.sigma() - next.sigma() - step).abs() < 1e-12);
    }
}

//! Best success over the family grid: flat at 1/4 for partial
//! entanglement, jumping at the Bell and product endpoints.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

use lodisc_core::{maximize_success, sweep_families, BellLikeFamily, DEFAULT_EPSILON};

const RESTARTS: usize = 64;

#[test]
fn partial_entanglement_is_flat() {
    let grid: Vec<(f64, f64)> = [0.1, 0.3, 0.5, 0.7]
        .iter()
        .map(|&t2| (FRAC_PI_6, t2))
        .collect();
    let points = sweep_families(&grid, RESTARTS, 7).unwrap();
    assert_eq!(points.len(), grid.len());
    for p in &points {
        assert!(
            (p.best_success - 0.25).abs() <= 1e-4,
            "theta2 = {}: {}",
            p.theta2,
            p.best_success
        );
    }
}

#[test]
fn endpoints_jump() {
    let points = sweep_families(&[(FRAC_PI_4, FRAC_PI_4), (0.0, 0.0)], RESTARTS, 7).unwrap();
    assert!((points[0].best_success - 0.5).abs() <= 1e-4);
    assert!((points[1].best_success - 1.0).abs() <= 1e-9);
}

#[test]
fn no_counterexample_above_quarter() {
    // C2 = sin 2θ2 spans [0.1, 0.9].
    for c2 in [0.1, 0.5, 0.9] {
        let family = BellLikeFamily::from_angles(FRAC_PI_6, 0.5 * f64::asin(c2)).unwrap();
        let r = maximize_success(&family, RESTARTS, 11, DEFAULT_EPSILON).unwrap();
        assert!(
            r.best_success <= 0.25 + 1e-4,
            "c2 = {c2}: {}",
            r.best_success
        );
        assert!(
            r.best_success >= 0.25 - 1e-4,
            "c2 = {c2}: {}",
            r.best_success
        );
    }
}

#[test]
fn empty_grid_is_rejected() {
    assert!(sweep_families(&[], 4, 0).is_err());
}

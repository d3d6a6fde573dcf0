//! Lattice-point counts in the predicted regions against the classifier on
//! fine quadric patches.

use equiflock::classify::{classify_patch, DEFAULT_TOL};
use equiflock::discretize::discretize_surface_window;
use equiflock::geometry::{FundamentalForms, QuadricPatch, Rect};
use equiflock::indices::{flock_identity, imaginary_indices_from_forms, predicted_regions};
use equiflock::{EquilibriumKind, Vec2, Vec3};

fn compare(forms: [f64; 6], rho: f64, lambda: f64, offsets: usize) -> usize {
    let [e, f, g, l, m, n] = forms;
    let q = QuadricPatch { e, f, g, l, m, n, rho, domain: Rect::new(-0.5, 0.5, -0.5 * lambda, 0.5 * lambda) };
    let ff = FundamentalForms::from_values(e, f, g, l, m, n);
    let set = predicted_regions(&ff, rho, lambda).unwrap();
    let sign = flock_identity(&imaginary_indices_from_forms(&ff, rho).unwrap()).unwrap() as i64;
    let mut compared = 0;
    for k in 1..=offsets {
        let off = ((k as f64 * 0.754_877_666_2).fract(), (k as f64 * 0.569_840_291).fract());
        let p = discretize_surface_window(&q, 2000, off, Vec3::zeros(), [0.0, 0.0], 14.0).unwrap();
        let eqs = classify_patch(&p, Vec3::zeros(), DEFAULT_TOL).unwrap();
        let count = |kind| eqs.of_kind(kind).count();
        // near the apex all quads share one diagonal
        assert!(p.diagonals.iter().all(|&d| d == p.diagonals[0]));
        assert_eq!(p.diagonals[0], set.preferred);
        let offset = Vec2::new(p.grid[0][0].rem_euclid(1.0), p.grid[0][1].rem_euclid(1.0));
        let predicted = set.preferred_family().predicted_counts(offset);
        if predicted.boundary_hits > 0 || !eqs.near_degenerate.is_empty() {
            continue;
        }
        let actual = (count(EquilibriumKind::Unstable), count(EquilibriumKind::Saddle), count(EquilibriumKind::Stable));
        assert_eq!(actual, (predicted.unstable, predicted.saddle, predicted.stable), "offset {off:?}");
        assert_eq!(actual.0 as i64 + actual.2 as i64 - actual.1 as i64, sign);
        compared += 1;
    }
    compared
}

#[test]
fn saddle_flock_with_positive_twist() {
    assert!(compare([1.1, 0.2, 0.9, -1.3, 0.25, -0.7], 1.4, 0.9, 12) >= 10);
}

#[test]
fn unstable_flock_with_negative_twist() {
    assert!(compare([1.0, -0.1, 1.2, -2.5, -0.4, -3.0], 1.0, 1.1, 12) >= 10);
}

#[test]
fn stable_flock() {
    assert!(compare([1.0, 0.0, 1.0, -0.3, 0.1, -0.45], 1.2, 1.0, 12) >= 10);
}

//! Imaginary equilibrium indices, explicit error bounds and the predicted
//! shape of each flock.
//!
//! For a generic equilibrium at distance `rho` with principal curvatures
//! `k1, k2` (non-positive on a convex surface, normal pointing away from the
//! reference point) put `d = 1/|(ρκ1 + 1)(ρκ2 + 1)|`. A fine equidistant
//! discretization then has on average
//!
//! - `S* = d` stable points,
//! - `U* = κ1 κ2 ρ² d` unstable points,
//! - `N* = -(κ1 + κ2) ρ d` saddles
//!
//! near the equilibrium, and `S* + U* - N*` is `+1` for stable and unstable
//! points and `-1` for saddles. Plane curves have `U* = |ρκ|/|ρκ + 1|` and
//! `S* = 1/|ρκ + 1|`.

mod bounds;
mod polygon;
mod regions;

pub use bounds::{error_bounds, mesh_ratio_condition, ErrorBounds};
pub use polygon::{Affine2, ConvexPolygon, HalfPlane, LatticeCount};
pub use regions::{predicted_regions, predicted_regions_for, Family, FamilyRegions, PredictedCounts, Region, RegionSet};

use serde::{Deserialize, Serialize};

use crate::geometry::{classify_smooth, classify_smooth_2d, FundamentalForms, SmoothType, DEGENERACY_TOL};
use crate::{Error, Result};

/// Imaginary indices of a surface equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryIndices {
    pub s_star: f64,
    pub u_star: f64,
    pub n_star: f64,
    pub d: f64,
    pub kind: SmoothType,
    /// `S* + U* - N*`.
    pub identity: f64,
}

/// Imaginary indices of a plane-curve equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryIndices2d {
    pub u_star: f64,
    pub s_star: f64,
    pub kind: SmoothType,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("distance {rho} must be positive")))
    }
}

pub fn imaginary_indices_3d(rho: f64, k1: f64, k2: f64) -> Result<ImaginaryIndices> {
    check_rho(rho)?;
    if !(k1.is_finite() && k2.is_finite()) {
        return Err(Error::NonFinite("principal curvature".into()));
    }
    let kind = classify_smooth(rho, k1, k2, DEGENERACY_TOL);
    if kind == SmoothType::Degenerate {
        return Err(Error::Degenerate(format!("rho*kappa = -1 (rho = {rho}, kappas = {k1}, {k2})")));
    }
    let d = 1.0 / ((rho * k1 + 1.0) * (rho * k2 + 1.0)).abs();
    let s_star = d;
    let u_star = k1 * k2 * rho * rho * d;
    let n_star = -(k1 + k2) * rho * d;
    Ok(ImaginaryIndices { s_star, u_star, n_star, d, kind, identity: s_star + u_star - n_star })
}

/// Indices from fundamental forms oriented as in [`FundamentalForms`].
pub fn imaginary_indices_from_forms(f: &FundamentalForms, rho: f64) -> Result<ImaginaryIndices> {
    let (k1, k2) = f.principal_curvatures()?;
    imaginary_indices_3d(rho, k1, k2)
}

pub fn imaginary_indices_2d(rho: f64, kappa: f64) -> Result<ImaginaryIndices2d> {
    check_rho(rho)?;
    let kind = classify_smooth_2d(rho, kappa, DEGENERACY_TOL);
    if kind == SmoothType::Degenerate {
        return Err(Error::Degenerate(format!("rho*kappa = -1 (rho = {rho}, kappa = {kappa})")));
    }
    let den = (rho * kappa + 1.0).abs();
    Ok(ImaginaryIndices2d { u_star: (rho * kappa).abs() / den, s_star: 1.0 / den, kind })
}

/// `S* + U* - N*` rounded: `-1` for a saddle, `+1` otherwise.
pub fn flock_identity(idx: &ImaginaryIndices) -> Result<i32> {
    let value = flock_identity_within(idx.s_star, idx.u_star, idx.n_star, 1e-9)?;
    let expected = if idx.kind == SmoothType::Saddle { -1 } else { 1 };
    if value != expected {
        return Err(Error::Inconsistent(format!("index sum {value} does not match a {} point", idx.kind)));
    }
    Ok(value)
}

/// `S + U - N` of (possibly rounded) index values, required to be within
/// `tol` of `±1`.
pub fn flock_identity_within(s: f64, u: f64, n: f64, tol: f64) -> Result<i32> {
    let sum = s + u - n;
    let r = sum.round();
    if (sum - r).abs() > tol || r.abs() != 1.0 {
        return Err(Error::Inconsistent(format!("index sum {sum} is not within {tol} of +-1")));
    }
    Ok(r as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hand_evaluated_indices() {
        let a = imaginary_indices_3d(1.0, -2.0, -3.0).unwrap();
        assert_relative_eq!(a.s_star, 0.5, epsilon = 1e-15);
        assert_relative_eq!(a.u_star, 3.0, epsilon = 1e-15);
        assert_relative_eq!(a.n_star, 2.5, epsilon = 1e-15);
        assert_eq!(flock_identity(&a).unwrap(), 1);
        assert_eq!(a.kind, SmoothType::Unstable);

        let b = imaginary_indices_3d(2.0, -0.25, -1.0).unwrap();
        assert_relative_eq!(b.s_star, 2.0, epsilon = 1e-15);
        assert_relative_eq!(b.u_star, 2.0, epsilon = 1e-15);
        assert_relative_eq!(b.n_star, 5.0, epsilon = 1e-15);
        assert_eq!(flock_identity(&b).unwrap(), -1);
    }

    #[test]
    fn ellipsoid_saddle_indices() {
        // saddle of the (1.25, 1.15, 1) ellipsoid on its middle axis
        let idx = imaginary_indices_3d(1.15, -1.15 / 1.5625, -1.15).unwrap();
        assert!((idx.d - 20.19).abs() < 0.01);
        assert!((idx.u_star - 22.59).abs() < 0.01);
        assert!((idx.n_star - 43.78).abs() < 0.01);
        assert_eq!(idx.kind, SmoothType::Saddle);
        assert_eq!(flock_identity(&idx).unwrap(), -1);
    }

    #[test]
    fn plane_indices() {
        let a = imaginary_indices_2d(2.0, -2.0).unwrap();
        assert_relative_eq!(a.u_star, 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(a.s_star, 1.0 / 3.0, epsilon = 1e-15);
        let b = imaginary_indices_2d(1.0, 0.0).unwrap();
        assert_eq!((b.u_star, b.s_star), (0.0, 1.0));
        let c = imaginary_indices_2d(1.0, -3.0).unwrap();
        assert_relative_eq!(c.u_star / c.s_star, 3.0, epsilon = 1e-15);
        assert!(imaginary_indices_2d(1.0, -1.0).is_err());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(imaginary_indices_3d(1.0, -1.0, -2.0), Err(Error::Degenerate(_))));
        assert!(imaginary_indices_3d(0.0, -1.0, -2.0).is_err());
        assert!(imaginary_indices_3d(1.0, f64::NAN, -2.0).is_err());
    }

    #[test]
    fn measured_pebble_rows() {
        assert_eq!(flock_identity_within(4.84, 0.60, 4.44, 0.01).unwrap(), 1);
        assert_eq!(flock_identity_within(0.72, 1.03, 2.75, 0.01).unwrap(), -1);
        assert_eq!(flock_identity_within(2.88, 9.55, 11.43, 0.01).unwrap(), 1);
        assert!(flock_identity_within(2.88, 9.55, 11.0, 0.01).is_err());
    }

    #[test]
    fn absolute_value_form_agrees_on_convex_inputs() {
        for (rho, k1, k2) in [(1.0, -2.0, -3.0), (2.0, -0.25, -1.0), (0.7, -0.1, -0.2)] {
            let idx = imaginary_indices_3d(rho, k1, k2).unwrap();
            let den = ((rho * k1 + 1.0) * (rho * k2 + 1.0)).abs();
            assert_relative_eq!(idx.u_star, (rho * rho * k1 * k2).abs() / den, epsilon = 1e-14);
            assert_relative_eq!(idx.n_star, (rho * (k1 + k2)).abs() / den, epsilon = 1e-14);
        }
    }

    #[test]
    fn degenerate_limits() {
        // rho = 1, kappa1 -> -inf and kappa2 -> -1, both iterated orders
        let idx = |k1: f64, k2: f64| imaginary_indices_3d(1.0, k1, k2).unwrap();
        let k1s = [-10.0, -100.0, -1e3, -1e4, -1e5];
        let k2s = [-0.9, -0.99, -0.999, -0.9999, -0.99999];

        // kappa2 -> -1 first: every index grows without bound at fixed kappa1
        for &k1 in &k1s {
            let series: Vec<ImaginaryIndices> = k2s.iter().map(|&k2| idx(k1, k2)).collect();
            for w in series.windows(2) {
                assert!(w[1].u_star > w[0].u_star && w[1].n_star > w[0].n_star && w[1].s_star > w[0].s_star);
            }
            let last = series.last().unwrap();
            assert!(last.u_star > 1e5 && last.n_star > 1e5 && last.s_star > 1e5 / k1.abs());
        }
        // ... and S stays large as kappa1 decreases once kappa2 is close enough
        let outer: Vec<f64> = k1s.iter().map(|&k1| idx(k1, -1.0 + 1e-7).s_star).collect();
        assert!(outer.iter().all(|&s| s > 50.0));

        // kappa1 -> -inf first: U -> |k2|/|k2+1|, N -> 1/|k2+1|, S -> 0
        let inner: Vec<ImaginaryIndices> = k2s.iter().map(|&k2| idx(-1e12, k2)).collect();
        for (w, &k2) in inner.iter().zip(&k2s) {
            assert_relative_eq!(w.u_star, k2.abs() / (k2 + 1.0).abs(), max_relative = 1e-6);
            assert_relative_eq!(w.n_star, 1.0 / (k2 + 1.0).abs(), max_relative = 1e-6);
            assert!(w.s_star < 1e-6);
        }
        for w in inner.windows(2) {
            assert!(w[1].u_star > w[0].u_star && w[1].n_star > w[0].n_star);
        }

        // prolate regime: kappa1 -> -1, kappa2 -> 0 makes S and N large
        let p = idx(-1.0 - 1e-6, -1e-9);
        assert!(p.s_star > 1e5 && p.n_star > 1e5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn identity_is_plus_or_minus_one(rho in 0.05..5.0f64, k1 in -20.0..2.0f64, k2 in -20.0..2.0f64) {
            prop_assume!((rho * k1 + 1.0).abs() > 1e-3 && (rho * k2 + 1.0).abs() > 1e-3);
            let idx = imaginary_indices_3d(rho, k1, k2).unwrap();
            let expected = if idx.kind == SmoothType::Saddle { -1.0 } else { 1.0 };
            prop_assert!((idx.identity - expected).abs() <= 1e-9 * (1.0 + idx.u_star.abs() + idx.n_star.abs() + idx.s_star));
        }

        #[test]
        fn scale_invariance(rho in 0.05..5.0f64, k1 in -20.0..0.0f64, k2 in -20.0..0.0f64, c in 0.01..100.0f64) {
            prop_assume!((rho * k1 + 1.0).abs() > 1e-3 && (rho * k2 + 1.0).abs() > 1e-3);
            let a = imaginary_indices_3d(rho, k1, k2).unwrap();
            let b = imaginary_indices_3d(c * rho, k1 / c, k2 / c).unwrap();
            for (x, y) in [(a.s_star, b.s_star), (a.u_star, b.u_star), (a.n_star, b.n_star)] {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }

        #[test]
        fn symmetric_in_curvatures(rho in 0.05..5.0f64, k1 in -20.0..0.0f64, k2 in -20.0..0.0f64) {
            prop_assume!((rho * k1 + 1.0).abs() > 1e-3 && (rho * k2 + 1.0).abs() > 1e-3);
            let a = imaginary_indices_3d(rho, k1, k2).unwrap();
            let b = imaginary_indices_3d(rho, k2, k1).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

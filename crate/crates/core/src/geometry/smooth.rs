//! Equilibrium points of smooth curves and surfaces: critical points of the
//! distance from the reference point, located by Newton iteration and typed
//! by the signs of `ρκ_i + 1`.

use log::debug;
use serde::{Deserialize, Serialize};

use super::forms::{fundamental_forms, FundamentalForms};
use super::jet::{curve_jet, jet};
use super::surface::{ParametricCurve, ParametricSurface};
use crate::{EquilibriumKind, Error, Result, Vec2, Vec3};

/// Relative tolerance for `|ρκ + 1|`; scaled by `max(1, ρ|κ|)`.
pub const DEGENERACY_TOL: f64 = 1e-8;

const MAX_NEWTON_STEPS: usize = 60;
const RESIDUAL_TOL: f64 = 1e-10;
/// `|det J| / det I` below which a root is reported as degenerate. Looser
/// than [`DEGENERACY_TOL`] because finite-difference jets are only good to
/// about `1e-6`.
const SINGULAR_JACOBIAN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothType {
    Stable,
    Saddle,
    Unstable,
    Degenerate,
}

impl SmoothType {
    pub fn kind(self) -> Option<EquilibriumKind> {
        match self {
            SmoothType::Stable => Some(EquilibriumKind::Stable),
            SmoothType::Saddle => Some(EquilibriumKind::Saddle),
            SmoothType::Unstable => Some(EquilibriumKind::Unstable),
            SmoothType::Degenerate => None,
        }
    }
}

impl std::fmt::Display for SmoothType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind() {
            Some(k) => k.fmt(f),
            None => write!(f, "degenerate"),
        }
    }
}

/// Whether `|ρκ + 1|` is below `tol * max(1, ρ|κ|)`.
pub fn is_degenerate(rho: f64, kappa: f64, tol: f64) -> bool {
    (rho * kappa + 1.0).abs() < tol * (rho * kappa.abs()).max(1.0)
}

/// Types a surface equilibrium by how many of `ρκ1 + 1`, `ρκ2 + 1` are
/// positive: two for stable, one for saddle, none for unstable.
pub fn classify_smooth(rho: f64, k1: f64, k2: f64, tol: f64) -> SmoothType {
    if is_degenerate(rho, k1, tol) || is_degenerate(rho, k2, tol) {
        return SmoothType::Degenerate;
    }
    let positive = [k1, k2].iter().filter(|&&k| rho * k + 1.0 > 0.0).count();
    match positive {
        2 => SmoothType::Stable,
        1 => SmoothType::Saddle,
        _ => SmoothType::Unstable,
    }
}

/// Plane-curve analogue: stable when `ρκ + 1 > 0`, unstable when negative.
pub fn classify_smooth_2d(rho: f64, kappa: f64, tol: f64) -> SmoothType {
    if is_degenerate(rho, kappa, tol) {
        SmoothType::Degenerate
    } else if rho * kappa + 1.0 > 0.0 {
        SmoothType::Stable
    } else {
        SmoothType::Unstable
    }
}

/// Equilibrium of a smooth surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothEquilibrium {
    pub params: [f64; 2],
    /// Index of the chart in the surface's atlas the parameters refer to.
    pub chart: Option<usize>,
    pub position: Vec3,
    pub rho: f64,
    /// Principal curvatures, `κ1 <= κ2`.
    pub kappas: (f64, f64),
    pub kind: SmoothType,
    pub degenerate: bool,
    pub forms: FundamentalForms,
    pub residual: f64,
}

/// Equilibrium of a smooth plane curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEquilibrium {
    pub t: f64,
    pub position: Vec2,
    pub rho: f64,
    pub kappa: f64,
    pub kind: SmoothType,
    pub degenerate: bool,
    pub residual: f64,
}

struct Root {
    u: f64,
    v: f64,
    residual: f64,
    singular: bool,
}

fn gradient<S: ParametricSurface + ?Sized>(s: &S, origin: Vec3, u: f64, v: f64) -> Result<(Vec2, [[f64; 2]; 2], f64, f64)> {
    let j = jet(s, u, v)?;
    let m = j.position - origin;
    let f = Vec2::new(m.dot(&j.ru), m.dot(&j.rv));
    let a = j.ru.dot(&j.ru) + m.dot(&j.ruu);
    let b = j.ru.dot(&j.rv) + m.dot(&j.ruv);
    let c = j.rv.dot(&j.rv) + m.dot(&j.rvv);
    let scale = RESIDUAL_TOL * m.norm() * 0.5 * (j.ru.norm() + j.rv.norm());
    let metric = j.ru.cross(&j.rv).norm_squared();
    Ok((f, [[a, b], [b, c]], scale, metric))
}

fn newton<S: ParametricSurface + ?Sized>(s: &S, origin: Vec3, mut u: f64, mut v: f64) -> Option<Root> {
    let dom = s.domain();
    for _ in 0..MAX_NEWTON_STEPS {
        let (f, jac, tol, metric) = gradient(s, origin, u, v).ok()?;
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        // det J = det I * (1 + ρκ1)(1 + ρκ2) at a root
        let ratio = det.abs() / metric;
        if f.norm() < tol {
            return Some(Root { u, v, residual: f.norm(), singular: ratio <= SINGULAR_JACOBIAN });
        }
        if ratio <= 1e-14 {
            return None;
        }
        let du = (jac[1][1] * f.x - jac[0][1] * f.y) / det;
        let dv = (-jac[1][0] * f.x + jac[0][0] * f.y) / det;
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let (nu, nv) = (u - step * du, v - step * dv);
            if dom.contains(nu, nv) {
                if let Ok((nf, ..)) = gradient(s, origin, nu, nv) {
                    if nf.norm() < f.norm() {
                        u = nu;
                        v = nv;
                        moved = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !moved {
            return None;
        }
    }
    None
}

fn type_root<S: ParametricSurface + ?Sized>(s: &S, origin: Vec3, root: &Root, chart: Option<usize>) -> Result<SmoothEquilibrium> {
    let j = jet(s, root.u, root.v)?;
    let forms = fundamental_forms(&j, origin)?;
    let (k1, k2) = forms.principal_curvatures()?;
    let rho = (j.position - origin).norm();
    let kind = classify_smooth(rho, k1, k2, DEGENERACY_TOL);
    Ok(SmoothEquilibrium {
        params: [root.u, root.v],
        chart,
        position: j.position,
        rho,
        kappas: (k1, k2),
        kind,
        degenerate: root.singular || kind == SmoothType::Degenerate,
        forms,
        residual: root.residual,
    })
}

fn search_chart<S: ParametricSurface + ?Sized>(s: &S, origin: Vec3, seeds: usize, chart: Option<usize>) -> Vec<SmoothEquilibrium> {
    let dom = s.domain();
    let dedup = 1e-6 * dom.diagonal();
    let mut roots: Vec<Root> = Vec::new();
    for a in 0..seeds {
        for b in 0..seeds {
            let u = dom.u1 + (a as f64 + 0.5) * dom.width() / seeds as f64;
            let v = dom.v1 + (b as f64 + 0.5) * dom.height() / seeds as f64;
            match newton(s, origin, u, v) {
                Some(r) => {
                    if !roots.iter().any(|q| (q.u - r.u).hypot(q.v - r.v) < dedup) {
                        roots.push(r);
                    }
                }
                None => debug!("newton from seed ({u:.4}, {v:.4}) did not converge"),
            }
        }
    }
    roots.sort_by(|p, q| p.u.total_cmp(&q.u).then(p.v.total_cmp(&q.v)));
    roots
        .iter()
        .filter_map(|r| match type_root(s, origin, r, chart) {
            Ok(eq) => Some(eq),
            Err(e) => {
                debug!("discarding root at ({}, {}): {e}", r.u, r.v);
                None
            }
        })
        .collect()
}

/// Finds the equilibria of `surface` relative to `origin` by Newton iteration
/// on `(⟨r - o, r_u⟩, ⟨r - o, r_v⟩)` from a `grid_seeds x grid_seeds` grid of
/// starting points. Surfaces that provide an atlas are searched chart by
/// chart and the roots merged in space.
pub fn find_smooth_equilibria<S: ParametricSurface + ?Sized>(surface: &S, origin: Vec3, grid_seeds: usize) -> Result<Vec<SmoothEquilibrium>> {
    if grid_seeds < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 seeds per dimension, got {grid_seeds}")));
    }
    let Some(charts) = surface.atlas() else {
        return Ok(search_chart(surface, origin, grid_seeds, None));
    };
    let mut found: Vec<(f64, SmoothEquilibrium)> = Vec::new();
    for (idx, chart) in charts.iter().enumerate() {
        let dom = chart.domain();
        for eq in search_chart(chart.as_ref(), origin, grid_seeds, Some(idx)) {
            let margin = dom.interior_margin(eq.params[0], eq.params[1]) / dom.width().min(dom.height());
            let tol = 1e-6 * eq.rho;
            match found.iter_mut().find(|(_, q)| (q.position - eq.position).norm() < tol) {
                Some(slot) => {
                    if margin > slot.0 {
                        *slot = (margin, eq);
                    }
                }
                None => found.push((margin, eq)),
            }
        }
    }
    Ok(found.into_iter().map(|(_, eq)| eq).collect())
}

/// Signed curvature of a curve traversed counterclockwise around the
/// reference point: `-(ẋÿ - ẍẏ)/|ṙ|³`, so convex curves have `κ <= 0` and a
/// circle of radius `R` has `κ = -1/R`.
pub fn signed_curvature<C: ParametricCurve + ?Sized>(curve: &C, t: f64) -> Result<f64> {
    let j = curve_jet(curve, t)?;
    let speed = j.d1.norm();
    if !(speed > 0.0) {
        return Err(Error::Degenerate(format!("singular parametrization at t = {t}")));
    }
    Ok(-(j.d1.x * j.d2.y - j.d2.x * j.d1.y) / speed.powi(3))
}

/// Signed curvature with the traversal direction read off from `origin`:
/// the result is `<= 0` wherever the curve is convex towards `origin`,
/// whichever way it is parametrized.
pub fn signed_curvature_about<C: ParametricCurve + ?Sized>(curve: &C, t: f64, origin: Vec2) -> Result<f64> {
    let j = curve_jet(curve, t)?;
    let m = j.position - origin;
    let turn = m.x * j.d1.y - m.y * j.d1.x;
    if turn == 0.0 {
        return Err(Error::Degenerate(format!("tangent at t = {t} passes through the reference point")));
    }
    Ok(signed_curvature(curve, t)? * turn.signum())
}

fn wrap(t: f64, t1: f64, t2: f64) -> f64 {
    let len = t2 - t1;
    t1 + (t - t1).rem_euclid(len)
}

/// Equilibria of a plane curve relative to `origin`, from `seeds` evenly
/// spaced starting parameters.
pub fn find_curve_equilibria<C: ParametricCurve + ?Sized>(curve: &C, origin: Vec2, seeds: usize) -> Result<Vec<CurveEquilibrium>> {
    if seeds < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 seeds, got {seeds}")));
    }
    let (t1, t2) = curve.interval();
    let len = t2 - t1;
    let closed = curve.is_closed();
    let dedup = 1e-6 * len;
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for s in 0..seeds {
        let mut t = t1 + (s as f64 + 0.5) * len / seeds as f64;
        let mut converged = None;
        for _ in 0..MAX_NEWTON_STEPS {
            let Ok(j) = curve_jet(curve, t) else { break };
            let m = j.position - origin;
            let f = m.dot(&j.d1);
            let tol = RESIDUAL_TOL * m.norm() * j.d1.norm();
            if f.abs() < tol {
                converged = Some((t, f.abs()));
                break;
            }
            let df = j.d1.norm_squared() + m.dot(&j.d2);
            if df.abs() <= 1e-14 * j.d1.norm_squared() {
                break;
            }
            let mut next = t - f / df;
            if (next - t).abs() > 0.25 * len {
                next = t - (0.25 * len).copysign(f / df);
            }
            t = if closed { wrap(next, t1, t2) } else { next };
            if !closed && (t < t1 || t > t2) {
                break;
            }
        }
        match converged {
            Some((t, res)) => {
                let dist = |a: f64, b: f64| {
                    let d = (a - b).abs();
                    if closed {
                        d.min(len - d)
                    } else {
                        d
                    }
                };
                if !roots.iter().any(|&(q, _)| dist(q, t) < dedup) {
                    roots.push((t, res));
                }
            }
            None => debug!("curve newton from seed {s} did not converge"),
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(roots.len());
    for (t, residual) in roots {
        let p = curve.eval(t);
        let rho = (p - origin).norm();
        let kappa = signed_curvature_about(curve, t, origin)?;
        let kind = classify_smooth_2d(rho, kappa, DEGENERACY_TOL);
        out.push(CurveEquilibrium { t, position: p, rho, kappa, kind, degenerate: kind == SmoothType::Degenerate, residual });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::surface::{Ellipse, Ellipsoid, QuadricPatch};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    struct Segment;
    impl ParametricCurve for Segment {
        fn interval(&self) -> (f64, f64) {
            (-1.0, 1.0)
        }
        fn eval(&self, t: f64) -> Vec2 {
            Vec2::new(t, 1.0)
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_smooth(1.0, -0.5, -0.25, DEGENERACY_TOL), SmoothType::Stable);
        assert_eq!(classify_smooth(2.0, -0.25, -1.0, DEGENERACY_TOL), SmoothType::Saddle);
        assert_eq!(classify_smooth(1.0, -2.0, -3.0, DEGENERACY_TOL), SmoothType::Unstable);
        assert_eq!(classify_smooth(1.0, -1.0, -3.0, DEGENERACY_TOL), SmoothType::Degenerate);
        assert_eq!(classify_smooth_2d(2.0, -2.0, DEGENERACY_TOL), SmoothType::Unstable);
        assert_eq!(classify_smooth_2d(1.0, 0.0, DEGENERACY_TOL), SmoothType::Stable);
    }

    #[test]
    fn ellipsoid_has_six_typed_equilibria() {
        let e = Ellipsoid::new(1.25, 1.15, 1.0);
        let eqs = find_smooth_equilibria(&e, Vec3::zeros(), 8).unwrap();
        assert_eq!(eqs.len(), 6, "{eqs:#?}");
        for eq in &eqs {
            assert!(!eq.degenerate);
            let p = eq.position.abs();
            let (axis, expected) = if p.x > 1.0 {
                (1.25, SmoothType::Unstable)
            } else if p.y > 1.0 {
                (1.15, SmoothType::Saddle)
            } else {
                (1.0, SmoothType::Stable)
            };
            assert_relative_eq!(eq.rho, axis, max_relative = 1e-9);
            assert_eq!(eq.kind, expected);
        }
    }

    #[test]
    fn saddle_curvatures_on_ellipsoid() {
        let e = Ellipsoid::new(1.25, 1.15, 1.0);
        let eqs = find_smooth_equilibria(&e, Vec3::zeros(), 6).unwrap();
        let s = eqs.iter().find(|q| q.kind == SmoothType::Saddle).unwrap();
        assert_relative_eq!(s.kappas.0, -1.15, max_relative = 1e-6);
        assert_relative_eq!(s.kappas.1, -1.15 / 1.5625, max_relative = 1e-6);
    }

    #[test]
    fn sphere_roots_are_degenerate() {
        let e = Ellipsoid::new(1.0, 1.0, 1.0);
        let eqs = find_smooth_equilibria(&e, Vec3::zeros(), 4).unwrap();
        assert!(!eqs.is_empty());
        assert!(eqs.iter().all(|q| q.degenerate));
    }

    #[test]
    fn quadric_patch_apex() {
        let q = QuadricPatch::graph(-1.0, 0.3, -0.8, 2.0);
        let eqs = find_smooth_equilibria(&q, Vec3::zeros(), 5).unwrap();
        assert_eq!(eqs.len(), 1);
        assert!(eqs[0].params[0].abs() < 1e-9 && eqs[0].params[1].abs() < 1e-9);
        assert_relative_eq!(eqs[0].rho, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn too_few_seeds() {
        let q = QuadricPatch::graph(-1.0, 0.0, -1.0, 2.0);
        assert!(find_smooth_equilibria(&q, Vec3::zeros(), 3).is_err());
    }

    #[test]
    fn ellipse_has_four_equilibria() {
        let e = Ellipse::new(2.0, 1.0);
        let eqs = find_curve_equilibria(&e, Vec2::zeros(), 16).unwrap();
        assert_eq!(eqs.len(), 4);
        let unstable = eqs.iter().filter(|q| q.kind == SmoothType::Unstable).count();
        assert_eq!(unstable, 2);
        for q in &eqs {
            let expected = if q.kind == SmoothType::Unstable { 2.0 } else { 1.0 };
            assert_relative_eq!(q.rho, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn curvature_examples() {
        for r in [0.5, 2.0] {
            let c = Ellipse::circle(r);
            for t in [0.0, 1.0, 4.0] {
                assert_relative_eq!(signed_curvature(&c, t).unwrap(), -1.0 / r, max_relative = 1e-12);
            }
        }
        assert_eq!(signed_curvature(&Segment, 0.3).unwrap(), 0.0);
        let e = Ellipse::new(2.0, 1.0);
        assert_relative_eq!(signed_curvature(&e, 0.0).unwrap().abs(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn curvature_about_origin_ignores_direction() {
        struct Clockwise(Ellipse);
        impl ParametricCurve for Clockwise {
            fn interval(&self) -> (f64, f64) {
                self.0.interval()
            }
            fn eval(&self, t: f64) -> Vec2 {
                self.0.eval(-t)
            }
            fn is_closed(&self) -> bool {
                true
            }
        }
        let e = Ellipse::new(2.0, 1.0);
        let cw = Clockwise(e);
        let a = signed_curvature_about(&e, 0.7, Vec2::zeros()).unwrap();
        let b = signed_curvature_about(&cw, -0.7, Vec2::zeros()).unwrap();
        assert!(a < 0.0);
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }

    #[test]
    fn horizontal_tangent_frame() {
        // at a horizontal tangent the signed curvature reduces to ÿ/ẋ²
        struct Parabola;
        impl ParametricCurve for Parabola {
            fn interval(&self) -> (f64, f64) {
                (-1.0, 1.0)
            }
            fn eval(&self, t: f64) -> Vec2 {
                Vec2::new(-2.0 * t, 1.0 - 0.75 * t * t)
            }
        }
        let k = signed_curvature_about(&Parabola, 0.0, Vec2::zeros()).unwrap();
        assert_relative_eq!(k, -1.5 / 4.0, max_relative = 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn classification_symmetric(rho in 0.1..5.0f64, k1 in -10.0..0.0f64, k2 in -10.0..0.0f64) {
            prop_assert_eq!(classify_smooth(rho, k1, k2, DEGENERACY_TOL), classify_smooth(rho, k2, k1, DEGENERACY_TOL));
        }

        #[test]
        fn triaxial_ellipsoids_have_six_roots(a in 1.05..2.0f64, b in 0.55..0.95f64) {
            // axes a > 1 > b, distinct
            let e = Ellipsoid::new(a, 1.0, b);
            let eqs = find_smooth_equilibria(&e, Vec3::zeros(), 5).unwrap();
            prop_assert_eq!(eqs.len(), 6);
            let count = |k| eqs.iter().filter(|q| q.kind == k).count();
            prop_assert_eq!(count(SmoothType::Stable), 2);
            prop_assert_eq!(count(SmoothType::Saddle), 2);
            prop_assert_eq!(count(SmoothType::Unstable), 2);
        }
    }
}

//! Derivative jets of parametric surfaces and curves.
//!
//! Analytic jets are used when the surface provides them. Otherwise the
//! derivatives are estimated by central differences with step
//! `h = 1e-4 * side`, refined once by Richardson extrapolation. The change
//! between steps `h` and `h/2` must stay below `1e-5` relative; if it does not,
//! steps `4h` and `h/4` are tried before giving up.

use serde::{Deserialize, Serialize};

use super::surface::{ParametricCurve, ParametricSurface};
use crate::{Error, Result, Vec2, Vec3};

const REL_STEP: f64 = 1e-4;
const MAX_STEP_CHANGE: f64 = 1e-5;

/// Position with first and second partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub position: Vec3,
    pub ru: Vec3,
    pub rv: Vec3,
    pub ruu: Vec3,
    pub ruv: Vec3,
    pub rvv: Vec3,
}

impl Jet2 {
    fn entries(&self) -> [Vec3; 5] {
        [self.ru, self.rv, self.ruu, self.ruv, self.rvv]
    }

    fn combine(a: &Jet2, b: &Jet2, wa: f64, wb: f64) -> Jet2 {
        Jet2 {
            position: a.position,
            ru: a.ru * wa + b.ru * wb,
            rv: a.rv * wa + b.rv * wb,
            ruu: a.ruu * wa + b.ruu * wb,
            ruv: a.ruv * wa + b.ruv * wb,
            rvv: a.rvv * wa + b.rvv * wb,
        }
    }
}

/// Position with first three derivatives of a plane curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveJet {
    pub position: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
    pub d3: Vec2,
}

/// Evaluates the second-order jet of `surface` at `(u, v)`.
pub fn jet<S: ParametricSurface + ?Sized>(surface: &S, u: f64, v: f64) -> Result<Jet2> {
    let dom = surface.domain();
    if !u.is_finite() || !v.is_finite() || !dom.contains(u, v) {
        return Err(Error::OutOfDomain { u, v });
    }
    if let Some(j) = surface.analytic_jet(u, v) {
        return check_finite(j);
    }
    numeric_jet(surface, u, v)
}

/// Finite-difference jet, ignoring any analytic derivatives the surface has.
pub fn numeric_jet<S: ParametricSurface + ?Sized>(surface: &S, u: f64, v: f64) -> Result<Jet2> {
    let dom = surface.domain();
    let h0 = REL_STEP * dom.width().max(dom.height());
    let mut best: Option<(f64, Jet2)> = None;
    for factor in [1.0, 4.0, 0.25] {
        let h = h0 * factor;
        // Both stencils reach `h` away from (u, v); keep two steps of margin.
        if dom.interior_margin(u, v) < 2.0 * h {
            continue;
        }
        let coarse = central(surface, u, v, h);
        let fine = central(surface, u, v, 0.5 * h);
        let change = relative_change(&coarse, &fine, dom.width().max(dom.height()));
        let refined = check_finite(Jet2::combine(&fine, &coarse, 4.0 / 3.0, -1.0 / 3.0))?;
        if change < MAX_STEP_CHANGE {
            return Ok(refined);
        }
        if best.as_ref().map_or(true, |(c, _)| change < *c) {
            best = Some((change, refined));
        }
    }
    match best {
        Some((change, _)) => Err(Error::UnstableJet { change }),
        None => Err(Error::OutOfDomain { u, v }),
    }
}

fn central<S: ParametricSurface + ?Sized>(s: &S, u: f64, v: f64, h: f64) -> Jet2 {
    let c = s.eval(u, v);
    let up = s.eval(u + h, v);
    let um = s.eval(u - h, v);
    let vp = s.eval(u, v + h);
    let vm = s.eval(u, v - h);
    let pp = s.eval(u + h, v + h);
    let pm = s.eval(u + h, v - h);
    let mp = s.eval(u - h, v + h);
    let mm = s.eval(u - h, v - h);
    let h2 = h * h;
    Jet2 {
        position: c,
        ru: (up - um) / (2.0 * h),
        rv: (vp - vm) / (2.0 * h),
        ruu: (up - c * 2.0 + um) / h2,
        ruv: (pp - pm - mp + mm) / (4.0 * h2),
        rvv: (vp - c * 2.0 + vm) / h2,
    }
}

fn relative_change(a: &Jet2, b: &Jet2, side: f64) -> f64 {
    let first_scale = a.ru.norm().max(a.rv.norm()).max(f64::MIN_POSITIVE);
    let second_scale = a.ruu.norm().max(a.ruv.norm()).max(a.rvv.norm()).max(first_scale / side);
    let ea = a.entries();
    let eb = b.entries();
    (0..5)
        .map(|k| {
            let scale = if k < 2 { first_scale } else { second_scale };
            (ea[k] - eb[k]).norm() / scale
        })
        .fold(0.0, f64::max)
}

fn check_finite(j: Jet2) -> Result<Jet2> {
    let ok = std::iter::once(j.position).chain(j.entries()).all(|x| x.iter().all(|c| c.is_finite()));
    if ok {
        Ok(j)
    } else {
        Err(Error::NonFinite("surface jet".into()))
    }
}

/// Evaluates the third-order jet of a curve at `t`.
pub fn curve_jet<C: ParametricCurve + ?Sized>(curve: &C, t: f64) -> Result<CurveJet> {
    if !t.is_finite() {
        return Err(Error::NonFinite("curve parameter".into()));
    }
    let (t1, t2) = curve.interval();
    let closed = curve.is_closed();
    if !closed && (t < t1 || t > t2) {
        return Err(Error::OutOfDomain { u: t, v: 0.0 });
    }
    let j = match curve.analytic_jet(t) {
        Some(j) => j,
        None => {
            let len = t2 - t1;
            let h = REL_STEP * len * 10.0;
            if !closed && (t - t1).min(t2 - t) < 4.0 * h {
                return Err(Error::OutOfDomain { u: t, v: 0.0 });
            }
            let coarse = curve_central(curve, t, h);
            let fine = curve_central(curve, t, 0.5 * h);
            let w = |a: Vec2, b: Vec2| b * (4.0 / 3.0) - a / 3.0;
            CurveJet { position: fine.position, d1: w(coarse.d1, fine.d1), d2: w(coarse.d2, fine.d2), d3: w(coarse.d3, fine.d3) }
        }
    };
    let ok = [j.position, j.d1, j.d2, j.d3].iter().all(|x| x.iter().all(|c| c.is_finite()));
    if ok {
        Ok(j)
    } else {
        Err(Error::NonFinite("curve jet".into()))
    }
}

fn curve_central<C: ParametricCurve + ?Sized>(c: &C, t: f64, h: f64) -> CurveJet {
    let p0 = c.eval(t);
    let p1 = c.eval(t + h);
    let m1 = c.eval(t - h);
    let p2 = c.eval(t + 2.0 * h);
    let m2 = c.eval(t - 2.0 * h);
    CurveJet {
        position: p0,
        d1: (p1 - m1) / (2.0 * h),
        d2: (p1 - p0 * 2.0 + m1) / (h * h),
        d3: (p2 - p1 * 2.0 + m1 * 2.0 - m2) / (2.0 * h * h * h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::surface::{Ellipsoid, QuadricPatch, Rect};

    struct Plane;
    impl ParametricSurface for Plane {
        fn domain(&self) -> Rect {
            Rect::new(-1.0, 1.0, -1.0, 1.0)
        }
        fn eval(&self, u: f64, v: f64) -> Vec3 {
            Vec3::new(u, v, 1.0)
        }
    }

    /// Hides the analytic jet of the wrapped surface.
    struct Opaque<S>(S);
    impl<S: ParametricSurface> ParametricSurface for Opaque<S> {
        fn domain(&self) -> Rect {
            self.0.domain()
        }
        fn eval(&self, u: f64, v: f64) -> Vec3 {
            self.0.eval(u, v)
        }
    }

    #[test]
    fn plane_has_zero_second_derivatives() {
        let j = jet(&Plane, 0.1, -0.2).unwrap();
        for d in [j.ruu, j.ruv, j.rvv] {
            assert!(d.norm() < 1e-8, "{d:?}");
        }
        assert!((j.ru - Vec3::x()).norm() < 1e-10);
    }

    #[test]
    fn unit_sphere_jet_at_origin() {
        let s = Ellipsoid::new(1.0, 1.0, 1.0);
        let j = jet(&s, 0.0, 0.0).unwrap();
        assert!((j.ru - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((j.rv - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        assert!((j.ruu - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn numeric_matches_analytic_on_ellipsoid() {
        let e = Ellipsoid::new(1.25, 1.15, 1.0);
        for &(u, v) in &[(0.3, 0.2), (1.5, -0.7), (-2.0, 1.1), (2.9, 0.0)] {
            let a = jet(&e, u, v).unwrap();
            let n = jet(&Opaque(e), u, v).unwrap();
            let pairs = [(a.ru, n.ru), (a.rv, n.rv), (a.ruu, n.ruu), (a.ruv, n.ruv), (a.rvv, n.rvv)];
            for (x, y) in pairs {
                assert!((x - y).norm() <= 1e-6 * x.norm().max(1.0), "({u},{v}): {x:?} vs {y:?}");
            }
        }
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let q = QuadricPatch::graph(-1.0, 0.0, -1.0, 1.0);
        assert!(matches!(jet(&q, 0.7, 0.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(jet(&Plane, f64::NAN, 0.0), Err(Error::OutOfDomain { .. })));
        // numeric jets need a margin of two steps
        assert!(jet(&Plane, 1.0, 0.0).is_err());
    }

    #[test]
    fn non_finite_evaluation_is_an_error() {
        struct Bad;
        impl ParametricSurface for Bad {
            fn domain(&self) -> Rect {
                Rect::new(-1.0, 1.0, -1.0, 1.0)
            }
            fn eval(&self, u: f64, _v: f64) -> Vec3 {
                Vec3::new(1.0 / (u - 0.25).abs().min(0.0), 0.0, 0.0)
            }
        }
        assert!(jet(&Bad, 0.0, 0.0).is_err());
    }

    #[test]
    fn curve_numeric_jet_matches_analytic() {
        use crate::geometry::surface::Ellipse;
        struct OpaqueCurve(Ellipse);
        impl ParametricCurve for OpaqueCurve {
            fn interval(&self) -> (f64, f64) {
                self.0.interval()
            }
            fn eval(&self, t: f64) -> Vec2 {
                self.0.eval(t)
            }
            fn is_closed(&self) -> bool {
                true
            }
        }
        let e = Ellipse::new(2.0, 1.0);
        for t in [0.0, 0.4, 2.0, 5.5] {
            let a = curve_jet(&e, t).unwrap();
            let n = curve_jet(&OpaqueCurve(e), t).unwrap();
            assert!((a.d1 - n.d1).norm() < 1e-8);
            assert!((a.d2 - n.d2).norm() < 1e-6);
            assert!((a.d3 - n.d3).norm() < 1e-4);
        }
    }
}

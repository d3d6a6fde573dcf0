use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::jet::{CurveJet, Jet2};
use crate::{Vec2, Vec3};

/// Closed parameter rectangle `[u1, u2] x [v1, v2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub u1: f64,
    pub u2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl Rect {
    pub fn new(u1: f64, u2: f64, v1: f64, v2: f64) -> Self {
        Rect { u1, u2, v1, v2 }
    }

    pub fn width(&self) -> f64 {
        self.u2 - self.u1
    }

    pub fn height(&self) -> f64 {
        self.v2 - self.v1
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u1 && u <= self.u2 && v >= self.v1 && v <= self.v2
    }

    /// Distance from `(u, v)` to the nearest side, negative outside.
    pub fn interior_margin(&self, u: f64, v: f64) -> f64 {
        (u - self.u1).min(self.u2 - u).min(v - self.v1).min(self.v2 - v)
    }

    pub fn is_valid(&self) -> bool {
        self.width() > 0.0 && self.height() > 0.0 && [self.u1, self.u2, self.v1, self.v2].iter().all(|x| x.is_finite())
    }
}

/// A map `r : D -> R^3` over a parameter rectangle.
///
/// Implementors that know their derivatives should override
/// [`ParametricSurface::analytic_jet`]; otherwise [`super::jet`] falls back to
/// finite differences.
pub trait ParametricSurface: Send + Sync {
    fn domain(&self) -> Rect;

    fn eval(&self, u: f64, v: f64) -> Vec3;

    fn analytic_jet(&self, _u: f64, _v: f64) -> Option<Jet2> {
        None
    }

    /// Overlapping regular charts covering the same surface, for surfaces
    /// whose own parametrization is singular somewhere (poles of a
    /// longitude/latitude grid). Equilibrium search uses them when present.
    fn atlas(&self) -> Option<Vec<Box<dyn ParametricSurface>>> {
        None
    }
}

impl<S: ParametricSurface + ?Sized> ParametricSurface for &S {
    fn domain(&self) -> Rect {
        (**self).domain()
    }
    fn eval(&self, u: f64, v: f64) -> Vec3 {
        (**self).eval(u, v)
    }
    fn analytic_jet(&self, u: f64, v: f64) -> Option<Jet2> {
        (**self).analytic_jet(u, v)
    }
    fn atlas(&self) -> Option<Vec<Box<dyn ParametricSurface>>> {
        (**self).atlas()
    }
}

impl<S: ParametricSurface + ?Sized> ParametricSurface for Box<S> {
    fn domain(&self) -> Rect {
        (**self).domain()
    }
    fn eval(&self, u: f64, v: f64) -> Vec3 {
        (**self).eval(u, v)
    }
    fn analytic_jet(&self, u: f64, v: f64) -> Option<Jet2> {
        (**self).analytic_jet(u, v)
    }
    fn atlas(&self) -> Option<Vec<Box<dyn ParametricSurface>>> {
        (**self).atlas()
    }
}

/// A curve `r : [t1, t2] -> R^2`.
pub trait ParametricCurve: Send + Sync {
    fn interval(&self) -> (f64, f64);

    fn eval(&self, t: f64) -> Vec2;

    /// First three derivatives, when known in closed form.
    fn analytic_jet(&self, _t: f64) -> Option<CurveJet> {
        None
    }

    /// Whether `r(t1) == r(t2)` and the curve is meant to be traversed
    /// periodically.
    fn is_closed(&self) -> bool {
        false
    }
}

impl<C: ParametricCurve + ?Sized> ParametricCurve for &C {
    fn interval(&self) -> (f64, f64) {
        (**self).interval()
    }
    fn eval(&self, t: f64) -> Vec2 {
        (**self).eval(t)
    }
    fn analytic_jet(&self, t: f64) -> Option<CurveJet> {
        (**self).analytic_jet(t)
    }
    fn is_closed(&self) -> bool {
        (**self).is_closed()
    }
}

impl<C: ParametricCurve + ?Sized> ParametricCurve for Box<C> {
    fn interval(&self) -> (f64, f64) {
        (**self).interval()
    }
    fn eval(&self, t: f64) -> Vec2 {
        (**self).eval(t)
    }
    fn analytic_jet(&self, t: f64) -> Option<CurveJet> {
        (**self).analytic_jet(t)
    }
    fn is_closed(&self) -> bool {
        (**self).is_closed()
    }
}

/// Re-domains a surface without touching its map.
#[derive(Debug, Clone)]
pub struct WithDomain<S> {
    pub inner: S,
    pub domain: Rect,
}

impl<S: ParametricSurface> ParametricSurface for WithDomain<S> {
    fn domain(&self) -> Rect {
        self.domain
    }
    fn eval(&self, u: f64, v: f64) -> Vec3 {
        self.inner.eval(u, v)
    }
    fn analytic_jet(&self, u: f64, v: f64) -> Option<Jet2> {
        self.inner.analytic_jet(u, v)
    }
}

/// Triaxial ellipsoid `x²/a² + y²/b² + z²/c² = 1` in longitude/latitude
/// coordinates: `r(u, v) = (a cos u cos v, b sin u cos v, c sin v)`.
///
/// The parametrization is singular at the poles `(0, 0, ±c)`; use
/// [`Ellipsoid::cube_charts`] when the whole surface has to be searched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Ellipsoid {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Ellipsoid { a, b, c }
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.a * self.b * self.c
    }

    /// Six overlapping charts obtained by projecting the faces of the cube
    /// `[-1, 1]^3` radially onto the ellipsoid. Each axis endpoint sits at the
    /// center `(0, 0)` of one chart.
    pub fn cube_charts(&self) -> Vec<CubeChart> {
        let mut charts = Vec::with_capacity(6);
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                charts.push(CubeChart { semi_axes: [self.a, self.b, self.c], axis, sign, half_width: 1.25 });
            }
        }
        charts
    }

    /// Longitude/latitude sample grid with `n_lon` meridians and `n_lat`
    /// parallels, shifted by fractional offsets, plus both poles.
    pub fn angular_samples(&self, n_lon: usize, n_lat: usize, offset: (f64, f64)) -> Vec<Vec3> {
        let mut pts = Vec::with_capacity(n_lon * n_lat + 2);
        let du = 2.0 * PI / n_lon as f64;
        let dv = PI / n_lat as f64;
        for j in 0..n_lat {
            let v = -PI / 2.0 + (j as f64 + offset.1) * dv;
            for i in 0..n_lon {
                let u = -PI + (i as f64 + offset.0) * du;
                pts.push(self.eval(u, v));
            }
        }
        pts.push(Vec3::new(0.0, 0.0, -self.c));
        pts.push(Vec3::new(0.0, 0.0, self.c));
        pts
    }
}

impl ParametricSurface for Ellipsoid {
    fn domain(&self) -> Rect {
        Rect::new(-PI, PI, -PI / 2.0, PI / 2.0)
    }

    fn eval(&self, u: f64, v: f64) -> Vec3 {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        Vec3::new(self.a * cu * cv, self.b * su * cv, self.c * sv)
    }

    fn analytic_jet(&self, u: f64, v: f64) -> Option<Jet2> {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        let (a, b, c) = (self.a, self.b, self.c);
        Some(Jet2 {
            position: Vec3::new(a * cu * cv, b * su * cv, c * sv),
            ru: Vec3::new(-a * su * cv, b * cu * cv, 0.0),
            rv: Vec3::new(-a * cu * sv, -b * su * sv, c * cv),
            ruu: Vec3::new(-a * cu * cv, -b * su * cv, 0.0),
            ruv: Vec3::new(a * su * sv, -b * cu * sv, 0.0),
            rvv: Vec3::new(-a * cu * cv, -b * su * cv, -c * sv),
        })
    }

    fn atlas(&self) -> Option<Vec<Box<dyn ParametricSurface>>> {
        Some(self.cube_charts().into_iter().map(|c| Box::new(c) as Box<dyn ParametricSurface>).collect())
    }
}

/// One radially projected cube face of an ellipsoid. No closed-form jets;
/// derivatives come from finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeChart {
    pub semi_axes: [f64; 3],
    /// Axis the face is orthogonal to (0 = x, 1 = y, 2 = z).
    pub axis: usize,
    pub sign: f64,
    pub half_width: f64,
}

impl ParametricSurface for CubeChart {
    fn domain(&self) -> Rect {
        let w = self.half_width;
        Rect::new(-w, w, -w, w)
    }

    fn eval(&self, u: f64, v: f64) -> Vec3 {
        // Swap the tangent axes on the negative face so that r_u x r_v points
        // outward on both.
        let (p, q) = if self.sign > 0.0 { (u, v) } else { (v, u) };
        let mut s = Vec3::zeros();
        s[self.axis] = self.sign;
        s[(self.axis + 1) % 3] = p;
        s[(self.axis + 2) % 3] = q;
        let w = s / s.norm();
        Vec3::new(self.semi_axes[0] * w.x, self.semi_axes[1] * w.y, self.semi_axes[2] * w.z)
    }
}

/// Graph-like quadric patch with prescribed fundamental forms at its apex:
///
/// `r(u, v) = (0, 0, rho) + u a + v b + ½ (L u² + 2 M u v + N v²) e_z`
///
/// where the horizontal vectors `a`, `b` have Gram matrix `[[E, F], [F, G]]`.
/// The apex `(0, 0)` is an equilibrium relative to the origin with
/// fundamental quantities exactly `E, F, G, L, M, N` and distance `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadricPatch {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub rho: f64,
    pub domain: Rect,
}

impl QuadricPatch {
    /// Unit-speed orthogonal patch (`E = G = 1`, `F = 0`) over `[-0.5, 0.5]²`.
    pub fn graph(l: f64, m: f64, n: f64, rho: f64) -> Self {
        QuadricPatch { e: 1.0, f: 0.0, g: 1.0, l, m, n, rho, domain: Rect::new(-0.5, 0.5, -0.5, 0.5) }
    }

    pub fn with_domain(mut self, domain: Rect) -> Self {
        self.domain = domain;
        self
    }

    fn tangents(&self) -> (Vec3, Vec3) {
        let se = self.e.sqrt();
        let a = Vec3::new(se, 0.0, 0.0);
        let b = Vec3::new(self.f / se, (self.g - self.f * self.f / self.e).max(0.0).sqrt(), 0.0);
        (a, b)
    }
}

impl ParametricSurface for QuadricPatch {
    fn domain(&self) -> Rect {
        self.domain
    }

    fn eval(&self, u: f64, v: f64) -> Vec3 {
        let (a, b) = self.tangents();
        let h = 0.5 * (self.l * u * u + 2.0 * self.m * u * v + self.n * v * v);
        Vec3::new(0.0, 0.0, self.rho + h) + a * u + b * v
    }

    fn analytic_jet(&self, u: f64, v: f64) -> Option<Jet2> {
        let (a, b) = self.tangents();
        let z = Vec3::z();
        Some(Jet2 {
            position: self.eval(u, v),
            ru: a + z * (self.l * u + self.m * v),
            rv: b + z * (self.m * u + self.n * v),
            ruu: z * self.l,
            ruv: z * self.m,
            rvv: z * self.n,
        })
    }
}

/// Ellipse `(a cos t, b sin t)`, `t ∈ [0, 2π]`, traversed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub a: f64,
    pub b: f64,
}

impl Ellipse {
    pub fn new(a: f64, b: f64) -> Self {
        Ellipse { a, b }
    }

    pub fn circle(r: f64) -> Self {
        Ellipse { a: r, b: r }
    }
}

impl ParametricCurve for Ellipse {
    fn interval(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }

    fn eval(&self, t: f64) -> Vec2 {
        Vec2::new(self.a * t.cos(), self.b * t.sin())
    }

    fn analytic_jet(&self, t: f64) -> Option<CurveJet> {
        let (s, c) = t.sin_cos();
        let (a, b) = (self.a, self.b);
        Some(CurveJet {
            position: Vec2::new(a * c, b * s),
            d1: Vec2::new(-a * s, b * c),
            d2: Vec2::new(-a * c, -b * s),
            d3: Vec2::new(a * s, -b * c),
        })
    }

    fn is_closed(&self) -> bool {
        true
    }
}

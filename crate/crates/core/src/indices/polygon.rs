use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// Open half-plane `{x : ⟨normal, x⟩ < offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: Vec2,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Vec2, offset: f64) -> Self {
        HalfPlane { normal, offset }
    }

    /// `{x : lo < ⟨a, x⟩ + c < hi}` as two half-planes.
    pub fn band(a: Vec2, c: f64, lo: f64, hi: f64) -> [HalfPlane; 2] {
        [HalfPlane::new(-a, c - lo), HalfPlane::new(a, hi - c)]
    }

    pub fn slack(&self, x: Vec2) -> f64 {
        self.offset - self.normal.dot(&x)
    }
}

/// Affine map `x -> m x + t` of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine2 {
    pub m: Matrix2<f64>,
    pub t: Vec2,
}

impl Affine2 {
    pub fn new(m: Matrix2<f64>, t: Vec2) -> Self {
        Affine2 { m, t }
    }

    pub fn apply(&self, x: Vec2) -> Vec2 {
        self.m * x + self.t
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    pub fn inverse(&self) -> Result<Affine2> {
        let inv = self.m.try_inverse().filter(|i| i.iter().all(|c| c.is_finite())).ok_or_else(|| Error::Degenerate("singular affine map".into()))?;
        Ok(Affine2 { m: inv, t: -(inv * self.t) })
    }

    /// Pulls back the half-plane `⟨n, y⟩ < c` in the image to the domain.
    pub fn pull_back(&self, h: &HalfPlane) -> HalfPlane {
        HalfPlane::new(self.m.transpose() * h.normal, h.offset - h.normal.dot(&self.t))
    }
}

/// Lattice points of a translated region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeCount {
    /// Points strictly inside.
    pub count: usize,
    /// Points within tolerance of the boundary (not counted).
    pub boundary_hits: usize,
}

/// Bounded convex polygon with counterclockwise vertices. Empty and
/// degenerate (segment or point) polygons are allowed and have zero area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    /// Polygon from vertices already in convex position; the order is fixed
    /// up to counterclockwise.
    pub fn new(mut vertices: Vec<Vec2>) -> Self {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        ConvexPolygon { vertices }
    }

    pub fn empty() -> Self {
        ConvexPolygon { vertices: Vec::new() }
    }

    /// Axis-parallel rectangle `(x0, x1) x (y0, y1)`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        ConvexPolygon::new(vec![Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(x0, y1)])
    }

    /// Closure of the intersection of the half-planes, by vertex
    /// enumeration. Errors if the intersection is unbounded.
    pub fn from_half_planes(planes: &[HalfPlane]) -> Result<Self> {
        let scale = planes.iter().map(|h| h.offset.abs() / h.normal.norm()).fold(0.0, f64::max).max(1e-300);
        let tol = 1e-11 * scale;
        let mut pts: Vec<Vec2> = Vec::new();
        for (a, ha) in planes.iter().enumerate() {
            for hb in &planes[a + 1..] {
                let m = Matrix2::new(ha.normal.x, ha.normal.y, hb.normal.x, hb.normal.y);
                let det = m.determinant();
                if det.abs() <= 1e-14 * ha.normal.norm() * hb.normal.norm() {
                    continue;
                }
                let x = Vec2::new(ha.offset * hb.normal.y - hb.offset * ha.normal.y, ha.normal.x * hb.offset - hb.normal.x * ha.offset) / det;
                if planes.iter().all(|h| h.slack(x) >= -tol * h.normal.norm()) && !pts.iter().any(|p| (p - x).norm() <= tol) {
                    pts.push(x);
                }
            }
        }
        if pts.is_empty() {
            return Ok(ConvexPolygon::empty());
        }
        // unbounded if some direction stays feasible forever
        let c = pts.iter().sum::<Vec2>() / pts.len() as f64;
        for k in 0..64 {
            let ang = k as f64 * std::f64::consts::TAU / 64.0;
            let d = Vec2::new(ang.cos(), ang.sin());
            if planes.iter().all(|h| h.normal.dot(&d) <= 0.0) {
                return Err(Error::InvalidInput("half-planes do not bound a region".into()));
            }
        }
        pts.sort_by(|a, b| (a.y - c.y).atan2(a.x - c.x).total_cmp(&(b.y - c.y).atan2(b.x - c.x)));
        Ok(ConvexPolygon { vertices: pts })
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        if n < 2 {
            return 0.0;
        }
        (0..n).map(|k| (self.vertices[(k + 1) % n] - self.vertices[k]).norm()).sum()
    }

    pub fn centroid(&self) -> Option<Vec2> {
        let a = signed_area(&self.vertices);
        if a == 0.0 {
            return None;
        }
        let n = self.vertices.len();
        let mut c = Vec2::zeros();
        for k in 0..n {
            let (p, q) = (self.vertices[k], self.vertices[(k + 1) % n]);
            c += (p + q) * (p.x * q.y - q.x * p.y);
        }
        Some(c / (6.0 * a))
    }

    /// `(x_min, x_max, y_min, y_max)`.
    pub fn bbox(&self) -> Option<(f64, f64, f64, f64)> {
        let first = self.vertices.first()?;
        Some(self.vertices.iter().fold((first.x, first.x, first.y, first.y), |(a, b, c, d), p| (a.min(p.x), b.max(p.x), c.min(p.y), d.max(p.y))))
    }

    /// Image under an affine map (orientation restored to counterclockwise).
    pub fn map(&self, f: &Affine2) -> ConvexPolygon {
        ConvexPolygon::new(self.vertices.iter().map(|&v| f.apply(v)).collect())
    }

    pub fn translate(&self, t: Vec2) -> ConvexPolygon {
        ConvexPolygon { vertices: self.vertices.iter().map(|v| v + t).collect() }
    }

    /// Signed distance-like slack of `x` against the nearest edge: positive
    /// strictly inside.
    pub fn interior_slack(&self, x: Vec2) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return f64::NEG_INFINITY;
        }
        (0..n)
            .map(|k| {
                let (p, q) = (self.vertices[k], self.vertices[(k + 1) % n]);
                let e = q - p;
                (e.x * (x.y - p.y) - e.y * (x.x - p.x)) / e.norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Integer points strictly inside `translation + self`. Points within
    /// `tol` (absolute, in lattice units) of the boundary are reported as
    /// boundary hits and not counted.
    pub fn lattice_points(&self, translation: Vec2, tol: f64) -> LatticeCount {
        let mut out = LatticeCount { count: 0, boundary_hits: 0 };
        let Some((x0, x1, y0, y1)) = self.bbox() else { return out };
        if self.vertices.len() < 3 {
            return out;
        }
        let moved = self.translate(translation);
        let (x0, x1, y0, y1) = (x0 + translation.x, x1 + translation.x, y0 + translation.y, y1 + translation.y);
        for j in (y0 - tol).ceil() as i64..=(y1 + tol).floor() as i64 {
            for i in (x0 - tol).ceil() as i64..=(x1 + tol).floor() as i64 {
                let s = moved.interior_slack(Vec2::new(i as f64, j as f64));
                if s > tol {
                    out.count += 1;
                } else if s >= -tol {
                    out.boundary_hits += 1;
                }
            }
        }
        out
    }

    /// Whether the polygon is centrally symmetric about its centroid.
    pub fn is_centrally_symmetric(&self, tol: f64) -> bool {
        let n = self.vertices.len();
        if n % 2 != 0 {
            return false;
        }
        let Some(c) = self.centroid() else { return n == 0 };
        (0..n / 2).all(|k| (self.vertices[k] + self.vertices[k + n / 2] - 2.0 * c).norm() <= tol)
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|k| {
            let (a, b, c) = (self.vertices[k], self.vertices[(k + 1) % n], self.vertices[(k + 2) % n]);
            let e = b - a;
            let f = c - b;
            e.x * f.y - e.y * f.x >= -1e-12 * e.norm() * f.norm()
        })
    }
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n).map(|k| v[k].x * v[(k + 1) % n].y - v[(k + 1) % n].x * v[k].y).sum::<f64>()
}

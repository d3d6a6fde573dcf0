//! Lattice regions of a flock.
//!
//! Near a smooth equilibrium at parameter `(0, 0)`, whether a cell of the
//! grid patch carries a discrete equilibrium depends, to leading order in
//! the grid step, only on the real grid index `w = (i, j)` of its anchor
//! vertex, through finitely many affine inequalities in `w`. Each family of
//! cells therefore owns a convex region of the index plane, and the cells of
//! the family that carry equilibria are exactly the grid indices (a
//! translate of `Z²`) inside it. Region areas are the expected counts.
//!
//! All regions come from one expansion. With
//! `B = [[E, λF], [λF, λ²G]]`, `Q = [[L, λM], [λM, λ²N]]`, `H = B + ρQ`,
//! and step vectors `δ` in index units,
//! `⟨p_w, p_{w+δ} - p_w⟩ ≈ Δu² A_w(δ)` where
//! `A_w(δ) = ⟨Hδ, w⟩ + ½ρ Q(δ, δ)`.
//!
//! Each region is also reported in the `(X, Y)` coordinates customary for
//! its family: the vertex and face coordinates of the classical proof, and
//! for edges `X_e = -A_w(δ)` (position of the foot along the edge) and
//! `Y_e` (drop of the second opposite vertex).

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::polygon::{Affine2, ConvexPolygon, HalfPlane, LatticeCount};
use crate::discretize::Diagonal;
use crate::geometry::FundamentalForms;
use crate::{EquilibriumKind, Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Vertex,
    /// First and second triangle of each grid quad.
    Face1,
    Face2,
    /// Edges `[w, w + (1, 0)]`, `[w, w + (0, 1)]` and the quad diagonal.
    EdgeH,
    EdgeV,
    EdgeD,
}

impl Family {
    pub fn kind(self) -> EquilibriumKind {
        match self {
            Family::Vertex => EquilibriumKind::Unstable,
            Family::Face1 | Family::Face2 => EquilibriumKind::Stable,
            _ => EquilibriumKind::Saddle,
        }
    }
}

/// One family's region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub family: Family,
    /// Region in the family's `(X, Y)` plane.
    pub polygon: ConvexPolygon,
    /// Grid index of the cell's anchor vertex to `(X, Y)`.
    pub transform: Affine2,
    /// `|det|` of the transform: area of the image of a unit lattice cell.
    pub fundamental_area: f64,
    /// Region in the grid-index plane (preimage of `polygon`).
    pub index_polygon: ConvexPolygon,
}

impl Region {
    fn new(family: Family, index_polygon: ConvexPolygon, transform: Affine2) -> Result<Region> {
        let fundamental_area = transform.det().abs();
        if !(fundamental_area > 0.0) || !fundamental_area.is_finite() {
            return Err(Error::Degenerate(format!("{family:?} transform is singular")));
        }
        Ok(Region { family, polygon: index_polygon.map(&transform), transform, fundamental_area, index_polygon })
    }

    /// Expected number of cells of the family carrying an equilibrium.
    pub fn expected_count(&self) -> f64 {
        self.index_polygon.area()
    }

    /// Cells carrying an equilibrium when the grid indices of the vertices
    /// are `offset + Z²`.
    pub fn count(&self, offset: Vec2) -> LatticeCount {
        self.index_polygon.lattice_points(-offset, 1e-9)
    }
}

/// Regions of all cell families for one choice of quad diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRegions {
    pub diagonal: Diagonal,
    /// Centrally symmetric hexagon `P` of unstable vertices.
    pub hexagon: Region,
    /// Triangles `T1`, `T2` of the two faces of a quad.
    pub triangles: [Region; 2],
    /// Rectangles `R_h`, `R_v`, `R_d` of horizontal, vertical and diagonal
    /// edges.
    pub rectangles: [Region; 3],
}

/// Predicted census of a flock for a given grid translate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedCounts {
    pub unstable: usize,
    pub saddle: usize,
    pub stable: usize,
    /// Lattice points within rounding of a region boundary.
    pub boundary_hits: usize,
}

impl FamilyRegions {
    pub fn regions(&self) -> impl Iterator<Item = &Region> {
        std::iter::once(&self.hexagon).chain(self.triangles.iter()).chain(self.rectangles.iter())
    }

    /// `(U*, S*, N*)` as region areas.
    pub fn expected(&self) -> (f64, f64, f64) {
        let s = self.triangles.iter().map(Region::expected_count).sum();
        let n = self.rectangles.iter().map(Region::expected_count).sum();
        (self.hexagon.expected_count(), s, n)
    }

    /// Lattice counts for vertex grid indices `offset + Z²`.
    pub fn predicted_counts(&self, offset: Vec2) -> PredictedCounts {
        let mut out = PredictedCounts { unstable: 0, saddle: 0, stable: 0, boundary_hits: 0 };
        for r in self.regions() {
            let c = r.count(offset);
            out.boundary_hits += c.boundary_hits;
            match r.family.kind() {
                EquilibriumKind::Unstable => out.unstable += c.count,
                EquilibriumKind::Saddle => out.saddle += c.count,
                EquilibriumKind::Stable => out.stable += c.count,
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSet {
    pub rho: f64,
    pub lambda: f64,
    pub forms: FundamentalForms,
    pub plus: FamilyRegions,
    pub minus: FamilyRegions,
    /// Diagonal selected by the sign of `M` (`E+` for `M >= 0`).
    pub preferred: Diagonal,
    /// Mesh ratio outside the admissible range: the areas are lower bounds
    /// only.
    pub lower_bound_only: bool,
}

impl RegionSet {
    pub fn family(&self, d: Diagonal) -> &FamilyRegions {
        match d {
            Diagonal::Plus => &self.plus,
            Diagonal::Minus => &self.minus,
        }
    }

    pub fn preferred_family(&self) -> &FamilyRegions {
        self.family(self.preferred)
    }
}

struct Model {
    b: Matrix2<f64>,
    q: Matrix2<f64>,
    h: Matrix2<f64>,
    rho: f64,
}

impl Model {
    fn bil(m: &Matrix2<f64>, c: Vec2, d: Vec2) -> f64 {
        c.dot(&(m * d))
    }

    /// `A_w(δ) = ⟨Hδ, w⟩ + ½ρQ(δ, δ)` as `(gradient, constant)`.
    fn a(&self, delta: Vec2) -> (Vec2, f64) {
        (self.h * delta, 0.5 * self.rho * Model::bil(&self.q, delta, delta))
    }
}

fn v(i: f64, j: f64) -> Vec2 {
    Vec2::new(i, j)
}

fn vertex_region(model: &Model, d: Diagonal) -> Result<Region> {
    let diag = match d {
        Diagonal::Plus => v(1.0, 1.0),
        Diagonal::Minus => v(1.0, -1.0),
    };
    let planes: Vec<HalfPlane> = [v(1.0, 0.0), v(0.0, 1.0), diag]
        .into_iter()
        .flat_map(|s| [s, -s])
        .map(|delta| {
            let (g, c) = model.a(delta);
            HalfPlane::new(g, -c)
        })
        .collect();
    let poly = ConvexPolygon::from_half_planes(&planes)?;
    Region::new(Family::Vertex, poly, Affine2::new(model.h, Vec2::zeros()))
}

/// Edge from `w` to `w + δ`; `c1`, `c2` are the opposite vertices of its two
/// faces with `c1 = δ - c2`.
fn edge_region(model: &Model, family: Family, delta: Vec2, c1: Vec2, c2: Vec2) -> Result<Region> {
    debug_assert_eq!(c1, delta - c2);
    let bee = Model::bil(&model.b, delta, delta);
    let beta = Model::bil(&model.b, c2, delta) / bee;
    let (ga, ca) = model.a(delta);
    let (gc, cc) = model.a(c2);
    // X_e = -A(δ), Y_e = -(A(c2) - β A(δ))
    let m = Matrix2::new(-ga.x, -ga.y, -(gc.x - beta * ga.x), -(gc.y - beta * ga.y));
    let t = v(-ca, -(cc - beta * ca));
    let transform = Affine2::new(m, t);
    let height = model.rho * Model::bil(&model.q, c1, c2);
    let poly = if height > 0.0 { ConvexPolygon::rectangle(0.0, bee, 0.0, height) } else { ConvexPolygon::empty() };
    let inv = transform.inverse()?;
    let region = Region::new(family, poly.map(&inv), transform)?;
    Ok(region)
}

/// Face with vertices `w + a0, w + a1, w + a2`: the foot of the
/// perpendicular is `p0 + s (p1 - p0) + t (p2 - p0)` with `(s, t)` solving
/// the Gram system, and lies inside for `s, t > 0`, `s + t < 1`.
fn face_region(model: &Model, family: Family, a0: Vec2, a1: Vec2, a2: Vec2, xy: &Affine2) -> Result<Region> {
    let (d1, d2) = (a1 - a0, a2 - a0);
    let gram = Matrix2::new(Model::bil(&model.b, d1, d1), Model::bil(&model.b, d1, d2), Model::bil(&model.b, d2, d1), Model::bil(&model.b, d2, d2));
    let gi = gram.try_inverse().ok_or_else(|| Error::Degenerate("singular face Gram matrix".into()))?;
    let (g1, c1) = model.a(d1);
    let (g2, c2) = model.a(d2);
    let rows = Matrix2::new(g1.x, g1.y, g2.x, g2.y);
    let consts = v(g1.dot(&a0) + c1, g2.dot(&a0) + c2);
    let st = Affine2::new(-(gi * rows), -(gi * consts));
    let unit = [HalfPlane::new(v(-1.0, 0.0), 0.0), HalfPlane::new(v(0.0, -1.0), 0.0), HalfPlane::new(v(1.0, 1.0), 1.0)];
    let planes: Vec<HalfPlane> = unit.iter().map(|h| st.pull_back(h)).collect();
    let poly = ConvexPolygon::from_half_planes(&planes)?;
    Region::new(family, poly, *xy)
}

/// Coordinates of the face families: rows of the classical `(X, Y)`.
fn face_transform(f: &FundamentalForms, rho: f64, lambda: f64) -> Affine2 {
    let FundamentalForms { e, f: ff, g, l, m, n, .. } = *f;
    let det = e * g - ff * ff;
    let (l1, l2, l3) = (lambda, lambda * lambda, lambda * lambda * lambda);
    Affine2::new(
        Matrix2::new(l1 * rho * (l * ff - m * e), l2 * (rho * (m * ff - n * e) - det), l2 * (rho * (l * g - m * ff) + det), l3 * rho * (m * g - n * ff)),
        v(0.5 * l1 * rho * l * ff - 0.5 * l2 * rho * n * e, 0.5 * l2 * rho * l * g - 0.5 * l3 * rho * n * ff),
    )
}

/// Regions for one diagonal choice.
pub fn predicted_regions_for(f: &FundamentalForms, rho: f64, lambda: f64, diagonal: Diagonal) -> Result<FamilyRegions> {
    if !(rho > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidInput("rho and lambda must be positive".into()));
    }
    if !(f.metric_det() > 0.0) {
        return Err(Error::Degenerate("first fundamental form is not positive definite".into()));
    }
    let b = Matrix2::new(f.e, lambda * f.f, lambda * f.f, lambda * lambda * f.g);
    let q = Matrix2::new(f.l, lambda * f.m, lambda * f.m, lambda * lambda * f.n);
    let model = Model { b, q, h: b + q * rho, rho };
    let xy = face_transform(f, rho, lambda);
    let (faces, edges) = match diagonal {
        Diagonal::Plus => (
            [(v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0)), (v(1.0, 1.0), v(0.0, 1.0), v(0.0, 0.0))],
            [(v(1.0, 0.0), v(1.0, 1.0), v(0.0, -1.0)), (v(0.0, 1.0), v(1.0, 1.0), v(-1.0, 0.0)), (v(1.0, 1.0), v(1.0, 0.0), v(0.0, 1.0))],
        ),
        Diagonal::Minus => (
            [(v(0.0, 0.0), v(1.0, 0.0), v(0.0, 1.0)), (v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0))],
            // the diagonal [p_i+1j, p_ij+1] is anchored at its first vertex
            [(v(1.0, 0.0), v(0.0, 1.0), v(1.0, -1.0)), (v(0.0, 1.0), v(1.0, 0.0), v(-1.0, 1.0)), (v(-1.0, 1.0), v(-1.0, 0.0), v(0.0, 1.0))],
        ),
    };
    let triangles = [
        face_region(&model, Family::Face1, faces[0].0, faces[0].1, faces[0].2, &xy)?,
        face_region(&model, Family::Face2, faces[1].0, faces[1].1, faces[1].2, &xy)?,
    ];
    let fams = [Family::EdgeH, Family::EdgeV, Family::EdgeD];
    let rectangles = [
        edge_region(&model, fams[0], edges[0].0, edges[0].1, edges[0].2)?,
        edge_region(&model, fams[1], edges[1].0, edges[1].1, edges[1].2)?,
        edge_region(&model, fams[2], edges[2].0, edges[2].1, edges[2].2)?,
    ];
    Ok(FamilyRegions { diagonal, hexagon: vertex_region(&model, diagonal)?, triangles, rectangles })
}

/// Regions for both diagonal choices; the one matching the sign of `M` is
/// marked preferred.
pub fn predicted_regions(f: &FundamentalForms, rho: f64, lambda: f64) -> Result<RegionSet> {
    let plus = predicted_regions_for(f, rho, lambda, Diagonal::Plus)?;
    let minus = predicted_regions_for(f, rho, lambda, Diagonal::Minus)?;
    Ok(RegionSet {
        rho,
        lambda,
        forms: *f,
        plus,
        minus,
        preferred: if f.m >= 0.0 { Diagonal::Plus } else { Diagonal::Minus },
        lower_bound_only: !super::mesh_ratio_condition(f, lambda),
    })
}
